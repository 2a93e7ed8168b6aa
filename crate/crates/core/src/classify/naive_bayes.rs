//! Gaussian naive Bayes with Laplace-smoothed priors.

use super::{ClassifierError, Prediction};
use crate::stroke::SkillClass;
use crate::windowing::Dataset;

pub const VARIANCE_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gaussian {
    pub mean: f64,
    pub variance: f64,
}

impl Gaussian {
    pub fn log_density(&self, x: f64) -> f64 {
        let d = x - self.mean;
        -0.5 * ((std::f64::consts::TAU * self.variance).ln() + d * d / self.variance)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NaiveBayesModel {
    pub classes: Vec<SkillClass>,
    pub class_counts: Vec<usize>,
    /// `(count + 1) / (N + K)` over the class alphabet.
    pub priors: Vec<f64>,
    /// Per-class attribute Gaussians; `None` for classes with no training instances.
    pub attributes: Vec<Option<Vec<Gaussian>>>,
}

pub fn fit_naive_bayes(ds: &Dataset) -> Result<NaiveBayesModel, ClassifierError> {
    let rows: Vec<usize> = (0..ds.len()).collect();
    fit_rows(ds, &ds.label_indices(), &rows)
}

/// Fits on the instances at `rows` only.
pub(crate) fn fit_rows(ds: &Dataset, labels: &[usize], rows: &[usize]) -> Result<NaiveBayesModel, ClassifierError> {
    if rows.is_empty() {
        return Err(ClassifierError::EmptyDataset);
    }
    let k = ds.classes().len();
    let d = ds.n_attributes();
    let mut counts = vec![0usize; k];
    let mut sums = vec![vec![0.0; d]; k];
    for &r in rows {
        let c = labels[r];
        counts[c] += 1;
        for (s, v) in sums[c].iter_mut().zip(&ds.instances()[r].features) {
            *s += v;
        }
    }
    let means: Vec<Vec<f64>> = sums
        .iter()
        .zip(&counts)
        .map(|(s, &n)| s.iter().map(|v| if n > 0 { v / n as f64 } else { 0.0 }).collect())
        .collect();
    let mut sq = vec![vec![0.0; d]; k];
    for &r in rows {
        let c = labels[r];
        for ((acc, v), m) in sq[c].iter_mut().zip(&ds.instances()[r].features).zip(&means[c]) {
            *acc += (v - m) * (v - m);
        }
    }
    let n = rows.len() as f64;
    let priors = counts.iter().map(|&c| (c as f64 + 1.0) / (n + k as f64)).collect();
    let attributes = (0..k)
        .map(|c| {
            (counts[c] > 0).then(|| {
                means[c]
                    .iter()
                    .zip(&sq[c])
                    .map(|(&mean, &ss)| {
                        let var = if counts[c] > 1 { ss / (counts[c] - 1) as f64 } else { 0.0 };
                        Gaussian { mean, variance: var.max(VARIANCE_FLOOR) }
                    })
                    .collect()
            })
        })
        .collect();
    Ok(NaiveBayesModel { classes: ds.classes().to_vec(), class_counts: counts, priors, attributes })
}

impl NaiveBayesModel {
    /// Unnormalized log posterior per class; `-inf` for classes never seen.
    pub fn log_joint(&self, features: &[f64]) -> Vec<f64> {
        self.priors
            .iter()
            .zip(&self.attributes)
            .map(|(prior, attrs)| match attrs {
                Some(gs) => prior.ln() + gs.iter().zip(features).map(|(g, &x)| g.log_density(x)).sum::<f64>(),
                None => f64::NEG_INFINITY,
            })
            .collect()
    }

    pub fn predict(&self, features: &[f64]) -> Result<Prediction, ClassifierError> {
        let n_attr = self.attributes.iter().flatten().next().map_or(0, Vec::len);
        if features.len() != n_attr {
            return Err(ClassifierError::Schema(format!("expected {n_attr} features, got {}", features.len())));
        }
        Ok(self.predict_unchecked(features))
    }

    pub(crate) fn predict_unchecked(&self, features: &[f64]) -> Prediction {
        let distribution = normalize_log(&self.log_joint(features));
        let best = argmax(&distribution);
        Prediction { class: self.classes[best], distribution }
    }

    pub(crate) fn predict_index(&self, features: &[f64]) -> usize {
        argmax(&self.log_joint(features))
    }
}

/// Softmax of log scores via log-sum-exp.
pub(crate) fn normalize_log(log_scores: &[f64]) -> Vec<f64> {
    let max = log_scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> =
        log_scores.iter().map(|&s| if s == f64::NEG_INFINITY { 0.0 } else { (s - max).exp() }).collect();
    let total: f64 = exps.iter().sum();
    exps.iter().map(|e| e / total).collect()
}

/// First index of the maximum.
fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}
