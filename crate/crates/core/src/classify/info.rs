//! Entropy and two-way split scoring shared by the tree learners.

use super::ClassifierError;
use crate::windowing::Dataset;

/// Shannon entropy in bits, with `0 * log 0 = 0`.
pub fn entropy(class_counts: &[usize]) -> Result<f64, ClassifierError> {
    let total: usize = class_counts.iter().sum();
    if total == 0 {
        return Err(ClassifierError::EmptyPartition);
    }
    Ok(entropy_of(class_counts, total))
}

pub(crate) fn entropy_of(counts: &[usize], total: usize) -> f64 {
    let n = total as f64;
    -counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            p * p.log2()
        })
        .sum::<f64>()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitCandidate {
    pub attribute: usize,
    pub threshold: f64,
    pub info_gain: f64,
    pub split_info: f64,
    /// `None` when the split information is zero.
    pub gain_ratio: Option<f64>,
}

/// Scores a binary partition given the parent and left-branch class counts.
pub(crate) fn score_partition(attribute: usize, threshold: f64, parent: &[usize], left: &[usize]) -> SplitCandidate {
    let n: usize = parent.iter().sum();
    let n_left: usize = left.iter().sum();
    let n_right = n - n_left;
    let right: Vec<usize> = parent.iter().zip(left).map(|(p, l)| p - l).collect();
    let weighted = (n_left as f64 * entropy_of(left, n_left) + n_right as f64 * entropy_of(&right, n_right)) / n as f64;
    let info_gain = entropy_of(parent, n) - weighted;
    let split_info = entropy_of(&[n_left, n_right], n);
    let gain_ratio = (split_info > 0.0).then(|| info_gain / split_info);
    SplitCandidate { attribute, threshold, info_gain, split_info, gain_ratio }
}

/// Information gain, split information and gain ratio of the partition
/// `value <= threshold` / `value > threshold` over the whole dataset.
pub fn evaluate_split(ds: &Dataset, attribute: usize, threshold: f64) -> Result<SplitCandidate, ClassifierError> {
    if attribute >= ds.n_attributes() {
        return Err(ClassifierError::Schema(format!(
            "attribute {attribute} out of range for {} attributes",
            ds.n_attributes()
        )));
    }
    if ds.is_empty() {
        return Err(ClassifierError::EmptyDataset);
    }
    let labels = ds.label_indices();
    let mut parent = vec![0; ds.classes().len()];
    let mut left = vec![0; ds.classes().len()];
    for (inst, &y) in ds.instances().iter().zip(&labels) {
        parent[y] += 1;
        if inst.features[attribute] <= threshold {
            left[y] += 1;
        }
    }
    let n_left: usize = left.iter().sum();
    if n_left == 0 || n_left == ds.len() {
        return Err(ClassifierError::DegenerateSplit { attribute, threshold });
    }
    Ok(score_partition(attribute, threshold, &parent, &left))
}

/// Threshold strictly separating two consecutive distinct values `lo < hi`:
/// their midpoint, or `lo` when the midpoint rounds onto `hi`.
pub(crate) fn midpoint(lo: f64, hi: f64) -> f64 {
    let mid = lo / 2.0 + hi / 2.0;
    if mid >= lo && mid < hi {
        mid
    } else {
        lo
    }
}
