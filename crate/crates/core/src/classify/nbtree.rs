//! Naive-Bayes tree: a binary decision tree whose leaves hold Gaussian
//! naive-Bayes models.
//!
//! A node is split only when the instance-weighted cross-validated accuracy
//! of naive Bayes on the two children beats the node's own cross-validated
//! naive-Bayes accuracy by more than `min_split_gain` relative error
//! reduction, and the node holds at least `min_node` instances. Each
//! attribute contributes a handful of candidate thresholds: the midpoint with
//! the highest information gain plus the midpoints nearest its quartiles.
//! The candidate with the best child accuracy wins, lowest attribute index
//! then lowest threshold on ties.

use rand::seq::SliceRandom;

use super::info::{midpoint, score_partition};
use super::naive_bayes::{fit_rows, NaiveBayesModel};
use super::{ClassifierError, Prediction};
use crate::rng::{mix_seed, stream};
use crate::stroke::SkillClass;
use crate::windowing::Dataset;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NBTreeParams {
    pub cv_folds: usize,
    /// Required relative error reduction for a split.
    pub min_split_gain: f64,
    pub min_node: usize,
    pub seed: u64,
}

impl Default for NBTreeParams {
    fn default() -> Self {
        NBTreeParams { cv_folds: 5, min_split_gain: 0.05, min_node: 30, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum NBNode {
    Internal { attribute: usize, threshold: f64, left: Box<NBNode>, right: Box<NBNode> },
    Leaf(NaiveBayesModel),
}

impl NBNode {
    pub fn leaf_count(&self) -> usize {
        match self {
            NBNode::Leaf(_) => 1,
            NBNode::Internal { left, right, .. } => left.leaf_count() + right.leaf_count(),
        }
    }

    pub fn route(&self, features: &[f64]) -> &NaiveBayesModel {
        let mut node = self;
        loop {
            match node {
                NBNode::Leaf(model) => return model,
                NBNode::Internal { attribute, threshold, left, right } => {
                    node = if features[*attribute] <= *threshold { left } else { right };
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NBTree {
    pub schema: Vec<String>,
    pub classes: Vec<SkillClass>,
    pub root: NBNode,
}

impl NBTree {
    pub fn predict(&self, features: &[f64]) -> Result<Prediction, ClassifierError> {
        super::check_features(&self.schema, features)?;
        Ok(self.root.route(features).predict_unchecked(features))
    }
}

pub fn train_nbtree(ds: &Dataset, params: &NBTreeParams) -> Result<NBTree, ClassifierError> {
    if ds.is_empty() {
        return Err(ClassifierError::EmptyDataset);
    }
    if params.cv_folds < 2 {
        return Err(ClassifierError::InvalidParams("cv_folds must be at least 2".into()));
    }
    let grower = Grower { ds, labels: ds.label_indices(), params: *params };
    let rows: Vec<usize> = (0..ds.len()).collect();
    let root = grower.grow(&rows, params.seed)?;
    Ok(NBTree { schema: ds.schema().to_vec(), classes: ds.classes().to_vec(), root })
}

struct Grower<'a> {
    ds: &'a Dataset,
    labels: Vec<usize>,
    params: NBTreeParams,
}

impl Grower<'_> {
    fn grow(&self, rows: &[usize], seed: u64) -> Result<NBNode, ClassifierError> {
        let leaf = || fit_rows(self.ds, &self.labels, rows).map(NBNode::Leaf);
        let first = self.labels[rows[0]];
        if rows.len() < self.params.min_node || rows.iter().all(|&r| self.labels[r] == first) {
            return leaf();
        }
        let node_error = 1.0 - cv_accuracy(self.ds, &self.labels, rows, self.params.cv_folds, mix_seed(seed, 0));
        if node_error <= 0.0 {
            return leaf();
        }
        let Some((attribute, threshold, split_accuracy)) = self.best_split(rows, seed) else {
            return leaf();
        };
        let reduction = (node_error - (1.0 - split_accuracy)) / node_error;
        if reduction <= self.params.min_split_gain {
            return leaf();
        }
        let (l, r): (Vec<usize>, Vec<usize>) =
            rows.iter().partition(|&&i| self.ds.instances()[i].features[attribute] <= threshold);
        Ok(NBNode::Internal {
            attribute,
            threshold,
            left: Box::new(self.grow(&l, mix_seed(seed, 1))?),
            right: Box::new(self.grow(&r, mix_seed(seed, 2))?),
        })
    }

    /// Best (attribute, threshold, weighted child CV accuracy).
    fn best_split(&self, rows: &[usize], seed: u64) -> Option<(usize, f64, f64)> {
        let mut best: Option<(usize, f64, f64)> = None;
        let folds = self.params.cv_folds;
        for attribute in 0..self.ds.n_attributes() {
            for threshold in self.candidate_thresholds(rows, attribute) {
                let (l, r): (Vec<usize>, Vec<usize>) =
                    rows.iter().partition(|&&i| self.ds.instances()[i].features[attribute] <= threshold);
                let acc_l = cv_accuracy(self.ds, &self.labels, &l, folds, mix_seed(seed, 1));
                let acc_r = cv_accuracy(self.ds, &self.labels, &r, folds, mix_seed(seed, 2));
                let accuracy = (l.len() as f64 * acc_l + r.len() as f64 * acc_r) / rows.len() as f64;
                if best.is_none_or(|b| accuracy > b.2) {
                    best = Some((attribute, threshold, accuracy));
                }
            }
        }
        best
    }

    /// Ascending, de-duplicated thresholds leaving at least `cv_folds`
    /// instances on each side: the highest-gain midpoint (lowest on ties) and
    /// the admissible midpoints closest to the 25%, 50% and 75% ranks.
    fn candidate_thresholds(&self, rows: &[usize], attribute: usize) -> Vec<f64> {
        let k = self.ds.classes().len();
        let mut parent = vec![0; k];
        let mut sorted: Vec<(f64, usize)> = rows
            .iter()
            .map(|&r| {
                parent[self.labels[r]] += 1;
                (self.ds.instances()[r].features[attribute], self.labels[r])
            })
            .collect();
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
        let n = sorted.len();
        let min_side = self.params.cv_folds;
        let mut left = vec![0; k];
        // (left size, threshold, gain) of every admissible cut
        let mut cuts: Vec<(usize, f64, f64)> = Vec::new();
        for i in 0..n.saturating_sub(1) {
            left[sorted[i].1] += 1;
            let n_left = i + 1;
            if sorted[i].0 == sorted[i + 1].0 || n_left < min_side || n - n_left < min_side {
                continue;
            }
            let threshold = midpoint(sorted[i].0, sorted[i + 1].0);
            cuts.push((n_left, threshold, score_partition(attribute, threshold, &parent, &left).info_gain));
        }
        if cuts.is_empty() {
            return Vec::new();
        }
        let mut picked = Vec::with_capacity(4);
        let top = cuts.iter().fold(cuts[0], |b, c| if c.2 > b.2 { *c } else { b });
        picked.push(top.1);
        for q in [1, 2, 3] {
            let target = n * q / 4;
            let nearest = cuts.iter().min_by_key(|c| c.0.abs_diff(target)).expect("non-empty");
            picked.push(nearest.1);
        }
        picked.sort_by(f64::total_cmp);
        picked.dedup();
        picked
    }
}

/// Cross-validated accuracy of naive Bayes on `rows`, using
/// `min(folds, rows.len())` folds over a seeded shuffle.
pub(crate) fn cv_accuracy(ds: &Dataset, labels: &[usize], rows: &[usize], folds: usize, seed: u64) -> f64 {
    let n = rows.len();
    if n < 2 {
        return 0.0;
    }
    let folds = folds.min(n);
    let mut order = rows.to_vec();
    order.shuffle(&mut stream(seed));
    let mut correct = 0usize;
    for fold in 0..folds {
        let in_fold = |pos: usize| pos % folds == fold;
        let train: Vec<usize> = order.iter().enumerate().filter(|&(pos, _)| !in_fold(pos)).map(|(_, &r)| r).collect();
        let model: NaiveBayesModel = fit_rows(ds, labels, &train).expect("training fold is non-empty");
        correct += order
            .iter()
            .enumerate()
            .filter(|&(pos, &r)| in_fold(pos) && model.predict_index(&ds.instances()[r].features) == labels[r])
            .count();
    }
    correct as f64 / n as f64
}
