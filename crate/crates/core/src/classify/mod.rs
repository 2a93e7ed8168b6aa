//! Native tree learners: C4.5 with pessimistic pruning, Gaussian naive Bayes
//! and the naive-Bayes tree hybrid.

pub mod c45;
pub mod info;
pub mod model_io;
pub mod naive_bayes;
pub mod nbtree;
pub mod prune;

use thiserror::Error;

use crate::stroke::SkillClass;
use crate::windowing::Dataset;

pub use c45::{predict_tree, train_c45, C45Params, DecisionTree, TreeNode};
pub use info::{entropy, evaluate_split, SplitCandidate};
pub use model_io::{deserialize_model, serialize_model, MODEL_HEADER};
pub use naive_bayes::{fit_naive_bayes, NaiveBayesModel};
pub use nbtree::{train_nbtree, NBNode, NBTree, NBTreeParams};
pub use prune::prune_tree;

#[derive(Debug, Error, PartialEq)]
pub enum ClassifierError {
    #[error("empty partition: class counts sum to zero")]
    EmptyPartition,
    #[error("degenerate split on attribute {attribute} at {threshold}: one side is empty")]
    DegenerateSplit { attribute: usize, threshold: f64 },
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("schema error: {0}")]
    Schema(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("model format error: {0}")]
    Format(String),
}

/// Predicted class with the per-class distribution, aligned with the model's
/// class alphabet.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub class: SkillClass,
    pub distribution: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LearnerConfig {
    C45(C45Params),
    NBTree(NBTreeParams),
}

impl LearnerConfig {
    pub fn name(&self) -> &'static str {
        match self {
            LearnerConfig::C45(_) => "C4.5",
            LearnerConfig::NBTree(_) => "NBT",
        }
    }

    pub fn train(&self, ds: &Dataset) -> Result<Model, ClassifierError> {
        Ok(match self {
            LearnerConfig::C45(p) => Model::C45(train_c45(ds, p)?),
            LearnerConfig::NBTree(p) => Model::NBTree(train_nbtree(ds, p)?),
        })
    }

    /// Same learner with its seed replaced, where it has one.
    pub fn with_seed(self, seed: u64) -> Self {
        match self {
            LearnerConfig::NBTree(p) => LearnerConfig::NBTree(NBTreeParams { seed, ..p }),
            c45 => c45,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    C45(DecisionTree),
    NBTree(NBTree),
}

impl Model {
    pub fn predict(&self, features: &[f64]) -> Result<Prediction, ClassifierError> {
        match self {
            Model::C45(t) => t.predict(features),
            Model::NBTree(t) => t.predict(features),
        }
    }

    pub fn schema(&self) -> &[String] {
        match self {
            Model::C45(t) => &t.schema,
            Model::NBTree(t) => &t.schema,
        }
    }

    pub fn classes(&self) -> &[SkillClass] {
        match self {
            Model::C45(t) => &t.classes,
            Model::NBTree(t) => &t.classes,
        }
    }
}

pub(crate) fn check_features(schema: &[String], features: &[f64]) -> Result<(), ClassifierError> {
    if features.len() != schema.len() {
        return Err(ClassifierError::Schema(format!("expected {} features, got {}", schema.len(), features.len())));
    }
    if let Some(i) = features.iter().position(|v| !v.is_finite()) {
        return Err(ClassifierError::Schema(format!("missing or non-finite value for `{}`", schema[i])));
    }
    Ok(())
}

/// Index of the largest count, lowest index on ties; `fallback` when all are zero.
pub(crate) fn majority(counts: &[usize], fallback: usize) -> usize {
    if counts.iter().all(|&c| c == 0) {
        return fallback;
    }
    let mut best = 0;
    for (i, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = i;
        }
    }
    best
}
