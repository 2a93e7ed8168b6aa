//! Evaluation harness: confusion matrices, k-fold cross-validation, hold-out
//! evaluation, training-subject selection and per-recording vote aggregation.

mod cv;
mod report;
mod selection;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classify::{ClassifierError, Model, Prediction};
use crate::kinematics::KinematicsError;
use crate::stroke::SkillClass;
use crate::windowing::Dataset;

pub use cv::{fold_assignment, holdout_evaluate, kfold_cross_validate};
pub use report::{render_confusion, render_rate_table};
pub use selection::{select_training_recordings, TrainingSplit};

pub const DEFAULT_FOLDS: usize = 10;

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("nothing to evaluate")]
    EmptyEvaluation,
    #[error("fold error: {0}")]
    Fold(String),
    #[error("schema error: {0}")]
    Schema(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error(transparent)]
    Classifier(#[from] ClassifierError),
    #[error(transparent)]
    Kinematics(#[from] KinematicsError),
}

/// `counts[i][j]`: instances of true class `i` predicted as class `j`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub classes: Vec<SkillClass>,
    pub counts: Vec<Vec<usize>>,
}

impl ConfusionMatrix {
    pub fn new(classes: &[SkillClass]) -> Self {
        ConfusionMatrix { classes: classes.to_vec(), counts: vec![vec![0; classes.len()]; classes.len()] }
    }

    pub fn from_counts(classes: &[SkillClass], counts: Vec<Vec<usize>>) -> Self {
        assert!(counts.len() == classes.len() && counts.iter().all(|r| r.len() == classes.len()));
        ConfusionMatrix { classes: classes.to_vec(), counts }
    }

    pub fn record(&mut self, truth: SkillClass, predicted: SkillClass) {
        let i = self.index(truth);
        let j = self.index(predicted);
        self.counts[i][j] += 1;
    }

    fn index(&self, class: SkillClass) -> usize {
        self.classes.iter().position(|&c| c == class).expect("class in confusion alphabet")
    }

    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    pub fn correct(&self) -> usize {
        (0..self.classes.len()).map(|i| self.counts[i][i]).sum()
    }

    pub fn row_sums(&self) -> Vec<usize> {
        self.counts.iter().map(|r| r.iter().sum()).collect()
    }

    pub fn merge(&mut self, other: &ConfusionMatrix) {
        for (row, other_row) in self.counts.iter_mut().zip(&other.counts) {
            for (a, b) in row.iter_mut().zip(other_row) {
                *a += b;
            }
        }
    }
}

/// Percentage of instances on the diagonal.
pub fn accuracy_from_confusion(cm: &ConfusionMatrix) -> Result<f64, EvalError> {
    let total = cm.total();
    if total == 0 {
        return Err(EvalError::EmptyEvaluation);
    }
    Ok(100.0 * cm.correct() as f64 / total as f64)
}

/// Predicts every instance of `ds` with `model`.
pub fn confusion_for(model: &Model, ds: &Dataset) -> Result<ConfusionMatrix, EvalError> {
    let mut cm = ConfusionMatrix::new(ds.classes());
    for inst in ds.instances() {
        cm.record(inst.label, model.predict(&inst.features)?.class);
    }
    Ok(cm)
}

/// One learner's recognition rates, in percent, with the confusion matrix
/// behind each.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub learner: String,
    pub recognition_rate_cv: Option<f64>,
    pub recognition_rate_train: Option<f64>,
    pub recognition_rate_eval: Option<f64>,
    pub confusion_cv: Option<ConfusionMatrix>,
    pub confusion_train: Option<ConfusionMatrix>,
    pub confusion_eval: Option<ConfusionMatrix>,
    pub folds: Option<usize>,
    pub group_by_recording: bool,
    pub seed: u64,
    #[serde(default)]
    pub warnings: Vec<String>,
}

impl EvaluationReport {
    pub fn new(learner: &str, seed: u64) -> Self {
        EvaluationReport {
            learner: learner.to_string(),
            recognition_rate_cv: None,
            recognition_rate_train: None,
            recognition_rate_eval: None,
            confusion_cv: None,
            confusion_train: None,
            confusion_eval: None,
            folds: None,
            group_by_recording: false,
            seed,
            warnings: Vec::new(),
        }
    }

    pub fn set_cv(&mut self, cm: ConfusionMatrix, folds: usize) -> Result<(), EvalError> {
        self.recognition_rate_cv = Some(accuracy_from_confusion(&cm)?);
        self.confusion_cv = Some(cm);
        self.folds = Some(folds);
        Ok(())
    }

    pub fn set_train(&mut self, cm: ConfusionMatrix) -> Result<(), EvalError> {
        self.recognition_rate_train = Some(accuracy_from_confusion(&cm)?);
        self.confusion_train = Some(cm);
        Ok(())
    }

    pub fn set_eval(&mut self, cm: ConfusionMatrix) -> Result<(), EvalError> {
        self.recognition_rate_eval = Some(accuracy_from_confusion(&cm)?);
        self.confusion_eval = Some(cm);
        Ok(())
    }

    /// Fills the settings this report lacks from `other` (same learner).
    pub fn absorb(&mut self, other: EvaluationReport) {
        if self.confusion_cv.is_none() {
            self.recognition_rate_cv = other.recognition_rate_cv;
            self.confusion_cv = other.confusion_cv;
            self.folds = other.folds;
            self.group_by_recording = other.group_by_recording;
        }
        if self.confusion_train.is_none() {
            self.recognition_rate_train = other.recognition_rate_train;
            self.confusion_train = other.confusion_train;
        }
        if self.confusion_eval.is_none() {
            self.recognition_rate_eval = other.recognition_rate_eval;
            self.confusion_eval = other.confusion_eval;
        }
        self.warnings.extend(other.warnings);
    }
}

/// Majority vote over window predictions. Ties go to the class with the
/// larger summed probability among its own votes, then to the class listed
/// first in `classes`.
pub fn aggregate_recording_prediction(
    window_preds: &[Prediction],
    classes: &[SkillClass],
) -> Result<SkillClass, EvalError> {
    if window_preds.is_empty() {
        return Err(EvalError::EmptyEvaluation);
    }
    let mut votes = vec![0usize; classes.len()];
    let mut mass = vec![0.0f64; classes.len()];
    for p in window_preds {
        let i = classes
            .iter()
            .position(|&c| c == p.class)
            .ok_or_else(|| EvalError::Schema(format!("class {} not in alphabet", p.class)))?;
        votes[i] += 1;
        mass[i] += p.distribution.get(i).copied().unwrap_or(0.0);
    }
    let mut best = 0;
    for i in 1..classes.len() {
        if votes[i] > votes[best] || (votes[i] == votes[best] && mass[i] > mass[best]) {
            best = i;
        }
    }
    Ok(classes[best])
}
