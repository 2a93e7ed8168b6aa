use std::collections::HashMap;

use rand::seq::SliceRandom;
use rayon::prelude::*;

use super::{confusion_for, ConfusionMatrix, EvalError, EvaluationReport};
use crate::classify::LearnerConfig;
use crate::rng::{mix_seed, stream};
use crate::windowing::Dataset;

/// Assigns every instance to one of `k` test folds.
///
/// Units are single instances, or whole recordings (grouped by source subject)
/// when `group_by_recording` is set. Units are stratified by class: each class
/// stratum is shuffled with its own seeded stream and dealt round-robin, the
/// deal continuing where the previous class stopped.
pub fn fold_assignment(ds: &Dataset, k: usize, seed: u64, group_by_recording: bool) -> Result<Vec<usize>, EvalError> {
    if k < 2 {
        return Err(EvalError::Fold(format!("need at least 2 folds, got {k}")));
    }
    let labels = ds.label_indices();
    // unit -> member rows, in order of first appearance
    let mut units: Vec<Vec<usize>> = Vec::new();
    if group_by_recording {
        let mut by_subject: HashMap<&str, usize> = HashMap::new();
        for (row, inst) in ds.instances().iter().enumerate() {
            let next = units.len();
            let u = *by_subject.entry(inst.source.subject_id.as_str()).or_insert(next);
            if u == next {
                units.push(Vec::new());
            }
            units[u].push(row);
        }
    } else {
        units = (0..ds.len()).map(|r| vec![r]).collect();
    }
    if k > units.len() {
        let what = if group_by_recording { "recordings" } else { "instances" };
        return Err(EvalError::Fold(format!("{k} folds exceed {} {what}", units.len())));
    }

    let mut folds = vec![0; ds.len()];
    let mut offset = 0;
    for class in 0..ds.classes().len() {
        let mut stratum: Vec<usize> = (0..units.len()).filter(|&u| labels[units[u][0]] == class).collect();
        stratum.shuffle(&mut stream(mix_seed(seed, class as u64)));
        for (i, &u) in stratum.iter().enumerate() {
            for &row in &units[u] {
                folds[row] = (offset + i) % k;
            }
        }
        offset += stratum.len();
    }
    Ok(folds)
}

/// Stratified k-fold cross-validation plus the resubstitution rate of a model
/// trained on all of `ds`.
pub fn kfold_cross_validate(
    ds: &Dataset,
    k: usize,
    learner: &LearnerConfig,
    seed: u64,
    group_by_recording: bool,
) -> Result<EvaluationReport, EvalError> {
    let folds = fold_assignment(ds, k, seed, group_by_recording)?;
    let per_fold: Vec<Result<(ConfusionMatrix, Option<String>), EvalError>> = (0..k)
        .into_par_iter()
        .map(|fold| {
            let train_rows: Vec<usize> = (0..ds.len()).filter(|&r| folds[r] != fold).collect();
            let test_rows: Vec<usize> = (0..ds.len()).filter(|&r| folds[r] == fold).collect();
            let train = ds.subset(&train_rows);
            let warning = train
                .class_counts()
                .iter()
                .zip(ds.classes())
                .find(|(&c, _)| c == 0)
                .map(|(_, class)| format!("fold {fold}: no {class} instances in training data"));
            let model = learner.train(&train)?;
            Ok((confusion_for(&model, &ds.subset(&test_rows))?, warning))
        })
        .collect();

    let mut report = EvaluationReport::new(learner.name(), seed);
    report.group_by_recording = group_by_recording;
    let mut total = ConfusionMatrix::new(ds.classes());
    for result in per_fold {
        let (cm, warning) = result?;
        total.merge(&cm);
        report.warnings.extend(warning);
    }
    report.set_cv(total, k)?;
    let model = learner.train(ds)?;
    report.set_train(confusion_for(&model, ds)?)?;
    Ok(report)
}

/// Trains on `train`; reports resubstitution and hold-out rates.
pub fn holdout_evaluate(
    train: &Dataset,
    eval: &Dataset,
    learner: &LearnerConfig,
) -> Result<EvaluationReport, EvalError> {
    if !train.same_layout(eval) {
        return Err(EvalError::Schema("training and evaluation datasets differ in schema or classes".into()));
    }
    let model = learner.train(train)?;
    let mut report = EvaluationReport::new(learner.name(), 0);
    if let LearnerConfig::NBTree(p) = learner {
        report.seed = p.seed;
    }
    report.set_train(confusion_for(&model, train)?)?;
    report.set_eval(confusion_for(&model, eval)?)?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::{C45Params, NBTreeParams};
    use crate::stroke::SkillClass;
    use crate::windowing::{FeatureWindow, WindowSource};

    const E: SkillClass = SkillClass::Expert;
    const N: SkillClass = SkillClass::Novice;

    /// `per_subject` windows for each (subject, class); feature = class-dependent offset.
    fn grouped(subjects: &[(&str, SkillClass)], per_subject: usize) -> Dataset {
        let mut instances = Vec::new();
        for (s, (id, class)) in subjects.iter().enumerate() {
            for w in 0..per_subject {
                let base = if *class == E { 0.0 } else { 100.0 };
                instances.push(FeatureWindow {
                    features: vec![base + (s * per_subject + w) as f64, w as f64],
                    label: *class,
                    source: WindowSource { subject_id: id.to_string(), start_frame: 2 * w as u64 },
                });
            }
        }
        Dataset::new(vec!["a".into(), "b".into()], &[E, N], instances).unwrap()
    }

    fn flat(n_e: usize, n_n: usize) -> Dataset {
        let mut instances = Vec::new();
        for i in 0..n_e + n_n {
            let class = if i < n_e { E } else { N };
            instances.push(FeatureWindow {
                features: vec![(i * 7 % 13) as f64, if class == E { 0.0 } else { 1.0 }],
                label: class,
                source: WindowSource { subject_id: format!("s{i}"), start_frame: 0 },
            });
        }
        Dataset::new(vec!["a".into(), "b".into()], &[E, N], instances).unwrap()
    }

    fn c45() -> LearnerConfig {
        LearnerConfig::C45(C45Params::default())
    }

    #[test]
    fn leave_one_out_gives_singleton_folds() {
        let ds = flat(5, 5);
        let folds = fold_assignment(&ds, 10, 3, false).unwrap();
        let mut sorted = folds.clone();
        sorted.sort();
        assert_eq!(sorted, (0..10).collect::<Vec<_>>());
        let report = kfold_cross_validate(&ds, 10, &c45(), 3, false).unwrap();
        assert_eq!(report.confusion_cv.as_ref().unwrap().total(), 10);
    }

    #[test]
    fn stratum_fold_sizes_differ_by_at_most_one() {
        for (n_e, n_n, k, seed) in [(40, 98, 10, 1), (7, 5, 3, 2), (13, 29, 4, 9), (3, 3, 2, 0)] {
            let ds = flat(n_e, n_n);
            let folds = fold_assignment(&ds, k, seed, false).unwrap();
            for class in [E, N] {
                let mut sizes = vec![0; k];
                for (inst, &f) in ds.instances().iter().zip(&folds) {
                    if inst.label == class {
                        sizes[f] += 1;
                    }
                }
                let (lo, hi) = (sizes.iter().min().unwrap(), sizes.iter().max().unwrap());
                assert!(hi - lo <= 1, "{class}: {sizes:?}");
            }
        }
    }

    #[test]
    fn too_many_folds_rejected() {
        let ds = flat(2, 2);
        assert!(matches!(fold_assignment(&ds, 5, 0, false), Err(EvalError::Fold(_))));
        assert!(matches!(fold_assignment(&ds, 1, 0, false), Err(EvalError::Fold(_))));
        let g = grouped(&[("a", E), ("b", N)], 10);
        assert!(matches!(fold_assignment(&g, 3, 0, true), Err(EvalError::Fold(_))));
    }

    #[test]
    fn grouped_folds_keep_recordings_together() {
        let subjects = [("e1", E), ("e2", E), ("e3", E), ("n1", N), ("n2", N), ("n3", N), ("n4", N)];
        let ds = grouped(&subjects, 8);
        let folds = fold_assignment(&ds, 3, 5, true).unwrap();
        for id in subjects.map(|s| s.0) {
            let fs: Vec<usize> =
                ds.instances().iter().zip(&folds).filter(|(i, _)| i.source.subject_id == id).map(|(_, &f)| f).collect();
            assert!(fs.iter().all(|&f| f == fs[0]), "{id} split across folds");
        }
        let report = kfold_cross_validate(&ds, 3, &c45(), 5, true).unwrap();
        assert_eq!(report.confusion_cv.unwrap().row_sums(), vec![24, 32]);
        assert!(report.group_by_recording);
    }

    #[test]
    fn cv_is_deterministic_and_consistent() {
        let ds = flat(30, 40);
        let a = kfold_cross_validate(&ds, 10, &c45(), 42, false).unwrap();
        let b = kfold_cross_validate(&ds, 10, &c45(), 42, false).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        let cm = a.confusion_cv.as_ref().unwrap();
        assert_eq!(cm.row_sums(), ds.class_counts());
        assert_eq!(a.recognition_rate_cv.unwrap(), 100.0 * cm.correct() as f64 / cm.total() as f64);
        // attribute b separates the classes exactly
        assert_eq!(a.recognition_rate_cv, Some(100.0));
        assert_eq!(a.recognition_rate_train, Some(100.0));
        let nb = kfold_cross_validate(&ds, 5, &LearnerConfig::NBTree(NBTreeParams::default()), 1, false).unwrap();
        assert_eq!(nb.learner, "NBT");
    }

    #[test]
    fn holdout_on_training_data_matches_resubstitution() {
        let ds = flat(12, 9);
        let r = holdout_evaluate(&ds, &ds, &c45()).unwrap();
        assert_eq!(r.recognition_rate_train, r.recognition_rate_eval);
        assert_eq!(r.confusion_train, r.confusion_eval);
        assert!(r.recognition_rate_cv.is_none());
    }

    #[test]
    fn holdout_reports_rates_independently() {
        let train = flat(10, 10);
        let eval = train.subset(&[0, 1, 2, 15]);
        let r = holdout_evaluate(&train, &eval, &c45()).unwrap();
        assert_eq!(r.confusion_eval.as_ref().unwrap().total(), 4);
        assert_eq!(r.confusion_train.as_ref().unwrap().total(), 20);
        let other = Dataset::new(vec!["x".into(), "y".into()], &[E, N], vec![]).unwrap();
        assert!(matches!(holdout_evaluate(&train, &other, &c45()), Err(EvalError::Schema(_))));
    }
}
