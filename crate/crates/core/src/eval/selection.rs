use itertools::Itertools;

use super::EvalError;
use crate::kinematics::{trajectory_correlation, DEFAULT_RESAMPLE_N};
use crate::stroke::{MarkerId, SkillClass, StrokeRecording};

/// Subject ids chosen for training and the remaining evaluation subjects.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrainingSplit {
    pub train_ids: Vec<String>,
    pub eval_ids: Vec<String>,
}

/// Picks the `n` recordings of `class` whose trajectories of `marker` agree
/// best.
///
/// Pairwise agreement is the mean of the x and y trajectory correlations
/// (0 when a series is degenerate). A subset of two or more is scored by its
/// mean pairwise agreement; a single recording by its mean agreement with all
/// others. Subsets are enumerated in subject-id order and the first best one
/// wins.
pub fn select_training_recordings(
    recs: &[StrokeRecording],
    class: SkillClass,
    n: usize,
    marker: MarkerId,
) -> Result<TrainingSplit, EvalError> {
    let members: Vec<&StrokeRecording> =
        recs.iter().filter(|r| r.skill == class).sorted_by(|a, b| a.subject_id.cmp(&b.subject_id)).collect();
    if n == 0 || members.len() < n + 1 {
        return Err(EvalError::InsufficientData(format!(
            "need at least {} {class} recordings to pick {n}, have {}",
            n + 1,
            members.len()
        )));
    }
    let m = members.len();
    let mut agreement = vec![vec![0.0; m]; m];
    for i in 0..m {
        for j in i + 1..m {
            let r = match trajectory_correlation(members[i], members[j], marker, DEFAULT_RESAMPLE_N) {
                Ok(c) => c.mean(),
                Err(crate::kinematics::KinematicsError::DegenerateSeries { .. }) => 0.0,
                Err(e) => return Err(e.into()),
            };
            agreement[i][j] = r;
            agreement[j][i] = r;
        }
    }

    let score = |subset: &[usize]| -> f64 {
        if subset.len() == 1 {
            let i = subset[0];
            (0..m).filter(|&j| j != i).map(|j| agreement[i][j]).sum::<f64>() / (m - 1) as f64
        } else {
            let pairs: Vec<f64> = subset.iter().tuple_combinations().map(|(&a, &b)| agreement[a][b]).collect();
            pairs.iter().sum::<f64>() / pairs.len() as f64
        }
    };
    let mut best: Option<(Vec<usize>, f64)> = None;
    for subset in (0..m).combinations(n) {
        let s = score(&subset);
        if best.as_ref().is_none_or(|b| s > b.1) {
            best = Some((subset, s));
        }
    }
    let chosen = best.expect("at least one subset").0;
    let (train, eval): (Vec<_>, Vec<_>) = (0..m).partition(|i| chosen.contains(i));
    Ok(TrainingSplit {
        train_ids: train.iter().map(|&i| members[i].subject_id.clone()).collect(),
        eval_ids: eval.iter().map(|&i| members[i].subject_id.clone()).collect(),
    })
}
