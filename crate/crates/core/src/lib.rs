//! Forehand-stroke skill analysis: marker trajectory analytics, sliding-window
//! featurization and native C4.5 / naive-Bayes-tree classification.

pub mod classify;
pub mod cli;
pub mod eval;
pub mod kinematics;
pub mod rng;
pub mod stroke;
pub mod synth;
pub mod windowing;
