//! Seeded synthetic stroke recordings.
//!
//! A recording is built from a shared swing template: every marker travels
//! along a displacement `D_m * s(u)` with a vertical arc `0.4 D_m * sin^2(pi u)`,
//! where `u` is warped normalized time and
//! `s(u) = u - sin(2 pi u) / (2 pi) - 0.12 (1 - cos(2 pi u)) (1 - u)`
//! (a short take-back, then a forward swing whose speed peaks mid-stroke).
//! Each marker blends the template (weight `c`) with its own random motion, a
//! sum of 12 whole-cycle sinusoids (weight `(1 - c)^2`), where `c` is the
//! profile's coupling; the whole arm follows a mean-reverting shoulder drift,
//! and per-frame Gaussian noise is added before rounding to whole pixels.
//!
//! Random draws, all from one xoshiro256++ stream per recording
//! (see [`crate::rng`]), happen in this order:
//! 1. frame count: `min + floor(U * (max - min + 1))`
//! 2. phase warp: `phi = phase_jitter * N`, clamped to [-1.5, 1.5]
//! 3. for marker 1..=9, axis x then y, mode k = 1..=12: amplitude `N`, phase `U`
//! 4. for each frame: drift x `N`, drift y `N`, then marker 1..=9 noise x `N`, y `N`
//!
//! `U` is one uniform draw and `N` one Box-Muller normal (two draws).

use std::f64::consts::{PI, TAU};

use crate::rng::{mix_seed, standard_normal, stream, uniform};
use crate::stroke::{Point, RecordingMetadata, SkillClass, StrokeRecording, MARKER_COUNT};

const RANDOM_MODES: usize = 12;
/// Height of the vertical arc relative to the horizontal swing amplitude.
const ARC_RATIO: f64 = 0.4;
/// Per-frame reversion of the shoulder drift toward its rest position.
const DRIFT_REVERSION: f64 = 0.15;
/// Raw pixel position of marker 1 at rest.
const SHOULDER_REST: (f64, f64) = (180.0, 140.0);
/// Rest offsets of markers 1..=9 from the shoulder, in pixels.
const REST_OFFSETS: [(f64, f64); MARKER_COUNT] = [
    (0.0, 0.0),
    (12.0, 6.0),
    (35.0, 70.0),
    (48.0, 80.0),
    (70.0, 135.0),
    (82.0, 140.0),
    (100.0, 170.0),
    (118.0, 182.0),
    (140.0, 215.0),
];
/// Swing direction of each marker's x displacement: the trunk and arm rotate
/// forward while the racket sweeps the other way.
const SWING_SIGN: [f64; MARKER_COUNT] = [1.0, 1.0, 1.0, 1.0, 1.0, 1.0, -1.0, -1.0, -1.0];

#[derive(Debug, Clone, PartialEq)]
pub struct SkillProfile {
    pub class: SkillClass,
    /// Template x displacement per marker, in pixels.
    pub swing_amplitude: [f64; MARKER_COUNT],
    pub noise_sigma: f64,
    /// 1 = markers follow the template exactly, 0 = markers move independently.
    pub marker_coupling: f64,
    pub shoulder_drift_sigma: f64,
    pub phase_jitter: f64,
    pub frame_count_range: (usize, usize),
}

const EXPERT_AMPLITUDE: [f64; MARKER_COUNT] = [110.0, 110.0, 200.0, 250.0, 230.0, 230.0, 330.0, 330.0, 340.0];

impl SkillProfile {
    pub fn expert() -> Self {
        SkillProfile {
            class: SkillClass::Expert,
            swing_amplitude: EXPERT_AMPLITUDE,
            noise_sigma: 2.0,
            marker_coupling: 0.95,
            shoulder_drift_sigma: 1.0,
            phase_jitter: 0.1,
            frame_count_range: (60, 100),
        }
    }

    pub fn novice() -> Self {
        SkillProfile {
            class: SkillClass::Novice,
            swing_amplitude: EXPERT_AMPLITUDE,
            noise_sigma: 25.0,
            marker_coupling: 0.3,
            shoulder_drift_sigma: 15.0,
            phase_jitter: 0.5,
            frame_count_range: (40, 120),
        }
    }

    /// Midpoint of the expert and novice presets.
    pub fn intermediate() -> Self {
        let (e, n) = (Self::expert(), Self::novice());
        let mid = |a: f64, b: f64| 0.5 * (a + b);
        SkillProfile {
            class: SkillClass::Intermediate,
            swing_amplitude: std::array::from_fn(|m| mid(e.swing_amplitude[m], n.swing_amplitude[m])),
            noise_sigma: mid(e.noise_sigma, n.noise_sigma),
            marker_coupling: mid(e.marker_coupling, n.marker_coupling),
            shoulder_drift_sigma: mid(e.shoulder_drift_sigma, n.shoulder_drift_sigma),
            phase_jitter: mid(e.phase_jitter, n.phase_jitter),
            frame_count_range: (
                (e.frame_count_range.0 + n.frame_count_range.0) / 2,
                (e.frame_count_range.1 + n.frame_count_range.1) / 2,
            ),
        }
    }

    pub fn preset(class: SkillClass) -> Self {
        match class {
            SkillClass::Expert => Self::expert(),
            SkillClass::Intermediate => Self::intermediate(),
            SkillClass::Novice => Self::novice(),
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.noise_sigma >= 0.0 && self.shoulder_drift_sigma >= 0.0 && self.phase_jitter >= 0.0) {
            return Err("sigmas must be non-negative".into());
        }
        if !(0.0..=1.0).contains(&self.marker_coupling) {
            return Err(format!("marker_coupling {} outside [0, 1]", self.marker_coupling));
        }
        let (lo, hi) = self.frame_count_range;
        if lo < 2 || lo > hi {
            return Err(format!("bad frame_count_range ({lo}, {hi})"));
        }
        Ok(())
    }
}

fn swing_progress(u: f64) -> f64 {
    u - (TAU * u).sin() / TAU - 0.12 * (1.0 - (TAU * u).cos()) * (1.0 - u)
}

/// One raw (not normalized) recording, fully determined by `(profile, seed)`.
/// The subject id is `synthetic`; cohorts rename it.
pub fn generate_recording(profile: &SkillProfile, seed: u64) -> StrokeRecording {
    let mut rng = stream(seed);
    let (lo, hi) = profile.frame_count_range;
    let frames = lo + ((uniform(&mut rng) * (hi - lo + 1) as f64) as usize).min(hi - lo);
    let phi = (profile.phase_jitter * standard_normal(&mut rng)).clamp(-1.5, 1.5);

    // modes[m][axis] = [(amplitude, phase); RANDOM_MODES]
    let mut modes = [[[(0.0, 0.0); RANDOM_MODES]; 2]; MARKER_COUNT];
    for marker_modes in modes.iter_mut() {
        for axis_modes in marker_modes.iter_mut() {
            for mode in axis_modes.iter_mut() {
                let amplitude = standard_normal(&mut rng);
                *mode = (amplitude, TAU * uniform(&mut rng));
            }
        }
    }

    let c = profile.marker_coupling;
    // Each marker's own motion has unit variance per axis before scaling by
    // its amplitude; squaring keeps near-rigid profiles close to the template.
    let own_weight = (1.0 - c).powi(2) / (0.5 * RANDOM_MODES as f64).sqrt();
    let mut drift = (0.0, 0.0);
    let mut positions = Vec::with_capacity(frames);
    for t in 0..frames {
        drift.0 = (1.0 - DRIFT_REVERSION) * drift.0 + profile.shoulder_drift_sigma * standard_normal(&mut rng);
        drift.1 = (1.0 - DRIFT_REVERSION) * drift.1 + profile.shoulder_drift_sigma * standard_normal(&mut rng);
        let u = t as f64 / (frames - 1) as f64;
        let warped = u + phi * (PI * u).sin() / TAU;
        let s = swing_progress(warped);
        let arc = (PI * warped).sin().powi(2);
        let mut frame = [Point::default(); MARKER_COUNT];
        for (m, p) in frame.iter_mut().enumerate() {
            let amp = profile.swing_amplitude[m];
            let template = (SWING_SIGN[m] * amp * s, ARC_RATIO * amp * arc);
            let own = |axis: usize| -> f64 {
                amp * modes[m][axis]
                    .iter()
                    .enumerate()
                    .map(|(k, &(a, ph))| a * ((k + 1) as f64 * TAU * u + ph).sin())
                    .sum::<f64>()
            };
            let x = SHOULDER_REST.0 + REST_OFFSETS[m].0 + c * template.0 + own_weight * own(0) + drift.0;
            let y = SHOULDER_REST.1 + REST_OFFSETS[m].1 + c * template.1 + own_weight * own(1) + drift.1;
            let nx = profile.noise_sigma * standard_normal(&mut rng);
            let ny = profile.noise_sigma * standard_normal(&mut rng);
            *p = Point::new((x + nx).round(), (y + ny).round());
        }
        positions.push(frame);
    }
    let meta = RecordingMetadata::new("synthetic", profile.class);
    StrokeRecording::from_positions(&meta, positions).expect("generated coordinates are finite")
}

/// Profiles and how many recordings of each to generate.
#[derive(Debug, Clone, PartialEq)]
pub struct CohortSpec {
    pub entries: Vec<(SkillProfile, usize)>,
}

impl CohortSpec {
    /// Seven expert, three intermediate and five novice subjects.
    pub fn reference_cohort() -> Self {
        CohortSpec {
            entries: vec![(SkillProfile::expert(), 7), (SkillProfile::intermediate(), 3), (SkillProfile::novice(), 5)],
        }
    }

    pub fn single(class: SkillClass, count: usize) -> Self {
        CohortSpec { entries: vec![(SkillProfile::preset(class), count)] }
    }
}

/// Recording `i` (counting across all entries) uses seed `mix_seed(seed, i)`;
/// subject ids are `{class}_{n}` with `n` counting from 1 within each class.
pub fn generate_cohort(spec: &CohortSpec, seed: u64) -> Vec<StrokeRecording> {
    let mut out = Vec::new();
    let mut per_class = [0usize; 3];
    for (profile, count) in &spec.entries {
        for _ in 0..*count {
            let index = out.len() as u64;
            let mut rec = generate_recording(profile, mix_seed(seed, index));
            let class_slot = SkillClass::ALL.iter().position(|&c| c == profile.class).expect("known class");
            per_class[class_slot] += 1;
            rec.subject_id = format!("{}_{}", profile.class, per_class[class_slot]);
            out.push(rec);
        }
    }
    out
}
