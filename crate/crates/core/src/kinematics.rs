//! Per-marker kinematic analytics: speed profiles, coordinate extrema,
//! trajectory correlation between recordings and impact detection.

use thiserror::Error;

use crate::stroke::{Axis, MarkerId, SkillClass, StrokeRecording};

pub const DEFAULT_RESAMPLE_N: usize = 100;

#[derive(Debug, Error, PartialEq)]
pub enum KinematicsError {
    #[error("insufficient data: need at least {needed} frames, have {have}")]
    InsufficientData { needed: usize, have: usize },
    #[error("degenerate series on axis {axis}: zero variance, correlation undefined")]
    DegenerateSeries { axis: Axis },
    #[error("resample count must be at least {min}, got {got}")]
    BadResampleCount { min: usize, got: usize },
    #[error("no recordings supplied")]
    NoRecordings,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpeedSeries {
    pub marker: MarkerId,
    pub axis: Axis,
    /// Pixels per second; `values[t]` covers frames `t -> t + 1`.
    pub values: Vec<f64>,
}

/// Finite-difference speed of one marker coordinate, scaled by the frame rate.
pub fn speed_series(rec: &StrokeRecording, marker: MarkerId, axis: Axis) -> Result<SpeedSeries, KinematicsError> {
    require_frames(rec, 2)?;
    let series = rec.series(marker, axis);
    let values = series.windows(2).map(|w| (w[1] - w[0]) * rec.fps).collect();
    Ok(SpeedSeries { marker, axis, values })
}

/// Minimum and maximum of one coordinate series.
pub fn extrema(rec: &StrokeRecording, marker: MarkerId, axis: Axis) -> (f64, f64) {
    rec.frames()
        .iter()
        .map(|f| f.position(marker).get(axis))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationResult {
    pub r_x: f64,
    pub r_y: f64,
    pub n: usize,
}

impl CorrelationResult {
    pub fn mean(&self) -> f64 {
        0.5 * (self.r_x + self.r_y)
    }
}

/// How two recordings of different length are put on a common time base.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Alignment {
    /// Linear resampling over each recording's own duration.
    #[default]
    NormalizedTime,
    /// Resample the pre-impact and post-impact segments separately so both
    /// impacts land on the same sample.
    ImpactAnchored,
}

/// Pearson correlation, per axis, between the trajectories of one marker in
/// two recordings.
pub fn trajectory_correlation(
    rec_a: &StrokeRecording,
    rec_b: &StrokeRecording,
    marker: MarkerId,
    resample_n: usize,
) -> Result<CorrelationResult, KinematicsError> {
    trajectory_correlation_aligned(rec_a, rec_b, marker, resample_n, Alignment::NormalizedTime)
}

pub fn trajectory_correlation_aligned(
    rec_a: &StrokeRecording,
    rec_b: &StrokeRecording,
    marker: MarkerId,
    resample_n: usize,
    alignment: Alignment,
) -> Result<CorrelationResult, KinematicsError> {
    let min_n = match alignment {
        Alignment::NormalizedTime => 2,
        Alignment::ImpactAnchored => 4,
    };
    if resample_n < min_n {
        return Err(KinematicsError::BadResampleCount { min: min_n, got: resample_n });
    }
    require_frames(rec_a, 2)?;
    require_frames(rec_b, 2)?;
    let positions_a = sample_positions(rec_a, resample_n, alignment)?;
    let positions_b = sample_positions(rec_b, resample_n, alignment)?;

    let mut r = [0.0; 2];
    for (slot, axis) in r.iter_mut().zip(Axis::BOTH) {
        let a = interpolate(&rec_a.series(marker, axis), &positions_a);
        let b = interpolate(&rec_b.series(marker, axis), &positions_b);
        *slot = pearson(&a, &b).map_err(|_| KinematicsError::DegenerateSeries { axis })?;
    }
    Ok(CorrelationResult { r_x: r[0], r_y: r[1], n: resample_n })
}

/// Correlation between two markers of the same recording, per axis.
pub fn marker_pair_correlation(
    rec: &StrokeRecording,
    marker_a: MarkerId,
    marker_b: MarkerId,
) -> Result<CorrelationResult, KinematicsError> {
    require_frames(rec, 2)?;
    let mut r = [0.0; 2];
    for (slot, axis) in r.iter_mut().zip(Axis::BOTH) {
        *slot = pearson(&rec.series(marker_a, axis), &rec.series(marker_b, axis))
            .map_err(|_| KinematicsError::DegenerateSeries { axis })?;
    }
    Ok(CorrelationResult { r_x: r[0], r_y: r[1], n: rec.frame_count() })
}

/// Fractional frame positions at which a recording is sampled.
fn sample_positions(rec: &StrokeRecording, n: usize, alignment: Alignment) -> Result<Vec<f64>, KinematicsError> {
    let last = (rec.frame_count() - 1) as f64;
    Ok(match alignment {
        Alignment::NormalizedTime => (0..n).map(|i| last * i as f64 / (n - 1) as f64).collect(),
        Alignment::ImpactAnchored => {
            let impact = detect_impact(rec)? as f64;
            let pre = n / 2;
            let post = n - pre;
            let mut out: Vec<f64> = (0..pre).map(|i| impact * i as f64 / pre as f64).collect();
            out.extend((0..post).map(|i| impact + (last - impact) * i as f64 / (post - 1) as f64));
            out
        }
    })
}

/// Linear interpolation of `series` at fractional indices.
fn interpolate(series: &[f64], positions: &[f64]) -> Vec<f64> {
    let last = series.len() - 1;
    positions
        .iter()
        .map(|&p| {
            let lo = (p.floor() as usize).min(last);
            if lo == last {
                return series[last];
            }
            let frac = p - lo as f64;
            series[lo] + frac * (series[lo + 1] - series[lo])
        })
        .collect()
}

/// Pearson correlation via a single-pass co-moment update, clamped to [-1, 1].
pub fn pearson(a: &[f64], b: &[f64]) -> Result<f64, KinematicsError> {
    assert_eq!(a.len(), b.len(), "pearson: length mismatch");
    if a.len() < 2 {
        return Err(KinematicsError::InsufficientData { needed: 2, have: a.len() });
    }
    let (mut mean_a, mut mean_b) = (0.0, 0.0);
    let (mut m2_a, mut m2_b, mut co) = (0.0, 0.0, 0.0);
    for (i, (&x, &y)) in a.iter().zip(b).enumerate() {
        let n = (i + 1) as f64;
        let dx = x - mean_a;
        let dy = y - mean_b;
        mean_a += dx / n;
        mean_b += dy / n;
        m2_a += dx * (x - mean_a);
        m2_b += dy * (y - mean_b);
        co += dx * (y - mean_b);
    }
    if m2_a <= 0.0 {
        return Err(KinematicsError::DegenerateSeries { axis: Axis::X });
    }
    if m2_b <= 0.0 {
        return Err(KinematicsError::DegenerateSeries { axis: Axis::Y });
    }
    Ok((co / (m2_a.sqrt() * m2_b.sqrt())).clamp(-1.0, 1.0))
}

/// Index of the frame transition with the largest mean racket-marker speed.
/// Ties go to the earliest index.
pub fn detect_impact(rec: &StrokeRecording) -> Result<u64, KinematicsError> {
    require_frames(rec, 2)?;
    let frames = rec.frames();
    let mut best = (0usize, f64::NEG_INFINITY);
    for t in 0..frames.len() - 1 {
        let speed = MarkerId::RACKET
            .iter()
            .map(|&m| {
                let a = frames[t].position(m);
                let b = frames[t + 1].position(m);
                (b.x - a.x).hypot(b.y - a.y) * rec.fps
            })
            .sum::<f64>()
            / MarkerId::RACKET.len() as f64;
        if speed > best.1 {
            best = (t, speed);
        }
    }
    Ok(frames[best.0].index)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtremaRow {
    pub class: SkillClass,
    pub marker: MarkerId,
    pub min_x: f64,
    pub max_x: f64,
}

/// Per-class x-extrema of selected markers, ordered by class then marker.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExtremaTable {
    pub rows: Vec<ExtremaRow>,
}

impl ExtremaTable {
    pub fn get(&self, class: SkillClass, marker: MarkerId) -> Option<&ExtremaRow> {
        self.rows.iter().find(|r| r.class == class && r.marker == marker)
    }

    /// Wide CSV with one row per class and a min/max column pair per marker.
    pub fn to_csv(&self) -> String {
        let mut markers: Vec<MarkerId> = Vec::new();
        for r in &self.rows {
            if !markers.contains(&r.marker) {
                markers.push(r.marker);
            }
        }
        let mut out = String::from("class");
        for m in &markers {
            out.push_str(&format!(",{m}_min_x,{m}_max_x"));
        }
        out.push('\n');
        for class in SkillClass::ALL {
            if !self.rows.iter().any(|r| r.class == class) {
                continue;
            }
            out.push_str(class.as_str());
            for &m in &markers {
                match self.get(class, m) {
                    Some(r) => out.push_str(&format!(",{},{}", r.min_x, r.max_x)),
                    None => out.push_str(",,"),
                }
            }
            out.push('\n');
        }
        out
    }
}

pub fn extrema_report(recs: &[StrokeRecording], markers: &[MarkerId]) -> Result<ExtremaTable, KinematicsError> {
    if recs.is_empty() {
        return Err(KinematicsError::NoRecordings);
    }
    let mut rows = Vec::new();
    for class in SkillClass::ALL {
        let members: Vec<&StrokeRecording> = recs.iter().filter(|r| r.skill == class).collect();
        if members.is_empty() {
            continue;
        }
        for &marker in markers {
            let (min_x, max_x) = members
                .iter()
                .map(|r| extrema(r, marker, Axis::X))
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (a, b)| (lo.min(a), hi.max(b)));
            rows.push(ExtremaRow { class, marker, min_x, max_x });
        }
    }
    Ok(ExtremaTable { rows })
}

fn require_frames(rec: &StrokeRecording, needed: usize) -> Result<(), KinematicsError> {
    if rec.frame_count() < needed {
        Err(KinematicsError::InsufficientData { needed, have: rec.frame_count() })
    } else {
        Ok(())
    }
}
