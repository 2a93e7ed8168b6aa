use std::fmt;

use super::{MarkerId, StrokeRecording};

/// Thresholds for the advisory recording checks.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationPolicy {
    pub min_frames: usize,
    pub max_frames: usize,
    pub expected_fps: f64,
    /// Largest plausible per-frame marker displacement, in pixels.
    pub max_jump: f64,
}

impl Default for ValidationPolicy {
    fn default() -> Self {
        ValidationPolicy { min_frames: 40, max_frames: 120, expected_fps: 90.0, max_jump: 100.0 }
    }
}

/// A warning about a recording. Findings never block the pipeline.
#[derive(Debug, Clone, PartialEq)]
pub enum Finding {
    TooFewFrames {
        count: usize,
        min: usize,
    },
    TooManyFrames {
        count: usize,
        max: usize,
    },
    FrameRate {
        fps: f64,
        expected: f64,
    },
    /// Marker moved more than `max_jump` between `frame - 1` and `frame`.
    Jump {
        frame: u64,
        marker: MarkerId,
        distance: f64,
    },
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Finding::TooFewFrames { count, min } => write!(f, "frame count {count} < {min}"),
            Finding::TooManyFrames { count, max } => write!(f, "frame count {count} > {max}"),
            Finding::FrameRate { fps, expected } => write!(f, "frame rate {fps} fps differs from {expected} fps"),
            Finding::Jump { frame, marker, distance } => {
                write!(f, "jump at frame {frame}, marker {marker}: {distance:.1} px")
            }
        }
    }
}

pub fn validate_recording(rec: &StrokeRecording, policy: &ValidationPolicy) -> Vec<Finding> {
    let mut findings = Vec::new();
    let count = rec.frame_count();
    if count < policy.min_frames {
        findings.push(Finding::TooFewFrames { count, min: policy.min_frames });
    } else if count > policy.max_frames {
        findings.push(Finding::TooManyFrames { count, max: policy.max_frames });
    }
    if rec.fps != policy.expected_fps {
        findings.push(Finding::FrameRate { fps: rec.fps, expected: policy.expected_fps });
    }
    for pair in rec.frames().windows(2) {
        for marker in MarkerId::all() {
            let a = pair[0].position(marker);
            let b = pair[1].position(marker);
            let distance = (b.x - a.x).hypot(b.y - a.y);
            if distance > policy.max_jump {
                findings.push(Finding::Jump { frame: pair[1].index, marker, distance });
            }
        }
    }
    findings
}
