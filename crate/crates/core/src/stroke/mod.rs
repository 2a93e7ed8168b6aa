//! Stroke recordings: marker layout, skill labels and shoulder-origin
//! normalization.

mod io;
mod validate;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use io::{parse_recording, read_metadata, serialize_recording, write_metadata, RecordingMetadata};
pub use validate::{validate_recording, Finding, ValidationPolicy};

/// Number of tracked marking points per frame.
pub const MARKER_COUNT: usize = 9;

pub const DEFAULT_FPS: f64 = 90.0;
pub const DEFAULT_RESOLUTION: (u32, u32) = (512, 512);

#[derive(Debug, Error, PartialEq)]
pub enum DataError {
    #[error("format error: {0}")]
    Format(String),
    #[error("sequence error at row {row}: expected frame {expected}, found {found}")]
    Sequence { row: usize, expected: u64, found: String },
    #[error("value error: row {row}, {column}")]
    Value { row: usize, column: String },
    #[error("invalid marker ordinal {0} (expected 1..=9)")]
    InvalidMarker(u8),
    #[error("unknown skill class `{0}`")]
    UnknownSkill(String),
    #[error("recording has no frames")]
    Empty,
}

/// One of the nine marking points on the right arm and racket, numbered 1..=9.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct MarkerId(u8);

impl MarkerId {
    pub const SHOULDER: MarkerId = MarkerId(1);
    pub const RACKET: [MarkerId; 3] = [MarkerId(7), MarkerId(8), MarkerId(9)];

    pub fn new(ordinal: u8) -> Result<Self, DataError> {
        if (1..=MARKER_COUNT as u8).contains(&ordinal) {
            Ok(MarkerId(ordinal))
        } else {
            Err(DataError::InvalidMarker(ordinal))
        }
    }

    pub fn ordinal(self) -> u8 {
        self.0
    }

    /// Zero-based position within a frame.
    pub fn index(self) -> usize {
        self.0 as usize - 1
    }

    pub fn all() -> impl Iterator<Item = MarkerId> {
        (1..=MARKER_COUNT as u8).map(MarkerId)
    }

    pub fn anatomical_name(self) -> &'static str {
        match self.0 {
            1 => "acromioclavicular joint",
            2 => "acromiale",
            3 => "radiale",
            4 => "ulna",
            5 => "stylium",
            6 => "stylium ulnae",
            7 => "racket inner side",
            8 => "racket outer side",
            9 => "racket top",
            _ => unreachable!("marker ordinal validated at construction"),
        }
    }
}

impl TryFrom<u8> for MarkerId {
    type Error = DataError;

    fn try_from(value: u8) -> Result<Self, Self::Error> {
        MarkerId::new(value)
    }
}

impl From<MarkerId> for u8 {
    fn from(m: MarkerId) -> u8 {
        m.0
    }
}

impl fmt::Display for MarkerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "M{}", self.0)
    }
}

impl FromStr for MarkerId {
    type Err = DataError;

    /// Accepts `9`, `m9` or `M9`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let digits = s.trim().trim_start_matches(['m', 'M']);
        let ordinal: u8 = digits.parse().map_err(|_| DataError::Format(format!("invalid marker `{s}`")))?;
        MarkerId::new(ordinal)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SkillClass {
    Expert,
    Intermediate,
    Novice,
}

impl SkillClass {
    pub const ALL: [SkillClass; 3] = [SkillClass::Expert, SkillClass::Intermediate, SkillClass::Novice];

    pub fn as_str(self) -> &'static str {
        match self {
            SkillClass::Expert => "expert",
            SkillClass::Intermediate => "intermediate",
            SkillClass::Novice => "novice",
        }
    }
}

impl fmt::Display for SkillClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SkillClass {
    type Err = DataError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "expert" => Ok(SkillClass::Expert),
            "intermediate" => Ok(SkillClass::Intermediate),
            "novice" => Ok(SkillClass::Novice),
            _ => Err(DataError::UnknownSkill(s.to_string())),
        }
    }
}

/// Horizontal or vertical image axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
}

impl Axis {
    pub const BOTH: [Axis; 2] = [Axis::X, Axis::Y];

    pub fn as_str(self) -> &'static str {
        match self {
            Axis::X => "x",
            Axis::Y => "y",
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn get(self, axis: Axis) -> f64 {
        match axis {
            Axis::X => self.x,
            Axis::Y => self.y,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub index: u64,
    pub positions: [Point; MARKER_COUNT],
}

impl Frame {
    pub fn position(&self, marker: MarkerId) -> Point {
        self.positions[marker.index()]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrokeRecording {
    pub subject_id: String,
    pub skill: SkillClass,
    pub fps: f64,
    pub resolution: (u32, u32),
    frames: Vec<Frame>,
    normalized: bool,
}

impl StrokeRecording {
    /// Builds a recording from frame positions; frame indices are assigned 0.. in order.
    pub fn from_positions(meta: &RecordingMetadata, positions: Vec<[Point; MARKER_COUNT]>) -> Result<Self, DataError> {
        if positions.is_empty() {
            return Err(DataError::Empty);
        }
        for (row, frame) in positions.iter().enumerate() {
            for (m, p) in frame.iter().enumerate() {
                for (axis, v) in [("x", p.x), ("y", p.y)] {
                    if !v.is_finite() {
                        return Err(DataError::Value { row: row + 1, column: format!("m{}_{axis}", m + 1) });
                    }
                }
            }
        }
        let frames =
            positions.into_iter().enumerate().map(|(i, positions)| Frame { index: i as u64, positions }).collect();
        Ok(StrokeRecording {
            subject_id: meta.subject_id.clone(),
            skill: meta.skill,
            fps: meta.fps,
            resolution: meta.resolution,
            frames,
            normalized: meta.normalized,
        })
    }

    pub fn frames(&self) -> &[Frame] {
        &self.frames
    }

    pub fn frame_count(&self) -> usize {
        self.frames.len()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn metadata(&self) -> RecordingMetadata {
        RecordingMetadata {
            subject_id: self.subject_id.clone(),
            skill: self.skill,
            fps: self.fps,
            resolution: self.resolution,
            normalized: self.normalized,
        }
    }

    /// Coordinate series of one marker along one axis.
    pub fn series(&self, marker: MarkerId, axis: Axis) -> Vec<f64> {
        self.frames.iter().map(|f| f.position(marker).get(axis)).collect()
    }

    /// Applies `f` to every coordinate, keeping metadata and the normalized flag.
    pub fn map_coordinates(&self, mut f: impl FnMut(Axis, f64) -> f64) -> StrokeRecording {
        let frames = self
            .frames
            .iter()
            .map(|fr| {
                let mut positions = fr.positions;
                for p in positions.iter_mut() {
                    *p = Point::new(f(Axis::X, p.x), f(Axis::Y, p.y));
                }
                Frame { index: fr.index, positions }
            })
            .collect();
        StrokeRecording { frames, ..self.clone() }
    }
}

/// Translates every coordinate so that marker 1 in the first frame sits at
/// the origin.
pub fn normalize_origin(rec: &StrokeRecording) -> StrokeRecording {
    let origin = rec.frames[0].position(MarkerId::SHOULDER);
    let mut out = rec.map_coordinates(|axis, v| v - origin.get(axis));
    out.normalized = true;
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn meta() -> RecordingMetadata {
        RecordingMetadata::new("s1", SkillClass::Expert)
    }

    fn constant_rec(frames: usize, p: Point) -> StrokeRecording {
        StrokeRecording::from_positions(&meta(), vec![[p; MARKER_COUNT]; frames]).unwrap()
    }

    #[test]
    fn marker_ordinals_are_bounded() {
        assert!(MarkerId::new(0).is_err());
        assert!(MarkerId::new(10).is_err());
        assert_eq!(MarkerId::all().count(), 9);
        assert_eq!(MarkerId::new(9).unwrap().anatomical_name(), "racket top");
        assert_eq!("m4".parse::<MarkerId>().unwrap().ordinal(), 4);
    }

    #[test]
    fn normalize_subtracts_first_shoulder_position() {
        let mut frames = vec![[Point::new(0.0, 0.0); MARKER_COUNT]; 5];
        frames[0][0] = Point::new(100.0, 200.0);
        frames[3][3] = Point::new(130.0, 190.0);
        let rec = StrokeRecording::from_positions(&meta(), frames).unwrap();
        let norm = normalize_origin(&rec);
        assert!(norm.is_normalized());
        assert_eq!(norm.frames()[3].positions[3], Point::new(30.0, -10.0));
        assert_eq!(norm.frames()[0].positions[0], Point::new(0.0, 0.0));
    }

    #[test]
    fn normalize_is_idempotent() {
        let rec = constant_rec(4, Point::new(3.5, -1.0));
        let once = normalize_origin(&rec);
        assert_eq!(normalize_origin(&once), once);
    }

    #[test]
    fn constant_recording_collapses_to_origin() {
        let norm = normalize_origin(&constant_rec(6, Point::new(100.0, 200.0)));
        assert!(norm.frames().iter().all(|f| f.positions.iter().all(|p| *p == Point::new(0.0, 0.0))));
    }

    #[test]
    fn empty_and_non_finite_positions_rejected() {
        assert_eq!(StrokeRecording::from_positions(&meta(), vec![]), Err(DataError::Empty));
        let mut frames = vec![[Point::default(); MARKER_COUNT]; 2];
        frames[1][4].y = f64::INFINITY;
        assert_eq!(
            StrokeRecording::from_positions(&meta(), frames),
            Err(DataError::Value { row: 2, column: "m5_y".into() })
        );
    }
}
