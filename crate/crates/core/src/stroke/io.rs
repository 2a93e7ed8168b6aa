//! Recording CSV and metadata sidecar formats.
//!
//! The CSV has the header `frame,m1_x,m1_y,...,m9_x,m9_y` and one row per
//! frame. Frame indices must run 0, 1, 2, ... without gaps. The sidecar is a
//! small JSON object carrying subject, skill label, frame rate and sensor
//! resolution.

use serde::{Deserialize, Serialize};

use super::{DataError, Point, SkillClass, StrokeRecording, DEFAULT_FPS, DEFAULT_RESOLUTION, MARKER_COUNT};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordingMetadata {
    pub subject_id: String,
    pub skill: SkillClass,
    #[serde(default = "default_fps")]
    pub fps: f64,
    #[serde(default = "default_resolution")]
    pub resolution: (u32, u32),
    /// Set for recordings already translated to the shoulder origin.
    #[serde(default, skip_serializing_if = "is_false")]
    pub normalized: bool,
}

fn default_fps() -> f64 {
    DEFAULT_FPS
}

fn default_resolution() -> (u32, u32) {
    DEFAULT_RESOLUTION
}

fn is_false(b: &bool) -> bool {
    !*b
}

impl RecordingMetadata {
    pub fn new(subject_id: impl Into<String>, skill: SkillClass) -> Self {
        RecordingMetadata {
            subject_id: subject_id.into(),
            skill,
            fps: DEFAULT_FPS,
            resolution: DEFAULT_RESOLUTION,
            normalized: false,
        }
    }
}

pub fn read_metadata(json: &str) -> Result<RecordingMetadata, DataError> {
    let meta: RecordingMetadata =
        serde_json::from_str(json).map_err(|e| DataError::Format(format!("metadata: {e}")))?;
    if !(meta.fps.is_finite() && meta.fps > 0.0) {
        return Err(DataError::Format(format!("metadata: fps must be positive, got {}", meta.fps)));
    }
    Ok(meta)
}

pub fn write_metadata(meta: &RecordingMetadata) -> String {
    let mut s = serde_json::to_string_pretty(meta).expect("metadata serializes");
    s.push('\n');
    s
}

pub(crate) fn header_columns() -> Vec<String> {
    let mut cols = vec!["frame".to_string()];
    for m in 1..=MARKER_COUNT {
        cols.push(format!("m{m}_x"));
        cols.push(format!("m{m}_y"));
    }
    cols
}

/// Parses a recording CSV. The result is never flagged as normalized, whatever
/// `metadata.normalized` says, unless the caller sets it afterwards.
pub fn parse_recording(csv_text: &str, metadata: &RecordingMetadata) -> Result<StrokeRecording, DataError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(csv_text.as_bytes());

    let expected = header_columns();
    let header = reader.headers().map_err(|e| DataError::Format(e.to_string()))?;
    if header.len() != expected.len() || header.iter().zip(&expected).any(|(a, b)| a != b) {
        return Err(DataError::Format(format!(
            "header must be `{}`, found `{}`",
            expected.join(","),
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }

    let mut positions = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| DataError::Format(format!("row {row}: {e}")))?;
        if record.len() != expected.len() {
            return Err(DataError::Format(format!(
                "row {row}: expected {} fields, found {}",
                expected.len(),
                record.len()
            )));
        }
        let frame_cell = &record[0];
        let frame: u64 = frame_cell.parse().map_err(|_| DataError::Value { row, column: "frame".into() })?;
        if frame != i as u64 {
            return Err(DataError::Sequence { row, expected: i as u64, found: frame_cell.to_string() });
        }
        let mut frame_positions = [Point::default(); MARKER_COUNT];
        for (m, p) in frame_positions.iter_mut().enumerate() {
            let col = 1 + 2 * m;
            p.x = parse_coordinate(&record[col], row, &expected[col])?;
            p.y = parse_coordinate(&record[col + 1], row, &expected[col + 1])?;
        }
        positions.push(frame_positions);
    }
    if positions.is_empty() {
        return Err(DataError::Format("no data rows".into()));
    }

    let meta = RecordingMetadata { normalized: false, ..metadata.clone() };
    StrokeRecording::from_positions(&meta, positions)
}

fn parse_coordinate(cell: &str, row: usize, column: &str) -> Result<f64, DataError> {
    match cell.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(DataError::Value { row, column: column.to_string() }),
    }
}

/// Writes the canonical CSV form. Coordinates use the shortest decimal text
/// that parses back to the same `f64`.
pub fn serialize_recording(rec: &StrokeRecording) -> String {
    let mut out = header_columns().join(",");
    out.push('\n');
    for frame in rec.frames() {
        out.push_str(&frame.index.to_string());
        for p in &frame.positions {
            out.push_str(&format!(",{},{}", p.x, p.y));
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn meta() -> RecordingMetadata {
        RecordingMetadata::new("p01", SkillClass::Novice)
    }

    fn csv_with_rows(rows: usize) -> String {
        let mut s = header_columns().join(",");
        s.push('\n');
        for r in 0..rows {
            s.push_str(&r.to_string());
            for m in 0..MARKER_COUNT {
                s.push_str(&format!(",{},{}", r * 10 + m, m as f64 * 0.5));
            }
            s.push('\n');
        }
        s
    }

    #[test]
    fn parses_well_formed_csv() {
        let rec = parse_recording(&csv_with_rows(40), &meta()).unwrap();
        assert_eq!(rec.frame_count(), 40);
        assert!(!rec.is_normalized());
        assert_eq!(rec.subject_id, "p01");
        assert_eq!(rec.frames()[39].index, 39);
    }

    #[test]
    fn gap_in_frame_indices_is_sequence_error() {
        let text = csv_with_rows(3).replacen("\n2,", "\n3,", 1);
        match parse_recording(&text, &meta()) {
            Err(DataError::Sequence { row, .. }) => assert_eq!(row, 3),
            other => panic!("expected sequence error, got {other:?}"),
        }
    }

    #[test]
    fn duplicate_frame_index_is_sequence_error() {
        let text = csv_with_rows(3).replacen("\n1,", "\n0,", 1);
        assert!(matches!(parse_recording(&text, &meta()), Err(DataError::Sequence { row: 2, .. })));
    }

    #[test]
    fn nan_cell_names_row_and_column() {
        let mut lines: Vec<String> = csv_with_rows(8).lines().map(String::from).collect();
        let mut cells: Vec<String> = lines[7].split(',').map(String::from).collect();
        cells[8] = "NaN".into(); // m4_y
        lines[7] = cells.join(",");
        let err = parse_recording(&lines.join("\n"), &meta()).unwrap_err();
        assert_eq!(err, DataError::Value { row: 7, column: "m4_y".into() });
        assert_eq!(err.to_string(), "value error: row 7, m4_y");
    }

    #[test]
    fn missing_and_non_numeric_cells_rejected() {
        let text = csv_with_rows(2).replacen(",1,0.5,", ",,0.5,", 1);
        assert!(matches!(parse_recording(&text, &meta()), Err(DataError::Value { row: 1, .. })));
        let text = csv_with_rows(2).replacen(",1,0.5,", ",abc,0.5,", 1);
        assert!(matches!(parse_recording(&text, &meta()), Err(DataError::Value { row: 1, .. })));
    }

    #[test]
    fn bad_header_and_short_rows_are_format_errors() {
        let text = csv_with_rows(2).replacen("m1_x", "m1x", 1);
        assert!(matches!(parse_recording(&text, &meta()), Err(DataError::Format(_))));
        let text = format!("{}0,1,2\n", header_columns().join(",") + "\n");
        assert!(matches!(parse_recording(&text, &meta()), Err(DataError::Format(_))));
        let header_only = header_columns().join(",") + "\n";
        assert!(matches!(parse_recording(&header_only, &meta()), Err(DataError::Format(_))));
    }

    #[test]
    fn metadata_defaults_fps_and_resolution() {
        let meta = read_metadata(r#"{"subject_id": "a", "skill": "expert"}"#).unwrap();
        assert_eq!(meta.fps, 90.0);
        assert_eq!(meta.resolution, (512, 512));
        let meta =
            read_metadata(r#"{"subject_id": "a", "skill": "novice", "fps": 120, "resolution": [640, 480]}"#).unwrap();
        assert_eq!(meta.fps, 120.0);
        assert_eq!(read_metadata(&write_metadata(&meta)).unwrap(), meta);
        assert!(read_metadata(r#"{"subject_id": "a", "skill": "pro"}"#).is_err());
    }

    proptest! {
        #[test]
        fn csv_round_trip_is_bit_exact(
            coords in proptest::collection::vec(proptest::num::f64::NORMAL | proptest::num::f64::ZERO, 18..=18 * 12)
        ) {
            let frames = coords.len() / 18;
            let positions: Vec<[Point; MARKER_COUNT]> = (0..frames)
                .map(|f| {
                    let mut p = [Point::default(); MARKER_COUNT];
                    for m in 0..MARKER_COUNT {
                        p[m] = Point::new(coords[f * 18 + 2 * m], coords[f * 18 + 2 * m + 1]);
                    }
                    p
                })
                .collect();
            let rec = StrokeRecording::from_positions(&meta(), positions).unwrap();
            let text = serialize_recording(&rec);
            let back = parse_recording(&text, &meta()).unwrap();
            for (a, b) in rec.frames().iter().zip(back.frames()) {
                for (p, q) in a.positions.iter().zip(&b.positions) {
                    prop_assert_eq!(p.x.to_bits(), q.x.to_bits());
                    prop_assert_eq!(p.y.to_bits(), q.y.to_bits());
                }
            }
            prop_assert_eq!(serialize_recording(&back), text);
        }
    }
}
