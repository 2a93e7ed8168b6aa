//! Overlapping fixed-width windows over normalized recordings, flattened into
//! classification instances.
//!
//! Feature layout inside a window is frame-major, then marker, then axis:
//! `index = t * 18 + (m - 1) * 2 + a` with `a = 0` for x and `a = 1` for y.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::stroke::{SkillClass, StrokeRecording, MARKER_COUNT};

pub const VALUES_PER_FRAME: usize = MARKER_COUNT * 2;

#[derive(Debug, Error, PartialEq)]
pub enum WindowError {
    #[error("invalid window spec: window_len {window_len}, overlap {overlap}")]
    InvalidSpec { window_len: usize, overlap: usize },
    #[error("recording `{subject}` has {frames} frames, window needs {needed}")]
    InsufficientData { subject: String, frames: usize, needed: usize },
    #[error("recording `{0}` is not normalized to the shoulder origin")]
    NotNormalized(String),
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("no classes selected")]
    NoClasses,
    #[error("schema error: {0}")]
    Schema(String),
    #[error("dataset format error: {0}")]
    Format(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowSpec {
    pub window_len: usize,
    pub overlap: usize,
    /// Window frame-to-frame deltas instead of positions.
    pub differenced: bool,
}

impl Default for WindowSpec {
    fn default() -> Self {
        WindowSpec { window_len: 5, overlap: 3, differenced: false }
    }
}

impl WindowSpec {
    pub fn new(window_len: usize, overlap: usize) -> Result<Self, WindowError> {
        let spec = WindowSpec { window_len, overlap, differenced: false };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), WindowError> {
        if self.window_len == 0 || self.overlap >= self.window_len {
            return Err(WindowError::InvalidSpec { window_len: self.window_len, overlap: self.overlap });
        }
        Ok(())
    }

    pub fn stride(&self) -> usize {
        self.window_len - self.overlap
    }

    pub fn feature_count(&self) -> usize {
        self.window_len * VALUES_PER_FRAME
    }

    /// Number of windows over a series of `frames` frames.
    pub fn window_count(&self, frames: usize) -> usize {
        if frames < self.window_len {
            0
        } else {
            (frames - self.window_len) / self.stride() + 1
        }
    }

    /// Attribute names `m{m}_{x|y}_t{t}` (prefixed with `d` when differenced).
    pub fn schema(&self) -> Vec<String> {
        let prefix = if self.differenced { "d" } else { "" };
        let mut names = Vec::with_capacity(self.feature_count());
        for t in 0..self.window_len {
            for m in 1..=MARKER_COUNT {
                for axis in ["x", "y"] {
                    names.push(format!("{prefix}m{m}_{axis}_t{t}"));
                }
            }
        }
        names
    }
}

/// Where a window came from.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WindowSource {
    pub subject_id: String,
    pub start_frame: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureWindow {
    pub features: Vec<f64>,
    pub label: SkillClass,
    pub source: WindowSource,
}

pub fn make_windows(rec: &StrokeRecording, spec: &WindowSpec) -> Result<Vec<FeatureWindow>, WindowError> {
    spec.validate()?;
    if !rec.is_normalized() {
        return Err(WindowError::NotNormalized(rec.subject_id.clone()));
    }
    let rows: Vec<[f64; VALUES_PER_FRAME]> = rec
        .frames()
        .iter()
        .map(|f| {
            let mut row = [0.0; VALUES_PER_FRAME];
            for (m, p) in f.positions.iter().enumerate() {
                row[2 * m] = p.x;
                row[2 * m + 1] = p.y;
            }
            row
        })
        .collect();
    let rows = if spec.differenced {
        rows.windows(2).map(|w| std::array::from_fn(|i| w[1][i] - w[0][i])).collect()
    } else {
        rows
    };
    if rows.len() < spec.window_len {
        return Err(WindowError::InsufficientData {
            subject: rec.subject_id.clone(),
            frames: rec.frame_count(),
            needed: spec.window_len + usize::from(spec.differenced),
        });
    }

    let count = spec.window_count(rows.len());
    Ok((0..count)
        .map(|w| {
            let start = w * spec.stride();
            let features = rows[start..start + spec.window_len].iter().flatten().copied().collect();
            FeatureWindow {
                features,
                label: rec.skill,
                source: WindowSource { subject_id: rec.subject_id.clone(), start_frame: rec.frames()[start].index },
            }
        })
        .collect())
}

/// Ordered collection of instances sharing one schema and class alphabet.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    schema: Vec<String>,
    classes: Vec<SkillClass>,
    instances: Vec<FeatureWindow>,
}

impl Dataset {
    /// The class alphabet is kept in canonical (expert, intermediate, novice) order.
    pub fn new(
        schema: Vec<String>,
        classes: &[SkillClass],
        instances: Vec<FeatureWindow>,
    ) -> Result<Self, WindowError> {
        let classes: Vec<SkillClass> = classes.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
        if classes.is_empty() {
            return Err(WindowError::NoClasses);
        }
        for (i, inst) in instances.iter().enumerate() {
            if inst.features.len() != schema.len() {
                return Err(WindowError::Schema(format!(
                    "instance {i} has {} features, schema has {}",
                    inst.features.len(),
                    schema.len()
                )));
            }
            if !classes.contains(&inst.label) {
                return Err(WindowError::Schema(format!("instance {i} label {} not in class alphabet", inst.label)));
            }
        }
        Ok(Dataset { schema, classes, instances })
    }

    pub fn schema(&self) -> &[String] {
        &self.schema
    }

    pub fn classes(&self) -> &[SkillClass] {
        &self.classes
    }

    pub fn instances(&self) -> &[FeatureWindow] {
        &self.instances
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn n_attributes(&self) -> usize {
        self.schema.len()
    }

    pub fn class_index(&self, class: SkillClass) -> Option<usize> {
        self.classes.iter().position(|&c| c == class)
    }

    /// Class index of every instance.
    pub fn label_indices(&self) -> Vec<usize> {
        self.instances.iter().map(|i| self.class_index(i.label).expect("labels validated at construction")).collect()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.classes.len()];
        for idx in self.label_indices() {
            counts[idx] += 1;
        }
        counts
    }

    /// Instances at `indices`, in that order, with the same schema and alphabet.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            schema: self.schema.clone(),
            classes: self.classes.clone(),
            instances: indices.iter().map(|&i| self.instances[i].clone()).collect(),
        }
    }

    pub fn same_layout(&self, other: &Dataset) -> bool {
        self.schema == other.schema && self.classes == other.classes
    }
}

/// Windows every recording whose skill is in `classes`, concatenated in input order.
pub fn build_dataset(
    recs: &[StrokeRecording],
    spec: &WindowSpec,
    classes: &[SkillClass],
) -> Result<Dataset, WindowError> {
    if classes.is_empty() {
        return Err(WindowError::NoClasses);
    }
    let mut instances = Vec::new();
    for rec in recs.iter().filter(|r| classes.contains(&r.skill)) {
        instances.extend(make_windows(rec, spec)?);
    }
    if instances.is_empty() {
        return Err(WindowError::EmptyDataset);
    }
    Dataset::new(spec.schema(), classes, instances)
}

const PROVENANCE_COLUMNS: [&str; 3] = ["class", "subject_id", "start_frame"];

/// CSV with the attribute columns, then `class`, then the window provenance
/// (`subject_id`, `start_frame`).
pub fn export_dataset(ds: &Dataset) -> String {
    let mut out = ds.schema.join(",");
    for col in PROVENANCE_COLUMNS {
        out.push(',');
        out.push_str(col);
    }
    out.push('\n');
    for inst in &ds.instances {
        for v in &inst.features {
            out.push_str(&v.to_string());
            out.push(',');
        }
        out.push_str(&format!("{},{},{}\n", inst.label, csv_field(&inst.source.subject_id), inst.source.start_frame));
    }
    out
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Reads a dataset CSV. Files without the provenance columns are accepted;
/// their instances get the source `row{N}` at frame 0.
pub fn import_dataset(text: &str) -> Result<Dataset, WindowError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let header: Vec<String> =
        reader.headers().map_err(|e| WindowError::Format(e.to_string()))?.iter().map(String::from).collect();
    let (n_attr, with_source) = if header.ends_with(&PROVENANCE_COLUMNS.map(String::from)) {
        (header.len() - 3, true)
    } else if header.last().map(String::as_str) == Some("class") {
        (header.len() - 1, false)
    } else {
        return Err(WindowError::Format("header must end with `class` or `class,subject_id,start_frame`".into()));
    };
    if n_attr == 0 {
        return Err(WindowError::Format("no attribute columns".into()));
    }

    let mut instances = Vec::new();
    let mut classes = BTreeSet::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| WindowError::Format(format!("row {row}: {e}")))?;
        let features = record
            .iter()
            .take(n_attr)
            .enumerate()
            .map(|(c, cell)| match cell.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(WindowError::Format(format!("row {row}, {}: invalid value `{cell}`", header[c]))),
            })
            .collect::<Result<Vec<f64>, _>>()?;
        let label: SkillClass = record[n_attr]
            .parse()
            .map_err(|_| WindowError::Format(format!("row {row}: unknown class `{}`", &record[n_attr])))?;
        let source = if with_source {
            let start_frame = record[n_attr + 2]
                .parse()
                .map_err(|_| WindowError::Format(format!("row {row}: invalid start_frame")))?;
            WindowSource { subject_id: record[n_attr + 1].to_string(), start_frame }
        } else {
            WindowSource { subject_id: format!("row{row}"), start_frame: 0 }
        };
        classes.insert(label);
        instances.push(FeatureWindow { features, label, source });
    }
    if instances.is_empty() {
        return Err(WindowError::EmptyDataset);
    }
    let classes: Vec<SkillClass> = classes.into_iter().collect();
    Dataset::new(header[..n_attr].to_vec(), &classes, instances)
}
