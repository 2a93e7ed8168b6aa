//! Manifests and recording stores.
//!
//! A manifest is a CSV with the header `recording,metadata`; each row names a
//! recording CSV and its JSON sidecar, relative to the manifest's directory.
//! A store is a directory holding canonical recordings, their sidecars and a
//! `manifest.csv` listing them.

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use super::CliError;
use crate::stroke::{
    normalize_origin, parse_recording, read_metadata, serialize_recording, write_metadata, StrokeRecording,
};

pub const MANIFEST_FILE: &str = "manifest.csv";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub recording: PathBuf,
    pub metadata: PathBuf,
}

pub(crate) fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

pub(crate) fn write_text(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|source| CliError::Io { path: parent.to_path_buf(), source })?;
    }
    fs::write(path, contents).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

/// Accepts either a manifest file or a store directory containing one.
pub fn manifest_path(input: &Path) -> PathBuf {
    if input.is_dir() {
        input.join(MANIFEST_FILE)
    } else {
        input.to_path_buf()
    }
}

/// Entries with paths resolved against the manifest's directory.
pub fn read_manifest(path: &Path) -> Result<Vec<ManifestEntry>, CliError> {
    let text = read_text(path)?;
    let base = path.parent().unwrap_or(Path::new(""));
    let bad =
        |message: String| CliError::Stage { stage: "manifest", message: format!("{}: {message}", path.display()) };
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| bad(e.to_string()))?.clone();
    if headers.iter().collect::<Vec<_>>() != ["recording", "metadata"] {
        return Err(bad("header must be `recording,metadata`".into()));
    }
    let mut entries = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| bad(e.to_string()))?;
        if record.len() != 2 {
            return Err(bad(format!("expected 2 columns, found {}", record.len())));
        }
        entries.push(ManifestEntry { recording: base.join(&record[0]), metadata: base.join(&record[1]) });
    }
    if entries.is_empty() {
        return Err(bad("no recordings listed".into()));
    }
    Ok(entries)
}

pub fn load_entry(entry: &ManifestEntry) -> Result<StrokeRecording, CliError> {
    let meta = read_metadata(&read_text(&entry.metadata)?)
        .map_err(|e| CliError::Stage { stage: "ingest", message: format!("{}: {e}", entry.metadata.display()) })?;
    let rec = parse_recording(&read_text(&entry.recording)?, &meta)
        .map_err(|e| CliError::Stage { stage: "ingest", message: format!("{}: {e}", entry.recording.display()) })?;
    // Normalization is idempotent, so this only restores the flag.
    Ok(if meta.normalized { normalize_origin(&rec) } else { rec })
}

/// Loads every recording a manifest (or store directory) lists, in manifest
/// order, rejecting duplicate subject ids.
pub fn load_recordings(input: &Path) -> Result<Vec<StrokeRecording>, CliError> {
    let entries = read_manifest(&manifest_path(input))?;
    let recs = entries.iter().map(load_entry).collect::<Result<Vec<_>, _>>()?;
    check_unique_ids(&recs)?;
    Ok(recs)
}

pub(crate) fn check_unique_ids(recs: &[StrokeRecording]) -> Result<(), CliError> {
    let mut seen = HashSet::new();
    for rec in recs {
        if !seen.insert(rec.subject_id.as_str()) {
            return Err(CliError::Stage {
                stage: "manifest",
                message: format!("duplicate subject_id `{}`", rec.subject_id),
            });
        }
    }
    Ok(())
}

fn file_stem(subject_id: &str) -> Result<&str, CliError> {
    let ok = !subject_id.is_empty()
        && subject_id.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'))
        && !subject_id.starts_with('.');
    if ok {
        Ok(subject_id)
    } else {
        Err(CliError::Stage {
            stage: "store",
            message: format!("subject_id `{subject_id}` cannot be used as a file name"),
        })
    }
}

/// Writes `{subject_id}.csv`, `{subject_id}.json` and `manifest.csv` into `dir`.
pub fn write_store(dir: &Path, recs: &[StrokeRecording]) -> Result<(), CliError> {
    check_unique_ids(recs)?;
    let mut manifest = String::from("recording,metadata\n");
    for rec in recs {
        let stem = file_stem(&rec.subject_id)?;
        write_text(&dir.join(format!("{stem}.csv")), &serialize_recording(rec))?;
        write_text(&dir.join(format!("{stem}.json")), &write_metadata(&rec.metadata()))?;
        manifest.push_str(&format!("{stem}.csv,{stem}.json\n"));
    }
    write_text(&dir.join(MANIFEST_FILE), &manifest)
}
