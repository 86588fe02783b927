//! On-disk data directory shared by the CLI and the HTTP service.
//!
//! ```text
//! <root>/config.toml              optional pipeline configuration
//! <root>/recordings/<id>.jsonl    skeleton recordings
//! <root>/annotations/<id>.json    annotation sets
//! <root>/runs/<id>/               exported pipeline reports
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use super::annotations::AnnotationSet;
use super::config::{PipelineConfig, PipelineSettings};
use super::export::export_report;
use super::recording::load_recording;
use super::run::{run_pipeline, Report};
use super::PipelineError;
use crate::control::ExecutionMode;
use crate::skeleton::SkeletonSequence;

pub const CONFIG_FILE: &str = "config.toml";

/// Recording ids are file stems made of ASCII letters, digits, `-` and `_`.
pub fn valid_id(id: &str) -> bool {
    !id.is_empty() && id.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DataDir {
    root: PathBuf,
}

impl DataDir {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn config_path(&self) -> PathBuf {
        self.root.join(CONFIG_FILE)
    }

    pub fn recording_path(&self, id: &str) -> PathBuf {
        self.root.join("recordings").join(format!("{id}.jsonl"))
    }

    pub fn annotation_path(&self, id: &str) -> PathBuf {
        self.root.join("annotations").join(format!("{id}.json"))
    }

    pub fn run_dir(&self, id: &str) -> PathBuf {
        self.root.join("runs").join(id)
    }

    pub fn has_recording(&self, id: &str) -> bool {
        valid_id(id) && self.recording_path(id).is_file()
    }

    /// Sorted ids of all recordings.
    pub fn recording_ids(&self) -> Result<Vec<String>, PipelineError> {
        let dir = self.root.join("recordings");
        let entries = match fs::read_dir(&dir) {
            Ok(entries) => entries,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
            Err(e) => return Err(PipelineError::io(&dir, e)),
        };
        let mut ids = Vec::new();
        for entry in entries {
            let path = entry.map_err(|e| PipelineError::io(&dir, e))?.path();
            if path.extension().is_some_and(|e| e == "jsonl") {
                if let Some(id) = path.file_stem().and_then(|s| s.to_str()) {
                    if valid_id(id) {
                        ids.push(id.to_string());
                    }
                }
            }
        }
        ids.sort();
        Ok(ids)
    }

    pub fn load_recording(&self, id: &str) -> Result<SkeletonSequence, PipelineError> {
        load_recording(&self.recording_path(id))
    }

    pub fn load_annotations(&self, id: &str) -> Result<Option<AnnotationSet>, PipelineError> {
        load_annotations_file(&self.annotation_path(id))
    }

    /// `config.toml` when present, defaults otherwise.
    pub fn settings(&self) -> Result<PipelineSettings, PipelineError> {
        let path = self.config_path();
        if path.is_file() {
            PipelineConfig::load(&path)?.resolve().map_err(|e| e.with_path(&path))
        } else {
            Ok(PipelineSettings::default())
        }
    }

    /// Runs one recording with its stored annotations and exports the report
    /// to `out_dir`.
    pub fn run(
        &self,
        id: &str,
        settings: &PipelineSettings,
        mode: ExecutionMode,
        out_dir: &Path,
    ) -> Result<Report, PipelineError> {
        let seq = self.load_recording(id)?;
        let ann = self.load_annotations(id)?;
        run_and_export(id, &seq, ann.as_ref(), settings, mode, out_dir)
    }
}

/// Reads an annotation file; a missing file is `None`.
pub fn load_annotations_file(path: &Path) -> Result<Option<AnnotationSet>, PipelineError> {
    match fs::read_to_string(path) {
        Ok(text) => serde_json::from_str(&text)
            .map(Some)
            .map_err(|e| {
                PipelineError::Parse {
                    line: e.line(),
                    message: e.to_string(),
                }
                .with_path(path)
            }),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
        Err(e) => Err(PipelineError::io(path, e)),
    }
}

/// Runs the pipeline and replaces the contents of `out_dir` with the export.
pub fn run_and_export(
    id: &str,
    seq: &SkeletonSequence,
    annotations: Option<&AnnotationSet>,
    settings: &PipelineSettings,
    mode: ExecutionMode,
    out_dir: &Path,
) -> Result<Report, PipelineError> {
    let report = run_pipeline(id, seq, annotations, settings, mode)?;
    if out_dir.exists() {
        fs::remove_dir_all(out_dir).map_err(|e| PipelineError::io(out_dir, e))?;
    }
    export_report(&report, out_dir)?;
    Ok(report)
}
