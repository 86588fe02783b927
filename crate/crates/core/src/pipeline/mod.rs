//! File ingestion, annotation, noise detection, end-to-end runs and export.

pub mod annotations;
pub mod config;
pub mod export;
pub mod fixtures;
pub mod noise;
pub mod recording;
pub mod run;
pub mod store;

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::control::ControlError;
use crate::limits::LimitError;
use crate::skeleton::SkeletonError;

pub use annotations::{apply_annotations, AnnotationError, AnnotationSet, Provenance, Segment};
pub use config::{PipelineConfig, PipelineSettings};
pub use export::{export_report, read_angle_csv, ActionFiles, SUMMARY_FILE};
pub use noise::{detect_noisy_frames, NoiseDetectorConfig, DEFAULT_JUMP_THRESHOLD};
pub use recording::{load_recording, read_recording, recording_id, save_recording, write_recording};
pub use run::{execute_trajectory, run_pipeline, ActionFailure, ActionOutcome, ActionReport, Report};
pub use store::{run_and_export, DataDir};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("frame {frame}: missing joint {joint:?}")]
    Schema { frame: usize, joint: &'static str },
    #[error("frame {frame}: timestamp not after the previous frame")]
    Order { frame: usize },
    #[error("csv line {line}: {message}")]
    Csv { line: usize, message: String },
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Limit(#[from] LimitError),
    #[error(transparent)]
    Control(#[from] ControlError),
    #[error(transparent)]
    Skeleton(#[from] SkeletonError),
    #[error(transparent)]
    Annotation(#[from] AnnotationError),
    #[error("{}: {source}", path.display())]
    InFile {
        path: PathBuf,
        source: Box<PipelineError>,
    },
}

impl PipelineError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        PipelineError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// Attaches a file path unless the error already carries one.
    pub fn with_path(self, path: &Path) -> Self {
        match self {
            e @ (PipelineError::Io { .. } | PipelineError::InFile { .. }) => e,
            e => PipelineError::InFile {
                path: path.to_path_buf(),
                source: Box::new(e),
            },
        }
    }

    /// The error with any path wrapper removed.
    pub fn root(&self) -> &PipelineError {
        match self {
            PipelineError::InFile { source, .. } => source.root(),
            e => e,
        }
    }
}
