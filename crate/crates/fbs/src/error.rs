use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the stereo pipeline and its I/O layers.
#[derive(Debug, Error)]
pub enum FbsError {
    #[error("{context}: got {actual}, expected {expected}")]
    DimensionMismatch {
        context: &'static str,
        expected: String,
        actual: String,
    },

    #[error("image {width}x{height} is too small for block radius {radius}")]
    ImageTooSmall {
        width: usize,
        height: usize,
        radius: usize,
    },

    #[error("invalid parameter {name} = {value} ({reason})")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("intensity {0} outside [0, 255]")]
    InvalidIntensity(f64),

    #[error("region mask selects no pixels with valid ground truth")]
    EmptyMask,

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("worker pool: {0}")]
    WorkerPool(String),

    #[error("stage {stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<FbsError>,
    },
}

impl FbsError {
    /// Attaches pipeline stage attribution to an error.
    pub(crate) fn in_stage(self, stage: &'static str) -> FbsError {
        FbsError::Stage {
            stage,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, FbsError>;
