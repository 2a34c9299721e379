//! Batch generation: configuration, per-record rendering and file output.
//!
//! Each record is independent. Its parameters come from a generator seeded
//! with the global seed and the record id, so output does not depend on
//! worker count or scheduling order.

use std::path::PathBuf;

use thiserror::Error;

mod config;
mod generate;
mod run;
mod stats;

pub use config::{load_config, Config, ConfigError};
pub use generate::{
    artifact_path, check_record_id, create_split_dirs, encode_jpeg, encode_png, load_record, record_files, sample_complete,
    write_atomic, write_sample, ArtifactKind, Generator, SampleArtifacts, JPEG_QUALITY,
};
pub use run::{run, Failure, Outcome, ParamStats, RunReport, SkipCounts, Timing, WidthStats, RUN_REPORT_FILE};
pub use stats::{dataset_stats, find_sample, metadata_files, read_metadata, DatasetStats};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Ingest(#[from] crate::ingest::IngestError),
    #[error(transparent)]
    Dsp(#[from] crate::dsp::DspError),
    #[error(transparent)]
    Geometry(#[from] crate::geometry::GeometryError),
    #[error(transparent)]
    Render(#[from] crate::render::RenderError),
    #[error(transparent)]
    Annotate(#[from] crate::annotate::AnnotateError),
    #[error("image encoding: {0}")]
    Image(#[from] image::ImageError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("record id {0:?} cannot be used as a file name")]
    BadRecordId(String),
    #[error("unsupported record: {0}")]
    Unsupported(String),
}

pub type Result<T, E = PipelineError> = std::result::Result<T, E>;
