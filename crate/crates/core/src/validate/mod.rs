//! Checks of the generated data against its own ground truth: signal
//! recovery from masks, label geometry, filter response, normalization
//! and parameter balance. Also provides synthetic fixture records.

use std::path::PathBuf;

use thiserror::Error;

mod checks;
mod extract;
mod fixtures;
mod metrics;
mod roundtrip;

pub use checks::{
    expected_boxes, filter_tone_check, label_check, normalization_audit, parameter_audit, share, tone_amplitude, LabelCheck,
    NormalizationAudit, ToneCheck, TEST_TONES_HZ,
};
pub use extract::{extract_from_mask, extract_lead, ROW_MARGIN_PX};
pub use fixtures::{
    fixture_plan, synth, synth_fixture, to_wfdb, write_fixture_dataset, FixtureEntry, FixtureKind, SyntheticRecord, FIXTURE_GAIN,
};
pub use metrics::{iou, max_abs_error, mse, pearson, Summary};
pub use roundtrip::{
    clip_to_region, layout_from_metadata, roundtrip_report, sample_ids, summarize, write_report, LeadRoundTrip, RoundTripMetrics,
    RoundTripReport, SampleRoundTrip, MAX_MEAN_MSE, MIN_LEAD_PEARSON, MIN_MEAN_PEARSON, VALIDATION_REPORT_FILE,
};

#[derive(Debug, Error)]
pub enum ValidateError {
    #[error("lead {lead} has no trace pixels")]
    EmptyLead { lead: &'static str },
    #[error("series is constant")]
    ConstantSeries,
    #[error("series lengths differ: {a} vs {b}")]
    LengthMismatch { a: usize, b: usize },
    #[error("unknown fixture kind {0:?}")]
    UnknownKind(String),
    #[error("missing artifact {0}")]
    MissingArtifact(PathBuf),
    #[error("layout has {0} leads")]
    LeadCount(usize),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Annotate(#[from] crate::annotate::AnnotateError),
    #[error(transparent)]
    Geometry(#[from] crate::geometry::GeometryError),
    #[error(transparent)]
    Dsp(#[from] crate::dsp::DspError),
    #[error(transparent)]
    Pipeline(#[from] crate::pipeline::PipelineError),
    #[error("image decoding: {0}")]
    Image(#[from] image::ImageError),
}

pub type Result<T, E = ValidateError> = std::result::Result<T, E>;
