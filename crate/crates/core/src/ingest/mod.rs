//! Source record ingestion: WFDB headers and format-16 signal files, the
//! metadata index, quality filtering and fold-based split assignment.

mod header;
mod index;
mod scp;
mod signals;

pub use header::{parse_header, RecordHeader, SignalSpec};
pub use index::{
    diagnostic_distribution, load_index, load_index_with, DatasetIndex, IndexColumns, RecordMeta,
    Sex, SuperclassShare,
};
pub use scp::{superclass_of, Superclass};
pub use signals::{read_signals, DecodedRecord, SignalMatrix};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Number of leads in every accepted record.
pub const N_LEADS: usize = 12;

/// Canonical lead order used for signal rows, layout rows and label classes.
pub const LEAD_NAMES: [&str; N_LEADS] = [
    "I", "II", "III", "aVR", "aVL", "aVF", "V1", "V2", "V3", "V4", "V5", "V6",
];

/// Sampling rate of accepted records.
pub const SAMPLING_RATE_HZ: f64 = 500.0;

/// Samples per lead of accepted records (10 s at 500 Hz).
pub const N_SAMPLES: usize = 5000;

/// WFDB marker for an invalid sample in 16-bit formats.
pub const WFDB_INVALID_SAMPLE: i16 = i16::MIN;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("malformed header (line {line}): {reason}")]
    MalformedHeader { line: usize, reason: String },
    #[error("unsupported signal format `{0}`; only format 16 is supported")]
    UnsupportedFormat(String),
    #[error("record `{record}` is not a 12-lead 500 Hz 10 s record: {reason}")]
    UnsupportedRecord { record: String, reason: String },
    #[error("signal file has {actual} bytes, expected {expected}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("lead {0} contains only invalid samples")]
    InvalidLead(&'static str),
    #[error("index is missing column `{0}`")]
    MissingColumn(String),
    #[error("stratified fold {0} is outside 1..=10")]
    InvalidFold(i64),
    #[error("index could not be read: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = IngestError> = std::result::Result<T, E>;

/// Dataset split assigned from the stratified fold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Val, Split::Test];

    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
        }
    }

    pub fn parse(s: &str) -> Option<Split> {
        match s.trim().to_ascii_lowercase().as_str() {
            "train" => Some(Split::Train),
            "val" | "validation" => Some(Split::Val),
            "test" => Some(Split::Test),
            _ => None,
        }
    }
}

impl std::fmt::Display for Split {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Folds 1-7 train, fold 8 validation, folds 9-10 test.
pub fn assign_split(strat_fold: i64) -> Result<Split> {
    match strat_fold {
        1..=7 => Ok(Split::Train),
        8 => Ok(Split::Val),
        9 | 10 => Ok(Split::Test),
        other => Err(IngestError::InvalidFold(other)),
    }
}

/// Quality grade above which a record is excluded.
pub const QUALITY_THRESHOLD: u32 = 1;

/// Accepts a record unless its baseline-drift or static-noise grade exceeds 1.
pub fn quality_filter(meta: &RecordMeta) -> bool {
    meta.baseline_drift_level <= QUALITY_THRESHOLD && meta.static_noise_level <= QUALITY_THRESHOLD
}

/// Interprets a quality-annotation cell as a numeric grade.
///
/// A leading integer is taken verbatim. Any other non-empty annotation counts
/// as grade 2 (rejected); an empty cell is grade 0.
pub fn parse_quality_grade(cell: &str) -> u32 {
    let cell = cell.trim();
    if cell.is_empty() {
        return 0;
    }
    let digits: String = cell.chars().take_while(|c| c.is_ascii_digit()).collect();
    digits.parse::<u32>().unwrap_or(2)
}
