//! Non-raster ground truth: YOLO labels, the signal array and the metadata
//! document.

mod metadata;
pub mod npy;
mod yolo;

pub use metadata::{emit_metadata, parse_metadata, round6, CanvasMeta, LeadMeta, MetadataInputs, SampleMetadata, GENERATOR_VERSION};
pub use npy::{decode_f64, emit_signals, encode_f64, NpyArray, SIGNALS_FILE_BYTES};
pub use yolo::{
    emit_yolo_file, format_line, name_class, page_records, parse_yolo_file, to_yolo, YoloRecord, MAX_CLASS,
    RECORDS_PER_PAGE, REGION_CLASS,
};

use thiserror::Error;

use crate::ingest::{SignalMatrix, N_LEADS};

#[derive(Debug, Error)]
pub enum AnnotateError {
    #[error("degenerate box {w} x {h}")]
    DegenerateBox { w: f64, h: f64 },
    #[error("box {what} = {value} falls outside the canvas")]
    BoxOutsideCanvas { what: &'static str, value: f64 },
    #[error("expected {expected} records, got {got}")]
    CountMismatch { expected: usize, got: usize },
    #[error("class id {0} out of range")]
    BadClass(u8),
    #[error("label line {line}: {reason}")]
    YoloSyntax { line: usize, reason: String },
    #[error("array shape {got:?} does not match {expected:?}")]
    ShapeMismatch { expected: Vec<usize>, got: Vec<usize> },
    #[error("non-finite value")]
    NonFinite,
    #[error("npy: {0}")]
    Npy(String),
    #[error("metadata JSON: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = AnnotateError> = std::result::Result<T, E>;

/// Reads a signals file back into a 12-lead matrix.
pub fn decode_signals(bytes: &[u8]) -> Result<SignalMatrix> {
    let arr = decode_f64(bytes)?;
    if arr.shape.len() != 2 || arr.shape[0] != N_LEADS || arr.shape[1] == 0 {
        return Err(AnnotateError::ShapeMismatch {
            expected: vec![N_LEADS, crate::ingest::N_SAMPLES],
            got: arr.shape,
        });
    }
    if arr.data.iter().any(|v| !v.is_finite()) {
        return Err(AnnotateError::NonFinite);
    }
    let n = arr.shape[1];
    Ok(SignalMatrix::from_rows(arr.data.chunks_exact(n).map(<[f64]>::to_vec).collect()))
}
