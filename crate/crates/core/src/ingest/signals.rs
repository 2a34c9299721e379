use super::{IngestError, RecordHeader, Result, LEAD_NAMES, N_LEADS, WFDB_INVALID_SAMPLE};

/// Twelve leads of millivolt samples in canonical lead order, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalMatrix {
    values: Vec<f64>,
    n_samples: usize,
}

impl SignalMatrix {
    /// Builds a matrix from 12 equally long rows in canonical lead order.
    ///
    /// Panics if the row count or lengths disagree, or a value is not finite.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Self {
        assert_eq!(rows.len(), N_LEADS, "signal matrix needs exactly 12 rows");
        let n_samples = rows[0].len();
        assert!(rows.iter().all(|r| r.len() == n_samples), "ragged rows");
        let values: Vec<f64> = rows.into_iter().flatten().collect();
        assert!(values.iter().all(|v| v.is_finite()), "non-finite sample");
        SignalMatrix { values, n_samples }
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    pub fn lead(&self, i: usize) -> &[f64] {
        &self.values[i * self.n_samples..(i + 1) * self.n_samples]
    }

    pub fn leads(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.n_samples.max(1))
    }

    /// Row-major values, lead after lead.
    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }
}

/// Output of [`read_signals`]: the matrix plus the count of invalid samples
/// that were replaced by 0 mV.
#[derive(Debug, Clone)]
pub struct DecodedRecord {
    pub signals: SignalMatrix,
    pub invalid_samples: usize,
}

/// Maps each canonical lead to its column in the header (case-insensitive
/// names; positional when no signal carries a description).
fn lead_columns(header: &RecordHeader) -> Result<[usize; N_LEADS]> {
    let mut cols = [usize::MAX; N_LEADS];
    if header.signals.iter().all(|s| s.lead_name.is_empty()) {
        for (i, c) in cols.iter_mut().enumerate() {
            *c = i;
        }
        return Ok(cols);
    }
    for (col, spec) in header.signals.iter().enumerate() {
        let idx = LEAD_NAMES
            .iter()
            .position(|n| n.eq_ignore_ascii_case(spec.lead_name.trim()))
            .ok_or_else(|| IngestError::UnsupportedRecord {
                record: header.record_name.clone(),
                reason: format!("unknown lead `{}`", spec.lead_name),
            })?;
        if cols[idx] != usize::MAX {
            return Err(IngestError::UnsupportedRecord {
                record: header.record_name.clone(),
                reason: format!("lead `{}` appears twice", spec.lead_name),
            });
        }
        cols[idx] = col;
    }
    Ok(cols)
}

/// Decodes an interleaved little-endian format-16 signal file into millivolts.
///
/// Samples equal to the WFDB invalid marker become 0 mV and are tallied;
/// a lead made only of such samples is an error.
pub fn read_signals(header: &RecordHeader, dat_bytes: &[u8]) -> Result<DecodedRecord> {
    if header.n_signals != N_LEADS || header.signals.len() != N_LEADS {
        return Err(IngestError::UnsupportedRecord {
            record: header.record_name.clone(),
            reason: format!("{} signals", header.n_signals),
        });
    }
    if let Some(s) = header.signals.iter().find(|s| s.format_code != 16) {
        return Err(IngestError::UnsupportedFormat(s.format_code.to_string()));
    }
    let first_file = &header.signals[0].file_name;
    if header.signals.iter().any(|s| &s.file_name != first_file) {
        return Err(IngestError::UnsupportedRecord {
            record: header.record_name.clone(),
            reason: "signals split across several files".into(),
        });
    }
    let n = header.n_samples;
    let expected = N_LEADS
        .checked_mul(n)
        .and_then(|v| v.checked_mul(2))
        .ok_or(IngestError::LengthMismatch {
            expected: usize::MAX,
            actual: dat_bytes.len(),
        })?;
    if dat_bytes.len() != expected {
        return Err(IngestError::LengthMismatch {
            expected,
            actual: dat_bytes.len(),
        });
    }

    let cols = lead_columns(header)?;
    let mut rows = vec![vec![0.0f64; n]; N_LEADS];
    let mut invalid_per_lead = [0usize; N_LEADS];
    for (frame_idx, frame) in dat_bytes.chunks_exact(2 * N_LEADS).enumerate() {
        for (lead, &col) in cols.iter().enumerate() {
            let raw = i16::from_le_bytes([frame[2 * col], frame[2 * col + 1]]);
            if raw == WFDB_INVALID_SAMPLE {
                invalid_per_lead[lead] += 1;
                continue;
            }
            let spec = &header.signals[col];
            rows[lead][frame_idx] = (f64::from(raw) - f64::from(spec.baseline)) / spec.gain;
        }
    }
    if n > 0 {
        if let Some(lead) = invalid_per_lead.iter().position(|&c| c == n) {
            return Err(IngestError::InvalidLead(LEAD_NAMES[lead]));
        }
    }
    Ok(DecodedRecord {
        signals: SignalMatrix::from_rows(rows),
        invalid_samples: invalid_per_lead.iter().sum(),
    })
}
