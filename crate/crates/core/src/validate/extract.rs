//! Signal recovery from a trace mask.
//!
//! Per pixel column of a lead, the value is the mean row of white pixels,
//! measured at the pixel centre and mapped back through the calibration.
//! Empty columns are filled by linear interpolation (edges held
//! constant), then the column series is resampled onto the sample times.

use image::GrayImage;

use crate::geometry::{CalibrationModel, LeadGeometry, LeadLayout};
use crate::ingest::{SignalMatrix, LEAD_NAMES, N_LEADS, N_SAMPLES, SAMPLING_RATE_HZ};

use super::{Result, ValidateError};

/// Rows searched above and below a lead's region box.
pub const ROW_MARGIN_PX: i64 = 2;

/// Per-column values of one lead; `None` where the column has no ink.
/// Column `k` is pixel column `first + k`.
fn column_values(mask: &GrayImage, lead: &LeadGeometry, cal: &CalibrationModel) -> (i64, Vec<Option<f64>>) {
    let (w, h) = (i64::from(mask.width()), i64::from(mask.height()));
    let first = (lead.trace_x0.floor() as i64).max(0);
    let last = (lead.trace_x1.ceil() as i64).min(w);
    let top = (lead.region.y.floor() as i64 - ROW_MARGIN_PX).max(0);
    let bottom = (lead.region.bottom().ceil() as i64 + ROW_MARGIN_PX).min(h);
    let values = (first..last)
        .map(|x| {
            let (mut sum, mut count) = (0.0, 0usize);
            for y in top..bottom {
                if mask.get_pixel(x as u32, y as u32)[0] > 127 {
                    sum += y as f64 + 0.5;
                    count += 1;
                }
            }
            (count > 0).then(|| (lead.baseline_y - sum / count as f64) / cal.px_per_mv)
        })
        .collect();
    (first, values)
}

/// Fills gaps linearly between inked columns and holds the edges.
/// `None` if no column has ink.
fn fill_gaps(values: &[Option<f64>]) -> Option<Vec<f64>> {
    let known: Vec<(usize, f64)> = values.iter().enumerate().filter_map(|(i, v)| v.map(|v| (i, v))).collect();
    let (&(i0, v0), &(in_, vn)) = (known.first()?, known.last()?);
    let mut out = vec![0.0; values.len()];
    out[..=i0].fill(v0);
    out[in_..].fill(vn);
    for pair in known.windows(2) {
        let ((a, va), (b, vb)) = (pair[0], pair[1]);
        for (k, o) in out.iter_mut().enumerate().take(b + 1).skip(a) {
            *o = va + (vb - va) * (k - a) as f64 / (b - a) as f64;
        }
    }
    Some(out)
}

/// Recovers one lead as `n` samples at `fs_hz`.
pub fn extract_lead(
    mask: &GrayImage,
    lead: &LeadGeometry,
    cal: &CalibrationModel,
    n: usize,
    fs_hz: f64,
) -> Option<Vec<f64>> {
    let (first, raw) = column_values(mask, lead, cal);
    let cols = fill_gaps(&raw)?;
    let last = cols.len() - 1;
    Some(
        (0..n)
            .map(|i| {
                let x = lead.trace_x0 + i as f64 / fs_hz * cal.px_per_sec;
                let u = (x - 0.5 - first as f64).clamp(0.0, last as f64);
                let k = (u.floor() as usize).min(last.saturating_sub(1));
                let frac = u - k as f64;
                if k == last {
                    cols[k]
                } else {
                    cols[k] + (cols[k + 1] - cols[k]) * frac
                }
            })
            .collect(),
    )
}

/// Recovers all twelve leads at the standard rate and length.
pub fn extract_from_mask(mask: &GrayImage, layout: &LeadLayout, cal: &CalibrationModel) -> Result<SignalMatrix> {
    if layout.leads.len() != N_LEADS {
        return Err(ValidateError::LeadCount(layout.leads.len()));
    }
    let rows = layout
        .leads
        .iter()
        .enumerate()
        .map(|(i, lead)| {
            extract_lead(mask, lead, cal, N_SAMPLES, SAMPLING_RATE_HZ).ok_or(ValidateError::EmptyLead { lead: LEAD_NAMES[i] })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SignalMatrix::from_rows(rows))
}
