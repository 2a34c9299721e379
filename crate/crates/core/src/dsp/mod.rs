//! Signal conditioning: Butterworth band-pass design, zero-phase filtering
//! and per-lead z-score normalization.

mod butterworth;
mod filtfilt;

pub use butterworth::{design_bandpass, Biquad, FilterCoefficients};
pub use filtfilt::{filtfilt, pad_len};

use thiserror::Error;

use crate::ingest::{SignalMatrix, LEAD_NAMES, N_LEADS};

pub const FILTER_ORDER: usize = 4;
pub const LOW_CUTOFF_HZ: f64 = 0.5;
pub const HIGH_CUTOFF_HZ: f64 = 40.0;

/// Standard deviations below this (mV) are treated as a flat lead.
pub const MIN_SIGMA: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum DspError {
    #[error("invalid band: {0}")]
    InvalidBand(String),
    #[error("designed filter is unstable: {0}")]
    UnstableResult(String),
    #[error("signal of {len} samples is too short; need at least {min}")]
    TooShort { len: usize, min: usize },
    #[error("signal contains non-finite samples")]
    NonFiniteInput,
    #[error("lead {} has zero variance", .lead.unwrap_or("?"))]
    ZeroVariance { lead: Option<&'static str> },
}

pub type Result<T, E = DspError> = std::result::Result<T, E>;

/// The ECG conditioning filter: 4th-order 0.5-40 Hz band-pass at `fs_hz`.
pub fn ecg_bandpass(fs_hz: f64) -> Result<FilterCoefficients> {
    design_bandpass(FILTER_ORDER, LOW_CUTOFF_HZ, HIGH_CUTOFF_HZ, fs_hz)
}

/// Z-score with the population standard deviation. Returns
/// `(normalized, mean, sigma)`.
pub fn zscore(x: &[f64]) -> Result<(Vec<f64>, f64, f64)> {
    if x.len() < 2 {
        return Err(DspError::TooShort { len: x.len(), min: 2 });
    }
    let n = x.len() as f64;
    let mu = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / n;
    let sigma = var.sqrt();
    if !(sigma >= MIN_SIGMA) {
        return Err(DspError::ZeroVariance { lead: None });
    }
    Ok((x.iter().map(|v| (v - mu) / sigma).collect(), mu, sigma))
}

/// A record after filtering and normalization, in z-units.
#[derive(Debug, Clone)]
pub struct NormalizedSignals {
    pub values: SignalMatrix,
    /// Per-lead mean of the filtered signal, mV.
    pub mu: [f64; N_LEADS],
    /// Per-lead population standard deviation of the filtered signal, mV.
    pub sigma: [f64; N_LEADS],
}

/// Filters every lead, then z-scores it. Leads are independent.
pub fn condition_record(coeffs: &FilterCoefficients, signals: &SignalMatrix) -> Result<NormalizedSignals> {
    let mut rows = Vec::with_capacity(N_LEADS);
    let mut mu = [0.0; N_LEADS];
    let mut sigma = [0.0; N_LEADS];
    for (i, lead) in signals.leads().enumerate() {
        let filtered = filtfilt(coeffs, lead)?;
        let (z, m, s) = zscore(&filtered).map_err(|e| match e {
            DspError::ZeroVariance { .. } => DspError::ZeroVariance {
                lead: Some(LEAD_NAMES[i]),
            },
            other => other,
        })?;
        rows.push(z);
        mu[i] = m;
        sigma[i] = s;
    }
    Ok(NormalizedSignals {
        values: SignalMatrix::from_rows(rows),
        mu,
        sigma,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn zscore_of_one_two_three() {
        let (z, mu, sigma) = zscore(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(mu, 2.0);
        assert!((sigma - 0.816_496_580_927_726).abs() < 1e-12);
        let expected = [-1.224_744_871_391_589, 0.0, 1.224_744_871_391_589];
        for (a, b) in z.iter().zip(expected) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn zscore_degenerate() {
        assert!(matches!(zscore(&[4.0, 4.0, 4.0]), Err(DspError::ZeroVariance { .. })));
        assert!(matches!(zscore(&[1.0]), Err(DspError::TooShort { .. })));
    }

    #[test]
    fn flat_lead_is_named() {
        let mut rows: Vec<Vec<f64>> = (0..12)
            .map(|k| (0..600).map(|i| ((i * (k + 3)) as f64 * 0.05).sin()).collect())
            .collect();
        rows[4] = vec![0.0; 600];
        let c = ecg_bandpass(500.0).unwrap();
        let err = condition_record(&c, &SignalMatrix::from_rows(rows)).unwrap_err();
        assert!(matches!(err, DspError::ZeroVariance { lead: Some("aVL") }));
    }

    proptest! {
        #[test]
        fn zscore_moments_and_idempotence(
            x in prop::collection::vec(-50.0f64..50.0, 2..400),
        ) {
            prop_assume!(x.iter().any(|v| (v - x[0]).abs() > 1e-3));
            let (z, _, _) = zscore(&x).unwrap();
            let n = z.len() as f64;
            let mean = z.iter().sum::<f64>() / n;
            let std = (z.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
            prop_assert!(mean.abs() < 1e-9);
            prop_assert!((std - 1.0).abs() < 1e-6);
            let (zz, _, _) = zscore(&z).unwrap();
            for (a, b) in z.iter().zip(&zz) {
                prop_assert!((a - b).abs() < 1e-9);
            }
        }
    }
}
