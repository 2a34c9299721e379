use super::{DspError, FilterCoefficients, Result};

/// Padding applied at each end before filtering: three filter lengths.
pub fn pad_len(coeffs: &FilterCoefficients) -> usize {
    3 * coeffs.n_taps()
}

fn cascade(coeffs: &FilterCoefficients, x: &mut [f64], initial: f64) {
    let states = coeffs.step_states();
    for (s, st) in coeffs.sections.iter().zip(states) {
        let (mut z1, mut z2) = (st[0] * initial, st[1] * initial);
        for v in x.iter_mut() {
            let xin = *v;
            let y = s.b[0] * xin + z1;
            z1 = s.b[1] * xin - s.a[1] * y + z2;
            z2 = s.b[2] * xin - s.a[2] * y;
            *v = y;
        }
    }
}

/// Zero-phase forward-backward filtering.
///
/// The signal is extended by odd reflection, run forward through the cascade
/// with steady-state initial conditions scaled by the first sample, run again
/// over the reversed output, and the padding is cut away. The net magnitude
/// response is |H|^2 with no phase shift.
pub fn filtfilt(coeffs: &FilterCoefficients, x: &[f64]) -> Result<Vec<f64>> {
    let pad = pad_len(coeffs);
    if x.len() <= pad {
        return Err(DspError::TooShort {
            len: x.len(),
            min: pad + 1,
        });
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(DspError::NonFiniteInput);
    }
    let n = x.len();
    let (first, last) = (x[0], x[n - 1]);
    let mut ext = Vec::with_capacity(n + 2 * pad);
    ext.extend((1..=pad).rev().map(|i| 2.0 * first - x[i]));
    ext.extend_from_slice(x);
    ext.extend((1..=pad).map(|i| 2.0 * last - x[n - 1 - i]));

    let x0 = ext[0];
    cascade(coeffs, &mut ext, x0);
    ext.reverse();
    let y0 = ext[0];
    cascade(coeffs, &mut ext, y0);
    ext.reverse();
    Ok(ext[pad..pad + n].to_vec())
}
