use std::f64::consts::PI;

use num_complex::Complex64;

use super::{DspError, Result};

/// One second-order section, `a[0] == 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Biquad {
    pub b: [f64; 3],
    pub a: [f64; 3],
}

impl Biquad {
    /// Complex response at normalized angular frequency `omega` (rad/sample).
    pub fn response(&self, omega: f64) -> Complex64 {
        let zi = Complex64::from_polar(1.0, -omega);
        let zi2 = zi * zi;
        let num = self.b[0] + zi * self.b[1] + zi2 * self.b[2];
        let den = self.a[0] + zi * self.a[1] + zi2 * self.a[2];
        num / den
    }

    fn dc_gain(&self) -> f64 {
        self.b.iter().sum::<f64>() / self.a.iter().sum::<f64>()
    }

    /// Direct-form II transposed state after a unit step has settled.
    fn step_state(&self) -> [f64; 2] {
        let g = self.dc_gain();
        let z2 = self.b[2] - self.a[2] * g;
        let z1 = self.b[1] - self.a[1] * g + z2;
        [z1, z2]
    }
}

/// Band-pass IIR filter.
///
/// `b`/`a` hold the expanded transfer function (2·order + 1 taps each). The
/// same filter is kept as cascaded biquads, which is what gets applied and
/// what the magnitude response is evaluated from: with a 0.5 Hz edge at
/// 500 Hz the expanded polynomials lose several digits near z = 1.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterCoefficients {
    pub b: Vec<f64>,
    pub a: Vec<f64>,
    pub sections: Vec<Biquad>,
    pub poles: Vec<Complex64>,
    pub order: usize,
    pub fs_hz: f64,
}

impl FilterCoefficients {
    /// |H(f)| of a single pass, from the factored form.
    pub fn magnitude(&self, f_hz: f64) -> f64 {
        let omega = 2.0 * PI * f_hz / self.fs_hz;
        self.sections
            .iter()
            .map(|s| s.response(omega))
            .product::<Complex64>()
            .norm()
    }

    /// Steady-state section states for a unit step input.
    pub(crate) fn step_states(&self) -> Vec<[f64; 2]> {
        let mut scale = 1.0;
        self.sections
            .iter()
            .map(|s| {
                let [z1, z2] = s.step_state();
                let state = [z1 * scale, z2 * scale];
                scale *= s.dc_gain();
                state
            })
            .collect()
    }

    /// Number of taps of the expanded transfer function.
    pub fn n_taps(&self) -> usize {
        self.b.len()
    }
}

/// Expands `prod (1 - r z^-1)` into polynomial coefficients in z^-1.
fn poly(roots: &[Complex64]) -> Vec<Complex64> {
    let mut c = vec![Complex64::new(1.0, 0.0)];
    for r in roots {
        let mut next = c.clone();
        next.push(Complex64::new(0.0, 0.0));
        for (i, ci) in c.iter().enumerate() {
            next[i + 1] -= r * ci;
        }
        c = next;
    }
    c
}

/// Groups poles into conjugate pairs (real poles pair with each other).
fn pair_poles(poles: &[Complex64]) -> Result<Vec<(Complex64, Complex64)>> {
    const IM_EPS: f64 = 1e-12;
    let mut pairs = Vec::new();
    let mut reals: Vec<f64> = Vec::new();
    for p in poles {
        if p.im.abs() <= IM_EPS {
            reals.push(p.re);
        } else if p.im > 0.0 {
            pairs.push((*p, p.conj()));
        }
    }
    reals.sort_by(f64::total_cmp);
    if !reals.len().is_multiple_of(2) || pairs.len() * 2 + reals.len() != poles.len() {
        return Err(DspError::UnstableResult(
            "poles do not form conjugate pairs".into(),
        ));
    }
    for r in reals.chunks_exact(2) {
        pairs.push((Complex64::new(r[0], 0.0), Complex64::new(r[1], 0.0)));
    }
    // Poles nearest the unit circle last.
    pairs.sort_by(|a, b| a.0.norm().total_cmp(&b.0.norm()));
    Ok(pairs)
}

/// Designs a digital Butterworth band-pass of the given prototype order.
///
/// Analog prototype, low-pass to band-pass transform at prewarped edges,
/// then the bilinear transform. The result has `2·order` poles, `order` zeros
/// at z = 1 and `order` zeros at z = -1.
pub fn design_bandpass(order: usize, low_hz: f64, high_hz: f64, fs_hz: f64) -> Result<FilterCoefficients> {
    if order == 0 {
        return Err(DspError::InvalidBand("order must be at least 1".into()));
    }
    let valid = [low_hz, high_hz, fs_hz].iter().all(|v| v.is_finite())
        && 0.0 < low_hz
        && low_hz < high_hz
        && high_hz < fs_hz / 2.0;
    if !valid {
        return Err(DspError::InvalidBand(format!(
            "need 0 < low < high < fs/2, got low={low_hz} high={high_hz} fs={fs_hz}"
        )));
    }

    // Bilinear transform with a normalized sampling rate of 2.
    const FS2: f64 = 4.0;
    let warp = |f: f64| FS2 * (PI * f / fs_hz).tan();
    let (w1, w2) = (warp(low_hz), warp(high_hz));
    let bw = w2 - w1;
    let wo2 = w1 * w2;

    let n = order as i64;
    let mut analog_poles = Vec::with_capacity(2 * order);
    for m in (-n + 1..n).step_by(2) {
        let proto = -Complex64::from_polar(1.0, PI * m as f64 / (2 * n) as f64);
        let lp = proto * (bw / 2.0);
        let disc = (lp * lp - wo2).sqrt();
        analog_poles.push(lp + disc);
        analog_poles.push(lp - disc);
    }
    let poles: Vec<Complex64> = analog_poles
        .iter()
        .map(|p| (FS2 + p) / (FS2 - p))
        .collect();
    let denom: Complex64 = analog_poles.iter().map(|p| FS2 - p).product();
    let gain = (bw.powi(order as i32) * FS2.powi(order as i32) / denom).re;

    if let Some(p) = poles.iter().find(|p| !(p.norm() < 1.0)) {
        return Err(DspError::UnstableResult(format!("pole {p} on or outside the unit circle")));
    }

    let mut zeros = vec![Complex64::new(1.0, 0.0); order];
    zeros.extend(std::iter::repeat_n(Complex64::new(-1.0, 0.0), order));
    let b: Vec<f64> = poly(&zeros).iter().map(|c| c.re * gain).collect();
    let a: Vec<f64> = poly(&poles).iter().map(|c| c.re).collect();

    let section_gain = gain.powf(1.0 / order as f64);
    let sections = pair_poles(&poles)?
        .into_iter()
        .map(|(p, q)| Biquad {
            b: [section_gain, 0.0, -section_gain],
            a: [1.0, -(p + q).re, (p * q).re],
        })
        .collect();

    Ok(FilterCoefficients {
        b,
        a,
        sections,
        poles,
        order,
        fs_hz,
    })
}
