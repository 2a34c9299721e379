use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::annotate::{emit_yolo_file, page_records, parse_yolo_file};
use crate::dsp::{condition_record, ecg_bandpass, filtfilt};
use crate::geometry::{compute_layout, CanvasSpec, ParamDomains, PixelBox};
use crate::ingest::{Split, LEAD_NAMES, N_SAMPLES, SAMPLING_RATE_HZ};
use crate::pipeline::{artifact_path, ArtifactKind, ParamStats};
use crate::render::{measure, LABEL_HEIGHT_PX};
use crate::rng::derive_rng;

use super::fixtures::SyntheticRecord;
use super::metrics::iou;
use super::roundtrip::sample_ids;
use super::{Result, ValidateError};

/// Frequencies of the filter test composite, Hz.
pub const TEST_TONES_HZ: [f64; 3] = [0.1, 10.0, 60.0];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToneCheck {
    pub frequency_hz: f64,
    pub amplitude_in: f64,
    pub amplitude_out: f64,
    /// `1 - (out / in)^2`
    pub power_reduction: f64,
}

/// Amplitude of the `f_hz` component of `x`, by projection onto sine and
/// cosine over the whole window. Exact for whole-cycle windows.
pub fn tone_amplitude(x: &[f64], f_hz: f64, fs_hz: f64) -> f64 {
    let (mut s, mut c) = (0.0, 0.0);
    for (i, v) in x.iter().enumerate() {
        let phase = 2.0 * PI * f_hz * i as f64 / fs_hz;
        s += v * phase.sin();
        c += v * phase.cos();
    }
    2.0 * s.hypot(c) / x.len() as f64
}

/// Filters a unit-amplitude 0.1 + 10 + 60 Hz composite over one record
/// length and reports the change at each tone.
pub fn filter_tone_check() -> Result<Vec<ToneCheck>> {
    let fs = SAMPLING_RATE_HZ;
    let x: Vec<f64> = (0..N_SAMPLES)
        .map(|i| TEST_TONES_HZ.iter().map(|f| (2.0 * PI * f * i as f64 / fs).sin()).sum())
        .collect();
    let y = filtfilt(&ecg_bandpass(fs)?, &x)?;
    Ok(TEST_TONES_HZ
        .iter()
        .map(|&f| {
            let a_in = tone_amplitude(&x, f, fs);
            let a_out = tone_amplitude(&y, f, fs);
            ToneCheck {
                frequency_hz: f,
                amplitude_in: a_in,
                amplitude_out: a_out,
                power_reduction: 1.0 - (a_out / a_in).powi(2),
            }
        })
        .collect())
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct NormalizationAudit {
    pub leads: usize,
    pub max_abs_mean: f64,
    pub max_abs_std_error: f64,
}

/// Worst per-lead mean and standard-deviation error after conditioning.
pub fn normalization_audit(records: &[SyntheticRecord]) -> Result<NormalizationAudit> {
    let filter = ecg_bandpass(SAMPLING_RATE_HZ)?;
    let mut audit = NormalizationAudit::default();
    for r in records {
        let norm = condition_record(&filter, &r.signals)?;
        for lead in norm.values.leads() {
            let n = lead.len() as f64;
            let mean = lead.iter().sum::<f64>() / n;
            let std = (lead.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n).sqrt();
            audit.leads += 1;
            audit.max_abs_mean = audit.max_abs_mean.max(mean.abs());
            audit.max_abs_std_error = audit.max_abs_std_error.max((std - 1.0).abs());
        }
    }
    Ok(audit)
}

/// Parameter draws for records `"1"..="n"` without rendering anything.
pub fn parameter_audit(n: usize, global_seed: u64, domains: &ParamDomains) -> ParamStats {
    let params: Vec<_> = (1..=n)
        .map(|i| crate::geometry::sample_params(&mut derive_rng(global_seed, &i.to_string()), domains))
        .collect();
    ParamStats::from_params(&params)
}

/// Share of `key` in a count table.
pub fn share(counts: &std::collections::BTreeMap<String, usize>, key: &str) -> f64 {
    let total: usize = counts.values().sum();
    if total == 0 {
        return 0.0;
    }
    counts.get(key).copied().unwrap_or(0) as f64 / total as f64
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LabelCheck {
    pub pages: usize,
    pub min_iou: f64,
    pub bad_line_counts: usize,
    pub out_of_range: usize,
    pub errors: Vec<String>,
}

impl LabelCheck {
    pub fn pass(&self) -> bool {
        self.pages > 0
            && self.min_iou == 1.0
            && self.bad_line_counts == 0
            && self.out_of_range == 0
            && self.errors.is_empty()
    }
}

/// Region and name boxes recomputed from the canvas alone.
pub fn expected_boxes(canvas: &CanvasSpec) -> Result<(Vec<PixelBox>, Vec<PixelBox>)> {
    let layout = compute_layout(canvas)?;
    let regions = layout.leads.iter().map(|l| l.region).collect();
    let names = layout
        .leads
        .iter()
        .zip(LEAD_NAMES)
        .map(|(l, name)| {
            let (w, h) = measure(name, LABEL_HEIGHT_PX);
            PixelBox::new(l.name_anchor.0, l.name_anchor.1, f64::from(w), f64::from(h))
        })
        .collect();
    Ok((regions, names))
}

fn check_page(root: &Path, split: Split, id: &str, expected: &str, canvas: &CanvasSpec, out: &mut LabelCheck) -> Result<()> {
    let path = artifact_path(root, split, ArtifactKind::Labels, id);
    let text = fs::read_to_string(&path).map_err(|source| ValidateError::Io { path, source })?;
    if text.lines().count() != crate::annotate::RECORDS_PER_PAGE {
        out.bad_line_counts += 1;
    }
    let got = parse_yolo_file(&text)?;
    let want = parse_yolo_file(expected)?;
    if got.len() != want.len() {
        out.min_iou = 0.0;
    }
    let (w, h) = (f64::from(canvas.width_px), f64::from(canvas.height_px));
    for (g, e) in got.iter().zip(&want) {
        let coords = [g.x_center, g.y_center, g.width, g.height];
        if coords.iter().any(|c| !(0.0..=1.0).contains(c)) {
            out.out_of_range += 1;
        }
        let score = if g.class_id == e.class_id {
            iou(&g.to_pixels(w, h), &e.to_pixels(w, h))
        } else {
            0.0
        };
        out.min_iou = out.min_iou.min(score);
    }
    Ok(())
}

/// Compares every label file with boxes recomputed from `canvas`.
pub fn label_check(root: &Path, canvas: &CanvasSpec) -> Result<LabelCheck> {
    let (regions, names) = expected_boxes(canvas)?;
    let expected = emit_yolo_file(&page_records(&regions, &names, canvas)?)?;
    let mut out = LabelCheck {
        min_iou: 1.0,
        ..LabelCheck::default()
    };
    for (split, id) in sample_ids(root)? {
        out.pages += 1;
        if let Err(e) = check_page(root, split, &id, &expected, canvas, &mut out) {
            out.errors.push(format!("{id}: {e}"));
        }
    }
    if out.pages == 0 {
        out.min_iou = 0.0;
    }
    Ok(out)
}
