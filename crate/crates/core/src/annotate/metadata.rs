//! Per-sample metadata document.
//!
//! Keys appear in struct declaration order: identity, demographics,
//! diagnostics, quality, drawing parameters, calibration, canvas, per-lead
//! geometry, signal description, provenance. Floats are rounded to six
//! decimals when the document is built, so parsing the emitted text gives
//! back an identical value.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dsp::{FILTER_ORDER, HIGH_CUTOFF_HZ, LOW_CUTOFF_HZ};
use crate::geometry::{CalibrationModel, CanvasSpec, GridColor, LeadLayout, PixelBox, RenderParams};
use crate::ingest::{RecordMeta, Sex, Split, Superclass, LEAD_NAMES, N_LEADS};

use super::{AnnotateError, Result};

pub const GENERATOR_VERSION: &str = concat!("ecgsynth ", env!("CARGO_PKG_VERSION"));

/// Rounds to six decimal places.
pub fn round6(v: f64) -> f64 {
    (v * 1e6).round() / 1e6
}

fn round_box(b: &PixelBox) -> PixelBox {
    PixelBox::new(round6(b.x), round6(b.y), round6(b.w), round6(b.h))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CanvasMeta {
    pub dpi: u32,
    pub width_px: u32,
    pub height_px: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeadMeta {
    pub name: String,
    pub baseline_y: f64,
    pub trace_x0: f64,
    pub trace_x1: f64,
    pub region_box: PixelBox,
    pub name_box: PixelBox,
    pub clipped_samples: usize,
    /// Mean and standard deviation of the filtered lead, mV.
    pub mu_mv: f64,
    pub sigma_mv: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleMetadata {
    pub record_id: String,
    pub split: Split,
    pub age: Option<f64>,
    pub sex: Sex,
    pub height_cm: Option<f64>,
    pub weight_kg: Option<f64>,
    pub scp_codes: BTreeMap<String, f64>,
    pub superclasses: Vec<Superclass>,
    pub baseline_drift_grade: u32,
    pub static_noise_grade: u32,
    pub strat_fold: u8,
    pub paper_speed_mm_s: u32,
    #[serde(rename = "voltage_scale_mm_mV")]
    pub voltage_scale_mm_mv: u32,
    pub grid_visible: bool,
    pub grid_color: GridColor,
    pub grid_opacity: f64,
    pub stroke_width_px: f64,
    pub px_per_mm: f64,
    pub px_per_sec: f64,
    #[serde(rename = "px_per_mV")]
    pub px_per_mv: f64,
    pub canvas: CanvasMeta,
    pub region_height_px: u32,
    pub leads: Vec<LeadMeta>,
    pub sampling_rate_hz: u32,
    pub n_samples: usize,
    pub duration_s: f64,
    /// Signal values are z-scores drawn as if one unit were 1 mV.
    pub amplitude_unit: String,
    pub filter_order: usize,
    pub filter_band_hz: [f64; 2],
    pub clipped_sample_count: usize,
    pub generator_version: String,
    pub rng_seed: u64,
}

/// Everything a metadata document is built from.
pub struct MetadataInputs<'a> {
    pub record: &'a RecordMeta,
    pub split: Split,
    pub params: &'a RenderParams,
    pub calibration: &'a CalibrationModel,
    pub canvas: &'a CanvasSpec,
    pub layout: &'a LeadLayout,
    pub name_boxes: &'a [PixelBox],
    pub clipped: &'a [usize],
    pub mu_mv: &'a [f64],
    pub sigma_mv: &'a [f64],
    pub sampling_rate_hz: u32,
    pub n_samples: usize,
}

impl SampleMetadata {
    pub fn build(i: &MetadataInputs<'_>) -> Result<SampleMetadata> {
        let lens = [i.layout.leads.len(), i.name_boxes.len(), i.clipped.len(), i.mu_mv.len(), i.sigma_mv.len()];
        if let Some(&bad) = lens.iter().find(|&&n| n != N_LEADS) {
            return Err(AnnotateError::CountMismatch {
                expected: N_LEADS,
                got: bad,
            });
        }
        let leads = (0..N_LEADS)
            .map(|k| {
                let g = &i.layout.leads[k];
                LeadMeta {
                    name: LEAD_NAMES[k].to_string(),
                    baseline_y: round6(g.baseline_y),
                    trace_x0: round6(g.trace_x0),
                    trace_x1: round6(g.trace_x1),
                    region_box: round_box(&g.region),
                    name_box: round_box(&i.name_boxes[k]),
                    clipped_samples: i.clipped[k],
                    mu_mv: round6(i.mu_mv[k]),
                    sigma_mv: round6(i.sigma_mv[k]),
                }
            })
            .collect();
        let r = i.record;
        let meta = SampleMetadata {
            record_id: r.record_id.clone(),
            split: i.split,
            age: r.age.map(round6),
            sex: r.sex,
            height_cm: r.height.map(round6),
            weight_kg: r.weight.map(round6),
            scp_codes: r.scp_codes.iter().map(|(k, v)| (k.clone(), round6(*v))).collect(),
            superclasses: r.superclasses.iter().copied().collect(),
            baseline_drift_grade: r.baseline_drift_level,
            static_noise_grade: r.static_noise_level,
            strat_fold: r.strat_fold,
            paper_speed_mm_s: i.params.paper_speed_mm_s,
            voltage_scale_mm_mv: i.params.voltage_scale_mm_mv,
            grid_visible: i.params.grid_visible,
            grid_color: i.params.grid_color,
            grid_opacity: round6(i.params.grid_opacity),
            stroke_width_px: round6(i.params.stroke_width_px),
            px_per_mm: round6(i.calibration.px_per_mm),
            px_per_sec: round6(i.calibration.px_per_sec),
            px_per_mv: round6(i.calibration.px_per_mv),
            canvas: CanvasMeta {
                dpi: i.canvas.dpi,
                width_px: i.canvas.width_px,
                height_px: i.canvas.height_px,
            },
            region_height_px: i.layout.region_height_px,
            leads,
            sampling_rate_hz: i.sampling_rate_hz,
            n_samples: i.n_samples,
            duration_s: round6(i.n_samples as f64 / f64::from(i.sampling_rate_hz)),
            amplitude_unit: "z-score, drawn at 1 unit = 1 mV".to_string(),
            filter_order: FILTER_ORDER,
            filter_band_hz: [LOW_CUTOFF_HZ, HIGH_CUTOFF_HZ],
            clipped_sample_count: i.clipped.iter().sum(),
            generator_version: GENERATOR_VERSION.to_string(),
            rng_seed: i.params.rng_seed,
        };
        meta.check()?;
        Ok(meta)
    }

    /// Structural invariants: finite numbers and 12 leads.
    pub fn check(&self) -> Result<()> {
        if self.leads.len() != N_LEADS {
            return Err(AnnotateError::CountMismatch {
                expected: N_LEADS,
                got: self.leads.len(),
            });
        }
        let mut numbers = vec![
            self.grid_opacity,
            self.stroke_width_px,
            self.px_per_mm,
            self.px_per_sec,
            self.px_per_mv,
            self.duration_s,
        ];
        numbers.extend(self.age.iter().chain(&self.height_cm).chain(&self.weight_kg));
        numbers.extend(self.scp_codes.values());
        for l in &self.leads {
            numbers.extend([l.baseline_y, l.trace_x0, l.trace_x1, l.mu_mv, l.sigma_mv]);
            for b in [&l.region_box, &l.name_box] {
                numbers.extend([b.x, b.y, b.w, b.h]);
            }
        }
        if numbers.iter().any(|v| !v.is_finite()) {
            return Err(AnnotateError::NonFinite);
        }
        Ok(())
    }

    /// Calibration rebuilt from the recorded parameters.
    pub fn calibration(&self) -> CalibrationModel {
        CalibrationModel {
            px_per_mm: self.px_per_mm,
            px_per_sec: self.px_per_sec,
            px_per_mv: self.px_per_mv,
            seconds_per_mm: 1.0 / f64::from(self.paper_speed_mm_s),
            mv_per_mm: 1.0 / f64::from(self.voltage_scale_mm_mv),
        }
    }
}

/// JSON text: one top-level key per line, one lead per line inside
/// `leads`, trailing newline.
pub fn emit_metadata(meta: &SampleMetadata) -> Result<String> {
    meta.check()?;
    let serde_json::Value::Object(map) = serde_json::to_value(meta)? else {
        unreachable!("a struct serializes to an object");
    };
    let mut fields = Vec::with_capacity(map.len());
    for (key, value) in &map {
        let key = serde_json::to_string(key)?;
        match value {
            serde_json::Value::Array(items) if key == "\"leads\"" => {
                let rows = items
                    .iter()
                    .map(|v| serde_json::to_string(v).map(|s| format!("    {s}")))
                    .collect::<Result<Vec<_>, _>>()?;
                fields.push(format!("  {key}: [\n{}\n  ]", rows.join(",\n")));
            }
            _ => fields.push(format!("  {key}: {}", serde_json::to_string(value)?)),
        }
    }
    Ok(format!("{{\n{}\n}}\n", fields.join(",\n")))
}

pub fn parse_metadata(text: &str) -> Result<SampleMetadata> {
    let meta: SampleMetadata = serde_json::from_str(text)?;
    meta.check()?;
    Ok(meta)
}
