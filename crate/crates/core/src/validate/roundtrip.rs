use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::annotate::{decode_signals, SampleMetadata};
use crate::geometry::{clip_limits, LeadGeometry, LeadLayout};
use crate::ingest::{Split, LEAD_NAMES};
use crate::pipeline::{artifact_path, metadata_files, read_metadata, write_atomic, ArtifactKind};

use super::extract::extract_from_mask;
use super::metrics::{max_abs_error, mse, pearson, Summary};
use super::{Result, ValidateError};

pub const VALIDATION_REPORT_FILE: &str = "validation_report.json";
pub const MIN_MEAN_PEARSON: f64 = 0.998;
pub const MIN_LEAD_PEARSON: f64 = 0.995;
pub const MAX_MEAN_MSE: f64 = 5e-4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeadRoundTrip {
    pub lead: String,
    /// Against the stored signal clipped to the drawable band.
    pub pearson_r: f64,
    pub mse: f64,
    pub max_abs_error: f64,
    /// Against the stored signal as is.
    pub pearson_r_unclipped: f64,
    pub clipped_samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRoundTrip {
    pub record_id: String,
    pub split: Split,
    pub paper_speed_mm_s: u32,
    #[serde(rename = "voltage_scale_mm_mV")]
    pub voltage_scale_mm_mv: u32,
    pub grid_visible: bool,
    pub leads: Vec<LeadRoundTrip>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RoundTripMetrics {
    pub leads_compared: usize,
    pub pearson_r: Summary,
    pub mse: Summary,
    pub max_abs_error: Summary,
    pub pearson_r_unclipped: Summary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundTripReport {
    pub samples_requested: usize,
    pub samples_checked: usize,
    pub samples_failed: usize,
    pub aggregate: RoundTripMetrics,
    pub min_mean_pearson: f64,
    pub min_lead_pearson: f64,
    pub max_mean_mse: f64,
    pub pass: bool,
    pub samples: Vec<SampleRoundTrip>,
}

/// Layout as recorded in a sample's metadata.
pub fn layout_from_metadata(meta: &SampleMetadata) -> LeadLayout {
    LeadLayout {
        region_height_px: meta.region_height_px,
        leads: meta
            .leads
            .iter()
            .map(|l| LeadGeometry {
                region: l.region_box,
                baseline_y: l.baseline_y,
                trace_x0: l.trace_x0,
                trace_x1: l.trace_x1,
                name_anchor: (l.name_box.x, l.name_box.y),
            })
            .collect(),
    }
}

/// Clamps values to the band a trace is drawn within.
pub fn clip_to_region(values: &[f64], lead: &LeadGeometry, px_per_mv: f64) -> Vec<f64> {
    let (top, bottom) = clip_limits(lead);
    let lo = (lead.baseline_y - bottom) / px_per_mv;
    let hi = (lead.baseline_y - top) / px_per_mv;
    values.iter().map(|v| v.clamp(lo, hi)).collect()
}

fn read(root: &Path, split: Split, kind: ArtifactKind, id: &str) -> Result<Vec<u8>> {
    let path = artifact_path(root, split, kind, id);
    if !path.is_file() {
        return Err(ValidateError::MissingArtifact(path));
    }
    fs::read(&path).map_err(|source| ValidateError::Io { path, source })
}

fn compare(root: &Path, split: Split, id: &str) -> Result<(SampleMetadata, Vec<LeadRoundTrip>)> {
    let meta = read_metadata(root, split, id)?;
    let mask = image::load_from_memory_with_format(&read(root, split, ArtifactKind::Mask, id)?, image::ImageFormat::Png)?
        .to_luma8();
    let stored = decode_signals(&read(root, split, ArtifactKind::Signals, id)?)?;
    let layout = layout_from_metadata(&meta);
    let cal = meta.calibration();
    let got = extract_from_mask(&mask, &layout, &cal)?;
    let leads = (0..layout.leads.len())
        .map(|i| {
            let reference = clip_to_region(stored.lead(i), &layout.leads[i], cal.px_per_mv);
            let clipped_samples = reference.iter().zip(stored.lead(i)).filter(|(a, b)| a != b).count();
            Ok(LeadRoundTrip {
                lead: LEAD_NAMES[i].to_string(),
                pearson_r: pearson(got.lead(i), &reference)?,
                mse: mse(got.lead(i), &reference)?,
                max_abs_error: max_abs_error(got.lead(i), &reference)?,
                pearson_r_unclipped: pearson(got.lead(i), stored.lead(i))?,
                clipped_samples,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((meta, leads))
}

/// Ids of generated samples in split order, then by file name.
pub fn sample_ids(root: &Path) -> Result<Vec<(Split, String)>> {
    let mut ids = Vec::new();
    for split in Split::ALL {
        for path in metadata_files(root, split)? {
            if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                ids.push((split, stem.to_string()));
            }
        }
    }
    Ok(ids)
}

/// Re-extracts up to `sample_count` samples and compares them with their
/// stored signals.
pub fn roundtrip_report(root: &Path, sample_count: usize) -> Result<RoundTripReport> {
    let mut ids = sample_ids(root)?;
    if ids.is_empty() {
        return Err(ValidateError::MissingArtifact(root.to_path_buf()));
    }
    ids.truncate(sample_count);
    let samples: Vec<SampleRoundTrip> = ids
        .par_iter()
        .map(|(split, id)| match compare(root, *split, id) {
            Ok((meta, leads)) => SampleRoundTrip {
                record_id: id.clone(),
                split: *split,
                paper_speed_mm_s: meta.paper_speed_mm_s,
                voltage_scale_mm_mv: meta.voltage_scale_mm_mv,
                grid_visible: meta.grid_visible,
                leads,
                error: None,
            },
            Err(e) => SampleRoundTrip {
                record_id: id.clone(),
                split: *split,
                paper_speed_mm_s: 0,
                voltage_scale_mm_mv: 0,
                grid_visible: false,
                leads: Vec::new(),
                error: Some(e.to_string()),
            },
        })
        .collect();
    Ok(summarize(sample_count, samples))
}

pub fn summarize(samples_requested: usize, samples: Vec<SampleRoundTrip>) -> RoundTripReport {
    let leads: Vec<&LeadRoundTrip> = samples.iter().flat_map(|s| &s.leads).collect();
    let pick = |f: fn(&LeadRoundTrip) -> f64| Summary::of(&leads.iter().map(|l| f(l)).collect::<Vec<_>>());
    let aggregate = RoundTripMetrics {
        leads_compared: leads.len(),
        pearson_r: pick(|l| l.pearson_r),
        mse: pick(|l| l.mse),
        max_abs_error: pick(|l| l.max_abs_error),
        pearson_r_unclipped: pick(|l| l.pearson_r_unclipped),
    };
    let samples_failed = samples.iter().filter(|s| s.error.is_some()).count();
    let pass = samples_failed == 0
        && !leads.is_empty()
        && aggregate.pearson_r.mean >= MIN_MEAN_PEARSON
        && aggregate.pearson_r.min >= MIN_LEAD_PEARSON
        && aggregate.mse.mean <= MAX_MEAN_MSE;
    RoundTripReport {
        samples_requested,
        samples_checked: samples.len(),
        samples_failed,
        aggregate,
        min_mean_pearson: MIN_MEAN_PEARSON,
        min_lead_pearson: MIN_LEAD_PEARSON,
        max_mean_mse: MAX_MEAN_MSE,
        pass,
        samples,
    }
}

pub fn write_report<T: Serialize>(root: &Path, report: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(report).map_err(crate::annotate::AnnotateError::from)?;
    write_atomic(&root.join(VALIDATION_REPORT_FILE), format!("{text}\n").as_bytes())?;
    Ok(())
}
