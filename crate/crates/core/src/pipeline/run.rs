use std::collections::BTreeMap;
use std::fs;
use std::time::Instant;

use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dsp::DspError;
use crate::geometry::RenderParams;
use crate::ingest::{assign_split, load_index_with, quality_filter, RecordMeta, Split};

use super::generate::{create_split_dirs, load_record, sample_complete, write_atomic, write_sample, Generator};
use super::{Config, PipelineError, Result};

pub const RUN_REPORT_FILE: &str = "run_report.json";

/// What happened to one record.
#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Written { split: Split, params: RenderParams, seconds: f64 },
    SkippedQuality,
    SkippedZeroVariance,
    AlreadyPresent,
    Failed(String),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SkipCounts {
    pub quality: usize,
    pub zero_variance: usize,
    pub already_present: usize,
}

impl SkipCounts {
    pub fn total(&self) -> usize {
        self.quality + self.zero_variance + self.already_present
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct WidthStats {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
}

/// Counts of each randomized parameter over written samples.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ParamStats {
    pub paper_speed_mm_s: BTreeMap<String, usize>,
    #[serde(rename = "voltage_scale_mm_mV")]
    pub voltage_scale_mm_mv: BTreeMap<String, usize>,
    pub grid_visible: BTreeMap<String, usize>,
    pub grid_color: BTreeMap<String, usize>,
    pub stroke_width_px: Option<WidthStats>,
}

impl ParamStats {
    pub fn from_params<'a>(params: impl IntoIterator<Item = &'a RenderParams>) -> ParamStats {
        let mut s = ParamStats::default();
        let mut widths = Vec::new();
        for p in params {
            *s.paper_speed_mm_s.entry(p.paper_speed_mm_s.to_string()).or_default() += 1;
            *s.voltage_scale_mm_mv.entry(p.voltage_scale_mm_mv.to_string()).or_default() += 1;
            *s.grid_visible.entry(p.grid_visible.to_string()).or_default() += 1;
            *s.grid_color.entry(p.grid_color.as_str().to_string()).or_default() += 1;
            widths.push(p.stroke_width_px);
        }
        if !widths.is_empty() {
            s.stroke_width_px = Some(WidthStats {
                min: widths.iter().copied().fold(f64::INFINITY, f64::min),
                max: widths.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                mean: widths.iter().sum::<f64>() / widths.len() as f64,
            });
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub record_id: String,
    pub error: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub wall_s: f64,
    pub mean_sample_s: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub total: usize,
    pub succeeded: usize,
    pub failed: usize,
    pub skipped: SkipCounts,
    /// Written samples per split.
    pub per_split: BTreeMap<Split, usize>,
    pub parameters: ParamStats,
    pub failures: Vec<Failure>,
    pub global_seed: u64,
    pub timing: Timing,
}

impl RunReport {
    fn from_outcomes(records: &[(&RecordMeta, Split)], outcomes: &[Outcome], global_seed: u64, wall_s: f64) -> RunReport {
        let mut r = RunReport {
            total: outcomes.len(),
            global_seed,
            ..RunReport::default()
        };
        let mut params = Vec::new();
        let mut busy = 0.0;
        for ((record, _), outcome) in records.iter().zip(outcomes) {
            match outcome {
                Outcome::Written { split, params: p, seconds } => {
                    r.succeeded += 1;
                    *r.per_split.entry(*split).or_default() += 1;
                    params.push(*p);
                    busy += seconds;
                }
                Outcome::SkippedQuality => r.skipped.quality += 1,
                Outcome::SkippedZeroVariance => r.skipped.zero_variance += 1,
                Outcome::AlreadyPresent => r.skipped.already_present += 1,
                Outcome::Failed(error) => {
                    r.failed += 1;
                    r.failures.push(Failure {
                        record_id: record.record_id.clone(),
                        error: error.clone(),
                    });
                }
            }
        }
        r.parameters = ParamStats::from_params(&params);
        r.timing = Timing {
            wall_s,
            mean_sample_s: if r.succeeded > 0 { busy / r.succeeded as f64 } else { 0.0 },
        };
        r
    }

    /// Exit status for the command line: 0 clean, 2 with failures.
    pub fn exit_code(&self) -> i32 {
        if self.failed > 0 {
            2
        } else {
            0
        }
    }
}

fn process(generator: &Generator, config: &Config, record: &RecordMeta, split: Split) -> Outcome {
    if !quality_filter(record) {
        return Outcome::SkippedQuality;
    }
    if !config.overwrite && sample_complete(&config.output_root, split, &record.record_id) {
        return Outcome::AlreadyPresent;
    }
    let start = Instant::now();
    let result = load_record(&config.records_dir, record)
        .and_then(|decoded| generator.build(record, split, &decoded.signals))
        .and_then(|artifacts| write_sample(&config.output_root, &artifacts).map(|()| artifacts.params));
    match result {
        Ok(params) => Outcome::Written {
            split,
            params,
            seconds: start.elapsed().as_secs_f64(),
        },
        Err(PipelineError::Dsp(DspError::ZeroVariance { lead })) => {
            info!("record {}: lead {} is flat, skipped", record.record_id, lead.unwrap_or("?"));
            Outcome::SkippedZeroVariance
        }
        Err(e) => {
            warn!("record {} failed: {e}", record.record_id);
            Outcome::Failed(e.to_string())
        }
    }
}

/// Generates every selected record and writes `run_report.json` beside
/// the outputs. Only an unreadable index or output root is fatal.
pub fn run(config: &Config) -> Result<RunReport> {
    let start = Instant::now();
    let csv = fs::read_to_string(&config.index_csv).map_err(|source| PipelineError::Io {
        path: config.index_csv.clone(),
        source,
    })?;
    let index = load_index_with(&csv, &config.columns)?;
    for (row, reason) in &index.skipped_rows {
        warn!("index row {row} skipped: {reason}");
    }
    for &split in &config.splits {
        create_split_dirs(&config.output_root, split)?;
    }
    let generator = Generator::new(config)?;

    let mut selected: Vec<(&RecordMeta, Split)> = index
        .records
        .iter()
        .filter_map(|r| {
            let split = assign_split(i64::from(r.strat_fold)).ok()?;
            config.splits.contains(&split).then_some((r, split))
        })
        .collect();
    if let Some(limit) = config.limit {
        selected.truncate(limit);
    }
    info!("{} records selected, {} workers", selected.len(), config.workers);

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| PipelineError::Unsupported(format!("thread pool: {e}")))?;
    let outcomes: Vec<Outcome> = pool.install(|| {
        selected
            .par_iter()
            .map(|(record, split)| process(&generator, config, record, *split))
            .collect()
    });

    let report = RunReport::from_outcomes(&selected, &outcomes, config.global_seed, start.elapsed().as_secs_f64());
    let text = serde_json::to_string_pretty(&report).map_err(crate::annotate::AnnotateError::from)?;
    write_atomic(&config.output_root.join(RUN_REPORT_FILE), format!("{text}\n").as_bytes())?;
    Ok(report)
}
