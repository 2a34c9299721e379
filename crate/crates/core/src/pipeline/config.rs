//! Run configuration.
//!
//! The file is a flat list of `key: value` lines with `#` comments. Values
//! are strings, numbers, booleans or flow lists (`[25, 50]`). Every key is
//! optional; unknown keys are rejected.
//!
//! | key | default | meaning |
//! |-----|---------|---------|
//! | `records_dir` | `.` | root the index's record paths are relative to |
//! | `index_csv` | `ptbxl_database.csv` | metadata index |
//! | `output_root` | `output` | dataset tree is written here |
//! | `global_seed` | `42` | seed every record stream derives from |
//! | `workers` | available cores | worker threads |
//! | `limit` | none | process at most this many records |
//! | `splits` | `[train, val, test]` | splits to generate |
//! | `overwrite` | `false` | regenerate samples whose files already exist |
//! | `paper_speed` | `[25, 50]` | mm/s options |
//! | `voltage_scale` | `[5, 10]` | mm/mV options |
//! | `grid_visible` | `[true, false]` | grid options |
//! | `grid_color` | `[red, green, black, gray]` | grid color options |
//! | `grid_opacity` | `0.8` | fixed; any other value is rejected |
//! | `stroke_width_min`, `stroke_width_max` | `2.0`, `3.0` | stroke width range, px |
//! | `canvas_dpi`, `canvas_width_px`, `canvas_height_px` | 300, 2481, 3507 | page |
//! | `margin_top`, `margin_bottom`, `margin_left`, `margin_right` | 100, 100, 150, 150 | px |
//! | `lead_gap_px`, `pulse_slot_px` | 30, 70 | px |
//! | `column_record_id`, `column_age`, ... | PTB-XL names | index column names |
//!
//! Relative paths are resolved against the configuration file's directory.

use std::path::{Path, PathBuf};

use serde_yaml::Value;
use thiserror::Error;

use crate::geometry::{CanvasSpec, GridColor, ParamDomains, GRID_OPACITY, PAPER_SPEEDS, STROKE_WIDTH_RANGE, VOLTAGE_SCALES};
use crate::ingest::{IndexColumns, Split};

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("config syntax: {0}")]
    Syntax(String),
    #[error("unknown config key {0:?}")]
    UnknownKey(String),
    #[error("config key {key:?}: {reason}")]
    DomainViolation { key: String, reason: String },
}

type Result<T, E = ConfigError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub records_dir: PathBuf,
    pub index_csv: PathBuf,
    pub output_root: PathBuf,
    pub global_seed: u64,
    pub workers: usize,
    pub limit: Option<usize>,
    pub splits: Vec<Split>,
    pub overwrite: bool,
    pub domains: ParamDomains,
    pub canvas: CanvasSpec,
    pub columns: IndexColumns,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            records_dir: PathBuf::from("."),
            index_csv: PathBuf::from("ptbxl_database.csv"),
            output_root: PathBuf::from("output"),
            global_seed: 42,
            workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
            limit: None,
            splits: Split::ALL.to_vec(),
            overwrite: false,
            domains: ParamDomains::default(),
            canvas: CanvasSpec::default(),
            columns: IndexColumns::default(),
        }
    }
}

fn violation(key: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::DomainViolation {
        key: key.to_string(),
        reason: reason.into(),
    }
}

fn as_u64(key: &str, v: &Value) -> Result<u64> {
    v.as_u64().ok_or_else(|| violation(key, "expected a non-negative integer"))
}

fn as_u32(key: &str, v: &Value) -> Result<u32> {
    u32::try_from(as_u64(key, v)?).map_err(|_| violation(key, "integer too large"))
}

fn as_f64(key: &str, v: &Value) -> Result<f64> {
    v.as_f64()
        .filter(|x| x.is_finite())
        .ok_or_else(|| violation(key, "expected a number"))
}

fn as_bool(key: &str, v: &Value) -> Result<bool> {
    v.as_bool().ok_or_else(|| violation(key, "expected true or false"))
}

fn as_str<'a>(key: &str, v: &'a Value) -> Result<&'a str> {
    v.as_str().ok_or_else(|| violation(key, "expected a string"))
}

/// A list value; a bare scalar counts as a one-element list.
fn as_list<'a>(key: &str, v: &'a Value) -> Result<Vec<&'a Value>> {
    let items: Vec<&Value> = match v {
        Value::Sequence(items) => items.iter().collect(),
        Value::Mapping(_) | Value::Null => return Err(violation(key, "expected a list")),
        scalar => vec![scalar],
    };
    if items.is_empty() {
        return Err(violation(key, "list must not be empty"));
    }
    Ok(items)
}

fn subset<T: PartialEq + Copy + std::fmt::Debug>(key: &str, items: Vec<T>, allowed: &[T]) -> Result<Vec<T>> {
    if let Some(bad) = items.iter().find(|x| !allowed.contains(x)) {
        return Err(violation(key, format!("{bad:?} is not one of {allowed:?}")));
    }
    let mut out: Vec<T> = Vec::new();
    for x in items {
        if !out.contains(&x) {
            out.push(x);
        }
    }
    Ok(out)
}

/// Parses configuration text. Paths are kept as written.
pub fn load_config(text: &str) -> Result<Config> {
    let root: Value = serde_yaml::from_str(text).map_err(|e| ConfigError::Syntax(e.to_string()))?;
    let map = match root {
        Value::Null => return Ok(Config::default()),
        Value::Mapping(m) => m,
        _ => return Err(ConfigError::Syntax("expected `key: value` lines".into())),
    };
    let mut cfg = Config::default();
    let (mut w_min, mut w_max) = STROKE_WIDTH_RANGE;
    for (k, v) in &map {
        let key = k
            .as_str()
            .ok_or_else(|| ConfigError::Syntax(format!("key {k:?} is not a string")))?;
        if matches!(v, Value::Mapping(_)) {
            return Err(ConfigError::Syntax(format!("{key}: nested mappings are not allowed")));
        }
        match key {
            "records_dir" => cfg.records_dir = as_str(key, v)?.into(),
            "index_csv" => cfg.index_csv = as_str(key, v)?.into(),
            "output_root" => cfg.output_root = as_str(key, v)?.into(),
            "global_seed" => cfg.global_seed = as_u64(key, v)?,
            "workers" => {
                cfg.workers = as_u64(key, v)? as usize;
                if cfg.workers == 0 {
                    return Err(violation(key, "need at least one worker"));
                }
            }
            "limit" => {
                cfg.limit = match v {
                    Value::Null => None,
                    _ => Some(as_u64(key, v)? as usize),
                }
            }
            "splits" => {
                let names = as_list(key, v)?
                    .into_iter()
                    .map(|x| {
                        let s = as_str(key, x)?;
                        Split::parse(s).ok_or_else(|| violation(key, format!("unknown split {s:?}")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                cfg.splits = subset(key, names, &Split::ALL)?;
            }
            "overwrite" => cfg.overwrite = as_bool(key, v)?,
            "paper_speed" => {
                let xs = as_list(key, v)?.into_iter().map(|x| as_u32(key, x)).collect::<Result<_>>()?;
                cfg.domains.paper_speed = subset(key, xs, &PAPER_SPEEDS)?;
            }
            "voltage_scale" => {
                let xs = as_list(key, v)?.into_iter().map(|x| as_u32(key, x)).collect::<Result<_>>()?;
                cfg.domains.voltage_scale = subset(key, xs, &VOLTAGE_SCALES)?;
            }
            "grid_visible" => {
                let xs = as_list(key, v)?.into_iter().map(|x| as_bool(key, x)).collect::<Result<_>>()?;
                cfg.domains.grid_visible = subset(key, xs, &[true, false])?;
            }
            "grid_color" => {
                let xs = as_list(key, v)?
                    .into_iter()
                    .map(|x| {
                        let s = as_str(key, x)?;
                        GridColor::parse(s).ok_or_else(|| violation(key, format!("unknown color {s:?}")))
                    })
                    .collect::<Result<_>>()?;
                cfg.domains.grid_color = subset(key, xs, &GridColor::ALL)?;
            }
            "grid_opacity" => {
                if as_f64(key, v)? != GRID_OPACITY {
                    return Err(violation(key, "grid opacity is fixed at 0.8"));
                }
            }
            "stroke_width_min" => w_min = as_f64(key, v)?,
            "stroke_width_max" => w_max = as_f64(key, v)?,
            "canvas_dpi" => cfg.canvas.dpi = as_u32(key, v)?,
            "canvas_width_px" => cfg.canvas.width_px = as_u32(key, v)?,
            "canvas_height_px" => cfg.canvas.height_px = as_u32(key, v)?,
            "margin_top" => cfg.canvas.margin_top = as_u32(key, v)?,
            "margin_bottom" => cfg.canvas.margin_bottom = as_u32(key, v)?,
            "margin_left" => cfg.canvas.margin_left = as_u32(key, v)?,
            "margin_right" => cfg.canvas.margin_right = as_u32(key, v)?,
            "lead_gap_px" => cfg.canvas.lead_gap_px = as_u32(key, v)?,
            "pulse_slot_px" => cfg.canvas.pulse_slot_px = as_u32(key, v)?,
            _ => {
                let Some(column) = key.strip_prefix("column_") else {
                    return Err(ConfigError::UnknownKey(key.to_string()));
                };
                let name = as_str(key, v)?.to_string();
                let c = &mut cfg.columns;
                let slot = match column {
                    "record_id" => &mut c.record_id,
                    "age" => &mut c.age,
                    "sex" => &mut c.sex,
                    "height" => &mut c.height,
                    "weight" => &mut c.weight,
                    "scp_codes" => &mut c.scp_codes,
                    "baseline_drift" => &mut c.baseline_drift,
                    "static_noise" => &mut c.static_noise,
                    "strat_fold" => &mut c.strat_fold,
                    "record_path" => &mut c.record_path,
                    _ => return Err(ConfigError::UnknownKey(key.to_string())),
                };
                *slot = name;
            }
        }
    }
    let (lo, hi) = STROKE_WIDTH_RANGE;
    if !(lo <= w_min && w_min <= w_max && w_max <= hi) {
        return Err(violation(
            "stroke_width_min",
            format!("need {lo} <= min <= max <= {hi}, got [{w_min}, {w_max}]"),
        ));
    }
    cfg.domains.stroke_width = (w_min, w_max);
    Ok(cfg)
}

impl Config {
    /// Makes relative paths relative to `base`.
    pub fn resolve_paths(&mut self, base: &Path) {
        for p in [&mut self.records_dir, &mut self.index_csv, &mut self.output_root] {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
    }
}
