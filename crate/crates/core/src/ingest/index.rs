use std::collections::{BTreeMap, BTreeSet, HashSet};

use log::warn;
use serde::{Deserialize, Serialize};

use super::{parse_quality_grade, superclass_of, IngestError, Result, Superclass};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sex {
    Male,
    Female,
    #[default]
    Unknown,
}

impl Sex {
    /// PTB-XL encodes male as 0 and female as 1; words are accepted too.
    pub fn parse(cell: &str) -> Sex {
        match cell.trim().to_ascii_lowercase().as_str() {
            "0" | "0.0" | "m" | "male" => Sex::Male,
            "1" | "1.0" | "f" | "female" => Sex::Female,
            _ => Sex::Unknown,
        }
    }
}

/// One row of the metadata index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordMeta {
    pub record_id: String,
    pub age: Option<f64>,
    pub sex: Sex,
    pub height: Option<f64>,
    pub weight: Option<f64>,
    pub scp_codes: BTreeMap<String, f64>,
    pub superclasses: BTreeSet<Superclass>,
    pub baseline_drift_level: u32,
    pub static_noise_level: u32,
    pub strat_fold: u8,
    /// Record path (without extension) relative to the records directory.
    pub record_path: Option<String>,
}

impl RecordMeta {
    pub fn new(record_id: impl Into<String>) -> Self {
        RecordMeta {
            record_id: record_id.into(),
            age: None,
            sex: Sex::Unknown,
            height: None,
            weight: None,
            scp_codes: BTreeMap::new(),
            superclasses: BTreeSet::new(),
            baseline_drift_level: 0,
            static_noise_level: 0,
            strat_fold: 1,
            record_path: None,
        }
    }

    /// Sets the SCP codes and recomputes the superclasses from them.
    pub fn with_scp_codes(mut self, codes: BTreeMap<String, f64>) -> Self {
        self.superclasses = codes.keys().filter_map(|c| superclass_of(c)).collect();
        self.scp_codes = codes;
        self
    }
}

/// Column names of the metadata index. Defaults follow `ptbxl_database.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexColumns {
    pub record_id: String,
    pub age: String,
    pub sex: String,
    pub height: String,
    pub weight: String,
    pub scp_codes: String,
    pub baseline_drift: String,
    pub static_noise: String,
    pub strat_fold: String,
    /// Optional; when absent from the file, records are looked up by id.
    pub record_path: String,
}

impl Default for IndexColumns {
    fn default() -> Self {
        IndexColumns {
            record_id: "ecg_id".into(),
            age: "age".into(),
            sex: "sex".into(),
            height: "height".into(),
            weight: "weight".into(),
            scp_codes: "scp_codes".into(),
            baseline_drift: "baseline_drift".into(),
            static_noise: "static_noise".into(),
            strat_fold: "strat_fold".into(),
            record_path: "filename_hr".into(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DatasetIndex {
    pub records: Vec<RecordMeta>,
    pub superclass_counts: BTreeMap<Superclass, usize>,
    /// Rows that could not be parsed: (1-based data row, reason).
    pub skipped_rows: Vec<(usize, String)>,
}

impl DatasetIndex {
    pub fn from_records(records: Vec<RecordMeta>) -> Self {
        let mut superclass_counts: BTreeMap<Superclass, usize> =
            Superclass::ALL.iter().map(|&s| (s, 0)).collect();
        for r in &records {
            for s in &r.superclasses {
                *superclass_counts.entry(*s).or_default() += 1;
            }
        }
        DatasetIndex {
            records,
            superclass_counts,
            skipped_rows: Vec::new(),
        }
    }

    pub fn get(&self, record_id: &str) -> Option<&RecordMeta> {
        self.records.iter().find(|r| r.record_id == record_id)
    }
}

/// Loads an index using the default (PTB-XL) column names.
pub fn load_index(csv_text: &str) -> Result<DatasetIndex> {
    load_index_with(csv_text, &IndexColumns::default())
}

pub fn load_index_with(csv_text: &str, columns: &IndexColumns) -> Result<DatasetIndex> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(csv_text.as_bytes());
    let headers = reader.headers()?.clone();
    let find = |name: &str| headers.iter().position(|h| h.trim() == name);
    let require = |name: &str| find(name).ok_or_else(|| IngestError::MissingColumn(name.to_string()));

    let col_id = require(&columns.record_id)?;
    let col_age = require(&columns.age)?;
    let col_sex = require(&columns.sex)?;
    let col_height = require(&columns.height)?;
    let col_weight = require(&columns.weight)?;
    let col_scp = require(&columns.scp_codes)?;
    let col_drift = require(&columns.baseline_drift)?;
    let col_noise = require(&columns.static_noise)?;
    let col_fold = require(&columns.strat_fold)?;
    let col_path = find(&columns.record_path);

    let mut records = Vec::new();
    let mut skipped = Vec::new();
    let mut seen = HashSet::new();
    for (i, row) in reader.records().enumerate() {
        let row_no = i + 1;
        let row = match row {
            Ok(r) => r,
            Err(e) => {
                warn!("index row {row_no} skipped: {e}");
                skipped.push((row_no, e.to_string()));
                continue;
            }
        };
        let cell = |c: usize| row.get(c).unwrap_or("").trim();
        let parsed = (|| -> std::result::Result<RecordMeta, String> {
            let id = cell(col_id);
            if id.is_empty() {
                return Err("empty record id".into());
            }
            let fold_text = cell(col_fold);
            let fold = fold_text
                .parse::<f64>()
                .ok()
                .filter(|f| f.fract() == 0.0 && (1.0..=10.0).contains(f))
                .ok_or_else(|| format!("stratified fold `{fold_text}` not in 1..=10"))?;
            let codes = parse_scp_codes(cell(col_scp))?;
            let mut meta = RecordMeta::new(id).with_scp_codes(codes);
            meta.age = optional_number(cell(col_age), "age")?;
            meta.sex = Sex::parse(cell(col_sex));
            meta.height = optional_number(cell(col_height), "height")?;
            meta.weight = optional_number(cell(col_weight), "weight")?;
            meta.baseline_drift_level = parse_quality_grade(cell(col_drift));
            meta.static_noise_level = parse_quality_grade(cell(col_noise));
            meta.strat_fold = fold as u8;
            meta.record_path = col_path.map(|c| cell(c).to_string()).filter(|p| !p.is_empty());
            Ok(meta)
        })();
        match parsed {
            Ok(meta) if !seen.insert(meta.record_id.clone()) => {
                let reason = format!("duplicate record id `{}`", meta.record_id);
                warn!("index row {row_no} skipped: {reason}");
                skipped.push((row_no, reason));
            }
            Ok(meta) => records.push(meta),
            Err(reason) => {
                warn!("index row {row_no} skipped: {reason}");
                skipped.push((row_no, reason));
            }
        }
    }
    let mut index = DatasetIndex::from_records(records);
    index.skipped_rows = skipped;
    Ok(index)
}

fn optional_number(cell: &str, what: &str) -> std::result::Result<Option<f64>, String> {
    if cell.is_empty() || cell.eq_ignore_ascii_case("nan") {
        return Ok(None);
    }
    cell.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .map(Some)
        .ok_or_else(|| format!("{what} `{cell}` is not a number"))
}

/// Parses a Python-literal dict such as `{'NORM': 100.0, 'SR': 0.0}`.
fn parse_scp_codes(cell: &str) -> std::result::Result<BTreeMap<String, f64>, String> {
    let bad = || format!("scp_codes `{cell}` is not a code map");
    let inner = cell
        .trim()
        .strip_prefix('{')
        .and_then(|s| s.strip_suffix('}'))
        .ok_or_else(bad)?;
    let mut codes = BTreeMap::new();
    for entry in inner.split(',') {
        let entry = entry.trim();
        if entry.is_empty() {
            continue;
        }
        let (key, value) = entry.rsplit_once(':').ok_or_else(bad)?;
        let key = key.trim();
        let key = key
            .strip_prefix('\'')
            .and_then(|k| k.strip_suffix('\''))
            .or_else(|| key.strip_prefix('"').and_then(|k| k.strip_suffix('"')))
            .ok_or_else(bad)?;
        let value: f64 = value.trim().parse().map_err(|_| bad())?;
        codes.insert(key.to_string(), value);
    }
    Ok(codes)
}

/// Count and share of records carrying one superclass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SuperclassShare {
    pub count: usize,
    pub percentage: f64,
}

/// Per-superclass record counts, as a percentage of all records in the
/// index. Records may carry several superclasses.
pub fn diagnostic_distribution(index: &DatasetIndex) -> BTreeMap<Superclass, SuperclassShare> {
    let total = index.records.len();
    Superclass::ALL
        .iter()
        .map(|&s| {
            let count = index
                .records
                .iter()
                .filter(|r| r.superclasses.contains(&s))
                .count();
            let percentage = if total == 0 {
                0.0
            } else {
                100.0 * count as f64 / total as f64
            };
            (s, SuperclassShare { count, percentage })
        })
        .collect()
}
