//! Deterministic synthetic records and a WFDB dataset writer for them.
//!
//! `ecg_template` beats are sums of Gaussian bumps placed relative to the
//! R peak of each beat:
//!
//! | wave | offset (s) | width sigma (s) | amplitude (mV)        |
//! |------|-----------:|----------------:|-----------------------|
//! | P    | -0.20      | 0.025           | 0.08 to 0.20          |
//! | Q    | -0.03      | 0.010           | -0.05 to -0.15        |
//! | R    |  0.00      | 0.012           | 0.9 to 1.5            |
//! | S    | +0.03      | 0.010           | -0.10 to -0.35        |
//! | T    | +0.30      | 0.050           | 0.15 to 0.40          |
//!
//! The heart rate is drawn once per record from 60 to 90 bpm; with
//! `RR = 60 / bpm`, the record holds `floor(10 / RR)` beats with R peaks at
//! `(k + 0.5) * RR`. Amplitudes are drawn per lead.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::ingest::{RecordHeader, SignalMatrix, SignalSpec, LEAD_NAMES, N_LEADS, N_SAMPLES, SAMPLING_RATE_HZ};
use crate::rng::RecordRng;

use super::{Result, ValidateError};

/// Gain of the fixture signal files, adu per mV.
pub const FIXTURE_GAIN: f64 = 1000.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FixtureKind {
    SineSweep,
    Square,
    EcgTemplate,
}

impl FixtureKind {
    pub const ALL: [FixtureKind; 3] = [FixtureKind::SineSweep, FixtureKind::Square, FixtureKind::EcgTemplate];

    pub fn as_str(self) -> &'static str {
        match self {
            FixtureKind::SineSweep => "sine_sweep",
            FixtureKind::Square => "square",
            FixtureKind::EcgTemplate => "ecg_template",
        }
    }

    pub fn parse(s: &str) -> Result<FixtureKind> {
        FixtureKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| ValidateError::UnknownKind(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticRecord {
    pub kind: FixtureKind,
    pub seed: u64,
    /// Millivolts, 12 x 5000 at 500 Hz.
    pub signals: SignalMatrix,
    /// Heart rate of `ecg_template` records.
    pub bpm: Option<f64>,
}

fn time(i: usize) -> f64 {
    i as f64 / SAMPLING_RATE_HZ
}

fn uniform(rng: &mut RecordRng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.unit()
}

fn sine_sweep() -> Vec<Vec<f64>> {
    (0..N_LEADS)
        .map(|k| {
            let f = (k + 1) as f64;
            (0..N_SAMPLES).map(|i| (2.0 * std::f64::consts::PI * f * time(i)).sin()).collect()
        })
        .collect()
}

/// 2 Hz, +-0.5 mV; each lead starts at a seeded phase.
fn square(rng: &mut RecordRng) -> Vec<Vec<f64>> {
    (0..N_LEADS)
        .map(|_| {
            let phase = rng.unit();
            (0..N_SAMPLES)
                .map(|i| {
                    let cycles = 2.0 * time(i) + phase;
                    if cycles.fract() < 0.5 {
                        0.5
                    } else {
                        -0.5
                    }
                })
                .collect()
        })
        .collect()
}

struct Wave {
    offset: f64,
    sigma: f64,
    amplitude: f64,
}

fn ecg_template(rng: &mut RecordRng) -> (Vec<Vec<f64>>, f64) {
    let bpm = uniform(rng, 60.0, 90.0);
    let rr = 60.0 / bpm;
    let duration = N_SAMPLES as f64 / SAMPLING_RATE_HZ;
    let beats = (duration / rr).floor() as usize;
    let rows = (0..N_LEADS)
        .map(|_| {
            let waves = [
                Wave { offset: -0.20, sigma: 0.025, amplitude: uniform(rng, 0.08, 0.20) },
                Wave { offset: -0.03, sigma: 0.010, amplitude: -uniform(rng, 0.05, 0.15) },
                Wave { offset: 0.0, sigma: 0.012, amplitude: uniform(rng, 0.9, 1.5) },
                Wave { offset: 0.03, sigma: 0.010, amplitude: -uniform(rng, 0.10, 0.35) },
                Wave { offset: 0.30, sigma: 0.050, amplitude: uniform(rng, 0.15, 0.40) },
            ];
            (0..N_SAMPLES)
                .map(|i| {
                    let t = time(i);
                    let mut v = 0.0;
                    for k in 0..beats {
                        let r = (k as f64 + 0.5) * rr;
                        for w in &waves {
                            let d = (t - r - w.offset) / w.sigma;
                            if d.abs() < 8.0 {
                                v += w.amplitude * (-0.5 * d * d).exp();
                            }
                        }
                    }
                    v
                })
                .collect()
        })
        .collect();
    (rows, bpm)
}

/// Builds a fixture record. `kind` is one of `sine_sweep`, `square`,
/// `ecg_template`.
pub fn synth_fixture(kind: &str, seed: u64) -> Result<SyntheticRecord> {
    let kind = FixtureKind::parse(kind)?;
    Ok(synth(kind, seed))
}

pub fn synth(kind: FixtureKind, seed: u64) -> SyntheticRecord {
    let mut rng = RecordRng::from_seed(seed);
    let (rows, bpm) = match kind {
        FixtureKind::SineSweep => (sine_sweep(), None),
        FixtureKind::Square => (square(&mut rng), None),
        FixtureKind::EcgTemplate => {
            let (rows, bpm) = ecg_template(&mut rng);
            (rows, Some(bpm))
        }
    };
    SyntheticRecord {
        kind,
        seed,
        signals: SignalMatrix::from_rows(rows),
        bpm,
    }
}

/// Header and interleaved format-16 bytes for a record, quantized at
/// [`FIXTURE_GAIN`].
pub fn to_wfdb(record_name: &str, signals: &SignalMatrix) -> (String, Vec<u8>) {
    let dat_name = format!("{record_name}.dat");
    let n = signals.n_samples();
    let adc: Vec<Vec<i16>> = signals
        .leads()
        .map(|lead| {
            lead.iter()
                .map(|v| (v * FIXTURE_GAIN).round().clamp(f64::from(i16::MIN + 1), f64::from(i16::MAX)) as i16)
                .collect()
        })
        .collect();
    let mut bytes = Vec::with_capacity(n * N_LEADS * 2);
    for i in 0..n {
        for lead in &adc {
            bytes.extend_from_slice(&lead[i].to_le_bytes());
        }
    }
    let specs = LEAD_NAMES
        .iter()
        .zip(&adc)
        .map(|(name, lead)| {
            let mut spec = SignalSpec::format16(&dat_name, FIXTURE_GAIN, 0, name);
            spec.initial_value = Some(lead.first().copied().map_or(0, i32::from));
            spec.checksum = Some(i32::from(lead.iter().fold(0i16, |acc, &v| acc.wrapping_add(v))));
            spec
        })
        .collect();
    let header = RecordHeader {
        record_name: record_name.to_string(),
        n_signals: N_LEADS,
        sampling_rate_hz: SAMPLING_RATE_HZ,
        n_samples: n,
        signals: specs,
    };
    (header.to_header_text(), bytes)
}

/// One row of a fixture dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct FixtureEntry {
    pub record_id: String,
    pub kind: FixtureKind,
    pub seed: u64,
    pub strat_fold: u8,
}

/// `n` records cycling through `kinds`, seeded `seed, seed + 1, ...`, and
/// assigned folds 1 to 10 in turn.
pub fn fixture_plan(n: usize, kinds: &[FixtureKind], seed: u64) -> Vec<FixtureEntry> {
    (0..n)
        .map(|i| FixtureEntry {
            record_id: (i + 1).to_string(),
            kind: kinds[i % kinds.len().max(1)],
            seed: seed.wrapping_add(i as u64),
            strat_fold: (i % 10) as u8 + 1,
        })
        .collect()
}

const INDEX_HEADER: &str =
    "ecg_id,age,sex,height,weight,scp_codes,baseline_drift,static_noise,strat_fold,filename_hr";

/// Writes `records500/00000/{id:05}_hr.{hea,dat}` files and a
/// `ptbxl_database.csv` index under `dir`. Returns the index path.
pub fn write_fixture_dataset(dir: &Path, plan: &[FixtureEntry]) -> Result<PathBuf> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| ValidateError::Io { path, source }
    };
    let mut csv = String::from(INDEX_HEADER);
    csv.push('\n');
    for e in plan {
        let name = format!("{:0>5}_hr", e.record_id);
        let rel = format!("records500/00000/{name}");
        let folder = dir.join("records500/00000");
        fs::create_dir_all(&folder).map_err(io(&folder))?;
        let record = synth(e.kind, e.seed);
        let (hea, dat) = to_wfdb(&name, &record.signals);
        let hea_path = folder.join(format!("{name}.hea"));
        fs::write(&hea_path, hea).map_err(io(&hea_path))?;
        let dat_path = folder.join(format!("{name}.dat"));
        fs::write(&dat_path, dat).map_err(io(&dat_path))?;
        let sex = e.seed % 2;
        let age = 30 + e.seed % 50;
        let _ = writeln!(
            csv,
            "{},{age}.0,{sex},,,\"{{'NORM': 100.0, 'SR': 0.0}}\",,,{},{rel}",
            e.record_id, e.strat_fold
        );
    }
    let index = dir.join("ptbxl_database.csv");
    fs::write(&index, csv).map_err(io(&index))?;
    Ok(index)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{load_index, parse_header, read_signals};

    #[test]
    fn sine_lead0_peaks_at_quarter_second() {
        let r = synth_fixture("sine_sweep", 0).unwrap();
        let lead = r.signals.lead(0);
        assert!((lead[125] - 1.0).abs() < 1e-12);
        let peak = lead.iter().cloned().fold(f64::MIN, f64::max);
        assert!((peak - 1.0).abs() < 1e-12);
        // lead 11 runs at 12 Hz
        let crossings = r.signals.lead(11).windows(2).filter(|w| w[0] < 0.0 && w[1] >= 0.0).count();
        assert_eq!(crossings, 119);
    }

    #[test]
    fn deterministic_and_seed_sensitive() {
        for kind in ["sine_sweep", "square", "ecg_template"] {
            assert_eq!(synth_fixture(kind, 7).unwrap(), synth_fixture(kind, 7).unwrap());
        }
        assert_ne!(synth_fixture("ecg_template", 7).unwrap().signals, synth_fixture("ecg_template", 8).unwrap().signals);
    }

    #[test]
    fn unknown_kind() {
        assert!(matches!(synth_fixture("sawtooth", 0), Err(ValidateError::UnknownKind(_))));
    }

    #[test]
    fn square_levels() {
        let r = synth_fixture("square", 3).unwrap();
        for lead in r.signals.leads() {
            assert!(lead.iter().all(|v| *v == 0.5 || *v == -0.5));
            let edges = lead.windows(2).filter(|w| w[0] != w[1]).count();
            assert!((39..=40).contains(&edges), "{edges}");
        }
    }

    fn local_peaks_above(x: &[f64], level: f64) -> usize {
        (1..x.len() - 1)
            .filter(|&i| x[i] > level && x[i] >= x[i - 1] && x[i] > x[i + 1])
            .count()
    }

    #[test]
    fn template_peak_count_matches_rate() {
        for seed in 0..20 {
            let r = synth_fixture("ecg_template", seed).unwrap();
            let bpm = r.bpm.unwrap();
            assert!((60.0..=90.0).contains(&bpm));
            let expected = (10.0 * bpm / 60.0).floor() as usize;
            for lead in r.signals.leads() {
                assert_eq!(local_peaks_above(lead, 0.8), expected, "seed {seed}");
                assert!(lead.iter().all(|v| v.is_finite() && v.abs() <= 2.0));
            }
        }
    }

    #[test]
    fn wfdb_round_trip_within_quantization() {
        let r = synth(FixtureKind::EcgTemplate, 5);
        let (hea, dat) = to_wfdb("00001_hr", &r.signals);
        let header = parse_header(&hea).unwrap();
        header.ensure_standard().unwrap();
        let decoded = read_signals(&header, &dat).unwrap();
        for (a, b) in decoded.signals.as_slice().iter().zip(r.signals.as_slice()) {
            assert!((a - b).abs() <= 0.5 / FIXTURE_GAIN + 1e-12);
        }
    }

    #[test]
    fn dataset_index_loads() {
        let dir = tempfile::tempdir().unwrap();
        let plan = fixture_plan(12, &FixtureKind::ALL, 100);
        let index = write_fixture_dataset(dir.path(), &plan).unwrap();
        let loaded = load_index(&fs::read_to_string(index).unwrap()).unwrap();
        assert_eq!(loaded.records.len(), 12);
        assert!(loaded.skipped_rows.is_empty());
        let first = &loaded.records[0];
        assert_eq!(first.record_path.as_deref(), Some("records500/00000/00001_hr"));
        assert_eq!(loaded.records[9].strat_fold, 10);
        assert!(dir.path().join("records500/00000/00012_hr.dat").is_file());
    }
}
