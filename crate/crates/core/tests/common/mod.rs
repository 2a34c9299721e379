#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};

use ecgsynth::ingest::{SignalMatrix, Split};
use ecgsynth::pipeline::{ArtifactKind, Config};
use ecgsynth::validate::{fixture_plan, to_wfdb, write_fixture_dataset, FixtureKind};

/// Writes `n` fixture records under `dir` and returns a config reading
/// them and writing to `dir/out`.
pub fn fixture_config(dir: &Path, n: usize, kinds: &[FixtureKind], seed: u64) -> Config {
    let index = write_fixture_dataset(dir, &fixture_plan(n, kinds, seed)).unwrap();
    Config {
        records_dir: dir.to_path_buf(),
        index_csv: index,
        output_root: dir.join("out"),
        workers: 2,
        ..Config::default()
    }
}

/// Adds a record to an existing fixture dataset.
pub fn append_record(dir: &Path, id: &str, fold: u8, drift: &str, signals: &SignalMatrix) {
    let name = format!("extra_{id}");
    let folder = dir.join("records500/extra");
    fs::create_dir_all(&folder).unwrap();
    let (hea, dat) = to_wfdb(&name, signals);
    fs::write(folder.join(format!("{name}.hea")), hea).unwrap();
    fs::write(folder.join(format!("{name}.dat")), dat).unwrap();
    let index = dir.join("ptbxl_database.csv");
    let mut csv = fs::read_to_string(&index).unwrap();
    csv.push_str(&format!(
        "{id},50.0,1,,,\"{{'IMI': 100.0}}\",{drift},,{fold},records500/extra/{name}\n"
    ));
    fs::write(index, csv).unwrap();
}

/// Every file below `root`, relative path and bytes, sorted.
pub fn tree(root: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                out.push((path.strip_prefix(root).unwrap().to_path_buf(), fs::read(&path).unwrap()));
            }
        }
    }
    out.sort();
    out
}

pub fn sample_files(root: &Path, split: Split, id: &str) -> Vec<PathBuf> {
    ArtifactKind::ALL
        .iter()
        .map(|&k| ecgsynth::pipeline::artifact_path(root, split, k, id))
        .filter(|p| p.is_file())
        .collect()
}
