use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use ecgsynth::annotate::parse_yolo_file;
use ecgsynth::geometry::CanvasSpec;
use ecgsynth::ingest::Split;
use ecgsynth::pipeline::{self, artifact_path, dataset_stats, find_sample, load_config, read_metadata, ArtifactKind, Config};
use ecgsynth::validate::{self, FixtureKind};

#[derive(Parser)]
#[command(name = "ecgsynth", version, about = "Synthetic 12-lead ECG page generator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Render every selected record of the index.
    Generate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        limit: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        workers: Option<usize>,
        /// Comma-separated subset of train,val,test.
        #[arg(long, value_delimiter = ',')]
        splits: Option<Vec<String>>,
        #[arg(long)]
        overwrite: Option<bool>,
    },
    /// Parameter and label distributions of a generated dataset.
    Stats {
        #[arg(long)]
        output_root: PathBuf,
    },
    /// Round-trip, label and filter checks; writes validation_report.json.
    Validate {
        #[arg(long)]
        output_root: PathBuf,
        /// Samples to re-extract.
        #[arg(long, default_value_t = 50)]
        sample: usize,
        /// Configuration the dataset was generated with, for its canvas.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Print one sample's metadata and label lines.
    Inspect {
        #[arg(long)]
        record: String,
        #[arg(long)]
        output_root: PathBuf,
    },
    /// Write a synthetic WFDB dataset and a configuration for it.
    Fixtures {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 60)]
        count: usize,
        /// Comma-separated subset of sine_sweep,square,ecg_template.
        #[arg(long, value_delimiter = ',', default_value = "ecg_template,square")]
        kinds: Vec<String>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

/// Fatal errors exit 1; runs that finish with failures exit 2.
enum Outcome {
    Clean,
    WithFailures,
}

fn read_config(path: &Path) -> Result<Config> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut config = load_config(&text).with_context(|| format!("in {}", path.display()))?;
    config.resolve_paths(path.parent().unwrap_or(Path::new(".")));
    Ok(config)
}

fn generate(
    config_path: &Path,
    limit: Option<usize>,
    seed: Option<u64>,
    workers: Option<usize>,
    splits: Option<Vec<String>>,
    overwrite: Option<bool>,
) -> Result<Outcome> {
    let mut config = read_config(config_path)?;
    if limit.is_some() {
        config.limit = limit;
    }
    if let Some(s) = seed {
        config.global_seed = s;
    }
    if let Some(w) = workers {
        anyhow::ensure!(w >= 1, "--workers must be at least 1");
        config.workers = w;
    }
    if let Some(names) = splits {
        let mut chosen = Vec::new();
        for name in &names {
            let split = Split::parse(name.trim()).with_context(|| format!("unknown split {name:?}"))?;
            if !chosen.contains(&split) {
                chosen.push(split);
            }
        }
        config.splits = chosen;
    }
    if let Some(o) = overwrite {
        config.overwrite = o;
    }
    let report = pipeline::run(&config)?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(if report.failed > 0 {
        Outcome::WithFailures
    } else {
        Outcome::Clean
    })
}

fn stats(root: &Path) -> Result<Outcome> {
    let stats = dataset_stats(root)?;
    println!("{}", serde_json::to_string_pretty(&stats)?);
    Ok(if stats.unreadable.is_empty() {
        Outcome::Clean
    } else {
        Outcome::WithFailures
    })
}

fn validate(root: &Path, sample: usize, config: Option<&Path>) -> Result<Outcome> {
    let canvas = match config {
        Some(p) => read_config(p)?.canvas,
        None => CanvasSpec::default(),
    };
    let roundtrip = validate::roundtrip_report(root, sample)?;
    let labels = validate::label_check(root, &canvas)?;
    let tones = validate::filter_tone_check()?;
    let tones_pass = tones[0].power_reduction >= 0.98 && tones[1].power_reduction <= 0.02 && tones[2].power_reduction >= 0.95;

    let agg = &roundtrip.aggregate;
    println!("{:<28} {:>12} {:>12} {:>12}", "metric", "mean", "std", "min");
    println!("{:<28} {:>12.6} {:>12.6} {:>12.6}", "pearson r", agg.pearson_r.mean, agg.pearson_r.std, agg.pearson_r.min);
    println!(
        "{:<28} {:>12.6} {:>12.6} {:>12.6}",
        "pearson r (unclipped ref)", agg.pearson_r_unclipped.mean, agg.pearson_r_unclipped.std, agg.pearson_r_unclipped.min
    );
    println!("{:<28} {:>12.3e} {:>12.3e} {:>12.3e}", "mse", agg.mse.mean, agg.mse.std, agg.mse.min);
    println!("{:<28} {:>12.6} {:>12.6} {:>12.6}", "max abs error", agg.max_abs_error.mean, agg.max_abs_error.std, agg.max_abs_error.min);
    println!(
        "round trip: {} samples, {} failed, {}",
        roundtrip.samples_checked,
        roundtrip.samples_failed,
        if roundtrip.pass { "PASS" } else { "FAIL" }
    );
    for s in roundtrip.samples.iter().filter(|s| s.error.is_some()) {
        println!("  {}: {}", s.record_id, s.error.as_deref().unwrap_or_default());
    }
    println!(
        "labels: {} pages, min IoU {:.6}, {}",
        labels.pages,
        labels.min_iou,
        if labels.pass() { "PASS" } else { "FAIL" }
    );
    for t in &tones {
        println!("filter {:>5} Hz: power reduction {:>8.4}%", t.frequency_hz, 100.0 * t.power_reduction);
    }

    let report = serde_json::json!({
        "pass": roundtrip.pass && labels.pass() && tones_pass,
        "roundtrip": roundtrip,
        "labels": labels,
        "filter": tones,
    });
    validate::write_report(root, &report)?;
    Ok(if report["pass"] == true {
        Outcome::Clean
    } else {
        Outcome::WithFailures
    })
}

fn inspect(root: &Path, record: &str) -> Result<Outcome> {
    let split = find_sample(root, record).with_context(|| format!("no sample {record:?} under {}", root.display()))?;
    let meta = read_metadata(root, split, record)?;
    println!("{}", serde_json::to_string_pretty(&meta)?);
    let labels_path = artifact_path(root, split, ArtifactKind::Labels, record);
    let labels = fs::read_to_string(&labels_path).with_context(|| format!("reading {}", labels_path.display()))?;
    parse_yolo_file(&labels)?;
    print!("{labels}");
    Ok(Outcome::Clean)
}

fn fixtures(out: &Path, count: usize, kinds: &[String], seed: u64) -> Result<Outcome> {
    let kinds = kinds
        .iter()
        .map(|k| FixtureKind::parse(k.trim()))
        .collect::<Result<Vec<_>, _>>()?;
    anyhow::ensure!(!kinds.is_empty(), "no fixture kinds given");
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let plan = validate::fixture_plan(count, &kinds, seed);
    validate::write_fixture_dataset(out, &plan)?;
    let config = "records_dir: .\nindex_csv: ptbxl_database.csv\noutput_root: output\n";
    let config_path = out.join("config.yaml");
    fs::write(&config_path, config).with_context(|| format!("writing {}", config_path.display()))?;
    println!("{} records written; run `ecgsynth generate --config {}`", plan.len(), config_path.display());
    Ok(Outcome::Clean)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate {
            config,
            limit,
            seed,
            workers,
            splits,
            overwrite,
        } => generate(&config, limit, seed, workers, splits, overwrite),
        Command::Stats { output_root } => stats(&output_root),
        Command::Validate {
            output_root,
            sample,
            config,
        } => validate(&output_root, sample, config.as_deref()),
        Command::Inspect { record, output_root } => inspect(&output_root, &record),
        Command::Fixtures { out, count, kinds, seed } => fixtures(&out, count, &kinds, seed),
    };
    match result {
        Ok(Outcome::Clean) => ExitCode::SUCCESS,
        Ok(Outcome::WithFailures) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
