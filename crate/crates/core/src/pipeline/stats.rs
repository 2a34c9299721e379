use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::annotate::{parse_metadata, SampleMetadata};
use crate::geometry::RenderParams;
use crate::ingest::Split;

use super::generate::{artifact_path, ArtifactKind};
use super::run::ParamStats;
use super::{PipelineError, Result};

/// Summary of a generated dataset, read back from its metadata files.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub samples: usize,
    pub per_split: BTreeMap<Split, usize>,
    pub superclasses: BTreeMap<String, usize>,
    pub parameters: ParamStats,
    pub clipped_samples: usize,
    pub samples_with_clipping: usize,
    /// Metadata files that could not be read or parsed.
    pub unreadable: Vec<String>,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> PipelineError + '_ {
    move |source| PipelineError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn params_of(m: &SampleMetadata) -> RenderParams {
    RenderParams {
        paper_speed_mm_s: m.paper_speed_mm_s,
        voltage_scale_mm_mv: m.voltage_scale_mm_mv,
        grid_visible: m.grid_visible,
        grid_color: m.grid_color,
        grid_opacity: m.grid_opacity,
        stroke_width_px: m.stroke_width_px,
        rng_seed: m.rng_seed,
    }
}

/// Metadata file paths of one split, sorted by name.
pub fn metadata_files(root: &Path, split: Split) -> Result<Vec<PathBuf>> {
    let dir = root.join(split.as_str()).join(ArtifactKind::Metadata.dir());
    if !dir.is_dir() {
        return Ok(Vec::new());
    }
    let mut files: Vec<PathBuf> = fs::read_dir(&dir)
        .map_err(io_err(&dir))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    files.sort();
    Ok(files)
}

pub fn dataset_stats(root: &Path) -> Result<DatasetStats> {
    let mut stats = DatasetStats::default();
    let mut params = Vec::new();
    for split in Split::ALL {
        for path in metadata_files(root, split)? {
            let meta = fs::read_to_string(&path)
                .map_err(|e| e.to_string())
                .and_then(|t| parse_metadata(&t).map_err(|e| e.to_string()));
            let meta = match meta {
                Ok(m) => m,
                Err(e) => {
                    stats.unreadable.push(format!("{}: {e}", path.display()));
                    continue;
                }
            };
            stats.samples += 1;
            *stats.per_split.entry(split).or_default() += 1;
            for sc in &meta.superclasses {
                *stats.superclasses.entry(sc.as_str().to_string()).or_default() += 1;
            }
            stats.clipped_samples += meta.clipped_sample_count;
            if meta.clipped_sample_count > 0 {
                stats.samples_with_clipping += 1;
            }
            params.push(params_of(&meta));
        }
    }
    stats.parameters = ParamStats::from_params(&params);
    Ok(stats)
}

/// Locates a generated sample by record id.
pub fn find_sample(root: &Path, record_id: &str) -> Option<Split> {
    Split::ALL
        .into_iter()
        .find(|&s| artifact_path(root, s, ArtifactKind::Metadata, record_id).is_file())
}

/// Reads and checks a sample's metadata.
pub fn read_metadata(root: &Path, split: Split, record_id: &str) -> Result<SampleMetadata> {
    let path = artifact_path(root, split, ArtifactKind::Metadata, record_id);
    let text = fs::read_to_string(&path).map_err(io_err(&path))?;
    Ok(parse_metadata(&text)?)
}
