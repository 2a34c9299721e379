use std::fs;
use std::io::{Cursor, Write};
use std::path::{Path, PathBuf};

use image::codecs::jpeg::JpegEncoder;
use image::codecs::png::PngEncoder;
use image::{GrayImage, ImageEncoder, RgbImage};

use crate::annotate::{emit_metadata, emit_signals, emit_yolo_file, page_records, MetadataInputs, SampleMetadata};
use crate::dsp::{condition_record, ecg_bandpass, FilterCoefficients};
use crate::geometry::{compute_calibration, compute_layout, sample_params, CanvasSpec, LeadLayout, ParamDomains, RenderParams, DURATION_S};
use crate::ingest::{parse_header, read_signals, DecodedRecord, RecordMeta, SignalMatrix, Split, SAMPLING_RATE_HZ};
use crate::render::render_page;
use crate::rng::derive_rng;

use super::{Config, PipelineError, Result};

pub const JPEG_QUALITY: u8 = 95;

/// The five per-sample artifacts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArtifactKind {
    Image,
    Mask,
    Signals,
    Metadata,
    Labels,
}

impl ArtifactKind {
    pub const ALL: [ArtifactKind; 5] = [
        ArtifactKind::Image,
        ArtifactKind::Mask,
        ArtifactKind::Signals,
        ArtifactKind::Metadata,
        ArtifactKind::Labels,
    ];

    pub fn dir(self) -> &'static str {
        match self {
            ArtifactKind::Image => "images",
            ArtifactKind::Mask => "masks",
            ArtifactKind::Signals => "signals",
            ArtifactKind::Metadata => "metadata",
            ArtifactKind::Labels => "labels",
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            ArtifactKind::Image => "jpg",
            ArtifactKind::Mask => "png",
            ArtifactKind::Signals => "npy",
            ArtifactKind::Metadata => "json",
            ArtifactKind::Labels => "txt",
        }
    }
}

/// `{root}/{split}/{kind dir}/{record_id}.{ext}`
pub fn artifact_path(root: &Path, split: Split, kind: ArtifactKind, record_id: &str) -> PathBuf {
    root.join(split.as_str())
        .join(kind.dir())
        .join(format!("{record_id}.{}", kind.extension()))
}

/// Rejects ids that would escape the output directory.
pub fn check_record_id(id: &str) -> Result<()> {
    let ok = !id.is_empty() && id != "." && id != ".." && !id.contains(['/', '\\', '\0']);
    if ok {
        Ok(())
    } else {
        Err(PipelineError::BadRecordId(id.to_string()))
    }
}

/// Everything produced for one record, encoded and ready to write.
#[derive(Debug, Clone)]
pub struct SampleArtifacts {
    pub record_id: String,
    pub split: Split,
    pub params: RenderParams,
    pub metadata: SampleMetadata,
    pub normalized: SignalMatrix,
    pub image: RgbImage,
    pub mask: GrayImage,
    pub jpeg: Vec<u8>,
    pub png: Vec<u8>,
    pub npy: Vec<u8>,
    pub labels: String,
    pub metadata_json: String,
}

impl SampleArtifacts {
    pub fn bytes(&self, kind: ArtifactKind) -> &[u8] {
        match kind {
            ArtifactKind::Image => &self.jpeg,
            ArtifactKind::Mask => &self.png,
            ArtifactKind::Signals => &self.npy,
            ArtifactKind::Metadata => self.metadata_json.as_bytes(),
            ArtifactKind::Labels => self.labels.as_bytes(),
        }
    }
}

pub fn encode_jpeg(image: &RgbImage) -> Result<Vec<u8>> {
    let mut buf = Cursor::new(Vec::new());
    JpegEncoder::new_with_quality(&mut buf, JPEG_QUALITY).write_image(
        image.as_raw(),
        image.width(),
        image.height(),
        image::ExtendedColorType::Rgb8,
    )?;
    Ok(buf.into_inner())
}

pub fn encode_png(mask: &GrayImage) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    PngEncoder::new(&mut buf).write_image(mask.as_raw(), mask.width(), mask.height(), image::ExtendedColorType::L8)?;
    Ok(buf)
}

/// Shared, read-only state for generating samples.
#[derive(Debug, Clone)]
pub struct Generator {
    pub canvas: CanvasSpec,
    pub layout: LeadLayout,
    pub filter: FilterCoefficients,
    pub domains: ParamDomains,
    pub global_seed: u64,
}

impl Generator {
    pub fn new(config: &Config) -> Result<Generator> {
        Ok(Generator {
            canvas: config.canvas,
            layout: compute_layout(&config.canvas)?,
            filter: ecg_bandpass(SAMPLING_RATE_HZ)?,
            domains: config.domains.clone(),
            global_seed: config.global_seed,
        })
    }

    /// Parameters the record will be drawn with.
    pub fn params_for(&self, record_id: &str) -> RenderParams {
        sample_params(&mut derive_rng(self.global_seed, record_id), &self.domains)
    }

    /// Filter, normalize, draw and encode one record.
    pub fn build(&self, record: &RecordMeta, split: Split, signals: &SignalMatrix) -> Result<SampleArtifacts> {
        check_record_id(&record.record_id)?;
        let norm = condition_record(&self.filter, signals)?;
        let params = self.params_for(&record.record_id);
        let cal = compute_calibration(&self.canvas, &params, DURATION_S)?;
        let fs = SAMPLING_RATE_HZ as u32;
        let page = render_page(&self.canvas, &self.layout, &cal, &params, &norm.values, fs)?;

        let regions: Vec<_> = self.layout.leads.iter().map(|l| l.region).collect();
        let labels = emit_yolo_file(&page_records(&regions, &page.name_boxes, &self.canvas)?)?;
        let metadata = SampleMetadata::build(&MetadataInputs {
            record,
            split,
            params: &params,
            calibration: &cal,
            canvas: &self.canvas,
            layout: &self.layout,
            name_boxes: &page.name_boxes,
            clipped: &page.clipped,
            mu_mv: &norm.mu,
            sigma_mv: &norm.sigma,
            sampling_rate_hz: fs,
            n_samples: norm.values.n_samples(),
        })?;
        Ok(SampleArtifacts {
            record_id: record.record_id.clone(),
            split,
            params,
            metadata_json: emit_metadata(&metadata)?,
            metadata,
            npy: emit_signals(&norm.values)?,
            jpeg: encode_jpeg(&page.image)?,
            png: encode_png(&page.mask)?,
            normalized: norm.values,
            image: page.image,
            mask: page.mask,
            labels,
        })
    }
}

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().unwrap_or(Path::new("."));
    let io = |source| PipelineError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

/// Creates the five artifact directories of a split.
pub fn create_split_dirs(root: &Path, split: Split) -> Result<()> {
    for kind in ArtifactKind::ALL {
        let dir = root.join(split.as_str()).join(kind.dir());
        fs::create_dir_all(&dir).map_err(|source| PipelineError::Io { path: dir, source })?;
    }
    Ok(())
}

pub fn write_sample(root: &Path, artifacts: &SampleArtifacts) -> Result<()> {
    create_split_dirs(root, artifacts.split)?;
    for kind in ArtifactKind::ALL {
        let path = artifact_path(root, artifacts.split, kind, &artifacts.record_id);
        write_atomic(&path, artifacts.bytes(kind))?;
    }
    Ok(())
}

pub fn sample_complete(root: &Path, split: Split, record_id: &str) -> bool {
    ArtifactKind::ALL
        .iter()
        .all(|&k| artifact_path(root, split, k, record_id).is_file())
}

/// Header and signal file locations for an index row: the row's record
/// path if it has one, else the record id, relative to `records_dir`.
pub fn record_files(records_dir: &Path, record: &RecordMeta) -> PathBuf {
    records_dir.join(record.record_path.as_deref().unwrap_or(&record.record_id))
}

/// Reads a record's WFDB header and signal file.
pub fn load_record(records_dir: &Path, record: &RecordMeta) -> Result<DecodedRecord> {
    let mut hea = record_files(records_dir, record).into_os_string();
    hea.push(".hea");
    let hea = PathBuf::from(hea);
    let text = fs::read_to_string(&hea).map_err(|source| PipelineError::Io {
        path: hea.clone(),
        source,
    })?;
    let header = parse_header(&text)?;
    header.ensure_standard()?;
    let dat_name = &header.signals[0].file_name;
    if header.signals.iter().any(|s| &s.file_name != dat_name) {
        return Err(PipelineError::Unsupported("signals spread over several files".into()));
    }
    let dat = hea.parent().unwrap_or(Path::new(".")).join(dat_name);
    let bytes = fs::read(&dat).map_err(|source| PipelineError::Io { path: dat, source })?;
    Ok(read_signals(&header, &bytes)?)
}
