mod common;

use std::fs;

use ecgsynth::geometry::{CanvasSpec, ParamDomains};
use ecgsynth::ingest::Split;
use ecgsynth::pipeline::{artifact_path, dataset_stats, find_sample, run, ArtifactKind};
use ecgsynth::validate::{
    label_check, parameter_audit, roundtrip_report, sample_ids, share, write_report, FixtureKind, MIN_LEAD_PEARSON,
    MIN_MEAN_PEARSON, VALIDATION_REPORT_FILE,
};
use image::GrayImage;

use common::fixture_config;

#[test]
fn roundtrip_labels_and_stats_on_generated_samples() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = fixture_config(dir.path(), 6, &FixtureKind::ALL, 21);
    config.workers = 3;
    run(&config).unwrap();
    let root = &config.output_root;

    let report = roundtrip_report(root, 100).unwrap();
    assert_eq!(report.samples_checked, 6);
    assert_eq!(report.samples_failed, 0);
    assert_eq!(report.aggregate.leads_compared, 72);
    let agg = &report.aggregate;
    assert!(agg.pearson_r.min > 0.9 && agg.pearson_r.max <= 1.0);
    assert!(agg.mse.min >= 0.0);
    let expected_pass = agg.pearson_r.mean >= MIN_MEAN_PEARSON
        && agg.pearson_r.min >= MIN_LEAD_PEARSON
        && agg.mse.mean <= report.max_mean_mse;
    assert_eq!(report.pass, expected_pass);
    // sine_sweep records are smooth enough to recover almost exactly
    for s in report.samples.iter().filter(|s| s.record_id == "1" || s.record_id == "4") {
        for lead in &s.leads {
            assert!(lead.pearson_r > 0.999, "{} {}: {}", s.record_id, lead.lead, lead.pearson_r);
        }
    }
    write_report(root, &report).unwrap();
    assert!(root.join(VALIDATION_REPORT_FILE).is_file());

    let labels = label_check(root, &CanvasSpec::default()).unwrap();
    assert_eq!(labels.pages, 6);
    assert_eq!(labels.min_iou, 1.0);
    assert!(labels.pass());

    let stats = dataset_stats(root).unwrap();
    assert_eq!(stats.samples, 6);
    assert_eq!(stats.per_split.get(&Split::Train), Some(&6));
    assert_eq!(stats.superclasses.get("NORM"), Some(&6));
    assert!(stats.unreadable.is_empty());
    assert_eq!(find_sample(root, "4"), Some(Split::Train));
    assert_eq!(find_sample(root, "404"), None);
}

#[test]
fn blanked_lead_surfaces_in_report() {
    let dir = tempfile::tempdir().unwrap();
    let config = fixture_config(dir.path(), 2, &[FixtureKind::Square], 4);
    run(&config).unwrap();
    let root = &config.output_root;
    let mask_path = artifact_path(root, Split::Train, ArtifactKind::Mask, "2");
    let mut mask: GrayImage = image::open(&mask_path).unwrap().to_luma8();
    // lead V1 (index 6) occupies rows 1768..2016
    for y in 1740..2040 {
        for x in 0..mask.width() {
            mask.put_pixel(x, y, image::Luma([0]));
        }
    }
    mask.save(&mask_path).unwrap();

    let report = roundtrip_report(root, 10).unwrap();
    assert!(!report.pass);
    assert_eq!(report.samples_failed, 1);
    let bad = report.samples.iter().find(|s| s.record_id == "2").unwrap();
    assert!(bad.error.as_deref().unwrap().contains("lead V1"), "{:?}", bad.error);
}

#[test]
fn missing_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    assert!(roundtrip_report(dir.path(), 5).is_err());
    let config = fixture_config(dir.path(), 1, &[FixtureKind::Square], 4);
    run(&config).unwrap();
    let root = &config.output_root;
    fs::remove_file(artifact_path(root, Split::Train, ArtifactKind::Signals, "1")).unwrap();
    let report = roundtrip_report(root, 5).unwrap();
    assert!(!report.pass);
    assert!(report.samples[0].error.as_deref().unwrap().contains("missing artifact"));
    assert_eq!(sample_ids(root).unwrap().len(), 1);
}

#[test]
fn grid_visibility_is_balanced_over_1000_records() {
    let stats = parameter_audit(1000, 42, &ParamDomains::default());
    let on = share(&stats.grid_visible, "true");
    assert!((0.47..=0.53).contains(&on), "{on}");
}
