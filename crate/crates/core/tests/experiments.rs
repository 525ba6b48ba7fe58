mod common;

use std::fs;

use tmuq_core::datagen::{moon_point, two_moons};
use tmuq_core::harness::config::Dataset;
use tmuq_core::harness::experiments::{run_cpt, run_image_on, run_moons, run_single_pattern};
use tmuq_core::harness::ExperimentConfig;
use tmuq_core::uncertainty::probability_score;
use tmuq_core::Literals;

#[test]
fn single_pattern_endpoints_and_reproducible_csv() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::single_pattern();
    cfg.output_dir = Some(dir.path().join("a"));
    let runs = run_single_pattern(&cfg).unwrap();
    assert_eq!(runs.len(), 11);
    let at = |p: f64| runs.iter().find(|r| (r.level - p).abs() < 1e-9).unwrap().averaged_score;
    assert!(at(1.0) >= 0.95);
    assert!((at(0.5) - 0.5).abs() <= 0.05);

    cfg.output_dir = Some(dir.path().join("b"));
    run_single_pattern(&cfg).unwrap();
    for f in ["trace.csv", "scores.csv"] {
        assert_eq!(fs::read(dir.path().join("a").join(f)).unwrap(), fs::read(dir.path().join("b").join(f)).unwrap());
    }
    let saved = ExperimentConfig::load(&dir.path().join("a/config.json")).unwrap();
    assert_eq!(saved.dataset, cfg.dataset);
}

#[test]
fn cpt_extreme_rows_converge_to_the_bounds() {
    let mut cfg = ExperimentConfig::cpt();
    if let Dataset::Cpt { specificities, .. } = &mut cfg.dataset {
        *specificities = vec![2.0];
    }
    let run = &run_cpt(&cfg).unwrap()[0];
    // Row 0 is (1,1,1) with p = 1, row 7 is (0,0,0) with p = 0.
    let scores = &run.averaged_scores;
    assert!(scores[0] >= 0.9 && scores[7] <= 0.1, "{scores:?}");
    assert!(run.unique_clauses >= 1);
}

#[test]
fn wrong_config_kind_rejected() {
    assert!(run_moons(&ExperimentConfig::cpt()).is_err());
    assert!(run_single_pattern(&ExperimentConfig::moons()).is_err());
}

/// Distance from `p` to the nearest point of a noiseless moon.
fn arc_distance(p: [f64; 2], lower: bool) -> f64 {
    (0..=400)
        .map(|k| {
            let q = moon_point(lower, std::f64::consts::PI * k as f64 / 400.0);
            ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt()
        })
        .fold(f64::INFINITY, f64::min)
}

#[test]
fn moons_certainty_regions() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::moons();
    cfg.output_dir = Some(dir.path().to_path_buf());
    let out = run_moons(&cfg).unwrap();
    let m = &out.metrics;
    assert!((m.outside_mean_score - 0.5).abs() <= 0.1, "{m:?}");
    assert!(m.interior_min_class1 >= 0.9, "{m:?}");
    assert!(m.interior_max_class0 <= 0.1, "{m:?}");

    // Points roughly equidistant from both arcs are less certain than points
    // on an arc.
    let (train, _) = two_moons(1000, 0.15, tmuq_core::multiclass::derive_seed(cfg.seed, 0)).unwrap();
    let (bx, by) = tmuq_core::datagen::bounding_box(&train).unwrap();
    let certainty = |p: [f64; 2]| {
        let v = out.tm.clipped_sum(&Literals::from_bits(&out.encoder.encode(&p).unwrap()));
        (probability_score(v, out.tm.target()).unwrap().value() - 0.5).abs()
    };
    let (mut band, mut arcs) = (Vec::new(), Vec::new());
    for g in &out.grid {
        let p = [g.x, g.y];
        if p[0] < bx.0 || p[0] > bx.1 || p[1] < by.0 || p[1] > by.1 {
            continue;
        }
        let (d0, d1) = (arc_distance(p, false), arc_distance(p, true));
        if (d0 - d1).abs() < 0.05 && d0 < 0.5 {
            band.push(certainty(p));
        } else if d0.min(d1) < 0.02 {
            arcs.push(certainty(p));
        }
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    assert!(band.len() >= 10 && arcs.len() >= 10);
    assert!(mean(&band) < mean(&arcs), "band {} vs arcs {}", mean(&band), mean(&arcs));

    let grid = fs::read_to_string(dir.path().join("grid.csv")).unwrap();
    assert_eq!(grid.lines().count(), 1 + 100 * 100);
}

#[test]
fn image_pipeline_on_synthetic_images() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::image_desk("unused");
    cfg.epochs = 2;
    cfg.params.num_clauses = 40;
    cfg.output_dir = Some(dir.path().to_path_buf());
    let train = common::synthetic_images(60, 0.1, 1);
    let test = common::synthetic_images(40, 0.1, 2);
    let mut epochs_seen = Vec::new();
    let out = run_image_on(&cfg, &train, &test, |e, _| epochs_seen.push(e)).unwrap();
    assert_eq!(epochs_seen, vec![1, 2]);
    assert!(out.metrics.accuracy > 0.5, "{:?}", out.metrics);
    assert_eq!(out.reports.len(), 80);
    assert!(out.curve.count_at.windows(2).all(|w| w[0] >= w[1]));
    for f in ["reports.csv", "threshold_curve.csv", "histograms.csv", "metrics.json", "config.json"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let hist = fs::read_to_string(dir.path().join("histograms.csv")).unwrap();
    let total: usize = hist.lines().skip(1).map(|l| l.split(',').nth(3).unwrap().parse::<usize>().unwrap()).sum();
    assert_eq!(total, 80);
}

#[test]
fn resource_guard_stops_oversized_runs() {
    let mut cfg = ExperimentConfig::image_desk("unused");
    cfg.params.num_clauses = 20_000_000;
    let train = common::synthetic_images(1, 0.0, 1);
    assert!(matches!(
        run_image_on(&cfg, &train, &train, |_, _| {}),
        Err(tmuq_core::Error::ResourceLimit { .. })
    ));
}
