//! The four experiment runners. Each validates its config, trains, and
//! when `output_dir` is set writes `config.json` plus its result files.
//!
//! | run            | files                                                          |
//! |----------------|----------------------------------------------------------------|
//! | single-pattern | `trace.csv` (level,epoch,class_sum,score), `scores.csv`         |
//! | cpt            | `trace.csv` (specificity,epoch,pattern,p_target,class_sum,score), `scores.csv`, `metrics.json` |
//! | moons          | `grid.csv` (x,y,score,pos_count,neg_count), `metrics.json`      |
//! | image          | `reports.csv`, `threshold_curve.csv`, `histograms.csv`, `metrics.json` |

use std::f64::consts::PI;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use super::cifar::{self, CifarSet, Split};
use super::config::{Dataset, ExperimentConfig};
use super::output::{ensure_dir, write_csv, write_json};
use super::stats::{percentile, spearman, unit_histogram, welch_greater, WelchTest};
use crate::binarize::{ImageThermometer, ThermometerEncoder};
use crate::bits::Literals;
use crate::conv::{BitImage, ConvolutionalTM, PatchConfig};
use crate::datagen::{
    bounding_box, cpt_dataset_with, default_mesh_extent, expand, mesh_grid, moon_point, single_pattern_dataset_with,
    two_moons, CPT, SINGLE_PATTERN,
};
use crate::error::{Error, Result};
use crate::machine::BinaryTM;
use crate::multiclass::derive_seed;
use crate::uncertainty::{
    accuracy_vs_threshold, default_thresholds, epoch_averaged_scores, probability_score, report_image,
    trace_scores, unique_clause_count, PredictionReport, ThresholdCurve,
};

fn wrong_kind(cfg: &ExperimentConfig, want: &str) -> Error {
    Error::InvalidArgument(format!("config `{}` describes a {} run, not {want}", cfg.id, cfg.dataset.kind()))
}

fn prepare_output(cfg: &ExperimentConfig) -> Result<Option<&Path>> {
    match &cfg.output_dir {
        Some(dir) => {
            ensure_dir(dir)?;
            cfg.save(&dir.join("config.json"))?;
            Ok(Some(dir))
        }
        None => Ok(None),
    }
}

fn fmt(v: f64) -> String {
    format!("{v}")
}

#[derive(Clone, Debug, Serialize)]
pub struct LevelRun {
    pub level: f64,
    /// Clipped class sum of the pattern after each epoch.
    pub class_sums: Vec<i64>,
    pub averaged_score: f64,
}

/// Trains one machine per noise level on copies of a single pattern.
pub fn run_single_pattern(cfg: &ExperimentConfig) -> Result<Vec<LevelRun>> {
    cfg.validate()?;
    let Dataset::SinglePattern { copies, levels, label_noise, window } = &cfg.dataset else {
        return Err(wrong_kind(cfg, "single-pattern"));
    };
    let target = cfg.params.target;
    let runs = levels
        .par_iter()
        .enumerate()
        .map(|(k, &p)| {
            let (xs, ys) = single_pattern_dataset_with(*copies, p, derive_seed(cfg.seed, 2 * k as u64), *label_noise)?;
            let params = cfg.params.clone().with_seed(derive_seed(cfg.seed, 2 * k as u64 + 1));
            let mut tm = BinaryTM::new(SINGLE_PATTERN.len(), params)?;
            let trace = tm.fit(&xs, &ys, cfg.epochs, Some(&[SINGLE_PATTERN.to_vec()]))?;
            let averaged_score = epoch_averaged_scores(&trace_scores(&trace, target)?, *window)?[0];
            Ok(LevelRun { level: p, class_sums: trace.series(0), averaged_score })
        })
        .collect::<Result<Vec<_>>>()?;

    if let Some(dir) = prepare_output(cfg)? {
        write_csv(
            &dir.join("trace.csv"),
            &["level", "epoch", "class_sum", "score"],
            runs.iter().flat_map(|r| {
                r.class_sums.iter().enumerate().map(move |(e, &v)| {
                    let score = probability_score(v, target).map(|s| s.value()).unwrap_or(f64::NAN);
                    vec![fmt(r.level), (e + 1).to_string(), v.to_string(), fmt(score)]
                })
            }),
        )?;
        write_csv(
            &dir.join("scores.csv"),
            &["level", "averaged_score"],
            runs.iter().map(|r| vec![fmt(r.level), fmt(r.averaged_score)]),
        )?;
    }
    Ok(runs)
}

#[derive(Clone, Debug, Serialize)]
pub struct CptRun {
    pub specificity: f64,
    /// Trailing-window mean score of each table row, in table order.
    pub averaged_scores: Vec<f64>,
    /// Rank correlation between `averaged_scores` and the table probabilities.
    pub spearman: f64,
    pub unique_clauses: usize,
    #[serde(skip)]
    pub class_sums: Vec<Vec<i64>>,
}

fn pattern_name(bits: &[u8]) -> String {
    bits.iter().map(|b| char::from(b'0' + b)).collect()
}

/// Trains one machine per specificity on the eight-row table.
pub fn run_cpt(cfg: &ExperimentConfig) -> Result<Vec<CptRun>> {
    cfg.validate()?;
    let Dataset::Cpt { copies, specificities, label_noise, window } = &cfg.dataset else {
        return Err(wrong_kind(cfg, "cpt"));
    };
    let target = cfg.params.target;
    let (xs, ys) = cpt_dataset_with(*copies, derive_seed(cfg.seed, 0), *label_noise)?;
    let traced: Vec<Vec<u8>> = CPT.iter().map(|r| r.features.to_vec()).collect();
    let truth: Vec<f64> = CPT.iter().map(|r| r.p_target).collect();
    let runs = specificities
        .par_iter()
        .map(|&s| {
            let mut params = cfg.params.clone().with_seed(derive_seed(cfg.seed, 1));
            params.specificity = s;
            let mut tm = BinaryTM::new(3, params)?;
            let trace = tm.fit(&xs, &ys, cfg.epochs, Some(&traced))?;
            let averaged_scores = epoch_averaged_scores(&trace_scores(&trace, target)?, *window)?;
            Ok(CptRun {
                specificity: s,
                spearman: spearman(&averaged_scores, &truth)?,
                averaged_scores,
                unique_clauses: unique_clause_count(tm.bank()),
                class_sums: trace.epochs,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    if let Some(dir) = prepare_output(cfg)? {
        let names: Vec<String> = traced.iter().map(|b| pattern_name(b)).collect();
        write_csv(
            &dir.join("trace.csv"),
            &["specificity", "epoch", "pattern", "p_target", "class_sum", "score"],
            runs.iter().flat_map(|r| {
                let names = &names;
                r.class_sums.iter().enumerate().flat_map(move |(e, row)| {
                    row.iter().enumerate().map(move |(k, &v)| {
                        let score = probability_score(v, target).map(|s| s.value()).unwrap_or(f64::NAN);
                        vec![
                            fmt(r.specificity),
                            (e + 1).to_string(),
                            names[k].clone(),
                            fmt(CPT[k].p_target),
                            v.to_string(),
                            fmt(score),
                        ]
                    })
                })
            }),
        )?;
        write_csv(
            &dir.join("scores.csv"),
            &["specificity", "pattern", "p_target", "averaged_score"],
            runs.iter().flat_map(|r| {
                let names = &names;
                r.averaged_scores
                    .iter()
                    .enumerate()
                    .map(move |(k, &a)| vec![fmt(r.specificity), names[k].clone(), fmt(CPT[k].p_target), fmt(a)])
            }),
        )?;
        write_json(&dir.join("metrics.json"), &runs)?;
    }
    Ok(runs)
}

/// Mesh points further out than this multiple of the data bounding box
/// count as outside the training domain.
pub const OUTSIDE_BOX_SCALE: f64 = 1.2;

/// Noise-free points on the middle half of each arc (`t` in `[pi/4, 3pi/4]`),
/// labelled by moon.
pub fn interior_points(per_class: usize) -> Vec<([f64; 2], u8)> {
    let mut out = Vec::with_capacity(2 * per_class);
    for label in [0u8, 1] {
        for k in 0..per_class {
            let t = PI * (0.25 + 0.5 * k as f64 / (per_class.max(2) - 1) as f64);
            out.push((moon_point(label == 1, t), label));
        }
    }
    out
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct GridPoint {
    pub x: f64,
    pub y: f64,
    pub score: f64,
    pub pos_count: usize,
    pub neg_count: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct MoonsMetrics {
    pub test_accuracy: f64,
    pub outside_points: usize,
    pub outside_mean_score: f64,
    /// Extremes of the score over [`interior_points`] of each moon.
    pub interior_max_class0: f64,
    pub interior_min_class1: f64,
    pub interior_mean_class0: f64,
    pub interior_mean_class1: f64,
    pub unique_clauses: usize,
}

pub struct MoonsOutcome {
    pub tm: BinaryTM,
    pub encoder: ThermometerEncoder,
    pub grid: Vec<GridPoint>,
    pub metrics: MoonsMetrics,
}

pub fn run_moons(cfg: &ExperimentConfig) -> Result<MoonsOutcome> {
    cfg.validate()?;
    let Dataset::Moons { samples, test_samples, noise_sd, bins, boundary_bit, mesh_steps } = &cfg.dataset else {
        return Err(wrong_kind(cfg, "moons"));
    };
    let (train, ys) = two_moons(*samples, *noise_sd, derive_seed(cfg.seed, 0))?;
    let rows: Vec<Vec<f64>> = train.iter().map(|p| p.to_vec()).collect();
    let encoder = ThermometerEncoder::fit(&rows, *bins, *boundary_bit)?;
    let mut tm = BinaryTM::new(encoder.width(), cfg.resolved_params())?;
    tm.fit(&encoder.encode_all(&rows)?, &ys, cfg.epochs, None)?;

    let target = tm.target();
    let score_of = |p: &[f64; 2]| -> Result<f64> {
        let v = tm.clipped_sum(&Literals::from_bits(&encoder.encode(p)?));
        Ok(probability_score(v, target)?.value())
    };

    let (test, test_ys) = two_moons(*test_samples, *noise_sd, derive_seed(cfg.seed, 1))?;
    let correct = test
        .par_iter()
        .zip(&test_ys)
        .map(|(p, &y)| Ok(((score_of(p)? > 0.5) as u8 == y) as usize))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .sum::<usize>();

    let (ex, ey) = default_mesh_extent(&train)?;
    let mesh = mesh_grid(ex, ey, *mesh_steps)?;
    let grid = mesh
        .par_iter()
        .map(|p| {
            let lits = Literals::from_bits(&encoder.encode(p)?);
            let (pos_count, neg_count) = tm.bank().active_counts(&lits);
            let score = probability_score(tm.clipped_sum(&lits), target)?.value();
            Ok(GridPoint { x: p[0], y: p[1], score, pos_count, neg_count })
        })
        .collect::<Result<Vec<_>>>()?;

    let (bx, by) = bounding_box(&train)?;
    let pad = (OUTSIDE_BOX_SCALE - 1.0) / 2.0;
    let (ox, oy) = (expand(bx, pad), expand(by, pad));
    let outside: Vec<f64> = grid
        .iter()
        .filter(|g| g.x < ox.0 || g.x > ox.1 || g.y < oy.0 || g.y > oy.1)
        .map(|g| g.score)
        .collect();

    let mut interior = [Vec::new(), Vec::new()];
    for (p, label) in interior_points(50) {
        interior[usize::from(label)].push(score_of(&p)?);
    }
    let mean = |v: &[f64]| if v.is_empty() { f64::NAN } else { v.iter().sum::<f64>() / v.len() as f64 };
    let metrics = MoonsMetrics {
        test_accuracy: correct as f64 / test.len() as f64,
        outside_points: outside.len(),
        outside_mean_score: mean(&outside),
        interior_max_class0: interior[0].iter().copied().fold(f64::NEG_INFINITY, f64::max),
        interior_min_class1: interior[1].iter().copied().fold(f64::INFINITY, f64::min),
        interior_mean_class0: mean(&interior[0]),
        interior_mean_class1: mean(&interior[1]),
        unique_clauses: unique_clause_count(tm.bank()),
    };

    if let Some(dir) = prepare_output(cfg)? {
        write_csv(
            &dir.join("grid.csv"),
            &["x", "y", "score", "pos_count", "neg_count"],
            grid.iter()
                .map(|g| vec![fmt(g.x), fmt(g.y), fmt(g.score), g.pos_count.to_string(), g.neg_count.to_string()]),
        )?;
        write_json(&dir.join("metrics.json"), &metrics)?;
    }
    Ok(MoonsOutcome { tm, encoder, grid, metrics })
}

#[derive(Clone, Debug, Serialize)]
pub struct ImageMetrics {
    pub classes: Vec<String>,
    pub train_samples: usize,
    pub test_samples: usize,
    pub epochs: usize,
    pub train_seconds: f64,
    pub accuracy: f64,
    pub mean_score_correct: f64,
    pub mean_score_incorrect: f64,
    /// Correct vs incorrect normalized scores; absent when either group has
    /// fewer than two samples.
    pub score_separation: Option<WelchTest>,
    /// 80th percentile of the normalized scores and the accuracy at or above it.
    pub p80_threshold: f64,
    pub p80_accuracy: f64,
    pub p80_count: usize,
}

pub struct ImageOutcome {
    pub model: ConvolutionalTM,
    pub encoder: ImageThermometer,
    pub reports: Vec<PredictionReport>,
    pub truths: Vec<usize>,
    pub curve: ThresholdCurve,
    pub metrics: ImageMetrics,
}

/// Loads the configured CIFAR-10 subset and runs [`run_image_on`].
pub fn run_image(cfg: &ExperimentConfig, on_epoch: impl FnMut(usize, f64)) -> Result<ImageOutcome> {
    cfg.validate()?;
    let Dataset::Image { data_dir, classes, train_per_class, test_per_class, .. } = &cfg.dataset else {
        return Err(wrong_kind(cfg, "image"));
    };
    let train = cifar::load_cifar10(data_dir, Split::Train, Some(classes), *train_per_class)?;
    let test = cifar::load_cifar10(data_dir, Split::Test, Some(classes), *test_per_class)?;
    run_image_on(cfg, &train, &test, on_epoch)
}

/// Scores every test image.
pub fn evaluate_images(tm: &ConvolutionalTM, images: &[BitImage]) -> Result<Vec<PredictionReport>> {
    images.par_iter().map(|img| report_image(tm, img)).collect()
}

/// Trains and evaluates a convolutional machine on already-loaded 32x32 RGB
/// images. `on_epoch(epoch, seconds_so_far)` is called after each epoch.
pub fn run_image_on(
    cfg: &ExperimentConfig,
    train: &CifarSet,
    test: &CifarSet,
    mut on_epoch: impl FnMut(usize, f64),
) -> Result<ImageOutcome> {
    cfg.validate()?;
    let Dataset::Image { classes, resolution, patch, position_literals, .. } = &cfg.dataset else {
        return Err(wrong_kind(cfg, "image"));
    };
    if train.is_empty() || test.is_empty() {
        return Err(Error::InvalidArgument("image run needs training and test images".into()));
    }
    let encoder = ImageThermometer::new(cifar::CHANNELS, *resolution);
    let encode = |set: &CifarSet| -> Result<Vec<BitImage>> {
        set.images
            .par_iter()
            .map(|px| encoder.encode_image(px, cifar::SIDE, cifar::SIDE))
            .collect()
    };
    let (train_images, test_images) = (encode(train)?, encode(test)?);
    let config = PatchConfig::new((cifar::SIDE, cifar::SIDE, encoder.planes()), (patch[0], patch[1]))
        .with_position_literals(*position_literals);
    let mut model = ConvolutionalTM::new(config, classes.clone(), cfg.resolved_params())?;

    let start = Instant::now();
    model.fit_with_progress(&train_images, &train.labels, cfg.epochs, |e, _| {
        on_epoch(e + 1, start.elapsed().as_secs_f64())
    })?;
    let train_seconds = start.elapsed().as_secs_f64();

    let reports = evaluate_images(&model, &test_images)?;
    let truths = test.labels.clone();
    let curve = accuracy_vs_threshold(&reports, &truths, &default_thresholds())?;
    let metrics = image_metrics(classes.clone(), train.len(), cfg.epochs, train_seconds, &reports, &truths)?;

    if let Some(dir) = prepare_output(cfg)? {
        write_image_outputs(dir, &reports, &truths, &curve, &metrics)?;
    }
    Ok(ImageOutcome { model, encoder, reports, truths, curve, metrics })
}

fn image_metrics(
    classes: Vec<String>,
    train_samples: usize,
    epochs: usize,
    train_seconds: f64,
    reports: &[PredictionReport],
    truths: &[usize],
) -> Result<ImageMetrics> {
    let (mut right, mut wrong) = (Vec::new(), Vec::new());
    for (r, &y) in reports.iter().zip(truths) {
        if r.predicted == y { &mut right } else { &mut wrong }.push(r.normalized_score);
    }
    let mean = |v: &[f64]| if v.is_empty() { f64::NAN } else { v.iter().sum::<f64>() / v.len() as f64 };
    let scores: Vec<f64> = reports.iter().map(|r| r.normalized_score).collect();
    let p80_threshold = percentile(&scores, 0.8)?;
    let p80 = accuracy_vs_threshold(reports, truths, &[p80_threshold])?;
    Ok(ImageMetrics {
        classes,
        train_samples,
        test_samples: reports.len(),
        epochs,
        train_seconds,
        accuracy: right.len() as f64 / reports.len() as f64,
        mean_score_correct: mean(&right),
        mean_score_incorrect: mean(&wrong),
        score_separation: welch_greater(&right, &wrong).ok(),
        p80_threshold,
        p80_accuracy: p80.accuracy_at[0].unwrap_or(f64::NAN),
        p80_count: p80.count_at[0],
    })
}

pub const HISTOGRAM_BINS: usize = 20;

fn write_image_outputs(
    dir: &Path,
    reports: &[PredictionReport],
    truths: &[usize],
    curve: &ThresholdCurve,
    metrics: &ImageMetrics,
) -> Result<()> {
    let k = reports[0].num_classes();
    let mut header = vec!["truth".to_string()];
    header.extend(PredictionReport::csv_header(k));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    write_csv(
        &dir.join("reports.csv"),
        &header,
        reports.iter().zip(truths).map(|(r, y)| {
            let mut row = vec![y.to_string()];
            row.extend(r.csv_record());
            row
        }),
    )?;
    write_csv(
        &dir.join("threshold_curve.csv"),
        &["threshold", "accuracy", "count"],
        curve.thresholds.iter().zip(&curve.accuracy_at).zip(&curve.count_at).map(|((t, a), n)| {
            vec![fmt(*t), a.map(fmt).unwrap_or_default(), n.to_string()]
        }),
    )?;
    let individual: Vec<f64> = reports.iter().map(|r| r.individual_scores[r.predicted]).collect();
    let normalized: Vec<f64> = reports.iter().map(|r| r.normalized_score).collect();
    let split = |correct: bool| -> Vec<f64> {
        reports
            .iter()
            .zip(truths)
            .filter(|(r, &y)| (r.predicted == y) == correct)
            .map(|(r, _)| r.normalized_score)
            .collect()
    };
    let columns = [
        unit_histogram(&individual, HISTOGRAM_BINS),
        unit_histogram(&normalized, HISTOGRAM_BINS),
        unit_histogram(&split(true), HISTOGRAM_BINS),
        unit_histogram(&split(false), HISTOGRAM_BINS),
    ];
    write_csv(
        &dir.join("histograms.csv"),
        &["bin_lo", "bin_hi", "individual", "normalized", "normalized_correct", "normalized_incorrect"],
        (0..HISTOGRAM_BINS).map(|b| {
            let mut row = vec![fmt(b as f64 / HISTOGRAM_BINS as f64), fmt((b + 1) as f64 / HISTOGRAM_BINS as f64)];
            row.extend(columns.iter().map(|c| c[b].to_string()));
            row
        }),
    )?;
    write_json(&dir.join("metrics.json"), metrics)
}

