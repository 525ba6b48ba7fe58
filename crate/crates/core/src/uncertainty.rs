//! Probability scores derived from class sums, plus the diagnostics built on
//! them: normalized multiclass scores, clause-activation counts,
//! threshold-filtered accuracy and epoch-averaged scores.
//!
//! At equilibrium the chance of a positive clause receiving Type I feedback,
//! `P_I(v) P(y=1|x)`, balances the chance of Type II, `P_II(v) P(y=0|x)`.
//! Solving for `v` gives `v = T (2 P(y=1|x) - 1)`, whose inverse is the score
//! `(1 + v / T) / 2`.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::binarize::ThermometerEncoder;
use crate::bits::Literals;
use crate::conv::{BitImage, ConvolutionalTM};
use crate::error::{check_len, Error, Result};
use crate::machine::{BinaryTM, ClauseBank, ExperimentTrace};
use crate::multiclass::{argmax_lowest, MulticlassTM};

#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ProbabilityScore(f64);

impl ProbabilityScore {
    pub fn new(value: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&value) {
            Ok(Self(value))
        } else {
            Err(Error::Contract(format!("probability score {value} outside [0, 1]")))
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }
}

/// `(1 + v / T) / 2` for a clipped class sum.
pub fn probability_score(v: i64, target: u32) -> Result<ProbabilityScore> {
    let t = i64::from(target);
    if target == 0 || v.abs() > t {
        return Err(Error::Contract(format!("class sum {v} outside [-{t}, {t}]")));
    }
    Ok(ProbabilityScore((t + v) as f64 / (2 * t) as f64))
}

/// Class sum at which Type I and Type II feedback balance: `T (2p - 1)`.
pub fn equilibrium_class_sum(p: f64, target: u32) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!("probability {p} outside [0, 1]")));
    }
    Ok(f64::from(target) * (2.0 * p - 1.0))
}

/// Real-valued counterpart of [`probability_score`], for averaged sums.
pub fn score_of_mean_sum(v: f64, target: u32) -> f64 {
    0.5 * (1.0 + v / f64::from(target))
}

/// Each score divided by their sum, and the largest normalized value. An
/// all-zero vector normalizes to the uniform distribution.
pub fn normalized_scores(individual: &[ProbabilityScore]) -> Result<(Vec<f64>, f64)> {
    if individual.len() < 2 {
        return Err(Error::InvalidArgument("normalization needs at least two classes".into()));
    }
    let total: f64 = individual.iter().map(|s| s.0).sum();
    let normalized: Vec<f64> = if total > 0.0 {
        individual.iter().map(|s| s.0 / total).collect()
    } else {
        vec![1.0 / individual.len() as f64; individual.len()]
    };
    let max = normalized.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok((normalized, max))
}

/// Everything the machine says about one sample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictionReport {
    pub class_sums: Vec<i64>,
    pub individual_scores: Vec<f64>,
    pub normalized_score: f64,
    pub predicted: usize,
    /// `(positive, negative)` active clauses per class.
    pub clause_counts: Vec<(usize, usize)>,
}

impl PredictionReport {
    /// Builds a report from clipped class sums and clause counts.
    pub fn from_sums(class_sums: Vec<i64>, clause_counts: Vec<(usize, usize)>, target: u32) -> Result<Self> {
        check_len(class_sums.len(), clause_counts.len())?;
        let scores = class_sums
            .iter()
            .map(|&v| probability_score(v, target))
            .collect::<Result<Vec<_>>>()?;
        let (_, normalized_score) = normalized_scores(&scores)?;
        Ok(Self {
            predicted: argmax_lowest(&class_sums),
            class_sums,
            individual_scores: scores.iter().map(|s| s.value()).collect(),
            normalized_score,
            clause_counts,
        })
    }

    pub fn num_classes(&self) -> usize {
        self.class_sums.len()
    }

    /// Flat CSV header for reports over `k` classes.
    pub fn csv_header(k: usize) -> Vec<String> {
        let mut h = vec!["predicted".to_string(), "normalized_score".to_string()];
        for prefix in ["class_sum", "score", "pos_active", "neg_active"] {
            h.extend((0..k).map(|i| format!("{prefix}_{i}")));
        }
        h
    }

    pub fn csv_record(&self) -> Vec<String> {
        let mut r = vec![self.predicted.to_string(), format!("{}", self.normalized_score)];
        r.extend(self.class_sums.iter().map(|v| v.to_string()));
        r.extend(self.individual_scores.iter().map(|v| format!("{v}")));
        r.extend(self.clause_counts.iter().map(|c| c.0.to_string()));
        r.extend(self.clause_counts.iter().map(|c| c.1.to_string()));
        r
    }
}

pub fn report(tm: &MulticlassTM, input: &[u8]) -> Result<PredictionReport> {
    check_len(tm.num_features(), input.len())?;
    let lits = Literals::from_bits(input);
    let sums = tm.class_sums_literals(&lits);
    let counts = tm.units().iter().map(|u| u.bank().active_counts(&lits)).collect();
    PredictionReport::from_sums(sums, counts, tm.target())
}

pub fn report_image(tm: &ConvolutionalTM, image: &BitImage) -> Result<PredictionReport> {
    let patches = tm.patches(image)?;
    let sums = tm.class_sums_patches(&patches);
    let counts = tm.inner().units().iter().map(|u| u.active_counts_patches(&patches)).collect();
    PredictionReport::from_sums(sums, counts, tm.target())
}

/// Per-class unweighted (positive, negative) active clause counts.
pub fn clause_counts(tm: &MulticlassTM, input: &[u8]) -> Result<Vec<(usize, usize)>> {
    tm.clause_counts(input)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdCurve {
    pub thresholds: Vec<f64>,
    /// `None` where no sample reaches the threshold.
    pub accuracy_at: Vec<Option<f64>>,
    pub count_at: Vec<usize>,
}

/// 21 thresholds from 0.0 to 1.0 in steps of 0.05.
pub fn default_thresholds() -> Vec<f64> {
    (0..=20).map(|k| k as f64 / 20.0).collect()
}

/// Accuracy and size of `{i : normalized_score_i >= t}` for each threshold.
pub fn accuracy_vs_threshold(
    reports: &[PredictionReport],
    truths: &[usize],
    thresholds: &[f64],
) -> Result<ThresholdCurve> {
    if reports.is_empty() {
        return Err(Error::InvalidArgument("no predictions to filter".into()));
    }
    check_len(reports.len(), truths.len())?;
    let mut sorted = thresholds.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut accuracy_at = Vec::with_capacity(sorted.len());
    let mut count_at = Vec::with_capacity(sorted.len());
    for &t in &sorted {
        let (count, correct) = reports
            .iter()
            .zip(truths)
            .filter(|(r, _)| r.normalized_score >= t)
            .fold((0usize, 0usize), |(n, c), (r, &y)| (n + 1, c + (r.predicted == y) as usize));
        count_at.push(count);
        accuracy_at.push((count > 0).then(|| correct as f64 / count as f64));
    }
    Ok(ThresholdCurve { thresholds: sorted, accuracy_at, count_at })
}

/// Mean over the trailing `window` epochs of `series[epoch][sample]`.
pub fn epoch_averaged_scores(series: &[Vec<f64>], window: usize) -> Result<Vec<f64>> {
    if window == 0 || window > series.len() {
        return Err(Error::InvalidArgument(format!(
            "window {window} must be in [1, {}] recorded epochs",
            series.len()
        )));
    }
    let tail = &series[series.len() - window..];
    let width = tail[0].len();
    let mut sums = vec![0.0; width];
    for row in tail {
        check_len(width, row.len())?;
        for (s, v) in sums.iter_mut().zip(row) {
            *s += v;
        }
    }
    Ok(sums.into_iter().map(|s| s / window as f64).collect())
}

/// Probability scores of every traced sample at every epoch.
pub fn trace_scores(trace: &ExperimentTrace, target: u32) -> Result<Vec<Vec<f64>>> {
    trace
        .epochs
        .iter()
        .map(|row| row.iter().map(|&v| probability_score(v, target).map(|s| s.value())).collect())
        .collect()
}

/// Distinct included-literal sets among non-empty clauses.
pub fn unique_clause_count(bank: &ClauseBank) -> usize {
    bank.clauses()
        .iter()
        .filter(|c| !c.is_empty())
        .map(|c| c.include_mask())
        .collect::<HashSet<_>>()
        .len()
}

/// Scores a binary machine over 2-D points encoded with `encoder`.
pub fn probability_grid(tm: &BinaryTM, encoder: &ThermometerEncoder, mesh: &[[f64; 2]]) -> Result<Vec<ProbabilityScore>> {
    if encoder.num_features() != 2 {
        return Err(Error::InvalidArgument(format!(
            "probability grid needs a 2-feature encoder, got {}",
            encoder.num_features()
        )));
    }
    check_len(tm.num_features(), encoder.width())?;
    mesh.iter()
        .map(|p| {
            let code = encoder.encode(p)?;
            probability_score(tm.clipped_sum(&Literals::from_bits(&code)), tm.target())
        })
        .collect()
}
