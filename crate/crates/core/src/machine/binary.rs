use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bank::{ClauseBank, Clip};
use super::clause::{Clause, FeedbackConfig, Mode, Polarity};
use super::params::TMParams;
use crate::bits::Literals;
use crate::error::{check_len, Error, Result};

/// Probabilities `(P_I, P_II)` of Type I and Type II feedback for a clipped
/// class sum `v`.
pub fn feedback_probabilities(v: i64, target: u32) -> Result<(f64, f64)> {
    let t = i64::from(target);
    if target == 0 || v.abs() > t {
        return Err(Error::Contract(format!("class sum {v} outside [-{t}, {t}]")));
    }
    // (T - v) and (T + v) are exact integers; the sum of the two quotients is 1.
    let p_i = (t - v) as f64 / (2 * t) as f64;
    let p_ii = (t + v) as f64 / (2 * t) as f64;
    Ok((p_i, p_ii))
}

/// Which patches of a sample a clause matches in training mode.
enum PatchMatch {
    None,
    All,
    Some(Vec<u32>),
}

impl PatchMatch {
    fn of(clause: &Clause, patches: &[Literals]) -> Self {
        if clause.is_empty() {
            return PatchMatch::All;
        }
        if patches.len() == 1 {
            return if clause.covers(&patches[0]) { PatchMatch::Some(vec![0]) } else { PatchMatch::None };
        }
        let hits: Vec<u32> = patches
            .iter()
            .enumerate()
            .filter(|(_, p)| clause.covers(p))
            .map(|(i, _)| i as u32)
            .collect();
        if hits.is_empty() {
            PatchMatch::None
        } else {
            PatchMatch::Some(hits)
        }
    }

    fn any(&self) -> bool {
        !matches!(self, PatchMatch::None)
    }

    /// Uniformly chosen matching patch; no randomness is consumed when at
    /// most one patch matches.
    fn pick<R: Rng + ?Sized>(&self, num_patches: usize, rng: &mut R) -> Option<usize> {
        let count = match self {
            PatchMatch::None => return None,
            PatchMatch::All => num_patches,
            PatchMatch::Some(hits) => hits.len(),
        };
        let k = if count == 1 { 0 } else { rng.random_range(0..count) };
        Some(match self {
            PatchMatch::All => k,
            PatchMatch::Some(hits) => hits[k] as usize,
            PatchMatch::None => unreachable!(),
        })
    }
}

/// Patch counts at which clause matching is spread over the rayon pool.
const PARALLEL_PATCHES: usize = 16;

/// Clipped class sums of traced samples, one row per completed epoch.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ExperimentTrace {
    pub epochs: Vec<Vec<i64>>,
}

impl ExperimentTrace {
    pub fn num_epochs(&self) -> usize {
        self.epochs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.epochs.is_empty()
    }

    /// Per-epoch series for one traced sample.
    pub fn series(&self, sample: usize) -> Vec<i64> {
        self.epochs.iter().map(|row| row[sample]).collect()
    }
}

/// One-vs-rest unit: a clause bank trained toward a single binary target.
#[derive(Clone, Debug)]
pub struct BinaryTM {
    params: TMParams,
    bank: ClauseBank,
    rng: ChaCha8Rng,
}

impl BinaryTM {
    pub fn new(num_features: usize, params: TMParams) -> Result<Self> {
        params.validate()?;
        if num_features == 0 {
            return Err(Error::InvalidArgument("a machine needs at least one feature".into()));
        }
        let bank = ClauseBank::new(num_features, params.num_clauses, params.states_per_action);
        let rng = ChaCha8Rng::seed_from_u64(params.seed);
        Ok(Self { params, bank, rng })
    }

    /// Reassembles a machine from persisted parts.
    pub fn from_parts(params: TMParams, bank: ClauseBank, rng: ChaCha8Rng) -> Result<Self> {
        params.validate()?;
        if bank.clauses().len() != params.num_clauses {
            return Err(Error::InvalidArgument(format!(
                "bank holds {} clauses, params say {}",
                bank.clauses().len(),
                params.num_clauses
            )));
        }
        Ok(Self { params, bank, rng })
    }

    pub fn params(&self) -> &TMParams {
        &self.params
    }

    pub fn bank(&self) -> &ClauseBank {
        &self.bank
    }

    pub fn bank_mut(&mut self) -> &mut ClauseBank {
        &mut self.bank
    }

    pub fn rng(&self) -> &ChaCha8Rng {
        &self.rng
    }

    pub fn num_features(&self) -> usize {
        self.bank.num_features()
    }

    pub fn target(&self) -> u32 {
        self.params.target
    }

    pub fn class_sum(&self, input: &[u8], clip: Clip) -> Result<i64> {
        self.bank.class_sum(input, clip)
    }

    /// Inference class sum clipped to `[-T, T]`.
    pub fn clipped_sum(&self, lits: &Literals) -> i64 {
        Clip::On(self.params.target).apply(self.bank.weighted_sum(lits, Mode::Infer))
    }

    /// Existential class sum over patches: a clause votes once if it matches
    /// any patch. Clipped to `[-T, T]`.
    pub fn clipped_sum_patches(&self, patches: &[Literals]) -> i64 {
        let v: i64 = self
            .bank
            .clauses()
            .iter()
            .filter(|c| !c.is_empty() && patches.iter().any(|p| c.covers(p)))
            .map(|c| c.polarity().sign() * i64::from(c.weight()))
            .sum();
        Clip::On(self.params.target).apply(v)
    }

    /// Unweighted (positive, negative) active clause counts over patches.
    pub fn active_counts_patches(&self, patches: &[Literals]) -> (usize, usize) {
        self.bank
            .clauses()
            .iter()
            .filter(|c| !c.is_empty() && patches.iter().any(|p| c.covers(p)))
            .fold((0, 0), |(p, n), c| match c.polarity() {
                Polarity::Positive => (p + 1, n),
                Polarity::Negative => (p, n + 1),
            })
    }

    pub fn train_step(&mut self, input: &[u8], y: u8) -> Result<()> {
        check_len(self.num_features(), input.len())?;
        self.train_literals(&Literals::from_bits(input), y != 0);
        Ok(())
    }

    pub(crate) fn train_literals(&mut self, lits: &Literals, y: bool) {
        self.train_patches(std::slice::from_ref(lits), y);
    }

    /// One feedback round for a sample given as one or more patches. With a
    /// single patch this is the ordinary flat update.
    pub fn train_patches(&mut self, patches: &[Literals], y: bool) {
        assert!(!patches.is_empty(), "a sample needs at least one patch");
        let clauses = self.bank.clauses();
        let matches: Vec<PatchMatch> = if patches.len() >= PARALLEL_PATCHES {
            clauses.par_iter().map(|c| PatchMatch::of(c, patches)).collect()
        } else {
            clauses.iter().map(|c| PatchMatch::of(c, patches)).collect()
        };
        let raw: i64 = clauses
            .iter()
            .zip(&matches)
            .filter(|(_, m)| m.any())
            .map(|(c, _)| c.polarity().sign() * i64::from(c.weight()))
            .sum();
        let v = Clip::On(self.params.target).apply(raw);
        let (p_i, p_ii) = feedback_probabilities(v, self.params.target).expect("clipped");
        let p = if y { p_i } else { p_ii };
        if p == 0.0 {
            return;
        }
        let cfg: FeedbackConfig = self.params.feedback();
        let rng = &mut self.rng;
        for (clause, m) in self.bank.clauses_mut().iter_mut().zip(&matches) {
            if rng.random::<f64>() >= p {
                continue;
            }
            let positive = clause.polarity() == Polarity::Positive;
            let chosen = m.pick(patches.len(), rng);
            if positive == y {
                match chosen {
                    Some(i) => clause.recognize(&patches[i], &cfg, rng),
                    None => clause.erase(&cfg, rng),
                }
            } else if let Some(i) = chosen {
                clause.reject(&patches[i], cfg.literal_budget);
            }
        }
    }

    /// Trains for `epochs` passes in a freshly shuffled order each epoch and
    /// records the clipped class sums of `trace` after every epoch.
    pub fn fit(
        &mut self,
        xs: &[Vec<u8>],
        ys: &[u8],
        epochs: usize,
        trace: Option<&[Vec<u8>]>,
    ) -> Result<ExperimentTrace> {
        if xs.is_empty() {
            return Err(Error::InvalidArgument("cannot fit on an empty dataset".into()));
        }
        check_len(xs.len(), ys.len())?;
        let lits = xs
            .iter()
            .map(|x| {
                check_len(self.num_features(), x.len())?;
                Ok(Literals::from_bits(x))
            })
            .collect::<Result<Vec<_>>>()?;
        let traced = trace
            .unwrap_or(&[])
            .iter()
            .map(|x| {
                check_len(self.num_features(), x.len())?;
                Ok(Literals::from_bits(x))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut out = ExperimentTrace::default();
        let mut order: Vec<usize> = (0..xs.len()).collect();
        for _ in 0..epochs {
            order.shuffle(&mut self.rng);
            for &i in &order {
                self.train_literals(&lits[i], ys[i] != 0);
            }
            if !traced.is_empty() {
                out.epochs.push(traced.iter().map(|l| self.clipped_sum(l)).collect());
            }
        }
        Ok(out)
    }
}
