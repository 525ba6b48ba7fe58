use super::clause::{Clause, Mode, Polarity};
use crate::bits::Literals;
use crate::error::{check_len, Error, Result};

/// Whether [`ClauseBank::class_sum`] saturates the sum to `[-T, T]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Clip {
    On(u32),
    Off,
}

impl Clip {
    #[inline]
    pub fn apply(self, v: i64) -> i64 {
        match self {
            Clip::On(t) => v.clamp(-i64::from(t), i64::from(t)),
            Clip::Off => v,
        }
    }
}

/// All clauses voting for or against one target. Even indices are positive,
/// odd indices negative.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClauseBank {
    clauses: Vec<Clause>,
    num_features: usize,
}

impl ClauseBank {
    pub fn new(num_features: usize, num_clauses: usize, states_per_action: u16) -> Self {
        let clauses = (0..num_clauses)
            .map(|j| {
                let polarity = if j % 2 == 0 { Polarity::Positive } else { Polarity::Negative };
                Clause::new(num_features, polarity, states_per_action)
            })
            .collect();
        Self { clauses, num_features }
    }

    pub fn from_clauses(num_features: usize, clauses: Vec<Clause>) -> Result<Self> {
        if let Some(c) = clauses.iter().find(|c| c.num_features() != num_features) {
            return Err(Error::InputShape { expected: num_features, actual: c.num_features() });
        }
        Ok(Self { clauses, num_features })
    }

    #[inline]
    pub fn num_features(&self) -> usize {
        self.num_features
    }

    #[inline]
    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    #[inline]
    pub fn clauses_mut(&mut self) -> &mut [Clause] {
        &mut self.clauses
    }

    pub fn n_pos(&self) -> usize {
        self.clauses.iter().filter(|c| c.polarity() == Polarity::Positive).count()
    }

    pub fn n_neg(&self) -> usize {
        self.clauses.len() - self.n_pos()
    }

    /// Weighted vote `sum w+ C+(x) - sum w- C-(x)`.
    pub fn weighted_sum(&self, lits: &Literals, mode: Mode) -> i64 {
        self.clauses
            .iter()
            .filter(|c| c.evaluate(lits, mode))
            .map(|c| c.polarity().sign() * i64::from(c.weight()))
            .sum()
    }

    /// Class sum at inference semantics.
    pub fn class_sum(&self, input: &[u8], clip: Clip) -> Result<i64> {
        check_len(self.num_features, input.len())?;
        Ok(clip.apply(self.weighted_sum(&Literals::from_bits(input), Mode::Infer)))
    }

    /// Number of matching (positive, negative) clauses at inference, unweighted.
    pub fn active_counts(&self, lits: &Literals) -> (usize, usize) {
        self.clauses
            .iter()
            .filter(|c| c.evaluate(lits, Mode::Infer))
            .fold((0, 0), |(p, n), c| match c.polarity() {
                Polarity::Positive => (p + 1, n),
                Polarity::Negative => (p, n + 1),
            })
    }
}
