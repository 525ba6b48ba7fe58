use serde::{Deserialize, Serialize};

use super::clause::FeedbackConfig;
use crate::error::{Error, Result};

pub const DEFAULT_STATES_PER_ACTION: u16 = 128;

/// Hyperparameters of one Tsetlin machine.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TMParams {
    /// Target value `T`; class sums are clipped to `[-T, T]`.
    pub target: u32,
    /// Specificity `s >= 1`.
    pub specificity: f64,
    /// Total clauses, half of each polarity.
    pub num_clauses: usize,
    #[serde(default)]
    pub literal_budget: Option<usize>,
    #[serde(default = "default_states")]
    pub states_per_action: u16,
    /// Reinforce satisfied literals of a recognized clause with probability 1
    /// instead of `(s - 1) / s`.
    #[serde(default)]
    pub boost_true_positive: bool,
    #[serde(default)]
    pub seed: u64,
}

fn default_states() -> u16 {
    DEFAULT_STATES_PER_ACTION
}

impl TMParams {
    pub fn new(target: u32, specificity: f64, num_clauses: usize) -> Self {
        Self {
            target,
            specificity,
            num_clauses,
            literal_budget: None,
            states_per_action: DEFAULT_STATES_PER_ACTION,
            boost_true_positive: false,
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_literal_budget(mut self, budget: usize) -> Self {
        self.literal_budget = Some(budget);
        self
    }

    pub fn with_boost(mut self, boost: bool) -> Self {
        self.boost_true_positive = boost;
        self
    }

    pub fn with_states_per_action(mut self, n: u16) -> Self {
        self.states_per_action = n;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if self.target < 1 {
            return bad("target value T must be at least 1".into());
        }
        if !self.specificity.is_finite() || self.specificity < 1.0 {
            return bad(format!("specificity must be a finite value >= 1, got {}", self.specificity));
        }
        if self.num_clauses == 0 || self.num_clauses % 2 != 0 {
            return bad(format!("clause count must be even and positive, got {}", self.num_clauses));
        }
        if self.literal_budget == Some(0) {
            return bad("literal budget must be positive".into());
        }
        if self.states_per_action == 0 || self.states_per_action > u16::MAX / 2 {
            return bad(format!("states per action must be in [1, {}]", u16::MAX / 2));
        }
        Ok(())
    }

    pub fn feedback(&self) -> FeedbackConfig {
        FeedbackConfig {
            specificity: self.specificity,
            boost_true_positive: self.boost_true_positive,
            literal_budget: self.literal_budget,
        }
    }
}
