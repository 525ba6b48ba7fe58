use rand::Rng;
use serde::{Deserialize, Serialize};

use super::automaton::TaState;
use crate::bits::{set_bit, words_for, Literals};
use crate::error::{check_len, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Polarity {
    Positive,
    Negative,
}

impl Polarity {
    #[inline]
    pub fn sign(self) -> i64 {
        match self {
            Polarity::Positive => 1,
            Polarity::Negative => -1,
        }
    }
}

/// Evaluation mode. A clause with no included literals matches everything
/// while training and nothing at inference.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Train,
    Infer,
}

/// Knobs shared by every Type I / Type II update of one machine.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FeedbackConfig {
    pub specificity: f64,
    pub boost_true_positive: bool,
    pub literal_budget: Option<usize>,
}

impl FeedbackConfig {
    #[inline]
    fn include_probability(&self) -> f64 {
        (self.specificity - 1.0) / self.specificity
    }

    #[inline]
    fn exclude_probability(&self) -> f64 {
        1.0 / self.specificity
    }
}

/// A conjunction of literals, each guarded by one Tsetlin automaton.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Clause {
    states: Vec<TaState>,
    include: Vec<u64>,
    included: usize,
    polarity: Polarity,
    weight: u32,
    states_per_action: u16,
}

impl Clause {
    /// Fresh clause: every automaton sits at state `N`, so nothing is included.
    pub fn new(num_features: usize, polarity: Polarity, states_per_action: u16) -> Self {
        Self {
            states: vec![TaState::boundary(states_per_action); 2 * num_features],
            include: vec![0; words_for(2 * num_features)],
            included: 0,
            polarity,
            weight: 1,
            states_per_action,
        }
    }

    /// Rebuilds a clause from raw automaton states, e.g. when loading a model.
    pub fn from_parts(
        states: Vec<TaState>,
        polarity: Polarity,
        weight: u32,
        states_per_action: u16,
    ) -> Result<Self> {
        if states.len() % 2 != 0 {
            return Err(Error::InvalidArgument(format!(
                "clause needs an even number of automata, got {}",
                states.len()
            )));
        }
        if weight == 0 {
            return Err(Error::InvalidArgument("clause weight must be at least 1".into()));
        }
        let mut clause = Self::new(states.len() / 2, polarity, states_per_action);
        clause.weight = weight;
        for (lit, state) in states.into_iter().enumerate() {
            if TaState::new(state.value(), states_per_action).is_none() {
                return Err(Error::InvalidArgument(format!(
                    "automaton state {} outside [1, {}]",
                    state.value(),
                    2 * u32::from(states_per_action)
                )));
            }
            clause.set_state(lit, state);
        }
        Ok(clause)
    }

    #[inline]
    pub fn num_features(&self) -> usize {
        self.states.len() / 2
    }

    #[inline]
    pub fn polarity(&self) -> Polarity {
        self.polarity
    }

    #[inline]
    pub fn weight(&self) -> u32 {
        self.weight
    }

    pub fn set_weight(&mut self, weight: u32) -> Result<()> {
        if weight == 0 {
            return Err(Error::InvalidArgument("clause weight must be at least 1".into()));
        }
        self.weight = weight;
        Ok(())
    }

    #[inline]
    pub fn states_per_action(&self) -> u16 {
        self.states_per_action
    }

    pub fn states(&self) -> &[TaState] {
        &self.states
    }

    #[inline]
    pub fn state(&self, literal: usize) -> TaState {
        self.states[literal]
    }

    /// Overwrites one automaton and keeps the include mask in sync.
    pub fn set_state(&mut self, literal: usize, state: TaState) {
        let was = self.states[literal].includes(self.states_per_action);
        let now = state.includes(self.states_per_action);
        self.states[literal] = state;
        if was != now {
            set_bit(&mut self.include, literal, now);
            if now {
                self.included += 1;
            } else {
                self.included -= 1;
            }
        }
    }

    /// Moves a literal's automaton to the weakest include (or exclude) state.
    pub fn set_included(&mut self, literal: usize, include: bool) {
        let n = self.states_per_action;
        let b = TaState::boundary(n);
        self.set_state(literal, if include { b.toward_include(n) } else { b });
    }

    #[inline]
    pub fn included_count(&self) -> usize {
        self.included
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.included == 0
    }

    #[inline]
    pub fn includes(&self, literal: usize) -> bool {
        self.states[literal].includes(self.states_per_action)
    }

    /// Include mask over literals in the packed layout of [`Literals`].
    #[inline]
    pub fn include_mask(&self) -> &[u64] {
        &self.include
    }

    pub fn included_literals(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.states.len()).filter(move |&l| self.includes(l))
    }

    /// True when every included literal is 1 in `lits`. Ignores the
    /// empty-clause convention.
    #[inline]
    pub fn covers(&self, lits: &Literals) -> bool {
        self.include
            .iter()
            .zip(lits.words())
            .all(|(inc, val)| inc & !val == 0)
    }

    #[inline]
    pub fn evaluate(&self, lits: &Literals, mode: Mode) -> bool {
        if self.included == 0 {
            mode == Mode::Train
        } else {
            self.covers(lits)
        }
    }

    /// Evaluates the clause on a 0/1 feature vector.
    pub fn evaluate_bits(&self, input: &[u8], mode: Mode) -> Result<u8> {
        check_len(self.num_features(), input.len())?;
        Ok(self.evaluate(&Literals::from_bits(input), mode) as u8)
    }

    #[inline]
    fn step_include(&mut self, literal: usize, budget: Option<usize>) {
        let n = self.states_per_action;
        let state = self.states[literal];
        if !state.includes(n) && budget.is_some_and(|b| self.included >= b) {
            // Crossing into include would exceed the literal budget.
            return;
        }
        self.set_state(literal, state.toward_include(n));
    }

    #[inline]
    fn step_exclude(&mut self, literal: usize) {
        let state = self.states[literal];
        self.set_state(literal, state.toward_exclude());
    }

    /// Type I *recognize* feedback against `lits`, which the clause matches.
    pub fn recognize<R: Rng + ?Sized>(&mut self, lits: &Literals, cfg: &FeedbackConfig, rng: &mut R) {
        let p_include = cfg.include_probability();
        let p_exclude = cfg.exclude_probability();
        for lit in 0..self.states.len() {
            if lits.get(lit) {
                if cfg.boost_true_positive || rng.random::<f64>() < p_include {
                    self.step_include(lit, cfg.literal_budget);
                }
            } else if rng.random::<f64>() < p_exclude {
                self.step_exclude(lit);
            }
        }
        self.weight = self.weight.saturating_add(1);
    }

    /// Type I *erase* feedback: every automaton drifts toward exclude.
    pub fn erase<R: Rng + ?Sized>(&mut self, cfg: &FeedbackConfig, rng: &mut R) {
        let p_exclude = cfg.exclude_probability();
        for lit in 0..self.states.len() {
            if rng.random::<f64>() < p_exclude {
                self.step_exclude(lit);
            }
        }
    }

    /// Type II *reject* feedback against `lits`, which the clause matches:
    /// every excluded literal that is 0 in the input moves one step toward
    /// include.
    pub fn reject(&mut self, lits: &Literals, literal_budget: Option<usize>) {
        for lit in 0..self.states.len() {
            if !lits.get(lit) && !self.includes(lit) {
                self.step_include(lit, literal_budget);
            }
        }
        self.weight = self.weight.saturating_sub(1).max(1);
    }

    /// Type I feedback: recognize when the clause matches `lits` (training
    /// semantics), erase otherwise.
    pub fn type_i_feedback<R: Rng + ?Sized>(&mut self, lits: &Literals, cfg: &FeedbackConfig, rng: &mut R) -> Result<()> {
        check_len(self.num_features(), lits.num_features())?;
        if self.evaluate(lits, Mode::Train) {
            self.recognize(lits, cfg, rng);
        } else {
            self.erase(cfg, rng);
        }
        Ok(())
    }

    /// Type II feedback; a no-op for clauses that do not match `lits`.
    pub fn type_ii_feedback(&mut self, lits: &Literals, literal_budget: Option<usize>) -> Result<()> {
        check_len(self.num_features(), lits.num_features())?;
        if self.evaluate(lits, Mode::Train) {
            self.reject(lits, literal_budget);
        }
        Ok(())
    }
}
