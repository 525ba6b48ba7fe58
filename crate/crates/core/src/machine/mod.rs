//! Tsetlin automata, clauses, clause banks and the Type I / Type II feedback
//! loop for a single binary target.

mod automaton;
mod bank;
mod binary;
mod clause;
mod params;

pub use automaton::TaState;
pub use bank::{Clip, ClauseBank};
pub use binary::{feedback_probabilities, BinaryTM, ExperimentTrace};
pub use clause::{Clause, FeedbackConfig, Mode, Polarity};
pub use params::{TMParams, DEFAULT_STATES_PER_ACTION};
