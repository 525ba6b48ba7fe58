//! Tsetlin machine learning with probability scores.
//!
//! The machine exposes its raw class sums, which map linearly onto a
//! probability score `(1 + v / T) / 2`. On top of that sit normalized
//! multiclass scores, clause-activation counts, threshold-filtered accuracy,
//! thermometer binarizers, synthetic data generators and an experiment
//! harness that writes CSV/JSON results.

pub mod binarize;
pub mod bits;
pub mod conv;
pub mod datagen;
pub mod error;
pub mod harness;
pub mod machine;
pub mod multiclass;
pub mod uncertainty;

pub use bits::Literals;
pub use error::{Error, Result};
pub use machine::{
    feedback_probabilities, BinaryTM, Clause, ClauseBank, Clip, ExperimentTrace, Mode, Polarity, TMParams, TaState,
};
pub use multiclass::MulticlassTM;
pub use conv::{BitImage, ConvolutionalTM, PatchConfig};
pub use binarize::{ImageThermometer, ThermometerEncoder};
pub use uncertainty::{PredictionReport, ProbabilityScore, ThresholdCurve};
