//! Experiments, dataset ingestion, persistence and result files.

pub mod archive;
pub mod cifar;
pub mod config;
pub mod experiments;
pub mod output;
pub mod stats;

pub use archive::{Encoder, Model, ModelArchive};
pub use config::{Dataset, ExperimentConfig};
pub use experiments::{run_cpt, run_image, run_image_on, run_moons, run_single_pattern};
