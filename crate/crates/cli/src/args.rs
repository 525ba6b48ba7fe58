use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use tmuq_core::datagen::LabelNoise;
use tmuq_core::harness::config::{CIFAR_DIR_ENV, OUTPUT_DIR_ENV, THREADS_ENV};

#[derive(Parser, Debug)]
#[command(name = "tmuq", version, about = "Tsetlin machine probability-score experiments")]
pub struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true, env = THREADS_ENV)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Class-sum traces of one pattern under 11 label-noise levels.
    SinglePattern {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        copies: Option<usize>,
        /// Comma-separated P(y=1) levels.
        #[arg(long, value_delimiter = ',')]
        levels: Option<Vec<f64>>,
        #[arg(long)]
        window: Option<usize>,
        #[arg(long)]
        label_noise: Option<Noise>,
    },
    /// Eight patterns with a conditional probability table, one run per s.
    Cpt {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        copies: Option<usize>,
        #[arg(long, value_delimiter = ',')]
        specificities: Option<Vec<f64>>,
        #[arg(long)]
        window: Option<usize>,
        #[arg(long)]
        label_noise: Option<Noise>,
    },
    /// Two-moons certainty map over a mesh grid.
    Moons {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        moons: MoonsArgs,
        /// Write the trained model here.
        #[arg(long)]
        save_model: Option<PathBuf>,
    },
    /// Convolutional machine on a CIFAR-10 subset.
    Image {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        image: ImageArgs,
        #[arg(long)]
        save_model: Option<PathBuf>,
    },
    /// Train the moons or image run described by a config file and save the model.
    Save {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the contents of a model archive.
    Load { archive: PathBuf },
    /// Score inputs with a saved model; writes CSV to stdout.
    Predict {
        archive: PathBuf,
        /// One sample: comma-separated values (raw features for models with a
        /// thermometer encoder, 0/1 bits otherwise). Repeatable.
        #[arg(long = "input")]
        inputs: Vec<String>,
        /// CIFAR-10 batch file to score with an image model.
        #[arg(long)]
        cifar_batch: Option<PathBuf>,
        /// Records to read from the batch.
        #[arg(long, default_value_t = 10)]
        limit: usize,
    },
}

#[derive(Args, Debug, Default)]
pub struct Common {
    /// Start from this config file instead of the built-in defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, env = OUTPUT_DIR_ENV)]
    pub output_dir: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub target: Option<u32>,
    #[arg(long)]
    pub specificity: Option<f64>,
    #[arg(long)]
    pub clauses: Option<usize>,
    #[arg(long)]
    pub states: Option<u16>,
    #[arg(long)]
    pub literal_budget: Option<usize>,
    #[arg(long)]
    pub boost: Option<bool>,
    #[arg(long)]
    pub memory_cap: Option<u64>,
}

#[derive(Args, Debug)]
pub struct MoonsArgs {
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub test_samples: Option<usize>,
    #[arg(long)]
    pub noise: Option<f64>,
    #[arg(long)]
    pub bins: Option<usize>,
    #[arg(long)]
    pub boundary_bit: Option<bool>,
    #[arg(long)]
    pub mesh_steps: Option<usize>,
}

#[derive(Args, Debug)]
pub struct ImageArgs {
    #[arg(long, env = CIFAR_DIR_ENV)]
    pub data_dir: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    pub classes: Option<Vec<String>>,
    #[arg(long)]
    pub train_per_class: Option<usize>,
    #[arg(long)]
    pub test_per_class: Option<usize>,
    #[arg(long)]
    pub resolution: Option<usize>,
    /// Patch height and width, e.g. `3,3`.
    #[arg(long, value_delimiter = ',', num_args = 2)]
    pub patch: Option<Vec<usize>>,
    #[arg(long)]
    pub position_literals: Option<bool>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Noise {
    Bernoulli,
    Exact,
}

impl From<Noise> for LabelNoise {
    fn from(n: Noise) -> Self {
        match n {
            Noise::Bernoulli => LabelNoise::Bernoulli,
            Noise::Exact => LabelNoise::Exact,
        }
    }
}
