use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::datagen::LabelNoise;
use crate::error::{Error, Result};
use crate::machine::TMParams;

/// Overrides the output directory of every run.
pub const OUTPUT_DIR_ENV: &str = "TMUQ_OUTPUT_DIR";
/// Worker threads for the rayon pool (the CLI reads it; the library never does).
pub const THREADS_ENV: &str = "TMUQ_THREADS";
/// Directory holding the CIFAR-10 binary batches.
pub const CIFAR_DIR_ENV: &str = "TMUQ_CIFAR10_DIR";
pub const DEFAULT_CIFAR_DIR: &str = "data/cifar-10-batches-bin";

/// Default clause-state budget: 4 GiB.
pub const DEFAULT_MEMORY_CAP: u64 = 4 << 30;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Dataset {
    SinglePattern {
        copies: usize,
        /// `P(y = 1)` of each run.
        levels: Vec<f64>,
        label_noise: LabelNoise,
        /// Trailing epochs averaged into the final score.
        window: usize,
    },
    Cpt {
        copies: usize,
        specificities: Vec<f64>,
        label_noise: LabelNoise,
        window: usize,
    },
    Moons {
        samples: usize,
        test_samples: usize,
        noise_sd: f64,
        bins: usize,
        boundary_bit: bool,
        mesh_steps: usize,
    },
    Image {
        data_dir: PathBuf,
        classes: Vec<String>,
        train_per_class: Option<usize>,
        test_per_class: Option<usize>,
        resolution: usize,
        patch: [usize; 2],
        position_literals: bool,
    },
}

impl Dataset {
    pub fn kind(&self) -> &'static str {
        match self {
            Dataset::SinglePattern { .. } => "single-pattern",
            Dataset::Cpt { .. } => "cpt",
            Dataset::Moons { .. } => "moons",
            Dataset::Image { .. } => "image",
        }
    }
}

/// A complete, serializable description of one run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub id: String,
    /// Machine hyperparameters; `params.seed` is replaced by `seed` at run time.
    pub params: TMParams,
    pub dataset: Dataset,
    pub epochs: usize,
    pub seed: u64,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default = "default_cap")]
    pub memory_cap_bytes: u64,
}

fn default_cap() -> u64 {
    DEFAULT_MEMORY_CAP
}

impl ExperimentConfig {
    fn with(id: &str, params: TMParams, dataset: Dataset, epochs: usize) -> Self {
        Self {
            id: id.to_string(),
            params,
            dataset,
            epochs,
            seed: 1,
            output_dir: None,
            memory_cap_bytes: DEFAULT_MEMORY_CAP,
        }
    }

    /// Eleven noise levels from 0.5 to 1.0 on 100 copies of one pattern.
    pub fn single_pattern() -> Self {
        let levels = (0..=10).map(|k| 0.5 + 0.05 * k as f64).collect();
        Self::with(
            "single-pattern",
            TMParams::new(2000, 1.0, 20).with_boost(true).with_states_per_action(16),
            Dataset::SinglePattern { copies: 100, levels, label_noise: LabelNoise::Exact, window: 200 },
            400,
        )
    }

    pub fn cpt() -> Self {
        Self::with(
            "cpt",
            TMParams::new(2000, 1.0, 20).with_boost(true).with_states_per_action(16),
            Dataset::Cpt {
                copies: 100,
                specificities: vec![1.0, 2.0, 5.0],
                label_noise: LabelNoise::Exact,
                window: 200,
            },
            400,
        )
    }

    pub fn moons() -> Self {
        Self::with(
            "moons",
            TMParams::new(10_000, 1.1, 1000).with_boost(true),
            Dataset::Moons {
                samples: 1000,
                test_samples: 1000,
                noise_sd: 0.15,
                bins: 64,
                boundary_bit: true,
                mesh_steps: 100,
            },
            15,
        )
    }

    /// Two-class desk-scale image run (automobile vs ship).
    pub fn image_desk(data_dir: impl Into<PathBuf>) -> Self {
        Self::with(
            "image",
            TMParams::new(2000, 10.0, 200).with_boost(true).with_literal_budget(64),
            Dataset::Image {
                data_dir: data_dir.into(),
                classes: vec!["automobile".into(), "ship".into()],
                train_per_class: Some(2000),
                test_per_class: None,
                resolution: 8,
                patch: [3, 3],
                position_literals: true,
            },
            20,
        )
    }

    pub fn for_kind(kind: &str) -> Result<Self> {
        match kind {
            "single-pattern" => Ok(Self::single_pattern()),
            "cpt" => Ok(Self::cpt()),
            "moons" => Ok(Self::moons()),
            "image" => Ok(Self::image_desk(cifar_dir_from_env())),
            other => Err(Error::InvalidArgument(format!("unknown experiment `{other}`"))),
        }
    }

    /// Applies [`OUTPUT_DIR_ENV`] when set.
    pub fn with_env_overrides(mut self) -> Self {
        if let Some(dir) = std::env::var_os(OUTPUT_DIR_ENV).filter(|d| !d.is_empty()) {
            self.output_dir = Some(PathBuf::from(dir));
        }
        self
    }

    /// Machine parameters with the run seed applied.
    pub fn resolved_params(&self) -> TMParams {
        self.params.clone().with_seed(self.seed)
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.epochs == 0 {
            return Err(Error::InvalidArgument("epochs must be positive".into()));
        }
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        match &self.dataset {
            Dataset::SinglePattern { copies, levels, window, .. } => {
                if *copies == 0 || levels.is_empty() {
                    return bad("need copies and at least one noise level".into());
                }
                if let Some(p) = levels.iter().find(|p| !(0.0..=1.0).contains(*p)) {
                    return bad(format!("noise level {p} outside [0, 1]"));
                }
                check_window(*window, self.epochs)?;
            }
            Dataset::Cpt { copies, specificities, window, .. } => {
                if *copies == 0 || specificities.is_empty() {
                    return bad("need copies and at least one specificity".into());
                }
                for &s in specificities {
                    TMParams { specificity: s, ..self.params.clone() }.validate()?;
                }
                check_window(*window, self.epochs)?;
            }
            Dataset::Moons { samples, test_samples, noise_sd, bins, boundary_bit, mesh_steps } => {
                if *samples == 0 || samples % 2 != 0 || *test_samples == 0 || test_samples % 2 != 0 {
                    return bad("moons sample counts must be positive and even".into());
                }
                if !(noise_sd.is_finite() && *noise_sd >= 0.0) {
                    return bad(format!("invalid noise level {noise_sd}"));
                }
                if *bins == 0 || (*bins == 1 && !boundary_bit) || *mesh_steps < 2 {
                    return bad("need thresholds and a mesh of at least 2 steps".into());
                }
            }
            Dataset::Image { classes, resolution, patch, .. } => {
                if classes.len() < 2 {
                    return bad("image runs need at least two classes".into());
                }
                if *resolution == 0 || patch[0] == 0 || patch[1] == 0 {
                    return bad("resolution and patch size must be positive".into());
                }
            }
        }
        let estimated = self.estimated_bytes();
        if estimated > self.memory_cap_bytes {
            return Err(Error::ResourceLimit { estimated, cap: self.memory_cap_bytes });
        }
        Ok(())
    }

    /// Literals per clause for this dataset.
    pub fn num_features(&self) -> usize {
        match &self.dataset {
            Dataset::SinglePattern { .. } | Dataset::Cpt { .. } => 3,
            Dataset::Moons { bins, boundary_bit, .. } => 2 * (bins - 1 + *boundary_bit as usize),
            Dataset::Image { resolution, patch, position_literals, .. } => {
                let [ph, pw] = *patch;
                let pos = if *position_literals {
                    (32usize.saturating_sub(ph)) + (32usize.saturating_sub(pw))
                } else {
                    0
                };
                ph * pw * 3 * resolution + pos
            }
        }
    }

    fn num_units(&self) -> usize {
        match &self.dataset {
            Dataset::Image { classes, .. } => classes.len(),
            _ => 1,
        }
    }

    /// Clause-bank memory: a 16-bit automaton and one mask bit per literal.
    pub fn estimated_bytes(&self) -> u64 {
        let literals = 2 * self.num_features() as u64;
        let per_clause = literals * 2 + literals.div_ceil(64) * 8 + 32;
        self.num_units() as u64 * self.params.num_clauses as u64 * per_clause
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| Error::File { path: path.to_path_buf(), source })?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        fs::write(path, text + "\n").map_err(|source| Error::File { path: path.to_path_buf(), source })
    }
}

fn check_window(window: usize, epochs: usize) -> Result<()> {
    if window == 0 || window > epochs {
        return Err(Error::InvalidArgument(format!("averaging window {window} must be in [1, {epochs}]")));
    }
    Ok(())
}

/// [`CIFAR_DIR_ENV`] if set, else [`DEFAULT_CIFAR_DIR`].
pub fn cifar_dir_from_env() -> PathBuf {
    std::env::var_os(CIFAR_DIR_ENV)
        .filter(|d| !d.is_empty())
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(DEFAULT_CIFAR_DIR))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        for kind in ["single-pattern", "cpt", "moons", "image"] {
            let cfg = ExperimentConfig::for_kind(kind).unwrap();
            cfg.validate().unwrap();
            assert_eq!(cfg.dataset.kind(), kind);
        }
        assert!(ExperimentConfig::for_kind("mnist").is_err());
    }

    #[test]
    fn json_round_trip() {
        let cfg = ExperimentConfig::cpt();
        let back: ExperimentConfig = serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn resource_guard_trips() {
        let mut cfg = ExperimentConfig::image_desk("x");
        assert_eq!(cfg.num_features(), 3 * 3 * 24 + 29 + 29);
        cfg.params.num_clauses = 2_000_000;
        assert!(matches!(cfg.validate(), Err(Error::ResourceLimit { .. })));
        cfg.memory_cap_bytes = u64::MAX;
        cfg.validate().unwrap();
    }

    #[test]
    fn window_longer_than_run_rejected() {
        let mut cfg = ExperimentConfig::single_pattern();
        cfg.epochs = 100;
        assert!(cfg.validate().is_err());
    }
}
