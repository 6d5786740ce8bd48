//! Effective tool configuration: built-in defaults, overlaid by an optional
//! JSON config file, overlaid by explicit command-line flags (the binary
//! applies flag overrides field by field). The effective config is echoed
//! into every output artifact.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::array::ScenarioDistribution;
use crate::beamformer::ObjectiveParams;
use crate::bench::{BenchConfig, GridSpec, MethodId};
use crate::error::{Error, Result};
use crate::gbdt::TrainingConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CliConfig {
    /// Array size (uniform circular geometry).
    pub n: usize,
    pub alpha: f64,
    pub loading_scale: f64,
    pub greedy_samples: usize,
    pub cd_sweeps: usize,
    pub refine_sweeps: usize,
    pub grid_step_deg: f64,
    pub dist: ScenarioDistribution,
    pub seed: u64,
    pub trials: usize,
    pub methods: Vec<MethodId>,
    pub model: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
    pub dataset_rows: usize,
    pub rounds: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    pub min_leaf: usize,
    /// Worker thread cap; absent = all available cores.
    pub threads: Option<usize>,
}

impl Default for CliConfig {
    fn default() -> Self {
        let bench = BenchConfig::default();
        let train = TrainingConfig::default();
        let params = ObjectiveParams::default();
        CliConfig {
            n: bench.n,
            alpha: params.alpha,
            loading_scale: params.loading_scale,
            greedy_samples: bench.greedy_samples,
            cd_sweeps: bench.cd_sweeps,
            refine_sweeps: bench.refine_sweeps,
            grid_step_deg: bench.grid.step_deg,
            dist: ScenarioDistribution::default(),
            seed: 0,
            trials: bench.trials,
            methods: bench.methods,
            model: None,
            out_dir: None,
            dataset_rows: 20000,
            rounds: train.rounds,
            max_depth: train.max_depth,
            learning_rate: train.learning_rate,
            min_leaf: train.min_leaf,
            threads: None,
        }
    }
}

impl CliConfig {
    /// Reads a (possibly partial) JSON config; absent fields keep defaults,
    /// unknown fields are rejected.
    pub fn from_file(path: &Path) -> Result<Self> {
        let display = path.display().to_string();
        let text = fs::read_to_string(path).map_err(|e| Error::io(&display, e))?;
        let cfg: CliConfig =
            serde_json::from_str(&text).map_err(|e| Error::parse(&display, e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            Some(p) => Self::from_file(p),
            None => Ok(Self::default()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.objective_params().validate()?;
        self.training_config().validate()?;
        self.grid().validate()?;
        self.dist.validate()?;
        if self.n < 2 {
            return Err(Error::InvalidArgument(format!("array size {} < 2", self.n)));
        }
        Ok(())
    }

    pub fn objective_params(&self) -> ObjectiveParams {
        ObjectiveParams {
            alpha: self.alpha,
            loading_scale: self.loading_scale,
        }
    }

    pub fn training_config(&self) -> TrainingConfig {
        TrainingConfig {
            rounds: self.rounds,
            max_depth: self.max_depth,
            learning_rate: self.learning_rate,
            min_leaf: self.min_leaf,
            seed: self.seed,
        }
    }

    pub fn grid(&self) -> GridSpec {
        GridSpec {
            step_deg: self.grid_step_deg,
        }
    }

    pub fn bench_config(&self) -> BenchConfig {
        BenchConfig {
            n: self.n,
            trials: self.trials,
            methods: self.methods.clone(),
            greedy_samples: self.greedy_samples,
            cd_sweeps: self.cd_sweeps,
            refine_sweeps: self.refine_sweeps,
            params: self.objective_params(),
            grid: self.grid(),
            dist: self.dist.clone(),
            model_path: self.model.clone(),
            out_dir: self.out_dir.clone(),
            master_seed: self.seed,
        }
    }
}
