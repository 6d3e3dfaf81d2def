use std::path::{Path, PathBuf};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::algorithm::{Aggregation, Algorithm};
use crate::agent::{EpsilonSchedule, LearnerConfig};
use crate::env::{EnvConfig, Scenario};
use crate::error::{Error, Result};

/// Starting point that later layers (flags, config file) override.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    /// 19 sites, 10 000 users, 20 000 steps.
    #[default]
    Paper,
    /// 7 sites, 500 users, 3000 steps; mean GCN aggregation, learning rate
    /// capped at 3e-3 and uniform replay.
    Desk,
}

impl std::str::FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "paper" => Ok(Preset::Paper),
            "desk" => Ok(Preset::Desk),
            _ => Err(Error::Config(format!("unknown preset {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub algorithm: Algorithm,
    pub env: EnvConfig,
    /// Environment steps per training run.
    pub steps: u64,
    pub n_seeds: usize,
    /// Base seed; run `k` derives all of its seeds from `(seed, k)`.
    pub seed: u64,
    pub epsilon: EpsilonSchedule,
    pub learner: LearnerConfig,
    pub gcn_aggregation: Aggregation,
    pub eval_episodes: usize,
    pub output_dir: PathBuf,
}

impl ExperimentConfig {
    pub fn new(algorithm: Algorithm, preset: Preset) -> Self {
        let mut env = EnvConfig::default();
        let mut learning_rate = algorithm.default_learning_rate();
        let mut gcn_aggregation = Aggregation::Sum;
        let mut priority_alpha = LearnerConfig::default().priority_alpha;
        let (steps, decay) = match preset {
            Preset::Paper => (20_000, 10_000),
            Preset::Desk => {
                env.n_sites = 7;
                env.n_users = 500;
                learning_rate = learning_rate.min(3e-3);
                gcn_aggregation = Aggregation::Mean;
                priority_alpha = 0.0;
                (3_000, 1_500)
            }
        };
        Self {
            algorithm,
            env,
            steps,
            n_seeds: 3,
            seed: 0,
            epsilon: EpsilonSchedule {
                decay_steps: decay,
                ..EpsilonSchedule::default()
            },
            learner: LearnerConfig {
                learning_rate,
                priority_alpha,
                ..LearnerConfig::default()
            },
            gcn_aggregation,
            eval_episodes: 50,
            output_dir: PathBuf::from("runs"),
        }
    }

    /// Defaults for `preset`, then `flags`, then `file`; later layers win.
    /// The algorithm is taken from the highest layer that names one, so its
    /// defaults (learning rate) sit underneath everything else.
    pub fn layered(preset: Preset, flags: &toml::Table, file: Option<&toml::Table>) -> Result<Self> {
        let named = |t: &toml::Table| t.get("algorithm").and_then(|v| v.as_str()).map(str::to_owned);
        let algorithm = file
            .and_then(named)
            .or_else(|| named(flags))
            .map(|s| s.parse())
            .transpose()?
            .unwrap_or(Algorithm::Gqn);
        let mut merged = toml::Table::try_from(Self::new(algorithm, preset))
            .map_err(|e| Error::Config(format!("serializing defaults: {e}")))?;
        merge(&mut merged, flags);
        if let Some(file) = file {
            merge(&mut merged, file);
        }
        let cfg: Self = toml::Value::Table(merged)
            .try_into()
            .map_err(|e| Error::Config(format!("{e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn read_table(path: &Path) -> Result<toml::Table> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("reading {}: {e}", path.display())))?;
        text.parse()
            .map_err(|e| Error::Config(format!("parsing {}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<()> {
        self.env.validate()?;
        if self.n_seeds == 0 {
            return Err(Error::Config("n_seeds must be positive".into()));
        }
        if !self.algorithm.supports(&self.env) {
            return Err(Error::Config(format!("{} cannot drive split agents", self.algorithm)));
        }
        let l = &self.learner;
        if l.batch_size == 0 || l.replay_capacity < l.batch_size {
            return Err(Error::Config("need 0 < batch_size <= replay_capacity".into()));
        }
        if !(l.learning_rate > 0.0 && l.learning_rate.is_finite()) {
            return Err(Error::Config("learning_rate must be positive".into()));
        }
        if !(0.0..=1.0).contains(&l.gamma) {
            return Err(Error::Config("gamma must lie in [0, 1]".into()));
        }
        if l.target_period == 0 {
            return Err(Error::Config("target_period must be positive".into()));
        }
        let e = &self.epsilon;
        if !((0.0..=1.0).contains(&e.initial) && (0.0..=1.0).contains(&e.final_value)) {
            return Err(Error::Config("epsilon values must lie in [0, 1]".into()));
        }
        Ok(())
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(format!("{e}")))
    }

    /// Directory of run `k`: `<out>/<algorithm>/<scenario>/seed<k>`.
    pub fn run_dir(&self, k: usize) -> PathBuf {
        self.output_dir
            .join(self.algorithm.name())
            .join(self.env.scenario.to_string())
            .join(format!("seed{k}"))
    }

    pub fn seeds(&self, k: usize) -> RunSeeds {
        RunSeeds::derive(self.seed, k)
    }

    pub fn is_joint(&self) -> bool {
        self.env.scenario == Scenario::Joint
    }
}

/// Independent streams of one run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunSeeds {
    pub env: u64,
    pub init: u64,
    pub exploration: u64,
    pub replay: u64,
}

impl RunSeeds {
    pub fn derive(base: u64, k: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(base);
        rng.set_stream(k as u64);
        Self {
            env: rng.next_u64(),
            init: rng.next_u64(),
            exploration: rng.next_u64(),
            replay: rng.next_u64(),
        }
    }
}

fn merge(base: &mut toml::Table, over: &toml::Table) {
    for (k, v) in over {
        match (base.get_mut(k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o),
            _ => {
                base.insert(k.clone(), v.clone());
            }
        }
    }
}
