//! The antenna-tuning multi-agent MDP: per-cell observations, the
//! interference graph, actions, rewards, and the episode lifecycle.

mod action;
mod graph;
mod network;
mod observation;
mod reward;
mod trace;

pub use action::{decode_actions, ActionSpace, CellDelta, JointAction, POWER_STEPS_W, TILT_STEPS_DEG};
pub use graph::{build_neighbor_graph, split_agents_per_parameter, GraphConfig, NetworkGraph};
pub use network::{NetworkEnv, Rewards, StepOutcome};
pub use observation::{
    normalize_power, normalize_sinr, normalize_tilt, percentile, CellObservation, JointState,
    OBSERVATION_DIM, SINR_RANGE_DB, SPLIT_OBSERVATION_DIM,
};
pub use reward::{
    reward_global_joint, reward_global_tilt, reward_local_joint, reward_local_joint_raw,
    reward_local_tilt, reward_local_tilt_raw,
};
pub use trace::StepTrace;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::radio::RadioConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Layout {
    Hex,
    Random,
}

/// Which antenna parameters the agents control.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    /// Tilt only; power pinned at 40 W.
    Tilt,
    /// Tilt and maximum downlink power.
    Joint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RewardScope {
    Global,
    Local,
}

/// Reward definition: scenario, scope and the power-penalty weight
/// (ignored for the tilt scenario).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardSpec {
    pub scenario: Scenario,
    pub scope: RewardScope,
    pub w: f64,
}

impl std::fmt::Display for Layout {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Layout::Hex => "hex",
            Layout::Random => "random",
        })
    }
}

impl std::fmt::Display for Scenario {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Scenario::Tilt => "tilt",
            Scenario::Joint => "joint",
        })
    }
}

/// Everything that determines an environment instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EnvConfig {
    pub layout: Layout,
    pub n_sites: usize,
    /// Intersite distance is drawn uniformly from this range at every reset (m).
    pub isd_range: (f64, f64),
    pub n_users: usize,
    pub scenario: Scenario,
    pub reward_scope: RewardScope,
    pub w: f64,
    pub split_agents: bool,
    pub seed: u64,
    pub episode_length: usize,
    /// Random layouts keep sites at least this fraction of the sampled ISD apart.
    pub random_min_isd_fraction: f64,
    pub graph: GraphConfig,
    pub radio: RadioConfig,
}

impl Default for EnvConfig {
    fn default() -> Self {
        Self {
            layout: Layout::Hex,
            n_sites: 19,
            isd_range: (300.0, 1500.0),
            n_users: 10_000,
            scenario: Scenario::Tilt,
            reward_scope: RewardScope::Global,
            w: 0.15,
            split_agents: false,
            seed: 0,
            episode_length: 20,
            random_min_isd_fraction: 0.5,
            graph: GraphConfig::default(),
            radio: RadioConfig::default(),
        }
    }
}

impl EnvConfig {
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.isd_range;
        if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
            return Err(Error::Config(format!("isd_range must satisfy 0 < lo <= hi, got ({lo}, {hi})")));
        }
        if self.n_sites == 0 {
            return Err(Error::Config("n_sites must be positive".into()));
        }
        if self.layout == Layout::Hex && ![1, 7, 19, 37].contains(&self.n_sites) {
            return Err(Error::Config(format!(
                "hex layout supports 1, 7, 19 or 37 sites, got {}",
                self.n_sites
            )));
        }
        if self.n_users == 0 {
            return Err(Error::Config("n_users must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.w) {
            return Err(Error::Config(format!("w must lie in [0, 1], got {}", self.w)));
        }
        if self.episode_length == 0 {
            return Err(Error::Config("episode_length must be positive".into()));
        }
        if self.split_agents && self.scenario == Scenario::Tilt {
            return Err(Error::Config("split_agents requires the joint scenario".into()));
        }
        Ok(())
    }

    pub fn reward_spec(&self) -> RewardSpec {
        RewardSpec {
            scenario: self.scenario,
            scope: self.reward_scope,
            w: self.w,
        }
    }

    pub fn action_space(&self) -> ActionSpace {
        match (self.scenario, self.split_agents) {
            (Scenario::Tilt, _) => ActionSpace::Tilt,
            (Scenario::Joint, false) => ActionSpace::Joint,
            (Scenario::Joint, true) => ActionSpace::Split,
        }
    }

    pub fn observation_dim(&self) -> usize {
        if self.split_agents {
            SPLIT_OBSERVATION_DIM
        } else {
            OBSERVATION_DIM
        }
    }
}
