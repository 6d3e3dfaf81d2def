use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::agent::{Formulation, GlobalGraph};
use crate::baselines::{CellView, PerCell};
use crate::env::EnvConfig;
use crate::error::{Error, Result};
use crate::nn::ArchitectureSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Gqn,
    GqnGat,
    Dqn,
    Ndqn,
    Gaq,
    Heuristic,
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] = [
        Algorithm::Gqn,
        Algorithm::GqnGat,
        Algorithm::Dqn,
        Algorithm::Ndqn,
        Algorithm::Gaq,
        Algorithm::Heuristic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Gqn => "gqn",
            Algorithm::GqnGat => "gqn_gat",
            Algorithm::Dqn => "dqn",
            Algorithm::Ndqn => "ndqn",
            Algorithm::Gaq => "gaq",
            Algorithm::Heuristic => "heuristic",
        }
    }

    pub fn is_learned(self) -> bool {
        self != Algorithm::Heuristic
    }

    pub fn default_learning_rate(self) -> f64 {
        match self {
            Algorithm::Gqn | Algorithm::GqnGat => 1e-2,
            _ => 1e-3,
        }
    }

    /// Network input representation and reward credit.
    pub fn formulation(self) -> Result<Box<dyn Formulation + Send + Sync>> {
        Ok(match self {
            Algorithm::Gqn | Algorithm::GqnGat => Box::new(GlobalGraph),
            Algorithm::Dqn => Box::new(PerCell::new(CellView::Own)),
            Algorithm::Ndqn => Box::new(PerCell::new(CellView::Stacked)),
            Algorithm::Gaq => Box::new(PerCell::new(CellView::Ego)),
            Algorithm::Heuristic => return Err(Error::invalid("the heuristic has no network formulation")),
        })
    }

    pub fn architecture(self, env: &EnvConfig, aggregation: Aggregation) -> Result<ArchitectureSpec> {
        let n_actions = env.action_space().actions_per_agent();
        let dim = env.observation_dim();
        let spec = match self {
            Algorithm::Gqn => ArchitectureSpec::gqn(dim, n_actions),
            Algorithm::GqnGat => ArchitectureSpec::gqn_gat(dim, n_actions),
            Algorithm::Dqn => ArchitectureSpec::dqn(dim, n_actions),
            Algorithm::Ndqn => ArchitectureSpec::dqn(PerCell::new(CellView::Stacked).input_dim(), n_actions),
            Algorithm::Gaq => ArchitectureSpec::gaq(dim, n_actions),
            Algorithm::Heuristic => return Err(Error::invalid("the heuristic has no network")),
        };
        Ok(match aggregation {
            Aggregation::Sum => spec,
            Aggregation::Mean => spec.with_mean_aggregation(),
        })
    }

    /// Per-cell baselines act once per cell and cannot drive split agents.
    pub fn supports(self, env: &EnvConfig) -> bool {
        !env.split_agents || matches!(self, Algorithm::Gqn | Algorithm::GqnGat | Algorithm::Heuristic)
    }
}

/// How GCN layers pool neighbour features.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregation {
    #[default]
    Sum,
    Mean,
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.to_ascii_lowercase().replace('-', "_");
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == key)
            .ok_or_else(|| Error::Config(format!("unknown algorithm {s:?}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for a in Algorithm::ALL {
            assert_eq!(a.name().parse::<Algorithm>().unwrap(), a);
        }
        assert_eq!("GQN-GAT".parse::<Algorithm>().unwrap(), Algorithm::GqnGat);
        assert!("qmix".parse::<Algorithm>().is_err());
    }

    #[test]
    fn aggregation_only_touches_gcn_layers() {
        let env = EnvConfig::default();
        let sum = Algorithm::Gqn.architecture(&env, Aggregation::Sum).unwrap();
        let mean = Algorithm::Gqn.architecture(&env, Aggregation::Mean).unwrap();
        assert_ne!(sum, mean);
        assert_eq!(sum.parameter_shapes(), mean.parameter_shapes());
        assert_eq!(
            Algorithm::Gaq.architecture(&env, Aggregation::Mean).unwrap(),
            Algorithm::Gaq.architecture(&env, Aggregation::Sum).unwrap()
        );
    }

    #[test]
    fn learning_rates() {
        assert_eq!(Algorithm::Gqn.default_learning_rate(), 1e-2);
        assert_eq!(Algorithm::Ndqn.default_learning_rate(), 1e-3);
    }

    #[test]
    fn ndqn_reads_stacked_inputs() {
        let spec = Algorithm::Ndqn.architecture(&EnvConfig::default(), Aggregation::Sum).unwrap();
        assert_eq!(spec.input_dim, 54);
        assert_eq!(spec.n_actions, 3);
    }
}
