//! Graph Q-network training: decomposed greedy action selection, double-Q
//! targets, prioritized replay, a target network, and the training loop.

mod epsilon;
mod learner;
mod replay;
mod select;
mod training;

pub use epsilon::EpsilonSchedule;
pub use learner::{compute_targets, td_loss_and_gradients, Experience, Learner, LearnerConfig, StepReport};
pub use replay::{PrioritizedReplay, SampledBatch};
pub use select::{argmax, greedy_actions, select_actions};
pub use training::{
    evaluate, run_training, EpisodeMetrics, EpisodeResult, Formulation, GlobalGraph, GreedyPolicy, Policy,
    TrainingConfig,
};

use crate::env::{JointState, NetworkGraph};
use crate::error::Result;
use crate::nn::{QNetwork, Tensor};

/// Per-agent Q-vectors of a graph Q-network for one joint state.
pub fn gqn_forward(state: &JointState, graph: &NetworkGraph, model: &QNetwork) -> Result<Tensor> {
    if state.n_agents() != graph.n_nodes() {
        return Err(crate::Error::InvalidArgument(format!(
            "state has {} agents, graph {} nodes",
            state.n_agents(),
            graph.n_nodes()
        )));
    }
    model.q_values(&state.to_sample(graph.neighbor_lists()))
}
