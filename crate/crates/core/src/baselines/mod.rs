//! Comparison policies: per-cell DQN, neighbour-stacking N-DQN, ego-network
//! graph attention (GAQ), and a geometric tilt rule.

mod heuristic;
mod per_cell;

pub use heuristic::{heuristic_tilt, HeuristicPolicy, DEFAULT_TILT_DEG};
pub use per_cell::{
    dqn_observation, gaq_sample, ndqn_observation, CellView, PerCell, NDQN_MAX_NEIGHBORS, NDQN_OBSERVATION_DIM,
};
