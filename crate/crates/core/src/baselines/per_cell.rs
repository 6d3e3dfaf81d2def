use std::sync::Arc;

use crate::agent::Formulation;
use crate::env::{JointState, NetworkGraph, Rewards, OBSERVATION_DIM};
use crate::nn::{GraphSample, Tensor};

pub const NDQN_MAX_NEIGHBORS: usize = 5;
pub const NDQN_OBSERVATION_DIM: usize = OBSERVATION_DIM * (1 + NDQN_MAX_NEIGHBORS);

/// What a per-cell agent sees.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellView {
    /// Its own observation (DQN).
    Own,
    /// Own observation followed by up to five neighbours, strongest coupling first (N-DQN).
    Stacked,
    /// Its ego network: itself, its neighbours and the edges among them (GAQ).
    Ego,
}

pub fn dqn_observation(cell: usize, state: &JointState) -> [f64; OBSERVATION_DIM] {
    state.cells[cell].to_array()
}

/// Own features plus five neighbour blocks in graph order (decreasing
/// coupling), zero-padded.
pub fn ndqn_observation(cell: usize, state: &JointState, graph: &NetworkGraph) -> Vec<f64> {
    let mut out = Vec::with_capacity(NDQN_OBSERVATION_DIM);
    out.extend_from_slice(&state.cells[cell].to_array());
    for &j in graph.neighbors(cell).iter().take(NDQN_MAX_NEIGHBORS) {
        out.extend_from_slice(&state.cells[j].to_array());
    }
    out.resize(NDQN_OBSERVATION_DIM, 0.0);
    out
}

/// Ego network of `cell` with the cell as row 0 and the only acting row.
pub fn gaq_sample(cell: usize, state: &JointState, graph: &NetworkGraph) -> GraphSample {
    let mut nodes = vec![cell];
    nodes.extend_from_slice(graph.neighbors(cell));
    let local: Vec<Vec<usize>> = nodes
        .iter()
        .map(|&a| {
            nodes
                .iter()
                .enumerate()
                .filter(|&(_, &b)| b != a && graph.is_adjacent(a, b))
                .map(|(k, _)| k)
                .collect()
        })
        .collect();
    let data = nodes.iter().flat_map(|&c| state.cells[c].to_array()).collect();
    let features = Tensor::matrix(nodes.len(), OBSERVATION_DIM, data).expect("sized");
    GraphSample::ego(features, Arc::new(local), 0)
}

/// One agent per cell, each trained from its local reward with shared weights.
#[derive(Debug, Clone, Copy)]
pub struct PerCell {
    pub view: CellView,
}

impl PerCell {
    pub fn new(view: CellView) -> Self {
        Self { view }
    }

    pub fn input_dim(&self) -> usize {
        match self.view {
            CellView::Stacked => NDQN_OBSERVATION_DIM,
            _ => OBSERVATION_DIM,
        }
    }
}

impl Formulation for PerCell {
    fn samples(&self, state: &JointState, graph: &NetworkGraph) -> Vec<GraphSample> {
        (0..state.n_cells())
            .map(|c| match self.view {
                CellView::Own => GraphSample::rows(
                    Tensor::matrix(1, OBSERVATION_DIM, dqn_observation(c, state).to_vec()).expect("sized"),
                ),
                CellView::Stacked => GraphSample::rows(
                    Tensor::matrix(1, NDQN_OBSERVATION_DIM, ndqn_observation(c, state, graph)).expect("sized"),
                ),
                CellView::Ego => gaq_sample(c, state, graph),
            })
            .collect()
    }

    fn rewards(&self, rewards: &Rewards) -> Vec<f64> {
        rewards.local.clone()
    }
}
