//! Reward functions. The `_raw` variants evaluate the formulas on dB and
//! watt values; the others evaluate them on normalized quantities and
//! divide by the number of averaged terms so results stay in [-1, 1].

use super::graph::NetworkGraph;
use super::observation::{normalize_power, normalize_sinr};

fn neighbor_mean(graph: &NetworkGraph, cell: usize, term: impl Fn(usize) -> f64) -> Option<f64> {
    let nbrs = graph.neighbors(cell);
    if nbrs.is_empty() {
        None
    } else {
        Some(nbrs.iter().map(|&j| term(j)).sum::<f64>() / nbrs.len() as f64)
    }
}

/// Normalized network-wide mean SINR.
pub fn reward_global_tilt(global_sinr_db: f64) -> f64 {
    normalize_sinr(global_sinr_db)
}

/// `SINR_L,i + mean_{j∈N(i)} SINR_L,j` in dB; just `SINR_L,i` for an isolated cell.
pub fn reward_local_tilt_raw(cell: usize, cell_sinr_db: &[f64], graph: &NetworkGraph) -> f64 {
    cell_sinr_db[cell] + neighbor_mean(graph, cell, |j| cell_sinr_db[j]).unwrap_or(0.0)
}

pub fn reward_local_tilt(cell: usize, cell_sinr_db: &[f64], graph: &NetworkGraph) -> f64 {
    let own = normalize_sinr(cell_sinr_db[cell]);
    match neighbor_mean(graph, cell, |j| normalize_sinr(cell_sinr_db[j])) {
        Some(m) => 0.5 * (own + m),
        None => own,
    }
}

/// `(1 − w)·SINR_G − w·mean power`, both normalized.
pub fn reward_global_joint(global_sinr_db: f64, powers_w: &[f64], w: f64) -> f64 {
    let mean_power = powers_w.iter().sum::<f64>() / powers_w.len() as f64;
    (1.0 - w) * normalize_sinr(global_sinr_db) - w * normalize_power(mean_power)
}

/// Per-cell joint reward on raw dB and watt values.
pub fn reward_local_joint_raw(cell: usize, cell_sinr_db: &[f64], powers_w: &[f64], graph: &NetworkGraph, w: f64) -> f64 {
    let term = |c: usize| (1.0 - w) * cell_sinr_db[c] - w * powers_w[c];
    term(cell) + neighbor_mean(graph, cell, term).unwrap_or(0.0)
}

pub fn reward_local_joint(cell: usize, cell_sinr_db: &[f64], powers_w: &[f64], graph: &NetworkGraph, w: f64) -> f64 {
    let term = |c: usize| (1.0 - w) * normalize_sinr(cell_sinr_db[c]) - w * normalize_power(powers_w[c]);
    match neighbor_mean(graph, cell, term) {
        Some(m) => 0.5 * (term(cell) + m),
        None => term(cell),
    }
}
