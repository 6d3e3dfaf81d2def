use crate::agent::Policy;
use crate::env::{ActionSpace, JointAction, NetworkEnv};
use crate::error::Result;
use crate::radio::{AntennaConfig, Deployment, MAX_TILT_DEG, MIN_TILT_DEG};

/// Tilt used when a deployment has a single site.
pub const DEFAULT_TILT_DEG: f64 = 6.0;

/// Tilt (whole degrees) that points the main beam at half the distance to
/// the nearest other site.
pub fn heuristic_tilt(cell: &AntennaConfig, deployment: &Deployment) -> f64 {
    let site = deployment
        .sites
        .iter()
        .position(|&p| p == cell.site_position);
    let nearest = site.and_then(|s| deployment.nearest_site_distance(s));
    match nearest {
        Some(d) if d > 0.0 => (cell.height / (0.5 * d))
            .atan()
            .to_degrees()
            .round()
            .clamp(MIN_TILT_DEG, MAX_TILT_DEG),
        _ => DEFAULT_TILT_DEG,
    }
}

/// Moves every tilt one degree per step towards its heuristic target and
/// leaves power alone.
#[derive(Debug, Clone, Copy, Default)]
pub struct HeuristicPolicy;

impl Policy for HeuristicPolicy {
    fn act(&mut self, env: &NetworkEnv) -> Result<JointAction> {
        let dep = env.deployment();
        let space = env.action_space();
        let towards = |c: usize| {
            let cell = &dep.cells[c];
            let target = heuristic_tilt(cell, dep);
            if cell.tilt() < target {
                2
            } else if cell.tilt() > target {
                0
            } else {
                1
            }
        };
        let actions = match space {
            ActionSpace::Tilt => (0..dep.n_cells()).map(towards).collect(),
            ActionSpace::Joint => (0..dep.n_cells()).map(|c| 3 * towards(c) + 1).collect(),
            ActionSpace::Split => (0..dep.n_cells()).flat_map(|c| [towards(c), 1]).collect(),
        };
        Ok(JointAction(actions))
    }
}
