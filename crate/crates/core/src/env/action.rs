use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const TILT_STEPS_DEG: [f64; 3] = [-1.0, 0.0, 1.0];
pub const POWER_STEPS_W: [f64; 3] = [-5.0, 0.0, 5.0];

/// How agent action indices map onto antenna changes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionSpace {
    /// One agent per cell, 3 tilt changes.
    Tilt,
    /// One agent per cell, 9 (tilt, power) pairs: index = 3·tilt + power.
    Joint,
    /// Two agents per cell: agent 2c picks the tilt change, 2c+1 the power change.
    Split,
}

impl ActionSpace {
    pub fn actions_per_agent(self) -> usize {
        match self {
            ActionSpace::Tilt | ActionSpace::Split => 3,
            ActionSpace::Joint => 9,
        }
    }

    pub fn agents_for_cells(self, n_cells: usize) -> usize {
        match self {
            ActionSpace::Split => 2 * n_cells,
            _ => n_cells,
        }
    }

    /// Index of the no-change action.
    pub fn noop(self) -> usize {
        match self {
            ActionSpace::Joint => 4,
            _ => 1,
        }
    }
}

/// One discrete action index per agent.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct JointAction(pub Vec<usize>);

impl JointAction {
    pub fn noop(space: ActionSpace, n_agents: usize) -> Self {
        JointAction(vec![space.noop(); n_agents])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Tilt and power change requested for one cell.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CellDelta {
    pub tilt_deg: f64,
    pub power_w: f64,
}

/// Per-cell deltas for a joint action over `n_cells` cells.
pub fn decode_actions(space: ActionSpace, action: &JointAction, n_cells: usize) -> Result<Vec<CellDelta>> {
    let n_agents = space.agents_for_cells(n_cells);
    if action.len() != n_agents {
        return Err(Error::invalid(format!(
            "joint action has {} entries, environment has {n_agents} agents",
            action.len()
        )));
    }
    let limit = space.actions_per_agent();
    if let Some((agent, &a)) = action.0.iter().enumerate().find(|&(_, &a)| a >= limit) {
        return Err(Error::invalid(format!("agent {agent} chose action {a}, only {limit} exist")));
    }
    let a = &action.0;
    Ok((0..n_cells)
        .map(|c| match space {
            ActionSpace::Tilt => CellDelta {
                tilt_deg: TILT_STEPS_DEG[a[c]],
                power_w: 0.0,
            },
            ActionSpace::Joint => CellDelta {
                tilt_deg: TILT_STEPS_DEG[a[c] / 3],
                power_w: POWER_STEPS_W[a[c] % 3],
            },
            ActionSpace::Split => CellDelta {
                tilt_deg: TILT_STEPS_DEG[a[2 * c]],
                power_w: POWER_STEPS_W[a[2 * c + 1]],
            },
        })
        .collect())
}
