use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::nn::{GraphSample, Tensor};
use crate::radio::{Deployment, SinrReport, UserPopulation, MAX_POWER_W, MAX_TILT_DEG, MIN_POWER_W, MIN_TILT_DEG};

pub const OBSERVATION_DIM: usize = 9;
/// Observation plus a one-hot tag telling tilt agents from power agents.
pub const SPLIT_OBSERVATION_DIM: usize = OBSERVATION_DIM + 2;
/// SINR values are mapped affinely from this range onto [-1, 1] and clamped.
pub const SINR_RANGE_DB: (f64, f64) = (-10.0, 30.0);

fn to_unit(v: f64, lo: f64, hi: f64) -> f64 {
    (2.0 * (v - lo) / (hi - lo) - 1.0).clamp(-1.0, 1.0)
}

pub fn normalize_sinr(db: f64) -> f64 {
    to_unit(db, SINR_RANGE_DB.0, SINR_RANGE_DB.1)
}

pub fn normalize_tilt(deg: f64) -> f64 {
    to_unit(deg, MIN_TILT_DEG, MAX_TILT_DEG)
}

pub fn normalize_power(watts: f64) -> f64 {
    to_unit(watts, MIN_POWER_W, MAX_POWER_W)
}

/// Percentile `q` ∈ [0, 100] of `sorted` with linear interpolation between
/// order statistics.
pub fn percentile(sorted: &[f64], q: f64) -> Option<f64> {
    if sorted.is_empty() {
        return None;
    }
    let pos = (q / 100.0).clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    Some(sorted[lo] + frac * (sorted[hi] - sorted[lo]))
}

/// Normalized local state of one cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellObservation {
    pub position: [f64; 2],
    pub direction: [f64; 2],
    pub sinr_p10: f64,
    pub sinr_p50: f64,
    pub sinr_p90: f64,
    pub tilt: f64,
    pub power: f64,
}

impl CellObservation {
    pub fn to_array(&self) -> [f64; OBSERVATION_DIM] {
        [
            self.position[0],
            self.position[1],
            self.direction[0],
            self.direction[1],
            self.sinr_p10,
            self.sinr_p50,
            self.sinr_p90,
            self.tilt,
            self.power,
        ]
    }
}

/// Observations of every agent. In split mode each cell contributes a tilt
/// agent (tag `[1, 0]`) followed by a power agent (tag `[0, 1]`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointState {
    pub cells: Vec<CellObservation>,
    pub split: bool,
}

impl JointState {
    pub fn observe(deployment: &Deployment, users: &UserPopulation, sinr: &SinrReport, empty_cell_db: f64) -> Self {
        let n = deployment.n_cells();
        let mut per_cell: Vec<Vec<f64>> = vec![Vec::new(); n];
        for (&v, &c) in sinr.per_user_db.iter().zip(&users.attachment) {
            per_cell[c].push(v);
        }
        let half = deployment.half_extent();
        let cells = deployment
            .cells
            .iter()
            .zip(per_cell.iter_mut())
            .map(|(cell, values)| {
                values.sort_by(f64::total_cmp);
                let pct = |q| normalize_sinr(percentile(values, q).unwrap_or(empty_cell_db));
                let (dx, dy) = cell.direction();
                CellObservation {
                    position: [cell.site_position.x / half, cell.site_position.y / half],
                    direction: [dx, dy],
                    sinr_p10: pct(10.0),
                    sinr_p50: pct(50.0),
                    sinr_p90: pct(90.0),
                    tilt: normalize_tilt(cell.tilt()),
                    power: normalize_power(cell.max_power()),
                }
            })
            .collect();
        Self { cells, split: false }
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn n_agents(&self) -> usize {
        if self.split {
            2 * self.cells.len()
        } else {
            self.cells.len()
        }
    }

    pub fn feature_dim(&self) -> usize {
        if self.split {
            SPLIT_OBSERVATION_DIM
        } else {
            OBSERVATION_DIM
        }
    }

    /// Agent-major feature matrix.
    pub fn features(&self) -> Tensor {
        let d = self.feature_dim();
        let mut data = Vec::with_capacity(self.n_agents() * d);
        for c in &self.cells {
            if self.split {
                data.extend_from_slice(&c.to_array());
                data.extend_from_slice(&[1.0, 0.0]);
                data.extend_from_slice(&c.to_array());
                data.extend_from_slice(&[0.0, 1.0]);
            } else {
                data.extend_from_slice(&c.to_array());
            }
        }
        Tensor::matrix(self.n_agents(), d, data).expect("sized")
    }

    pub fn to_sample(&self, neighbors: Arc<Vec<Vec<usize>>>) -> GraphSample {
        GraphSample::new(self.features(), neighbors)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalisation_maps_ranges() {
        assert_eq!(normalize_sinr(-10.0), -1.0);
        assert_eq!(normalize_sinr(30.0), 1.0);
        assert_eq!(normalize_sinr(10.0), 0.0);
        assert_eq!(normalize_sinr(55.0), 1.0);
        assert_eq!(normalize_tilt(0.0), -1.0);
        assert_eq!(normalize_tilt(15.0), 1.0);
        assert_eq!(normalize_power(10.0), -1.0);
        assert_eq!(normalize_power(60.0), 1.0);
        assert!((normalize_power(40.0) - 0.2).abs() < 1e-15);
    }

    #[test]
    fn percentile_interpolates() {
        let v = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(percentile(&v, 50.0), Some(3.0));
        assert!((percentile(&v, 10.0).unwrap() - 1.4).abs() < 1e-12);
        assert_eq!(percentile(&[7.0], 90.0), Some(7.0));
        assert_eq!(percentile(&[], 90.0), None);
    }
}
