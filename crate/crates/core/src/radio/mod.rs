//! Radio environment: site layouts, antenna patterns, path loss, received
//! power, user attachment, and downlink SINR.
//!
//! Everything here is a pure function of a [`Deployment`], user positions, and
//! a [`RadioConfig`]. Powers are carried in dBm and milliwatts side by side so
//! that SINR sums run in the linear domain.

mod antenna;
mod deployment;
mod link;
mod scenario;

pub use antenna::{antenna_gain, AntennaConfig, AntennaPattern, MAX_POWER_W, MAX_TILT_DEG, MIN_POWER_W, MIN_TILT_DEG};
pub use deployment::{
    generate_hexagonal_deployment, generate_random_deployment, place_users_uniform, Deployment,
    Point, SECTORS_PER_SITE,
};
pub use link::{
    attach_users, dbm_to_mw, global_sinr, local_sinr, mw_to_dbm, path_loss, rsrp_dbm,
    tx_power_per_re_dbm, user_sinr, LinkBudget, SinrReport, UserPopulation,
};
pub use scenario::{CellRecord, ScenarioFile};

use serde::{Deserialize, Serialize};

/// Constants of the radio model. Defaults describe a 2 GHz, 20 MHz LTE macro layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RadioConfig {
    pub pattern: AntennaPattern,
    /// Antenna height above ground (m).
    pub antenna_height: f64,
    /// User equipment height above ground (m).
    pub ue_height: f64,
    /// Resource blocks the maximum power is spread over.
    pub n_rb: u32,
    /// UE noise figure (dB).
    pub noise_figure_db: f64,
    /// Bandwidth of one resource element (Hz).
    pub re_bandwidth_hz: f64,
    /// Distances below this are clamped before evaluating path loss (m).
    pub min_distance: f64,
    /// Log-normal shadowing standard deviation (dB); 0 disables it.
    pub shadowing_std_db: f64,
    /// SINR floor (dB) reported for a cell that serves no user.
    pub empty_cell_sinr_db: f64,
}

impl Default for RadioConfig {
    fn default() -> Self {
        Self {
            pattern: AntennaPattern::default(),
            antenna_height: 30.0,
            ue_height: 1.5,
            n_rb: 100,
            noise_figure_db: 9.0,
            re_bandwidth_hz: 15_000.0,
            min_distance: 35.0,
            shadowing_std_db: 0.0,
            empty_cell_sinr_db: -10.0,
        }
    }
}

impl RadioConfig {
    /// Thermal noise over one resource element, in dBm.
    pub fn noise_dbm(&self) -> f64 {
        -174.0 + 10.0 * self.re_bandwidth_hz.log10() + self.noise_figure_db
    }

    pub fn noise_mw(&self) -> f64 {
        dbm_to_mw(self.noise_dbm())
    }
}
