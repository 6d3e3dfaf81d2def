use serde::{Deserialize, Serialize};

use super::deployment::Point;

pub const MIN_TILT_DEG: f64 = 0.0;
pub const MAX_TILT_DEG: f64 = 15.0;
pub const MIN_POWER_W: f64 = 10.0;
pub const MAX_POWER_W: f64 = 60.0;

/// Parametric sector antenna pattern (horizontal and vertical parabolic cuts,
/// each clipped, combined and clipped again at the front-to-back ratio).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AntennaPattern {
    /// Boresight gain (dBi).
    pub max_gain_db: f64,
    /// Horizontal half-power beamwidth (deg).
    pub horizontal_beamwidth_deg: f64,
    /// Vertical half-power beamwidth (deg).
    pub vertical_beamwidth_deg: f64,
    /// Front-to-back attenuation limit (dB).
    pub max_attenuation_db: f64,
    /// Vertical side-lobe attenuation limit (dB).
    pub side_lobe_limit_db: f64,
}

impl Default for AntennaPattern {
    fn default() -> Self {
        Self {
            max_gain_db: 15.0,
            horizontal_beamwidth_deg: 65.0,
            vertical_beamwidth_deg: 10.0,
            max_attenuation_db: 25.0,
            side_lobe_limit_db: 20.0,
        }
    }
}

impl AntennaPattern {
    /// Horizontal attenuation (≤ 0 dB) for an angle off boresight in degrees.
    pub fn horizontal(&self, phi_deg: f64) -> f64 {
        let r = phi_deg / self.horizontal_beamwidth_deg;
        -(12.0 * r * r).min(self.max_attenuation_db)
    }

    /// Vertical attenuation (≤ 0 dB) for a downward elevation `theta_deg`
    /// seen by an antenna tilted down by `tilt_deg`.
    pub fn vertical(&self, theta_deg: f64, tilt_deg: f64) -> f64 {
        let r = (theta_deg - tilt_deg) / self.vertical_beamwidth_deg;
        -(12.0 * r * r).min(self.side_lobe_limit_db)
    }

    /// Combined gain from precomputed horizontal attenuation.
    pub fn combine(&self, horizontal_att: f64, vertical_att: f64) -> f64 {
        self.max_gain_db - (-(horizontal_att + vertical_att)).min(self.max_attenuation_db)
    }
}

/// One sector antenna. Tilt and power are kept inside their operating ranges
/// by the setters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AntennaConfig {
    pub site_position: Point,
    /// Boresight direction, degrees counter-clockwise from the +x axis, in [0, 360).
    pub azimuth: f64,
    pub height: f64,
    tilt: f64,
    max_power: f64,
}

impl AntennaConfig {
    pub fn new(site_position: Point, azimuth: f64, height: f64, tilt: f64, max_power: f64) -> Self {
        let mut cfg = Self {
            site_position,
            azimuth: azimuth.rem_euclid(360.0),
            height,
            tilt: 0.0,
            max_power: MIN_POWER_W,
        };
        cfg.set_tilt(tilt);
        cfg.set_max_power(max_power);
        cfg
    }

    pub fn tilt(&self) -> f64 {
        self.tilt
    }

    pub fn max_power(&self) -> f64 {
        self.max_power
    }

    pub fn set_tilt(&mut self, tilt: f64) {
        self.tilt = tilt.clamp(MIN_TILT_DEG, MAX_TILT_DEG);
    }

    pub fn set_max_power(&mut self, watts: f64) {
        self.max_power = watts.clamp(MIN_POWER_W, MAX_POWER_W);
    }

    /// Unit vector of the boresight direction.
    pub fn direction(&self) -> (f64, f64) {
        let az = self.azimuth.to_radians();
        (az.cos(), az.sin())
    }

    /// Horizontal angle from boresight to `p`, wrapped to (-180, 180].
    pub fn horizontal_offset_deg(&self, p: Point) -> f64 {
        let bearing = (p.y - self.site_position.y)
            .atan2(p.x - self.site_position.x)
            .to_degrees();
        wrap_deg(bearing - self.azimuth)
    }

    /// Downward elevation angle from the antenna to a receiver at `p` with height `ue_height`.
    pub fn elevation_deg(&self, p: Point, ue_height: f64) -> f64 {
        let d = self.site_position.distance(p);
        (self.height - ue_height).atan2(d).to_degrees()
    }
}

/// Wraps an angle in degrees to (-180, 180].
pub(crate) fn wrap_deg(a: f64) -> f64 {
    let w = (a + 180.0).rem_euclid(360.0) - 180.0;
    if w == -180.0 {
        180.0
    } else {
        w
    }
}

/// Antenna gain (dBi) towards a receiver at `user_pos`.
pub fn antenna_gain(
    config: &AntennaConfig,
    pattern: &AntennaPattern,
    user_pos: Point,
    ue_height: f64,
) -> f64 {
    let h = pattern.horizontal(config.horizontal_offset_deg(user_pos));
    let v = pattern.vertical(config.elevation_deg(user_pos, ue_height), config.tilt());
    pattern.combine(h, v)
}
