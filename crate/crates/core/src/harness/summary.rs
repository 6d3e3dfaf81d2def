use std::path::Path;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::metrics::MetricsRow;
use crate::error::{Error, Result};

/// Mean with a two-sided Student-t confidence half-width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub mean: f64,
    /// NaN when fewer than two values are available.
    pub half_width: f64,
    pub n: usize,
}

impl Interval {
    pub fn lower(&self) -> f64 {
        self.mean - self.half_width
    }

    pub fn upper(&self) -> f64 {
        self.mean + self.half_width
    }
}

pub fn confidence_interval(values: &[f64], level: f64) -> Result<Interval> {
    let n = values.len();
    if n == 0 {
        return Err(Error::invalid("confidence interval of an empty sample"));
    }
    if !(0.0 < level && level < 1.0) {
        return Err(Error::invalid(format!("confidence level {level} outside (0, 1)")));
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return Ok(Interval { mean, half_width: f64::NAN, n });
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let t = StudentsT::new(0.0, 1.0, (n - 1) as f64)
        .map_err(|e| Error::invalid(e.to_string()))?
        .inverse_cdf(0.5 + level / 2.0);
    Ok(Interval {
        mean,
        half_width: t * (var / n as f64).sqrt(),
        n,
    })
}

pub fn ci95(values: &[f64]) -> Result<Interval> {
    confidence_interval(values, 0.95)
}

/// Headline numbers of one run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub seed: usize,
    pub episodes: usize,
    pub first_sinr_db: f64,
    pub last_sinr_db: f64,
    pub last_power_w: f64,
}

/// Window used for the first/last averages.
pub const SUMMARY_WINDOW: usize = 10;

impl RunSummary {
    /// First/last averages over up to [`SUMMARY_WINDOW`] episodes.
    pub fn from_rows(seed: usize, rows: &[MetricsRow]) -> Option<Self> {
        if rows.is_empty() {
            return None;
        }
        let w = SUMMARY_WINDOW.min(rows.len());
        let mean = |rs: &[MetricsRow], f: fn(&MetricsRow) -> f64| rs.iter().map(f).sum::<f64>() / rs.len() as f64;
        let tail = &rows[rows.len() - w..];
        Some(Self {
            seed,
            episodes: rows.len(),
            first_sinr_db: mean(&rows[..w], |r| r.global_sinr_db),
            last_sinr_db: mean(tail, |r| r.global_sinr_db),
            last_power_w: mean(tail, |r| r.mean_power_w),
        })
    }

    pub fn improvement_db(&self) -> f64 {
        self.last_sinr_db - self.first_sinr_db
    }
}

/// Per-episode mean and CI across runs; row `e` aggregates episode `e` of
/// every run that reached it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub episode: u64,
    pub step: u64,
    pub n_runs: usize,
    pub sinr_mean: f64,
    pub sinr_ci: f64,
    pub power_mean: f64,
    pub power_ci: f64,
    pub reward_mean: f64,
    pub reward_ci: f64,
}

pub fn aggregate_curves(runs: &[Vec<MetricsRow>]) -> Result<Vec<CurvePoint>> {
    let len = runs.iter().map(Vec::len).max().unwrap_or(0);
    let mut out = Vec::with_capacity(len);
    for e in 0..len {
        let rows: Vec<&MetricsRow> = runs.iter().filter_map(|r| r.get(e)).collect();
        let col = |f: fn(&MetricsRow) -> f64| ci95(&rows.iter().map(|r| f(r)).collect::<Vec<_>>());
        let sinr = col(|r| r.global_sinr_db)?;
        let power = col(|r| r.mean_power_w)?;
        let reward = col(|r| r.reward_mean)?;
        out.push(CurvePoint {
            episode: rows[0].episode,
            step: rows[0].step,
            n_runs: rows.len(),
            sinr_mean: sinr.mean,
            sinr_ci: sinr.half_width,
            power_mean: power.mean,
            power_ci: power.half_width,
            reward_mean: reward.mean,
            reward_ci: reward.half_width,
        });
    }
    Ok(out)
}

pub fn write_curves(path: &Path, curve: &[CurvePoint]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for p in curve {
        w.serialize(p)?;
    }
    w.flush()?;
    Ok(())
}
