use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::antenna::AntennaConfig;
use super::deployment::{Deployment, Point};
use crate::error::{Error, Result};

/// One sector antenna as written to a scenario file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellRecord {
    pub site: usize,
    pub azimuth: f64,
    pub height: f64,
    pub tilt: f64,
    pub max_power: f64,
}

/// A replayable topology: sites, sectors and user positions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub isd: f64,
    pub sites: Vec<[f64; 2]>,
    pub cells: Vec<CellRecord>,
    #[serde(default)]
    pub users: Vec<[f64; 2]>,
}

impl ScenarioFile {
    pub fn from_layout(deployment: &Deployment, users: &[Point], seed: Option<u64>) -> Self {
        Self {
            seed,
            isd: deployment.intersite_distance,
            sites: deployment.sites.iter().map(|p| [p.x, p.y]).collect(),
            cells: deployment
                .cells
                .iter()
                .enumerate()
                .map(|(c, a)| CellRecord {
                    site: deployment.site_of(c),
                    azimuth: a.azimuth,
                    height: a.height,
                    tilt: a.tilt(),
                    max_power: a.max_power(),
                })
                .collect(),
            users: users.iter().map(|p| [p.x, p.y]).collect(),
        }
    }

    pub fn to_layout(&self) -> Result<(Deployment, Vec<Point>)> {
        let sites: Vec<Point> = self.sites.iter().map(|&[x, y]| Point::new(x, y)).collect();
        let mut cells = Vec::with_capacity(self.cells.len());
        for (c, rec) in self.cells.iter().enumerate() {
            if rec.site != c / 3 || rec.site >= sites.len() {
                return Err(Error::Config(format!(
                    "cell {c} must belong to site {} (found {})",
                    c / 3,
                    rec.site
                )));
            }
            cells.push(AntennaConfig::new(sites[rec.site], rec.azimuth, rec.height, rec.tilt, rec.max_power));
        }
        if cells.len() != 3 * sites.len() {
            return Err(Error::Config(format!(
                "{} sites need {} cells, found {}",
                sites.len(),
                3 * sites.len(),
                cells.len()
            )));
        }
        let users = self.users.iter().map(|&[x, y]| Point::new(x, y)).collect();
        Ok((
            Deployment {
                sites,
                cells,
                intersite_distance: self.isd,
            },
            users,
        ))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_toml()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&fs::read_to_string(path)?)
    }
}
