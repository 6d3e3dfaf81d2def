use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::antenna::AntennaConfig;
use crate::error::{Error, Result};

pub const SECTORS_PER_SITE: usize = 3;
const SECTOR_AZIMUTHS: [f64; SECTORS_PER_SITE] = [0.0, 120.0, 240.0];
const MAX_PLACEMENT_TRIES: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Base-station sites and their three sector antennas. Cell `c` belongs to
/// site `c / 3`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Deployment {
    pub sites: Vec<Point>,
    pub cells: Vec<AntennaConfig>,
    pub intersite_distance: f64,
}

impl Deployment {
    /// Builds the three sectors of every site with the given tilt and power.
    pub fn from_sites(sites: Vec<Point>, intersite_distance: f64, height: f64, tilt: f64, power: f64) -> Self {
        let cells = sites
            .iter()
            .flat_map(|&p| {
                SECTOR_AZIMUTHS
                    .iter()
                    .map(move |&az| AntennaConfig::new(p, az, height, tilt, power))
            })
            .collect();
        Self {
            sites,
            cells,
            intersite_distance,
        }
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn site_of(&self, cell: usize) -> usize {
        cell / SECTORS_PER_SITE
    }

    /// Distance between the sites hosting two cells (0 for co-sited sectors).
    pub fn cell_site_distance(&self, a: usize, b: usize) -> f64 {
        self.sites[self.site_of(a)].distance(self.sites[self.site_of(b)])
    }

    /// Distance from `site` to the closest other site, if any.
    pub fn nearest_site_distance(&self, site: usize) -> Option<f64> {
        let p = self.sites[site];
        self.sites
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != site)
            .map(|(_, &q)| p.distance(q))
            .min_by(f64::total_cmp)
    }

    /// Half side of the square map that holds every site plus half an ISD of margin.
    pub fn half_extent(&self) -> f64 {
        let reach = self
            .sites
            .iter()
            .map(|p| p.x.abs().max(p.y.abs()))
            .fold(0.0, f64::max);
        reach + 0.5 * self.intersite_distance
    }
}

/// Sites on a hexagonal lattice of `n_sites` ∈ {1, 7, 19, 37} (0 to 3 rings).
pub fn generate_hexagonal_deployment(n_sites: usize, isd: f64) -> Result<Deployment> {
    let rings = match n_sites {
        1 => 0,
        7 => 1,
        19 => 2,
        37 => 3,
        _ => {
            return Err(Error::invalid(format!(
                "hexagonal layouts support 1, 7, 19 or 37 sites, got {n_sites}"
            )))
        }
    };
    if !(isd > 0.0 && isd.is_finite()) {
        return Err(Error::invalid(format!("intersite distance must be positive, got {isd}")));
    }
    Ok(Deployment::from_sites(hex_lattice(rings, isd), isd, 30.0, 0.0, 40.0))
}

/// Axial lattice points within `rings` hops of the origin, ring by ring.
fn hex_lattice(rings: i32, isd: f64) -> Vec<Point> {
    let mut cells: Vec<(i32, i32)> = Vec::new();
    for q in -rings..=rings {
        for r in (-rings).max(-q - rings)..=rings.min(-q + rings) {
            cells.push((q, r));
        }
    }
    let ring = |&(q, r): &(i32, i32)| (q.abs() + r.abs() + (q + r).abs()) / 2;
    let sqrt3 = 3f64.sqrt();
    let mut pts: Vec<(i32, f64, Point)> = cells
        .iter()
        .map(|c| {
            let (q, r) = (c.0 as f64, c.1 as f64);
            let p = Point::new(isd * (q + 0.5 * r), isd * sqrt3 / 2.0 * r);
            (ring(c), p.y.atan2(p.x), p)
        })
        .collect();
    pts.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
    pts.into_iter().map(|(_, _, p)| p).collect()
}

/// Sites uniform in a square of `area` m² centred at the origin, rejecting any
/// draw closer than `min_isd` to an accepted site.
pub fn generate_random_deployment(n_sites: usize, min_isd: f64, area: f64, rng_seed: u64) -> Result<Deployment> {
    if n_sites == 0 {
        return Err(Error::invalid("deployment needs at least one site"));
    }
    if !(area > 0.0 && min_isd >= 0.0) {
        return Err(Error::invalid("area must be positive and min_isd non-negative"));
    }
    let half = 0.5 * area.sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut sites: Vec<Point> = Vec::with_capacity(n_sites);
    for k in 0..n_sites {
        let mut placed = false;
        for _ in 0..MAX_PLACEMENT_TRIES {
            let p = Point::new(rng.random_range(-half..=half), rng.random_range(-half..=half));
            if sites.iter().all(|s| s.distance(p) >= min_isd) {
                sites.push(p);
                placed = true;
                break;
            }
        }
        if !placed {
            return Err(Error::CapacityExceeded(format!(
                "placed {k} of {n_sites} sites with spacing {min_isd} m in {area} m²"
            )));
        }
    }
    Ok(Deployment::from_sites(sites, min_isd, 30.0, 0.0, 40.0))
}

/// `n` user positions uniform in the square [-half_extent, half_extent]².
pub fn place_users_uniform<R: Rng + ?Sized>(n: usize, half_extent: f64, rng: &mut R) -> Vec<Point> {
    (0..n)
        .map(|_| {
            Point::new(
                rng.random_range(-half_extent..=half_extent),
                rng.random_range(-half_extent..=half_extent),
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_site_has_three_sectors() {
        let d = generate_hexagonal_deployment(1, 500.0).unwrap();
        assert_eq!(d.sites, vec![Point::new(0.0, 0.0)]);
        let az: Vec<f64> = d.cells.iter().map(|c| c.azimuth).collect();
        assert_eq!(az, vec![0.0, 120.0, 240.0]);
    }

    #[test]
    fn hex_19_nearest_neighbours_at_isd() {
        let d = generate_hexagonal_deployment(19, 1000.0).unwrap();
        assert_eq!(d.n_cells(), 57);
        for s in 0..d.sites.len() {
            let nn = d.nearest_site_distance(s).unwrap();
            assert!((nn - 1000.0).abs() < 1e-9, "site {s}: {nn}");
        }
    }

    #[test]
    fn hex_37_has_111_cells() {
        assert_eq!(generate_hexagonal_deployment(37, 600.0).unwrap().n_cells(), 111);
    }

    #[test]
    fn unsupported_hex_count_rejected() {
        assert!(matches!(
            generate_hexagonal_deployment(5, 500.0),
            Err(Error::InvalidArgument(_))
        ));
        assert!(generate_hexagonal_deployment(7, 0.0).is_err());
    }

    #[test]
    fn random_single_site() {
        let d = generate_random_deployment(1, 300.0, 1.0e6, 42).unwrap();
        assert_eq!(d.sites.len(), 1);
        assert_eq!(d.n_cells(), 3);
    }

    #[test]
    fn random_respects_spacing_and_seed() {
        let a = generate_random_deployment(19, 300.0, 1.0e8, 7).unwrap();
        for i in 0..a.sites.len() {
            for j in (i + 1)..a.sites.len() {
                assert!(a.sites[i].distance(a.sites[j]) >= 300.0);
            }
        }
        let b = generate_random_deployment(19, 300.0, 1.0e8, 7).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn random_overfull_area_fails() {
        let err = generate_random_deployment(50, 500.0, 1.0e6, 1).unwrap_err();
        assert!(matches!(err, Error::CapacityExceeded(_)));
    }
}
