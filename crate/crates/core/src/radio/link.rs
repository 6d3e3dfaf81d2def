use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::deployment::{Deployment, Point};
use super::RadioConfig;

pub fn dbm_to_mw(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0)
}

pub fn mw_to_dbm(mw: f64) -> f64 {
    10.0 * mw.log10()
}

/// Urban-macro path loss at 2 GHz (dB). Distances are clamped at `min_distance`.
pub fn path_loss(distance: f64, min_distance: f64) -> f64 {
    128.1 + 37.6 * (distance.max(min_distance) / 1000.0).log10()
}

/// Transmit power per reference-signal resource element (dBm) for a cell whose
/// maximum power `watts` is spread over `n_rb` resource blocks.
pub fn tx_power_per_re_dbm(watts: f64, n_rb: u32) -> f64 {
    mw_to_dbm(watts * 1000.0 / n_rb as f64)
}

/// Received reference-signal power (dBm).
pub fn rsrp_dbm(watts: f64, n_rb: u32, gain_db: f64, path_loss_db: f64) -> f64 {
    tx_power_per_re_dbm(watts, n_rb) + gain_db - path_loss_db
}

/// User positions and their serving cells.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct UserPopulation {
    pub positions: Vec<Point>,
    pub attachment: Vec<usize>,
}

impl UserPopulation {
    pub fn new(positions: Vec<Point>) -> Self {
        Self {
            positions,
            attachment: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }
}

/// Cell × user matrices (row-major by cell) of path loss, antenna gain and RSRP.
///
/// Geometry-only terms (path loss, horizontal attenuation, elevation) are
/// computed once; [`LinkBudget::refresh`] re-evaluates gain and RSRP after a
/// tilt or power change without touching them.
#[derive(Debug, Clone)]
pub struct LinkBudget {
    n_cells: usize,
    n_users: usize,
    pub path_loss: Vec<f64>,
    pub gain: Vec<f64>,
    pub rsrp_dbm: Vec<f64>,
    pub rsrp_mw: Vec<f64>,
    horizontal_att: Vec<f64>,
    elevation: Vec<f64>,
}

impl LinkBudget {
    pub fn new(deployment: &Deployment, users: &[Point], config: &RadioConfig) -> Self {
        let n_cells = deployment.n_cells();
        let n_users = users.len();
        let size = n_cells * n_users;
        let mut path_loss_m = Vec::with_capacity(size);
        let mut horizontal_att = Vec::with_capacity(size);
        let mut elevation = Vec::with_capacity(size);
        for cell in &deployment.cells {
            for &u in users {
                let d = cell.site_position.distance(u);
                path_loss_m.push(path_loss(d, config.min_distance));
                horizontal_att.push(config.pattern.horizontal(cell.horizontal_offset_deg(u)));
                elevation.push(cell.elevation_deg(u, config.ue_height));
            }
        }
        let mut link = Self {
            n_cells,
            n_users,
            path_loss: path_loss_m,
            gain: vec![0.0; size],
            rsrp_dbm: vec![0.0; size],
            rsrp_mw: vec![0.0; size],
            horizontal_att,
            elevation,
        };
        link.refresh(deployment, config);
        link
    }

    /// Adds i.i.d. log-normal shadowing to every path-loss entry. No-op when
    /// `config.shadowing_std_db` is zero.
    pub fn apply_shadowing<R: Rng + ?Sized>(&mut self, deployment: &Deployment, config: &RadioConfig, rng: &mut R) {
        if config.shadowing_std_db <= 0.0 {
            return;
        }
        let normal = Normal::new(0.0, config.shadowing_std_db).expect("finite std");
        for pl in &mut self.path_loss {
            *pl += normal.sample(rng);
        }
        self.refresh(deployment, config);
    }

    /// Recomputes gains and RSRP from the current tilts and powers.
    pub fn refresh(&mut self, deployment: &Deployment, config: &RadioConfig) {
        assert_eq!(deployment.n_cells(), self.n_cells, "deployment changed shape");
        for (c, cell) in deployment.cells.iter().enumerate() {
            let tx = tx_power_per_re_dbm(cell.max_power(), config.n_rb);
            let row = c * self.n_users..(c + 1) * self.n_users;
            for k in row {
                let v = config.pattern.vertical(self.elevation[k], cell.tilt());
                let g = config.pattern.combine(self.horizontal_att[k], v);
                self.gain[k] = g;
                let r = tx + g - self.path_loss[k];
                self.rsrp_dbm[k] = r;
                self.rsrp_mw[k] = dbm_to_mw(r);
            }
        }
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn n_users(&self) -> usize {
        self.n_users
    }

    #[inline]
    pub fn index(&self, cell: usize, user: usize) -> usize {
        cell * self.n_users + user
    }

    pub fn rsrp(&self, cell: usize, user: usize) -> f64 {
        self.rsrp_dbm[self.index(cell, user)]
    }
}

/// Serving cell of every user: the cell with the largest RSRP, ties to the lowest index.
pub fn attach_users(link: &LinkBudget) -> Vec<usize> {
    (0..link.n_users())
        .map(|u| {
            let mut best = 0;
            let mut best_val = link.rsrp(0, u);
            for c in 1..link.n_cells() {
                let v = link.rsrp(c, u);
                if v > best_val {
                    best = c;
                    best_val = v;
                }
            }
            best
        })
        .collect()
}

/// SINR (dB) of `user` given its serving cell. Interference is full-load from
/// every other cell.
pub fn user_sinr(user: usize, link: &LinkBudget, users: &UserPopulation, noise_mw: f64) -> f64 {
    let serving = users.attachment[user];
    let mut interference = 0.0;
    for c in 0..link.n_cells() {
        if c != serving {
            interference += link.rsrp_mw[link.index(c, user)];
        }
    }
    mw_to_dbm(link.rsrp_mw[link.index(serving, user)] / (interference + noise_mw))
}

/// Mean of per-user SINR in dB.
pub fn global_sinr(per_user_db: &[f64]) -> f64 {
    if per_user_db.is_empty() {
        return f64::NAN;
    }
    per_user_db.iter().sum::<f64>() / per_user_db.len() as f64
}

/// Mean SINR (dB) of the users served by `cell`, or `empty_value` when it serves none.
pub fn local_sinr(cell: usize, per_user_db: &[f64], attachment: &[usize], empty_value: f64) -> f64 {
    let (sum, n) = per_user_db
        .iter()
        .zip(attachment)
        .filter(|&(_, &c)| c == cell)
        .fold((0.0, 0usize), |(s, n), (&v, _)| (s + v, n + 1));
    if n == 0 {
        empty_value
    } else {
        sum / n as f64
    }
}

/// Per-user, per-cell and network-wide SINR of one network state.
#[derive(Debug, Clone, PartialEq)]
pub struct SinrReport {
    pub per_user_db: Vec<f64>,
    /// Mean SINR per cell; the empty-cell floor for cells without users.
    pub per_cell_db: Vec<f64>,
    pub users_per_cell: Vec<usize>,
    pub global_db: f64,
}

impl SinrReport {
    pub fn compute(link: &LinkBudget, users: &UserPopulation, config: &RadioConfig) -> Self {
        let noise = config.noise_mw();
        let per_user_db: Vec<f64> = (0..users.len())
            .map(|u| user_sinr(u, link, users, noise))
            .collect();
        let mut sums = vec![0.0; link.n_cells()];
        let mut counts = vec![0usize; link.n_cells()];
        for (&v, &c) in per_user_db.iter().zip(&users.attachment) {
            sums[c] += v;
            counts[c] += 1;
        }
        let per_cell_db = sums
            .iter()
            .zip(&counts)
            .map(|(&s, &n)| if n == 0 { config.empty_cell_sinr_db } else { s / n as f64 })
            .collect();
        Self {
            global_db: global_sinr(&per_user_db),
            per_user_db,
            per_cell_db,
            users_per_cell: counts,
        }
    }

    /// SINR values (dB) of the users served by `cell`.
    pub fn cell_users_db<'a>(&'a self, cell: usize, attachment: &'a [usize]) -> impl Iterator<Item = f64> + 'a {
        self.per_user_db
            .iter()
            .zip(attachment)
            .filter(move |&(_, &c)| c == cell)
            .map(|(&v, _)| v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radio::{generate_hexagonal_deployment, generate_random_deployment, place_users_uniform};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn path_loss_reference_points() {
        assert!((path_loss(1000.0, 35.0) - 128.1).abs() < 1e-12);
        assert!((path_loss(100.0, 35.0) - 90.5).abs() < 1e-12);
        assert_eq!(path_loss(10.0, 35.0), path_loss(35.0, 35.0));
    }

    #[test]
    fn rsrp_reference_points() {
        let r = rsrp_dbm(40.0, 100, 0.0, 0.0);
        assert!((r - 10.0 * 400f64.log10()).abs() < 1e-12);
        assert!((r - 26.0206).abs() < 1e-4);
        assert!((rsrp_dbm(40.0, 100, 0.0, 128.1) - (-102.0794)).abs() < 1e-4);
        let doubled = rsrp_dbm(20.0, 100, 3.0, 90.0) + 10.0 * 2f64.log10();
        assert!((rsrp_dbm(40.0, 100, 3.0, 90.0) - doubled).abs() < 1e-12);
    }

    fn setup(seed: u64, n_users: usize) -> (Deployment, UserPopulation, LinkBudget, RadioConfig) {
        let cfg = RadioConfig::default();
        let mut dep = generate_random_deployment(2, 300.0, 2.0e6, seed).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for cell in &mut dep.cells {
            cell.set_tilt(rng.random_range(0.0..15.0));
        }
        let pos = place_users_uniform(n_users, dep.half_extent(), &mut rng);
        let link = LinkBudget::new(&dep, &pos, &cfg);
        let mut users = UserPopulation::new(pos);
        users.attachment = attach_users(&link);
        (dep, users, link, cfg)
    }

    #[test]
    fn attachment_is_optimal() {
        let (_, users, link, _) = setup(3, 200);
        for u in 0..users.len() {
            let best = link.rsrp(users.attachment[u], u);
            for c in 0..link.n_cells() {
                assert!(best >= link.rsrp(c, u));
            }
        }
    }

    #[test]
    fn single_cell_takes_all_users_and_sinr_is_snr() {
        let cfg = RadioConfig::default();
        let mut dep = generate_hexagonal_deployment(1, 500.0).unwrap();
        dep.cells.truncate(1);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let pos = place_users_uniform(20, 500.0, &mut rng);
        let link = LinkBudget::new(&dep, &pos, &cfg);
        let mut users = UserPopulation::new(pos);
        users.attachment = attach_users(&link);
        assert!(users.attachment.iter().all(|&c| c == 0));
        for u in 0..users.len() {
            let expected = link.rsrp(0, u) - cfg.noise_dbm();
            assert!((user_sinr(u, &link, &users, cfg.noise_mw()) - expected).abs() < 1e-9);
        }
    }

    #[test]
    fn tie_goes_to_lowest_cell() {
        let cfg = RadioConfig::default();
        // two co-located cells facing the same way
        let site = Point::new(0.0, 0.0);
        let mut dep = Deployment::from_sites(vec![site], 500.0, 30.0, 4.0, 40.0);
        dep.cells.truncate(1);
        dep.cells.push(dep.cells[0]);
        let pos = vec![Point::new(300.0, 0.0)];
        let link = LinkBudget::new(&dep, &pos, &cfg);
        assert_eq!(attach_users(&link), vec![0]);
        // equal received power and negligible noise: SINR close to 0 dB
        let users = UserPopulation { positions: pos, attachment: vec![0] };
        assert!(user_sinr(0, &link, &users, 0.0).abs() < 1e-12);
    }

    #[test]
    fn tilt_change_leaves_path_loss_untouched() {
        let (mut dep, _, mut link, cfg) = setup(5, 50);
        let before = link.path_loss.clone();
        let gain_before = link.gain.clone();
        for c in &mut dep.cells {
            let t = c.tilt();
            c.set_tilt(if t < 7.0 { t + 3.0 } else { t - 3.0 });
        }
        link.refresh(&dep, &cfg);
        assert_eq!(before, link.path_loss);
        assert_ne!(gain_before, link.gain);
    }

    #[test]
    fn power_scales_rsrp_linearly() {
        let (mut dep, _, link, cfg) = setup(9, 40);
        let p0 = dep.cells[1].max_power();
        dep.cells[1].set_max_power(p0 * 1.25);
        let scaled = LinkBudget::new(&dep, &setup(9, 40).1.positions, &cfg);
        for u in 0..link.n_users() {
            let k = link.index(1, u);
            assert!((scaled.rsrp_mw[k] / link.rsrp_mw[k] - 1.25).abs() < 1e-12);
            let k0 = link.index(0, u);
            assert_eq!(scaled.rsrp_mw[k0], link.rsrp_mw[k0]);
        }
    }

    #[test]
    fn local_and_global_means() {
        assert_eq!(global_sinr(&[10.0, 10.0]), 10.0);
        assert_eq!(global_sinr(&[10.0, 20.0, 30.0]), 20.0);
        assert_eq!(local_sinr(2, &[1.0, 2.0], &[0, 1], -10.0), -10.0);
        assert_eq!(local_sinr(1, &[1.0, 2.0, 4.0], &[0, 1, 1], -10.0), 3.0);
    }

    #[test]
    fn cell_means_recompose_global_mean() {
        let (_, users, link, cfg) = setup(11, 300);
        let rep = SinrReport::compute(&link, &users, &cfg);
        let weighted: f64 = rep
            .per_cell_db
            .iter()
            .zip(&rep.users_per_cell)
            .filter(|&(_, &n)| n > 0)
            .map(|(&v, &n)| v * n as f64)
            .sum();
        let total = users.len() as f64 * rep.global_db;
        assert!((weighted - total).abs() < 1e-9 * total.abs().max(1.0));
    }
}
