//! Independent reference implementations used by the integration tests.
#![allow(dead_code)]

use gqn_core::nn::{GraphSample, Tensor};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// One sector, described only by plain numbers.
#[derive(Debug, Clone, Copy)]
pub struct Sector {
    pub x: f64,
    pub y: f64,
    pub azimuth_deg: f64,
    pub height: f64,
    pub tilt_deg: f64,
    pub power_w: f64,
}

/// Straight evaluation of the sector pattern, log-distance loss, per-RB
/// power split and full-load SINR. Returns per-user SINR in dB.
pub fn brute_force_sinr_db(sectors: &[Sector], users: &[(f64, f64)]) -> Vec<f64> {
    const G_MAX: f64 = 15.0;
    const PHI_3DB: f64 = 65.0;
    const THETA_3DB: f64 = 10.0;
    const A_M: f64 = 25.0;
    const SLA_V: f64 = 20.0;
    const UE_HEIGHT: f64 = 1.5;
    const N_RB: f64 = 100.0;
    let noise_mw = 10f64.powf((-174.0 + 10.0 * 15_000f64.log10() + 9.0) / 10.0);

    let received_mw = |s: &Sector, ux: f64, uy: f64| -> f64 {
        let dx = ux - s.x;
        let dy = uy - s.y;
        let d = (dx * dx + dy * dy).sqrt();
        let mut phi = dy.atan2(dx).to_degrees() - s.azimuth_deg;
        while phi > 180.0 {
            phi -= 360.0;
        }
        while phi <= -180.0 {
            phi += 360.0;
        }
        let theta = ((s.height - UE_HEIGHT) / d).atan().to_degrees();
        let a_h = -f64::min(12.0 * (phi / PHI_3DB).powi(2), A_M);
        let a_v = -f64::min(12.0 * ((theta - s.tilt_deg) / THETA_3DB).powi(2), SLA_V);
        let gain_db = G_MAX - f64::min(-(a_h + a_v), A_M);
        let loss_db = 128.1 + 37.6 * (d.max(35.0) / 1000.0).log10();
        let p_mw = s.power_w * 1000.0 / N_RB;
        p_mw * 10f64.powf(gain_db / 10.0) / 10f64.powf(loss_db / 10.0)
    };

    users
        .iter()
        .map(|&(ux, uy)| {
            let r: Vec<f64> = sectors.iter().map(|s| received_mw(s, ux, uy)).collect();
            let mut serving = 0;
            for c in 1..r.len() {
                if r[c] > r[serving] {
                    serving = c;
                }
            }
            let interference: f64 = (0..r.len()).filter(|&c| c != serving).map(|c| r[c]).sum();
            10.0 * (r[serving] / (interference + noise_mw)).log10()
        })
        .collect()
}

/// Every joint action of `n` agents with `k` actions each, in lexicographic order.
pub fn all_joint_actions(n: usize, k: usize) -> Vec<Vec<usize>> {
    let total = k.pow(n as u32);
    (0..total)
        .map(|mut code| {
            let mut a = vec![0; n];
            for slot in a.iter_mut().rev() {
                *slot = code % k;
                code /= k;
            }
            a
        })
        .collect()
}

/// Random symmetric neighbour lists without self loops.
pub fn random_graph<R: Rng>(n: usize, p: f64, rng: &mut R) -> Vec<Vec<usize>> {
    let mut lists = vec![Vec::new(); n];
    for i in 0..n {
        for j in i + 1..n {
            if rng.random::<f64>() < p {
                lists[i].push(j);
                lists[j].push(i);
            }
        }
    }
    lists
}

pub fn random_matrix<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> Tensor {
    Tensor::matrix(rows, cols, (0..rows * cols).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
}

pub fn random_sample<R: Rng>(n: usize, dim: usize, p: f64, rng: &mut R) -> GraphSample {
    let graph = random_graph(n, p, rng);
    GraphSample::new(random_matrix(n, dim, rng), Arc::new(graph))
}

/// Rows of `x` reordered so that new row `i` is old row `perm[i]`.
pub fn permute_rows(x: &Tensor, perm: &[usize]) -> Tensor {
    let rows: Vec<Vec<f64>> = perm.iter().map(|&p| x.row(p).to_vec()).collect();
    Tensor::from_rows(&rows).unwrap()
}

/// Neighbour lists relabelled under `perm` (new node `i` is old node `perm[i]`).
pub fn permute_graph(graph: &[Vec<usize>], perm: &[usize]) -> Vec<Vec<usize>> {
    let mut inverse = vec![0; perm.len()];
    for (new, &old) in perm.iter().enumerate() {
        inverse[old] = new;
    }
    perm.iter()
        .map(|&old| graph[old].iter().map(|&j| inverse[j]).collect())
        .collect()
}

pub fn random_permutation<R: Rng>(n: usize, rng: &mut R) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        p.swap(i, j);
    }
    p
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
