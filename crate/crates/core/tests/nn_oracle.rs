mod common;

use std::sync::Arc;

use common::{max_abs_diff, permute_graph, permute_rows, random_graph, random_matrix, random_permutation, random_sample, rng};
use gqn_core::agent::{td_loss_and_gradients, Experience};
use gqn_core::nn::{gat_forward, gcn_forward, Activation, ArchitectureSpec, GraphSample, QNetwork, Tensor, ATTENTION_SLOPE};
use rand::Rng;

fn matmul(x: &[Vec<f64>], w: &Tensor) -> Vec<Vec<f64>> {
    x.iter()
        .map(|row| {
            (0..w.cols())
                .map(|c| row.iter().enumerate().map(|(k, v)| v * w.get(k, c)).sum())
                .collect()
        })
        .collect()
}

fn rows(t: &Tensor) -> Vec<Vec<f64>> {
    (0..t.rows()).map(|r| t.row(r).to_vec()).collect()
}

fn flat(m: &[Vec<f64>]) -> Vec<f64> {
    m.iter().flatten().copied().collect()
}

fn naive_gcn(x: &Tensor, graph: &[Vec<usize>], ws: &Tensor, wn: &Tensor, b: &Tensor) -> Vec<Vec<f64>> {
    let xr = rows(x);
    let agg: Vec<Vec<f64>> = graph
        .iter()
        .map(|nbrs| {
            let mut s = vec![0.0; x.cols()];
            for &j in nbrs {
                for (o, v) in s.iter_mut().zip(&xr[j]) {
                    *o += v;
                }
            }
            s
        })
        .collect();
    let own = matmul(&xr, ws);
    let nb = matmul(&agg, wn);
    own.iter()
        .zip(&nb)
        .map(|(a, c)| (0..a.len()).map(|k| (a[k] + c[k] + b.get(0, k)).max(0.0)).collect())
        .collect()
}

fn naive_gat(x: &Tensor, graph: &[Vec<usize>], w: &Tensor, src: &Tensor, dst: &Tensor, heads: usize) -> Vec<Vec<f64>> {
    let z = matmul(&rows(x), w);
    let f = w.cols() / heads;
    let dot = |a: &[f64], h: usize, t: &Tensor| (0..f).map(|k| a[h * f + k] * t.get(h, k)).sum::<f64>();
    (0..z.len())
        .map(|i| {
            let hood: Vec<usize> = std::iter::once(i).chain(graph[i].iter().copied()).collect();
            let mut out = vec![0.0; w.cols()];
            for h in 0..heads {
                let e: Vec<f64> = hood
                    .iter()
                    .map(|&j| {
                        let raw = dot(&z[i], h, dst) + dot(&z[j], h, src);
                        if raw > 0.0 { raw } else { ATTENTION_SLOPE * raw }
                    })
                    .collect();
                let m = e.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let total: f64 = e.iter().map(|v| (v - m).exp()).sum();
                for (&j, v) in hood.iter().zip(&e) {
                    let a = (v - m).exp() / total;
                    for k in 0..f {
                        out[h * f + k] += a * z[j][h * f + k];
                    }
                }
            }
            out
        })
        .collect()
}

#[test]
fn gcn_layer_matches_dense_arithmetic() {
    let mut r = rng(10);
    for _ in 0..20 {
        let n = r.random_range(1..12);
        let graph = random_graph(n, 0.4, &mut r);
        let x = random_matrix(n, 5, &mut r);
        let (ws, wn, b) = (random_matrix(5, 4, &mut r), random_matrix(5, 4, &mut r), random_matrix(1, 4, &mut r));
        let got = gcn_forward(&x, &graph, &ws, &wn, &b, Activation::Relu).unwrap();
        assert!(max_abs_diff(got.data(), &flat(&naive_gcn(&x, &graph, &ws, &wn, &b))) < 1e-12);
    }
}

#[test]
fn gat_layer_matches_softmax_arithmetic() {
    let mut r = rng(11);
    for _ in 0..20 {
        let n = r.random_range(1..10);
        let graph = random_graph(n, 0.5, &mut r);
        let x = random_matrix(n, 4, &mut r);
        let (w, src, dst) = (random_matrix(4, 6, &mut r), random_matrix(3, 2, &mut r), random_matrix(3, 2, &mut r));
        let b = Tensor::zeros(&[1, 6]);
        let got = gat_forward(&x, &graph, &w, &src, &dst, &b, 3, Activation::Identity).unwrap();
        assert!(max_abs_diff(got.features.data(), &flat(&naive_gat(&x, &graph, &w, &src, &dst, 3))) < 1e-12);
        for node in &got.attention {
            for head in node {
                assert!((head.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn layers_commute_with_node_relabelling() {
    let mut r = rng(12);
    for _ in 0..20 {
        let n = r.random_range(2..15);
        let graph = random_graph(n, 0.35, &mut r);
        let x = random_matrix(n, 6, &mut r);
        let perm = random_permutation(n, &mut r);
        let (px, pg) = (permute_rows(&x, &perm), permute_graph(&graph, &perm));

        let (ws, wn, b) = (random_matrix(6, 5, &mut r), random_matrix(6, 5, &mut r), random_matrix(1, 5, &mut r));
        let a = gcn_forward(&x, &graph, &ws, &wn, &b, Activation::Relu).unwrap();
        let c = gcn_forward(&px, &pg, &ws, &wn, &b, Activation::Relu).unwrap();
        assert!(max_abs_diff(permute_rows(&a, &perm).data(), c.data()) < 1e-10);

        let (w, src, dst) = (random_matrix(6, 8, &mut r), random_matrix(2, 4, &mut r), random_matrix(2, 4, &mut r));
        let b = random_matrix(1, 8, &mut r);
        let a = gat_forward(&x, &graph, &w, &src, &dst, &b, 2, Activation::Relu).unwrap();
        let c = gat_forward(&px, &pg, &w, &src, &dst, &b, 2, Activation::Relu).unwrap();
        assert!(max_abs_diff(permute_rows(&a.features, &perm).data(), c.features.data()) < 1e-10);
    }
}

#[test]
fn q_networks_are_permutation_equivariant() {
    let mut r = rng(13);
    let nets = [
        QNetwork::new(ArchitectureSpec::gqn(9, 3), 1),
        QNetwork::new(ArchitectureSpec::gqn(9, 3).with_mean_aggregation(), 2),
        QNetwork::new(ArchitectureSpec::gqn_gat(9, 3), 3),
        QNetwork::new(ArchitectureSpec::gaq(9, 3), 4),
    ];
    for _ in 0..20 {
        let n = r.random_range(2..20);
        let s = random_sample(n, 9, 0.3, &mut r);
        let perm = random_permutation(n, &mut r);
        let ps = GraphSample::new(permute_rows(&s.features, &perm), Arc::new(permute_graph(&s.neighbors, &perm)));
        for net in &nets {
            let q = net.q_values(&s).unwrap();
            let pq = net.q_values(&ps).unwrap();
            assert!(max_abs_diff(permute_rows(&q, &perm).data(), pq.data()) < 1e-10, "{}", net.spec.name);
        }
    }
}

#[test]
fn parameter_count_is_independent_of_network_size() {
    let net = QNetwork::new(ArchitectureSpec::gqn(9, 3), 0);
    let mut r = rng(14);
    let before = net.n_parameters();
    for n in [7 * 3, 19 * 3, 37 * 3] {
        let q = net.q_values(&random_sample(n, 9, 0.1, &mut r)).unwrap();
        assert_eq!(q.shape(), &[n, 3]);
    }
    assert_eq!(net.n_parameters(), before);
}

fn batch_loss(net: &mut QNetwork, batch: &[Experience], weights: &[f64]) -> f64 {
    let refs: Vec<&Experience> = batch.iter().collect();
    let targets: Vec<f64> = batch.iter().map(|e| e.reward).collect();
    td_loss_and_gradients(&refs, &targets, weights, net).unwrap().loss
}

fn central_difference(net: &mut QNetwork, batch: &[Experience], weights: &[f64], name: &str, k: usize, h: f64) -> f64 {
    let orig = net.params.get(name).unwrap().data()[k];
    net.params.get_mut(name).unwrap().data_mut()[k] = orig + h;
    let up = batch_loss(net, batch, weights);
    net.params.get_mut(name).unwrap().data_mut()[k] = orig - h;
    let down = batch_loss(net, batch, weights);
    net.params.get_mut(name).unwrap().data_mut()[k] = orig;
    (up - down) / (2.0 * h)
}

fn check_gradients(spec: ArchitectureSpec, seed: u64) {
    let mut r = rng(seed);
    let mut net = QNetwork::new(spec.clone(), seed);
    let n_actions = spec.n_actions;
    let batch: Vec<Experience> = (0..3)
        .map(|_| {
            let n = r.random_range(2..7);
            let s = random_sample(n, spec.input_dim, 0.5, &mut r);
            Experience {
                actions: (0..n).map(|_| r.random_range(0..n_actions)).collect(),
                reward: r.random_range(-1.0..1.0),
                next_state: s.clone(),
                state: s,
            }
        })
        .collect();
    let weights: Vec<f64> = (0..batch.len()).map(|_| r.random_range(0.2..1.0)).collect();
    batch_loss(&mut net, &batch, &weights);
    let analytic = net.params.clone();
    let names: Vec<String> = net.params.names().map(str::to_owned).collect();
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    let mut kinks = 0;
    for name in names {
        let len = net.params.get(&name).unwrap().len();
        for _ in 0..6 {
            let k = r.random_range(0..len);
            let fd = central_difference(&mut net, &batch, &weights, &name, k, h);
            // a ReLU or leaky-ReLU kink inside the stencil shows up as disagreement between step sizes
            if (fd - central_difference(&mut net, &batch, &weights, &name, k, h / 4.0)).abs() > 1e-6 * fd.abs().max(1e-3) {
                kinks += 1;
                continue;
            }
            let g = analytic.grad(&name).unwrap().data()[k];
            let rel = (fd - g).abs() / fd.abs().max(g.abs()).max(1e-3);
            worst = worst.max(rel);
            assert!(rel < 1e-4, "{} {name}[{k}]: analytic {g}, numeric {fd}", spec.name);
        }
    }
    assert!(worst.is_finite());
    assert!(kinks <= 2, "{kinks} non-smooth probes");
}

#[test]
fn loss_gradients_match_central_differences() {
    for seed in 0..20 {
        let spec = match seed % 4 {
            0 => ArchitectureSpec::gqn(9, 3),
            1 => ArchitectureSpec::gqn(11, 9).with_mean_aggregation(),
            2 => ArchitectureSpec::gqn_gat(9, 3),
            _ => ArchitectureSpec::gaq(9, 9),
        };
        check_gradients(spec, 100 + seed);
    }
    check_gradients(ArchitectureSpec::dqn(9, 3), 200);
}
