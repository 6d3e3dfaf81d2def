//! Reverse-mode differentiation over a recorded sequence of matrix operations.

use std::rc::Rc;

use super::params::ParameterSet;
use super::tensor::{matmul, Tensor};
use crate::error::{Error, Result};

/// Handle to a value recorded on a [`Tape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NodeId(usize);

/// Neighbour lists shared between the ops of one forward pass.
pub type Neighbors = Rc<Vec<Vec<usize>>>;

#[derive(Debug)]
enum Op {
    Input,
    Param(String),
    MatMul(NodeId, NodeId),
    AddBias(NodeId, NodeId),
    Add(NodeId, NodeId),
    Relu(NodeId),
    NeighborSum {
        x: NodeId,
        graph: Neighbors,
        mean: bool,
    },
    Attention(Box<AttentionOp>),
    SelectRows(NodeId, Vec<usize>),
    GatherSum {
        q: NodeId,
        actions: Vec<usize>,
        segments: Vec<usize>,
    },
    WeightedMse {
        pred: NodeId,
        target: Vec<f64>,
        weight: Vec<f64>,
    },
}

#[derive(Debug)]
struct AttentionOp {
    z: NodeId,
    att_src: NodeId,
    att_dst: NodeId,
    heads: usize,
    slope: f64,
    /// Closed neighbourhood of each node, self first.
    hood_offsets: Vec<usize>,
    hood: Vec<usize>,
    /// Pre-activation scores and softmax weights, laid out `[edge][head]`.
    pre: Vec<f64>,
    alpha: Vec<f64>,
}

#[derive(Debug)]
struct Node {
    value: Tensor,
    op: Op,
}

/// Records a forward computation so gradients can be propagated back to
/// the parameters it read.
#[derive(Debug, Default)]
pub struct Tape {
    nodes: Vec<Node>,
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn push(&mut self, value: Tensor, op: Op) -> NodeId {
        self.nodes.push(Node { value, op });
        NodeId(self.nodes.len() - 1)
    }

    pub fn value(&self, id: NodeId) -> &Tensor {
        &self.nodes[id.0].value
    }

    pub fn input(&mut self, value: Tensor) -> NodeId {
        self.push(value, Op::Input)
    }

    pub fn param(&mut self, params: &ParameterSet, name: &str) -> Result<NodeId> {
        let v = params.get(name)?.clone();
        Ok(self.push(v, Op::Param(name.to_string())))
    }

    pub fn matmul(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let (av, bv) = (self.value(a), self.value(b));
        let (n, k, m) = (av.rows(), av.cols(), bv.cols());
        if bv.rows() != k {
            return Err(Error::invalid(format!(
                "matmul {}x{} by {}x{}",
                n,
                k,
                bv.rows(),
                m
            )));
        }
        let out = matmul(av.data(), bv.data(), n, k, m);
        let t = Tensor::matrix(n, m, out)?;
        Ok(self.push(t, Op::MatMul(a, b)))
    }

    pub fn add_bias(&mut self, x: NodeId, b: NodeId) -> Result<NodeId> {
        let (xv, bv) = (self.value(x), self.value(b));
        let m = xv.cols();
        if bv.len() != m {
            return Err(Error::invalid(format!("bias of {} for {} columns", bv.len(), m)));
        }
        let mut out = xv.data().to_vec();
        for row in out.chunks_mut(m.max(1)) {
            for (o, &bb) in row.iter_mut().zip(bv.data()) {
                *o += bb;
            }
        }
        let t = Tensor::matrix(xv.rows(), m, out)?;
        Ok(self.push(t, Op::AddBias(x, b)))
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let (av, bv) = (self.value(a), self.value(b));
        if av.shape() != bv.shape() {
            return Err(Error::invalid(format!("add {:?} and {:?}", av.shape(), bv.shape())));
        }
        let out = av.data().iter().zip(bv.data()).map(|(x, y)| x + y).collect();
        let t = Tensor::new(av.shape().to_vec(), out)?;
        Ok(self.push(t, Op::Add(a, b)))
    }

    pub fn relu(&mut self, x: NodeId) -> NodeId {
        let xv = self.value(x);
        let out = xv.data().iter().map(|&v| v.max(0.0)).collect();
        let t = Tensor::new(xv.shape().to_vec(), out).expect("same shape");
        self.push(t, Op::Relu(x))
    }

    /// Row i of the result is the sum (or mean, when `mean`) of the rows of
    /// `x` listed in `graph[i]`.
    pub fn neighbor_sum(&mut self, x: NodeId, graph: Neighbors, mean: bool) -> Result<NodeId> {
        let xv = self.value(x);
        let (n, d) = (xv.rows(), xv.cols());
        if graph.len() != n {
            return Err(Error::invalid(format!("graph has {} nodes, features {}", graph.len(), n)));
        }
        let mut out = vec![0.0; n * d];
        for (i, nbrs) in graph.iter().enumerate() {
            let row = &mut out[i * d..(i + 1) * d];
            for &j in nbrs {
                if j >= n {
                    return Err(Error::invalid(format!("neighbor {j} out of range")));
                }
                for (o, &v) in row.iter_mut().zip(xv.row(j)) {
                    *o += v;
                }
            }
            if mean && !nbrs.is_empty() {
                let s = 1.0 / nbrs.len() as f64;
                row.iter_mut().for_each(|o| *o *= s);
            }
        }
        let t = Tensor::matrix(n, d, out)?;
        Ok(self.push(t, Op::NeighborSum { x, graph, mean }))
    }

    /// Multi-head attention aggregation over closed neighbourhoods.
    ///
    /// `z` holds projected features (n × heads·f); `att_src`/`att_dst` are
    /// heads × f score vectors. For node i and head h, neighbour j ∈ {i} ∪ N(i)
    /// scores `leaky_relu(att_dst_h·z_i + att_src_h·z_j)`, the scores are
    /// softmax-normalised over the neighbourhood, and the output is the
    /// weighted sum of `z_j`.
    pub fn attention(
        &mut self,
        z: NodeId,
        att_src: NodeId,
        att_dst: NodeId,
        graph: Neighbors,
        heads: usize,
        slope: f64,
    ) -> Result<NodeId> {
        let zv = self.value(z);
        let (n, width) = (zv.rows(), zv.cols());
        if heads == 0 || width % heads != 0 {
            return Err(Error::invalid(format!("{width} features do not split into {heads} heads")));
        }
        let f = width / heads;
        let (sv, dv) = (self.value(att_src), self.value(att_dst));
        if sv.len() != width || dv.len() != width {
            return Err(Error::invalid("attention vectors must be heads × features"));
        }
        if graph.len() != n {
            return Err(Error::invalid(format!("graph has {} nodes, features {}", graph.len(), n)));
        }
        // per-node source/destination scores
        let mut s_src = vec![0.0; n * heads];
        let mut s_dst = vec![0.0; n * heads];
        for i in 0..n {
            let zi = zv.row(i);
            for h in 0..heads {
                let zs = &zi[h * f..(h + 1) * f];
                s_src[i * heads + h] = dot(zs, &sv.data()[h * f..(h + 1) * f]);
                s_dst[i * heads + h] = dot(zs, &dv.data()[h * f..(h + 1) * f]);
            }
        }
        let mut hood_offsets = Vec::with_capacity(n + 1);
        let mut hood = Vec::new();
        hood_offsets.push(0);
        for (i, nbrs) in graph.iter().enumerate() {
            hood.push(i);
            for &j in nbrs {
                if j >= n {
                    return Err(Error::invalid(format!("neighbor {j} out of range")));
                }
                if j != i {
                    hood.push(j);
                }
            }
            hood_offsets.push(hood.len());
        }
        let mut pre = vec![0.0; hood.len() * heads];
        let mut alpha = vec![0.0; hood.len() * heads];
        let mut out = vec![0.0; n * width];
        for i in 0..n {
            let (lo, hi) = (hood_offsets[i], hood_offsets[i + 1]);
            for h in 0..heads {
                let mut max = f64::NEG_INFINITY;
                for e in lo..hi {
                    let raw = s_dst[i * heads + h] + s_src[hood[e] * heads + h];
                    let v = if raw > 0.0 { raw } else { slope * raw };
                    pre[e * heads + h] = raw;
                    alpha[e * heads + h] = v;
                    max = max.max(v);
                }
                let mut total = 0.0;
                for e in lo..hi {
                    let w = (alpha[e * heads + h] - max).exp();
                    alpha[e * heads + h] = w;
                    total += w;
                }
                for e in lo..hi {
                    alpha[e * heads + h] /= total;
                    let a = alpha[e * heads + h];
                    let zj = &zv.row(hood[e])[h * f..(h + 1) * f];
                    let o = &mut out[i * width + h * f..i * width + (h + 1) * f];
                    for (ov, &zz) in o.iter_mut().zip(zj) {
                        *ov += a * zz;
                    }
                }
            }
        }
        let t = Tensor::matrix(n, width, out)?;
        Ok(self.push(
            t,
            Op::Attention(Box::new(AttentionOp {
                z,
                att_src,
                att_dst,
                heads,
                slope,
                hood_offsets,
                hood,
                pre,
                alpha,
            })),
        ))
    }

    /// Attention weights recorded by an [`Tape::attention`] node:
    /// `result[i][h]` lists the weights of node i's closed neighbourhood (self
    /// first, then its neighbours in graph order) for head h.
    pub fn attention_weights(&self, id: NodeId) -> Option<Vec<Vec<Vec<f64>>>> {
        let Op::Attention(op) = &self.nodes[id.0].op else {
            return None;
        };
        let n = op.hood_offsets.len() - 1;
        Some(
            (0..n)
                .map(|i| {
                    (0..op.heads)
                        .map(|h| {
                            (op.hood_offsets[i]..op.hood_offsets[i + 1])
                                .map(|e| op.alpha[e * op.heads + h])
                                .collect()
                        })
                        .collect()
                })
                .collect(),
        )
    }

    pub fn select_rows(&mut self, x: NodeId, rows: Vec<usize>) -> Result<NodeId> {
        let xv = self.value(x);
        if let Some(&r) = rows.iter().find(|&&r| r >= xv.rows()) {
            return Err(Error::invalid(format!("row {r} out of range")));
        }
        let t = xv.select_rows(&rows);
        Ok(self.push(t, Op::SelectRows(x, rows)))
    }

    /// Picks `q[r, actions[r]]` for every row and sums consecutive runs of rows:
    /// output k is the sum over rows `segments[k]..segments[k+1]`.
    pub fn gather_sum(&mut self, q: NodeId, actions: Vec<usize>, segments: Vec<usize>) -> Result<NodeId> {
        let qv = self.value(q);
        let (n, a) = (qv.rows(), qv.cols());
        if actions.len() != n {
            return Err(Error::invalid(format!("{} actions for {} agent rows", actions.len(), n)));
        }
        if segments.first() != Some(&0) || segments.last() != Some(&n) || segments.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::invalid("segments must run from 0 to the row count"));
        }
        if let Some(&bad) = actions.iter().find(|&&x| x >= a) {
            return Err(Error::invalid(format!("action {bad} outside {a} actions")));
        }
        let out = segments
            .windows(2)
            .map(|w| (w[0]..w[1]).map(|r| qv.get(r, actions[r])).sum())
            .collect::<Vec<f64>>();
        let t = Tensor::matrix(out.len(), 1, out)?;
        Ok(self.push(t, Op::GatherSum { q, actions, segments }))
    }

    /// Σ_k weight_k (pred_k − target_k)² / B.
    pub fn weighted_mse(&mut self, pred: NodeId, target: Vec<f64>, weight: Vec<f64>) -> Result<NodeId> {
        let pv = self.value(pred);
        let b = pv.len();
        if target.len() != b || weight.len() != b || b == 0 {
            return Err(Error::invalid(format!(
                "loss over {b} predictions, {} targets, {} weights",
                target.len(),
                weight.len()
            )));
        }
        let loss = pv
            .data()
            .iter()
            .zip(&target)
            .zip(&weight)
            .map(|((p, t), w)| w * (p - t) * (p - t))
            .sum::<f64>()
            / b as f64;
        let t = Tensor::matrix(1, 1, vec![loss])?;
        Ok(self.push(t, Op::WeightedMse { pred, target, weight }))
    }

    /// Back-propagates d`loss`/d· and adds the parameter gradients into `params`.
    pub fn backward(&self, loss: NodeId, params: &mut ParameterSet) -> Result<()> {
        if self.nodes.is_empty() || loss.0 >= self.nodes.len() {
            return Err(Error::state("backward called before any forward pass"));
        }
        if self.value(loss).len() != 1 {
            return Err(Error::invalid("backward needs a scalar loss"));
        }
        let mut grads: Vec<Option<Vec<f64>>> = (0..=loss.0).map(|_| None).collect();
        grads[loss.0] = Some(vec![1.0]);
        for idx in (0..=loss.0).rev() {
            let Some(g) = grads[idx].take() else { continue };
            let node = &self.nodes[idx];
            match &node.op {
                Op::Input => {}
                Op::Param(name) => {
                    let acc = params.grad_mut(name)?;
                    for (a, v) in acc.data_mut().iter_mut().zip(&g) {
                        *a += v;
                    }
                }
                Op::MatMul(a, b) => {
                    let (av, bv) = (self.value(*a), self.value(*b));
                    let (n, k, m) = (av.rows(), av.cols(), bv.cols());
                    // dA = G·Bᵀ
                    let mut da = vec![0.0; n * k];
                    for i in 0..n {
                        let gi = &g[i * m..(i + 1) * m];
                        for p in 0..k {
                            da[i * k + p] = dot(gi, bv.row(p));
                        }
                    }
                    // dB = Aᵀ·G
                    let mut db = vec![0.0; k * m];
                    for i in 0..n {
                        let gi = &g[i * m..(i + 1) * m];
                        for p in 0..k {
                            let aip = av.data()[i * k + p];
                            if aip == 0.0 {
                                continue;
                            }
                            for (d, &gv) in db[p * m..(p + 1) * m].iter_mut().zip(gi) {
                                *d += aip * gv;
                            }
                        }
                    }
                    accumulate(&mut grads, *a, da);
                    accumulate(&mut grads, *b, db);
                }
                Op::AddBias(x, b) => {
                    let m = self.value(*b).len();
                    let mut db = vec![0.0; m];
                    for row in g.chunks(m.max(1)) {
                        for (d, &v) in db.iter_mut().zip(row) {
                            *d += v;
                        }
                    }
                    accumulate(&mut grads, *x, g);
                    accumulate(&mut grads, *b, db);
                }
                Op::Add(a, b) => {
                    accumulate(&mut grads, *a, g.clone());
                    accumulate(&mut grads, *b, g);
                }
                Op::Relu(x) => {
                    let gx = g
                        .iter()
                        .zip(node.value.data())
                        .map(|(&gv, &out)| if out > 0.0 { gv } else { 0.0 })
                        .collect();
                    accumulate(&mut grads, *x, gx);
                }
                Op::NeighborSum { x, graph, mean } => {
                    let d = node.value.cols();
                    let mut gx = vec![0.0; self.value(*x).len()];
                    for (i, nbrs) in graph.iter().enumerate() {
                        let s = if *mean && !nbrs.is_empty() {
                            1.0 / nbrs.len() as f64
                        } else {
                            1.0
                        };
                        let gi = &g[i * d..(i + 1) * d];
                        for &j in nbrs {
                            for (o, &v) in gx[j * d..(j + 1) * d].iter_mut().zip(gi) {
                                *o += s * v;
                            }
                        }
                    }
                    accumulate(&mut grads, *x, gx);
                }
                Op::Attention(op) => self.attention_backward(op, &g, &mut grads),
                Op::SelectRows(x, rows) => {
                    let xv = self.value(*x);
                    let c = xv.cols();
                    let mut gx = vec![0.0; xv.len()];
                    for (k, &r) in rows.iter().enumerate() {
                        for (o, &v) in gx[r * c..(r + 1) * c].iter_mut().zip(&g[k * c..(k + 1) * c]) {
                            *o += v;
                        }
                    }
                    accumulate(&mut grads, *x, gx);
                }
                Op::GatherSum { q, actions, segments } => {
                    let qv = self.value(*q);
                    let a = qv.cols();
                    let mut gq = vec![0.0; qv.len()];
                    for (k, w) in segments.windows(2).enumerate() {
                        for r in w[0]..w[1] {
                            gq[r * a + actions[r]] += g[k];
                        }
                    }
                    accumulate(&mut grads, *q, gq);
                }
                Op::WeightedMse { pred, target, weight } => {
                    let pv = self.value(*pred);
                    let scale = 2.0 * g[0] / pv.len() as f64;
                    let gp = pv
                        .data()
                        .iter()
                        .zip(target)
                        .zip(weight)
                        .map(|((p, t), w)| scale * w * (p - t))
                        .collect();
                    accumulate(&mut grads, *pred, gp);
                }
            }
        }
        Ok(())
    }

    fn attention_backward(&self, op: &AttentionOp, g: &[f64], grads: &mut [Option<Vec<f64>>]) {
        let zv = self.value(op.z);
        let (sv, dv) = (self.value(op.att_src), self.value(op.att_dst));
        let (n, width) = (zv.rows(), zv.cols());
        let heads = op.heads;
        let f = width / heads;
        let mut gz = vec![0.0; n * width];
        let mut g_src = vec![0.0; n * heads];
        let mut g_dst = vec![0.0; n * heads];
        let mut d_alpha = Vec::new();
        for i in 0..n {
            let (lo, hi) = (op.hood_offsets[i], op.hood_offsets[i + 1]);
            for h in 0..heads {
                let gi = &g[i * width + h * f..i * width + (h + 1) * f];
                d_alpha.clear();
                let mut weighted = 0.0;
                for e in lo..hi {
                    let j = op.hood[e];
                    let a = op.alpha[e * heads + h];
                    let zj = &zv.row(j)[h * f..(h + 1) * f];
                    let da = dot(gi, zj);
                    d_alpha.push(da);
                    weighted += a * da;
                    for (o, &v) in gz[j * width + h * f..j * width + (h + 1) * f].iter_mut().zip(gi) {
                        *o += a * v;
                    }
                }
                for (k, e) in (lo..hi).enumerate() {
                    let a = op.alpha[e * heads + h];
                    let de = a * (d_alpha[k] - weighted);
                    let dpre = if op.pre[e * heads + h] > 0.0 { de } else { op.slope * de };
                    g_dst[i * heads + h] += dpre;
                    g_src[op.hood[e] * heads + h] += dpre;
                }
            }
        }
        let mut gs = vec![0.0; width];
        let mut gd = vec![0.0; width];
        for i in 0..n {
            for h in 0..heads {
                let (cs, cd) = (g_src[i * heads + h], g_dst[i * heads + h]);
                let lo = h * f;
                for k in 0..f {
                    let zik = zv.row(i)[lo + k];
                    gs[lo + k] += cs * zik;
                    gd[lo + k] += cd * zik;
                    gz[i * width + lo + k] += cs * sv.data()[lo + k] + cd * dv.data()[lo + k];
                }
            }
        }
        accumulate(grads, op.z, gz);
        accumulate(grads, op.att_src, gs);
        accumulate(grads, op.att_dst, gd);
    }
}

fn accumulate(grads: &mut [Option<Vec<f64>>], id: NodeId, g: Vec<f64>) {
    match &mut grads[id.0] {
        Some(existing) => {
            for (e, v) in existing.iter_mut().zip(g) {
                *e += v;
            }
        }
        slot @ None => *slot = Some(g),
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
