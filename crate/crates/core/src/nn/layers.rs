//! Single-layer forward passes over plain tensors.

use std::rc::Rc;

use serde::{Deserialize, Serialize};

use super::tape::{NodeId, Tape};
use super::params::ParameterSet;
use super::tensor::Tensor;
use crate::error::{Error, Result};

/// Slope of the leaky ReLU applied to attention scores.
pub const ATTENTION_SLOPE: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Relu,
    Identity,
}

impl Activation {
    pub(crate) fn apply(self, tape: &mut Tape, x: NodeId) -> NodeId {
        match self {
            Activation::Relu => tape.relu(x),
            Activation::Identity => x,
        }
    }
}

fn neighbor_lists(adjacency: &[Vec<usize>], n: usize) -> Result<Rc<Vec<Vec<usize>>>> {
    if adjacency.len() != n {
        return Err(Error::invalid(format!(
            "adjacency has {} nodes, features have {n}",
            adjacency.len()
        )));
    }
    Ok(Rc::new(adjacency.to_vec()))
}

fn scratch(values: &[(&str, &Tensor)]) -> ParameterSet {
    let mut p = ParameterSet::new();
    for (name, t) in values {
        p.insert(*name, (*t).clone());
    }
    p
}

/// `σ(x·W + b)` row-wise.
pub fn dense_forward(x: &Tensor, w: &Tensor, b: &Tensor, activation: Activation) -> Result<Tensor> {
    let params = scratch(&[("w", w), ("b", b)]);
    let mut tape = Tape::new();
    let xi = tape.input(x.clone());
    let wi = tape.param(&params, "w")?;
    let bi = tape.param(&params, "b")?;
    let h = tape.matmul(xi, wi)?;
    let h = tape.add_bias(h, bi)?;
    let out = activation.apply(&mut tape, h);
    Ok(tape.value(out).clone())
}

/// `h_i = σ(W1ᵀ x_i + W2ᵀ Σ_{j∈N(i)} x_j + b)` with an unnormalised neighbour sum.
pub fn gcn_forward(
    x: &Tensor,
    adjacency: &[Vec<usize>],
    w_self: &Tensor,
    w_neigh: &Tensor,
    b: &Tensor,
    activation: Activation,
) -> Result<Tensor> {
    let graph = neighbor_lists(adjacency, x.rows())?;
    let params = scratch(&[("w_self", w_self), ("w_neigh", w_neigh), ("b", b)]);
    let mut tape = Tape::new();
    let xi = tape.input(x.clone());
    let ws = tape.param(&params, "w_self")?;
    let wn = tape.param(&params, "w_neigh")?;
    let bi = tape.param(&params, "b")?;
    let own = tape.matmul(xi, ws)?;
    let agg = tape.neighbor_sum(xi, graph, false)?;
    let nb = tape.matmul(agg, wn)?;
    let h = tape.add(own, nb)?;
    let h = tape.add_bias(h, bi)?;
    let out = activation.apply(&mut tape, h);
    Ok(tape.value(out).clone())
}

/// Output of a standalone attention layer.
#[derive(Debug, Clone)]
pub struct GatOutput {
    /// n × (heads · features), heads concatenated.
    pub features: Tensor,
    /// `attention[i][h]`: weights over node i's closed neighbourhood, self first.
    pub attention: Vec<Vec<Vec<f64>>>,
}

/// Multi-head graph attention: project with `w`, attend over each closed
/// neighbourhood, concatenate heads, add `b`, apply `activation`.
pub fn gat_forward(
    x: &Tensor,
    adjacency: &[Vec<usize>],
    w: &Tensor,
    att_src: &Tensor,
    att_dst: &Tensor,
    b: &Tensor,
    n_heads: usize,
    activation: Activation,
) -> Result<GatOutput> {
    let graph = neighbor_lists(adjacency, x.rows())?;
    let params = scratch(&[("w", w), ("att_src", att_src), ("att_dst", att_dst), ("b", b)]);
    let mut tape = Tape::new();
    let xi = tape.input(x.clone());
    let wi = tape.param(&params, "w")?;
    let si = tape.param(&params, "att_src")?;
    let di = tape.param(&params, "att_dst")?;
    let bi = tape.param(&params, "b")?;
    let z = tape.matmul(xi, wi)?;
    let att = tape.attention(z, si, di, graph, n_heads, ATTENTION_SLOPE)?;
    let h = tape.add_bias(att, bi)?;
    let out = activation.apply(&mut tape, h);
    Ok(GatOutput {
        features: tape.value(out).clone(),
        attention: tape.attention_weights(att).expect("attention node"),
    })
}
