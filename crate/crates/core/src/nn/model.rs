use std::rc::Rc;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::layers::{Activation, ATTENTION_SLOPE};
use super::params::{glorot_init_with, ParameterSet};
use super::tape::{NodeId, Tape};
use super::tensor::Tensor;
use crate::error::{Error, Result};

/// One hidden layer of a Q-network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LayerSpec {
    /// Per-node fully connected layer.
    Dense { units: usize },
    /// Self transform plus transformed neighbour sum (mean when `mean`).
    Gcn {
        units: usize,
        #[serde(default)]
        mean: bool,
    },
    /// Multi-head attention with `units` features per head, heads concatenated.
    Gat { units: usize, heads: usize },
}

impl LayerSpec {
    fn output_dim(&self) -> usize {
        match *self {
            LayerSpec::Dense { units } | LayerSpec::Gcn { units, .. } => units,
            LayerSpec::Gat { units, heads } => units * heads,
        }
    }
}

/// Architecture descriptor; stored in checkpoints so a model can be rebuilt.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArchitectureSpec {
    pub name: String,
    pub input_dim: usize,
    pub layers: Vec<LayerSpec>,
    pub n_actions: usize,
    pub activation: Activation,
}

impl ArchitectureSpec {
    /// Encoder FC(32), GCN(32) ×2, decoder FC(32) ×2, linear action head.
    pub fn gqn(input_dim: usize, n_actions: usize) -> Self {
        Self {
            name: "gqn".into(),
            input_dim,
            layers: vec![
                LayerSpec::Dense { units: 32 },
                LayerSpec::Gcn { units: 32, mean: false },
                LayerSpec::Gcn { units: 32, mean: false },
                LayerSpec::Dense { units: 32 },
                LayerSpec::Dense { units: 32 },
            ],
            n_actions,
            activation: Activation::Relu,
        }
    }

    /// Encoder FC(32), GAT(32, 4 heads) ×2, decoder FC(32) ×2, linear action head.
    pub fn gqn_gat(input_dim: usize, n_actions: usize) -> Self {
        Self {
            name: "gqn_gat".into(),
            input_dim,
            layers: vec![
                LayerSpec::Dense { units: 32 },
                LayerSpec::Gat { units: 32, heads: 4 },
                LayerSpec::Gat { units: 32, heads: 4 },
                LayerSpec::Dense { units: 32 },
                LayerSpec::Dense { units: 32 },
            ],
            n_actions,
            activation: Activation::Relu,
        }
    }

    /// FC(64), FC(32), linear action head.
    pub fn dqn(input_dim: usize, n_actions: usize) -> Self {
        Self {
            name: "dqn".into(),
            input_dim,
            layers: vec![LayerSpec::Dense { units: 64 }, LayerSpec::Dense { units: 32 }],
            n_actions,
            activation: Activation::Relu,
        }
    }

    /// GAT(32, 6 heads) ×2, FC(32) ×2, linear action head.
    pub fn gaq(input_dim: usize, n_actions: usize) -> Self {
        Self {
            name: "gaq".into(),
            input_dim,
            layers: vec![
                LayerSpec::Gat { units: 32, heads: 6 },
                LayerSpec::Gat { units: 32, heads: 6 },
                LayerSpec::Dense { units: 32 },
                LayerSpec::Dense { units: 32 },
            ],
            n_actions,
            activation: Activation::Relu,
        }
    }

    /// Same network with every GCN layer averaging instead of summing its
    /// neighbours.
    pub fn with_mean_aggregation(mut self) -> Self {
        for layer in &mut self.layers {
            if let LayerSpec::Gcn { mean, .. } = layer {
                *mean = true;
            }
        }
        self
    }

    /// Shapes of every parameter, in construction order.
    pub fn parameter_shapes(&self) -> Vec<(String, Vec<usize>)> {
        let mut out = Vec::new();
        let mut d = self.input_dim;
        for (k, layer) in self.layers.iter().enumerate() {
            let h = layer.output_dim();
            match *layer {
                LayerSpec::Dense { .. } => {
                    out.push((format!("l{k}.w"), vec![d, h]));
                }
                LayerSpec::Gcn { .. } => {
                    out.push((format!("l{k}.w_self"), vec![d, h]));
                    out.push((format!("l{k}.w_neigh"), vec![d, h]));
                }
                LayerSpec::Gat { units, heads } => {
                    out.push((format!("l{k}.w"), vec![d, h]));
                    out.push((format!("l{k}.att_src"), vec![heads, units]));
                    out.push((format!("l{k}.att_dst"), vec![heads, units]));
                }
            }
            out.push((format!("l{k}.b"), vec![1, h]));
            d = h;
        }
        out.push(("head.w".into(), vec![d, self.n_actions]));
        out.push(("head.b".into(), vec![1, self.n_actions]));
        out
    }
}

/// Node features of one graph plus which rows are acting agents.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphSample {
    pub features: Tensor,
    pub neighbors: Arc<Vec<Vec<usize>>>,
    /// `None`: every row is an agent. `Some(r)`: only row `r` acts (ego networks).
    pub center: Option<usize>,
}

impl GraphSample {
    pub fn new(features: Tensor, neighbors: Arc<Vec<Vec<usize>>>) -> Self {
        Self {
            features,
            neighbors,
            center: None,
        }
    }

    /// A graph whose only acting row is `center`.
    pub fn ego(features: Tensor, neighbors: Arc<Vec<Vec<usize>>>, center: usize) -> Self {
        Self {
            features,
            neighbors,
            center: Some(center),
        }
    }

    /// Isolated rows, all acting.
    pub fn rows(features: Tensor) -> Self {
        let n = features.rows();
        Self::new(features, Arc::new(vec![Vec::new(); n]))
    }

    pub fn n_nodes(&self) -> usize {
        self.features.rows()
    }

    pub fn n_agents(&self) -> usize {
        if self.center.is_some() {
            1
        } else {
            self.n_nodes()
        }
    }
}

/// Several samples merged into one block-diagonal graph.
#[derive(Debug, Clone)]
pub struct GraphBatch {
    pub features: Tensor,
    pub neighbors: Rc<Vec<Vec<usize>>>,
    /// Agent rows of the merged graph, when not every row acts.
    pub agent_rows: Option<Vec<usize>>,
    /// Sample k owns agent rows `segments[k]..segments[k+1]` of the output.
    pub segments: Vec<usize>,
}

impl GraphBatch {
    pub fn from_samples(samples: &[&GraphSample]) -> Result<Self> {
        let d = samples.first().map_or(0, |s| s.features.cols());
        let total: usize = samples.iter().map(|s| s.n_nodes()).sum();
        let mut data = Vec::with_capacity(total * d);
        let mut neighbors = Vec::with_capacity(total);
        let mut agent_rows = Vec::new();
        let any_center = samples.iter().any(|s| s.center.is_some());
        let mut segments = Vec::with_capacity(samples.len() + 1);
        segments.push(0);
        let mut offset = 0;
        let mut agents = 0;
        for s in samples {
            if s.features.cols() != d {
                return Err(Error::invalid("samples disagree on feature width"));
            }
            if s.neighbors.len() != s.n_nodes() {
                return Err(Error::invalid(format!(
                    "graph has {} nodes but state has {}",
                    s.neighbors.len(),
                    s.n_nodes()
                )));
            }
            data.extend_from_slice(s.features.data());
            for nbrs in s.neighbors.iter() {
                neighbors.push(nbrs.iter().map(|&j| j + offset).collect());
            }
            match s.center {
                Some(c) => agent_rows.push(offset + c),
                None if any_center => agent_rows.extend(offset..offset + s.n_nodes()),
                None => {}
            }
            offset += s.n_nodes();
            agents += s.n_agents();
            segments.push(agents);
        }
        Ok(Self {
            features: Tensor::matrix(total, d, data)?,
            neighbors: Rc::new(neighbors),
            agent_rows: any_center.then_some(agent_rows),
            segments,
        })
    }
}

/// A per-node Q-network: shared weights applied to every node of any graph,
/// producing one Q-value per action for every agent row.
#[derive(Debug, Clone, PartialEq)]
pub struct QNetwork {
    pub spec: ArchitectureSpec,
    pub params: ParameterSet,
}

impl QNetwork {
    pub fn new(spec: ArchitectureSpec, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut params = ParameterSet::new();
        for (name, shape) in spec.parameter_shapes() {
            let t = if name.ends_with(".b") {
                Tensor::zeros(&shape)
            } else {
                glorot_init_with(&shape, &mut rng)
            };
            params.insert(name, t);
        }
        Self { spec, params }
    }

    /// Rebuilds a network from a descriptor and stored parameters.
    pub fn from_parts(spec: ArchitectureSpec, params: ParameterSet) -> Result<Self> {
        let expected = spec.parameter_shapes();
        if expected.len() != params.len() {
            return Err(Error::CheckpointIncompatible(format!(
                "architecture needs {} tensors, checkpoint has {}",
                expected.len(),
                params.len()
            )));
        }
        for (name, shape) in &expected {
            let t = params
                .get(name)
                .map_err(|_| Error::CheckpointIncompatible(format!("missing tensor {name}")))?;
            if t.shape() != shape.as_slice() {
                return Err(Error::CheckpointIncompatible(format!(
                    "{name} has shape {:?}, expected {shape:?}",
                    t.shape()
                )));
            }
        }
        Ok(Self { spec, params })
    }

    pub fn n_parameters(&self) -> usize {
        self.params.n_scalars()
    }

    /// Records the forward pass on `tape`; returns the agent-row Q matrix.
    pub fn forward(&self, tape: &mut Tape, batch: &GraphBatch) -> Result<NodeId> {
        if batch.features.cols() != self.spec.input_dim {
            return Err(Error::invalid(format!(
                "observations have {} features, network expects {}",
                batch.features.cols(),
                self.spec.input_dim
            )));
        }
        batch.features.ensure_finite("network input")?;
        let mut x = tape.input(batch.features.clone());
        let act = self.spec.activation;
        for (k, layer) in self.spec.layers.iter().enumerate() {
            let p = |s: &str| format!("l{k}.{s}");
            let pre = match *layer {
                LayerSpec::Dense { .. } => {
                    let w = tape.param(&self.params, &p("w"))?;
                    tape.matmul(x, w)?
                }
                LayerSpec::Gcn { mean, .. } => {
                    let ws = tape.param(&self.params, &p("w_self"))?;
                    let wn = tape.param(&self.params, &p("w_neigh"))?;
                    let own = tape.matmul(x, ws)?;
                    let agg = tape.neighbor_sum(x, batch.neighbors.clone(), mean)?;
                    let nb = tape.matmul(agg, wn)?;
                    tape.add(own, nb)?
                }
                LayerSpec::Gat { heads, .. } => {
                    let w = tape.param(&self.params, &p("w"))?;
                    let s = tape.param(&self.params, &p("att_src"))?;
                    let d = tape.param(&self.params, &p("att_dst"))?;
                    let z = tape.matmul(x, w)?;
                    tape.attention(z, s, d, batch.neighbors.clone(), heads, ATTENTION_SLOPE)?
                }
            };
            let b = tape.param(&self.params, &p("b"))?;
            let h = tape.add_bias(pre, b)?;
            x = act.apply(tape, h);
            tape.value(x).ensure_finite(&format!("layer {k} ({})", self.spec.name))?;
        }
        if let Some(rows) = &batch.agent_rows {
            x = tape.select_rows(x, rows.clone())?;
        }
        let w = tape.param(&self.params, "head.w")?;
        let b = tape.param(&self.params, "head.b")?;
        let q = tape.matmul(x, w)?;
        let q = tape.add_bias(q, b)?;
        tape.value(q).ensure_finite(&format!("output ({})", self.spec.name))?;
        Ok(q)
    }

    /// Q-values (agents × actions) for one sample.
    pub fn q_values(&self, sample: &GraphSample) -> Result<Tensor> {
        self.q_values_batch(&[sample])
    }

    /// Q-values of several samples, agent rows stacked in sample order.
    pub fn q_values_batch(&self, samples: &[&GraphSample]) -> Result<Tensor> {
        let batch = GraphBatch::from_samples(samples)?;
        let mut tape = Tape::new();
        let q = self.forward(&mut tape, &batch)?;
        Ok(tape.value(q).clone())
    }
}
