use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::observation::JointState;
use super::Scenario;
use crate::error::{Error, Result};
use crate::radio::{Deployment, LinkBudget};

/// Constants of the interference-coupling edge rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GraphConfig {
    /// Strongest couplers each cell links to.
    pub k: usize,
    /// Maximum intersite distance of an edge, as a multiple of the ISD.
    pub max_distance_isd: f64,
}

impl Default for GraphConfig {
    fn default() -> Self {
        Self {
            k: 6,
            max_distance_isd: 2.0,
        }
    }
}

/// Undirected agent graph. Neighbour lists are ordered by decreasing
/// interference coupling as seen from the owning node.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkGraph {
    neighbors: Arc<Vec<Vec<usize>>>,
}

impl NetworkGraph {
    /// Builds a graph from neighbour lists; the lists are symmetrised and
    /// self-loops dropped, preserving the given order.
    pub fn from_neighbors(lists: Vec<Vec<usize>>) -> Result<Self> {
        let n = lists.len();
        let mut out: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (i, nbrs) in lists.iter().enumerate() {
            for &j in nbrs {
                if j >= n {
                    return Err(Error::invalid(format!("neighbor {j} out of range for {n} nodes")));
                }
                if j != i && !out[i].contains(&j) {
                    out[i].push(j);
                }
            }
        }
        for i in 0..n {
            for k in 0..out[i].len() {
                let j = out[i][k];
                if !out[j].contains(&i) {
                    out[j].push(i);
                }
            }
        }
        Ok(Self {
            neighbors: Arc::new(out),
        })
    }

    pub fn empty(n: usize) -> Self {
        Self {
            neighbors: Arc::new(vec![Vec::new(); n]),
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.neighbors.len()
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    pub fn neighbor_lists(&self) -> Arc<Vec<Vec<usize>>> {
        Arc::clone(&self.neighbors)
    }

    pub fn degree(&self, i: usize) -> usize {
        self.neighbors[i].len()
    }

    pub fn n_edges(&self) -> usize {
        self.neighbors.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn is_adjacent(&self, i: usize, j: usize) -> bool {
        self.neighbors[i].contains(&j)
    }

    /// Dense boolean adjacency matrix.
    pub fn adjacency(&self) -> Vec<Vec<bool>> {
        let n = self.n_nodes();
        let mut a = vec![vec![false; n]; n];
        for (i, nbrs) in self.neighbors.iter().enumerate() {
            for &j in nbrs {
                a[i][j] = true;
            }
        }
        a
    }
}

/// Links each cell to its `k` strongest interference couplers whose site lies
/// within `max_distance_isd × ISD`, then symmetrises by union.
pub fn build_neighbor_graph(
    deployment: &Deployment,
    link: &LinkBudget,
    attachment: &[usize],
    config: &GraphConfig,
) -> NetworkGraph {
    let n = deployment.n_cells();
    let d_max = config.max_distance_isd * deployment.intersite_distance;
    let mut scores = vec![vec![f64::NEG_INFINITY; n]; n];
    let mut served = vec![false; n];
    for &c in attachment {
        served[c] = true;
    }
    // one pass over users accumulates every coupling row
    let mut sums = vec![0.0; n * n];
    let mut counts = vec![0usize; n];
    for (u, &c) in attachment.iter().enumerate() {
        counts[c] += 1;
        let own = link.rsrp(c, u);
        for j in 0..n {
            sums[c * n + j] += link.rsrp(j, u) - own;
        }
    }
    for i in 0..n {
        if !served[i] {
            continue;
        }
        for j in 0..n {
            scores[i][j] = sums[i * n + j] / counts[i] as f64;
        }
    }
    let mut chosen: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        if !served[i] {
            continue;
        }
        let mut candidates: Vec<usize> = (0..n)
            .filter(|&j| j != i && deployment.cell_site_distance(i, j) <= d_max)
            .collect();
        candidates.sort_by(|&a, &b| scores[i][b].total_cmp(&scores[i][a]).then(a.cmp(&b)));
        candidates.truncate(config.k);
        chosen[i] = candidates;
    }
    // union, then order each list by the owner's coupling
    let mut lists: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for &j in &chosen[i] {
            if !lists[i].contains(&j) {
                lists[i].push(j);
            }
            if !lists[j].contains(&i) {
                lists[j].push(i);
            }
        }
    }
    for (i, l) in lists.iter_mut().enumerate() {
        l.sort_by(|&a, &b| scores[i][b].total_cmp(&scores[i][a]).then(a.cmp(&b)));
    }
    NetworkGraph {
        neighbors: Arc::new(lists),
    }
}

/// Doubles the agent set: cell c becomes a tilt node 2c and a power node
/// 2c+1, joined to each other and to both nodes of every neighbour of c.
pub fn split_agents_per_parameter(
    state: &JointState,
    graph: &NetworkGraph,
    scenario: Scenario,
) -> Result<(JointState, NetworkGraph)> {
    if scenario != Scenario::Joint {
        return Err(Error::state("per-parameter agents only exist in the joint scenario"));
    }
    if state.split {
        return Err(Error::state("state is already split"));
    }
    if state.n_cells() != graph.n_nodes() {
        return Err(Error::invalid(format!(
            "state has {} cells, graph {} nodes",
            state.n_cells(),
            graph.n_nodes()
        )));
    }
    let n = graph.n_nodes();
    let mut lists = vec![Vec::new(); 2 * n];
    for c in 0..n {
        for own in [2 * c, 2 * c + 1] {
            let l: &mut Vec<usize> = &mut lists[own];
            l.push(own ^ 1);
            for &j in graph.neighbors(c) {
                l.push(2 * j);
                l.push(2 * j + 1);
            }
        }
    }
    let split_state = JointState {
        cells: state.cells.clone(),
        split: true,
    };
    Ok((
        split_state,
        NetworkGraph {
            neighbors: Arc::new(lists),
        },
    ))
}
