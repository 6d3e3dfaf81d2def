use rand::Rng;

use crate::error::{Error, Result};

/// Binary tree of partial sums over a fixed number of leaves.
#[derive(Debug, Clone)]
struct SumTree {
    leaves: usize,
    nodes: Vec<f64>,
}

impl SumTree {
    fn new(capacity: usize) -> Self {
        let leaves = capacity.next_power_of_two().max(1);
        Self {
            leaves,
            nodes: vec![0.0; 2 * leaves],
        }
    }

    fn set(&mut self, i: usize, value: f64) {
        let mut k = i + self.leaves;
        self.nodes[k] = value;
        while k > 1 {
            k /= 2;
            self.nodes[k] = self.nodes[2 * k] + self.nodes[2 * k + 1];
        }
    }

    fn get(&self, i: usize) -> f64 {
        self.nodes[i + self.leaves]
    }

    fn total(&self) -> f64 {
        self.nodes[1]
    }

    /// Leaf whose cumulative range contains `mass`.
    fn find(&self, mut mass: f64) -> usize {
        let mut k = 1;
        while k < self.leaves {
            let left = self.nodes[2 * k];
            if mass < left || self.nodes[2 * k + 1] <= 0.0 {
                k = 2 * k;
            } else {
                mass -= left;
                k = 2 * k + 1;
            }
        }
        k - self.leaves
    }
}

/// Indices drawn from the buffer with their importance-sampling weights.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledBatch {
    pub indices: Vec<usize>,
    pub weights: Vec<f64>,
}

/// Ring buffer sampled with probability ∝ priority^α. New entries get the
/// largest priority seen so far.
#[derive(Debug, Clone)]
pub struct PrioritizedReplay<T> {
    items: Vec<T>,
    capacity: usize,
    next: usize,
    tree: SumTree,
    alpha: f64,
    eps: f64,
    max_priority: f64,
}

impl<T> PrioritizedReplay<T> {
    pub fn new(capacity: usize, alpha: f64, eps: f64) -> Self {
        assert!(capacity > 0, "replay capacity must be positive");
        Self {
            items: Vec::with_capacity(capacity.min(1 << 16)),
            capacity,
            next: 0,
            tree: SumTree::new(capacity),
            alpha,
            eps,
            max_priority: 1.0,
        }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn get(&self, i: usize) -> &T {
        &self.items[i]
    }

    pub fn push(&mut self, item: T) {
        let slot = self.next;
        if self.items.len() < self.capacity {
            self.items.push(item);
        } else {
            self.items[slot] = item;
        }
        self.tree.set(slot, self.max_priority.powf(self.alpha));
        self.next = (self.next + 1) % self.capacity;
    }

    /// Sets raw priorities directly (before the α exponent).
    pub fn set_priority(&mut self, index: usize, priority: f64) {
        self.tree.set(index, priority.powf(self.alpha));
        self.max_priority = self.max_priority.max(priority);
    }

    /// Priorities become |TD error| + ε.
    pub fn update_priorities(&mut self, indices: &[usize], td_errors: &[f64]) {
        for (&i, &d) in indices.iter().zip(td_errors) {
            self.set_priority(i, d.abs() + self.eps);
        }
    }

    /// Sampling probability of entry `i`.
    pub fn probability(&self, i: usize) -> f64 {
        self.tree.get(i) / self.tree.total()
    }

    /// Draws `batch` indices with replacement; weights are
    /// (N·P(i))^-β normalised by their batch maximum.
    pub fn sample<R: Rng + ?Sized>(&self, batch: usize, beta: f64, rng: &mut R) -> Result<SampledBatch> {
        if self.items.len() < batch || batch == 0 {
            return Err(Error::state(format!(
                "replay holds {} transitions, batch needs {batch}",
                self.items.len()
            )));
        }
        let total = self.tree.total();
        let n = self.items.len() as f64;
        let mut indices = Vec::with_capacity(batch);
        let mut weights = Vec::with_capacity(batch);
        for _ in 0..batch {
            let mass = rng.random::<f64>() * total;
            let i = self.tree.find(mass).min(self.items.len() - 1);
            indices.push(i);
            weights.push((n * self.tree.get(i) / total).powf(-beta));
        }
        let max = weights.iter().cloned().fold(0.0, f64::max);
        weights.iter_mut().for_each(|w| *w /= max);
        Ok(SampledBatch { indices, weights })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn new_entries_get_max_priority() {
        let mut r = PrioritizedReplay::new(4, 0.6, 1e-6);
        r.push(0);
        r.push(1);
        r.update_priorities(&[0], &[3.0]);
        r.push(2);
        assert!((r.probability(2) - r.probability(0)).abs() < 1e-12);
        assert!(r.probability(2) > r.probability(1));
    }

    #[test]
    fn ring_overwrites_oldest() {
        let mut r = PrioritizedReplay::new(3, 0.6, 1e-6);
        for k in 0..5 {
            r.push(k);
        }
        assert_eq!(r.len(), 3);
        let mut items: Vec<i32> = (0..3).map(|i| *r.get(i)).collect();
        items.sort();
        assert_eq!(items, vec![2, 3, 4]);
    }

    #[test]
    fn insufficient_entries_is_an_error() {
        let mut r = PrioritizedReplay::new(10, 0.6, 1e-6);
        r.push(1);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(r.sample(2, 0.4, &mut rng).is_err());
    }

    #[test]
    fn weights_are_normalised() {
        let mut r = PrioritizedReplay::new(8, 0.6, 1e-6);
        for k in 0..8 {
            r.push(k);
            r.set_priority(k, 0.1 + k as f64);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let b = r.sample(8, 0.4, &mut rng).unwrap();
        assert!(b.weights.iter().all(|&w| w > 0.0 && w <= 1.0));
        assert!(b.weights.iter().any(|&w| w == 1.0));
    }
}
