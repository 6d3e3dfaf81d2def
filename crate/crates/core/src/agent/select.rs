use rand::Rng;

use crate::env::JointAction;
use crate::nn::Tensor;

/// Index of the largest entry; ties go to the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Per-agent argmax of an agents × actions Q matrix. Because the joint value
/// is the sum of per-agent values, this is also the joint argmax.
pub fn greedy_actions(q: &Tensor) -> JointAction {
    JointAction((0..q.rows()).map(|r| argmax(q.row(r))).collect())
}

/// ε-greedy over the joint action: with probability ε every agent draws a
/// uniform action, otherwise all act greedily.
pub fn select_actions<R: Rng + ?Sized>(q: &Tensor, epsilon: f64, rng: &mut R) -> JointAction {
    if epsilon > 0.0 && rng.random::<f64>() < epsilon {
        let n_actions = q.cols();
        JointAction((0..q.rows()).map(|_| rng.random_range(0..n_actions)).collect())
    } else {
        greedy_actions(q)
    }
}
