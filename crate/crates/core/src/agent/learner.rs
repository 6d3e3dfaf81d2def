use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::replay::PrioritizedReplay;
use super::select::greedy_actions;
use crate::error::{Error, Result};
use crate::nn::{Adam, GraphBatch, GraphSample, QNetwork, Tape};

/// One stored transition `(s, A, a, r, s', A')`. The graph travels inside
/// each [`GraphSample`], so node counts may differ between transitions.
#[derive(Debug, Clone, PartialEq)]
pub struct Experience {
    pub state: GraphSample,
    /// One action per acting agent of `state`.
    pub actions: Vec<usize>,
    pub reward: f64,
    pub next_state: GraphSample,
}

/// Hyperparameters of the off-policy learner.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LearnerConfig {
    pub gamma: f64,
    pub learning_rate: f64,
    pub batch_size: usize,
    /// Training steps between target-network refreshes.
    pub target_period: u64,
    pub replay_capacity: usize,
    pub priority_alpha: f64,
    pub priority_beta_start: f64,
    pub priority_beta_end: f64,
    pub priority_eps: f64,
}

impl Default for LearnerConfig {
    fn default() -> Self {
        Self {
            gamma: 0.0,
            learning_rate: 1e-2,
            batch_size: 64,
            target_period: 500,
            replay_capacity: 10_000,
            priority_alpha: 0.6,
            priority_beta_start: 0.4,
            priority_beta_end: 1.0,
            priority_eps: 1e-6,
        }
    }
}

/// Double-Q targets `r + γ·Σ_i Q_i^target(s', argmax_a Q_i^online(s', a))`.
/// With γ = 0 the targets are the rewards, untouched.
pub fn compute_targets(batch: &[&Experience], online: &QNetwork, target: &QNetwork, gamma: f64) -> Result<Vec<f64>> {
    let rewards: Vec<f64> = batch.iter().map(|e| e.reward).collect();
    if gamma == 0.0 {
        return Ok(rewards);
    }
    let next: Vec<&GraphSample> = batch.iter().map(|e| &e.next_state).collect();
    let q_online = online.q_values_batch(&next)?;
    let q_target = target.q_values_batch(&next)?;
    let greedy = greedy_actions(&q_online);
    let mut out = Vec::with_capacity(batch.len());
    let mut row = 0;
    for (e, r) in batch.iter().zip(rewards) {
        let mut v = 0.0;
        for _ in 0..e.next_state.n_agents() {
            v += q_target.get(row, greedy.0[row]);
            row += 1;
        }
        out.push(r + gamma * v);
    }
    Ok(out)
}

/// Loss and TD errors of one gradient step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepReport {
    pub loss: f64,
    pub td_errors: Vec<f64>,
}

/// Records the decomposed prediction `Σ_i Q_i(s, a_i)` for each experience,
/// the weighted squared TD loss, and back-propagates into `online`'s gradients.
pub fn td_loss_and_gradients(
    batch: &[&Experience],
    targets: &[f64],
    weights: &[f64],
    online: &mut QNetwork,
) -> Result<StepReport> {
    let states: Vec<&GraphSample> = batch.iter().map(|e| &e.state).collect();
    let gb = GraphBatch::from_samples(&states)?;
    let mut actions = Vec::with_capacity(gb.segments.last().copied().unwrap_or(0));
    for (e, w) in batch.iter().zip(gb.segments.windows(2)) {
        if e.actions.len() != w[1] - w[0] {
            return Err(Error::invalid(format!(
                "experience has {} actions for {} agents",
                e.actions.len(),
                w[1] - w[0]
            )));
        }
        actions.extend_from_slice(&e.actions);
    }
    let mut tape = Tape::new();
    let q = online.forward(&mut tape, &gb)?;
    let pred = tape.gather_sum(q, actions, gb.segments.clone())?;
    let loss = tape.weighted_mse(pred, targets.to_vec(), weights.to_vec())?;
    let loss_value = tape.value(loss).data()[0];
    if !loss_value.is_finite() {
        return Err(Error::NonFinite("TD loss".into()));
    }
    let td_errors = tape
        .value(pred)
        .data()
        .iter()
        .zip(targets)
        .map(|(p, t)| p - t)
        .collect();
    online.params.zero_grads();
    tape.backward(loss, &mut online.params)?;
    Ok(StepReport {
        loss: loss_value,
        td_errors,
    })
}

/// Online and target networks, optimizer and replay buffer of one trainer.
#[derive(Debug, Clone)]
pub struct Learner {
    pub online: QNetwork,
    pub target: QNetwork,
    pub optimizer: Adam,
    pub replay: PrioritizedReplay<Experience>,
    pub config: LearnerConfig,
    rng: ChaCha8Rng,
    train_steps: u64,
}

impl Learner {
    pub fn new(online: QNetwork, config: LearnerConfig, replay_seed: u64) -> Self {
        Self {
            target: online.clone(),
            online,
            optimizer: Adam::new(config.learning_rate),
            replay: PrioritizedReplay::new(config.replay_capacity, config.priority_alpha, config.priority_eps),
            config,
            rng: ChaCha8Rng::seed_from_u64(replay_seed),
            train_steps: 0,
        }
    }

    pub fn train_steps(&self) -> u64 {
        self.train_steps
    }

    pub fn remember(&mut self, e: Experience) {
        self.replay.push(e);
    }

    /// One gradient step on a prioritized batch. Returns `None` (and does
    /// nothing) while the buffer holds fewer than `batch_size` transitions.
    /// `progress` ∈ [0, 1] anneals the importance-sampling exponent.
    pub fn train_step(&mut self, progress: f64) -> Result<Option<f64>> {
        let b = self.config.batch_size;
        if self.replay.len() < b {
            return Ok(None);
        }
        let beta = self.config.priority_beta_start
            + (self.config.priority_beta_end - self.config.priority_beta_start) * progress.clamp(0.0, 1.0);
        let sampled = self.replay.sample(b, beta, &mut self.rng)?;
        let batch: Vec<&Experience> = sampled.indices.iter().map(|&i| self.replay.get(i)).collect();
        let targets = compute_targets(&batch, &self.online, &self.target, self.config.gamma)?;
        let report = td_loss_and_gradients(&batch, &targets, &sampled.weights, &mut self.online)?;
        self.optimizer.step(&mut self.online.params);
        self.replay.update_priorities(&sampled.indices, &report.td_errors);
        self.train_steps += 1;
        self.update_target(self.config.target_period)?;
        Ok(Some(report.loss))
    }

    /// Copies online weights into the target network every `period` training steps.
    pub fn update_target(&mut self, period: u64) -> Result<bool> {
        if period > 0 && self.train_steps % period == 0 {
            self.target.params.copy_values_from(&self.online.params)?;
            return Ok(true);
        }
        Ok(false)
    }
}
