use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::epsilon::EpsilonSchedule;
use super::learner::{Experience, Learner};
use super::select::{greedy_actions, select_actions};
use crate::env::{JointAction, JointState, NetworkEnv, NetworkGraph, Rewards};
use crate::error::{Error, Result};
use crate::nn::{GraphSample, QNetwork};

/// How environment states turn into network inputs and how rewards are
/// credited to them.
pub trait Formulation {
    /// Samples whose acting rows, concatenated in order, are the
    /// environment's agents.
    fn samples(&self, state: &JointState, graph: &NetworkGraph) -> Vec<GraphSample>;

    /// One reward per sample.
    fn rewards(&self, rewards: &Rewards) -> Vec<f64>;
}

/// Every agent in one graph sample trained from the global reward.
#[derive(Debug, Clone, Copy, Default)]
pub struct GlobalGraph;

impl Formulation for GlobalGraph {
    fn samples(&self, state: &JointState, graph: &NetworkGraph) -> Vec<GraphSample> {
        vec![state.to_sample(graph.neighbor_lists())]
    }

    fn rewards(&self, rewards: &Rewards) -> Vec<f64> {
        vec![rewards.global]
    }
}

/// Anything that can choose a joint action for the current environment state.
pub trait Policy {
    fn act(&mut self, env: &NetworkEnv) -> Result<JointAction>;
}

/// Greedy (ε = 0) policy of a trained network.
pub struct GreedyPolicy<'a, F: ?Sized> {
    pub model: &'a QNetwork,
    pub formulation: &'a F,
}

impl<F: Formulation + ?Sized> Policy for GreedyPolicy<'_, F> {
    fn act(&mut self, env: &NetworkEnv) -> Result<JointAction> {
        let samples = self.formulation.samples(env.state(), env.agent_graph());
        let refs: Vec<&GraphSample> = samples.iter().collect();
        Ok(greedy_actions(&self.model.q_values_batch(&refs)?))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainingConfig {
    pub steps: u64,
    pub epsilon: EpsilonSchedule,
    pub exploration_seed: u64,
}

/// Per-episode training record. SINR and power are taken at the final step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeMetrics {
    pub step: u64,
    pub episode: u64,
    pub epsilon: f64,
    /// Mean loss over the episode's gradient steps; NaN before training starts.
    pub loss: f64,
    /// Mean global reward over the episode's steps.
    pub reward_mean: f64,
    pub global_sinr_db: f64,
    pub mean_power_w: f64,
}

/// Off-policy training: act ε-greedily, store transitions, take one gradient
/// step per environment step once the buffer can fill a batch, reset the
/// environment when an episode ends. `on_episode` sees every finished episode.
pub fn run_training<F: Formulation + ?Sized>(
    env: &mut NetworkEnv,
    learner: &mut Learner,
    formulation: &F,
    config: &TrainingConfig,
    mut on_episode: impl FnMut(&EpisodeMetrics) -> Result<()>,
) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.exploration_seed);
    let mut episode = 0u64;
    let mut loss_sum = 0.0;
    let mut loss_count = 0usize;
    let mut reward_sum = 0.0;
    let mut reward_count = 0usize;
    let mut needs_reset = true;
    for t in 0..config.steps {
        if needs_reset {
            env.reset()?;
            needs_reset = false;
        }
        let epsilon = config.epsilon.value(t);
        let graph = env.agent_graph().clone();
        let samples = formulation.samples(env.state(), &graph);
        let refs: Vec<&GraphSample> = samples.iter().collect();
        let q = learner.online.q_values_batch(&refs)?;
        let action = select_actions(&q, epsilon, &mut rng);
        let outcome = env.step(&action)?;
        let next = formulation.samples(&outcome.state, &graph);
        let rewards = formulation.rewards(&outcome.rewards);
        let mut offset = 0;
        for ((s, s2), r) in samples.into_iter().zip(next).zip(rewards) {
            let k = s.n_agents();
            learner.remember(Experience {
                state: s,
                actions: action.0[offset..offset + k].to_vec(),
                reward: r,
                next_state: s2,
            });
            offset += k;
        }
        if let Some(loss) = learner.train_step(t as f64 / config.steps as f64)? {
            if !loss.is_finite() {
                return Err(Error::NonFinite(format!("loss at step {t}")));
            }
            loss_sum += loss;
            loss_count += 1;
        }
        reward_sum += outcome.rewards.global;
        reward_count += 1;
        if outcome.done {
            let m = EpisodeMetrics {
                step: t + 1,
                episode,
                epsilon,
                loss: if loss_count > 0 { loss_sum / loss_count as f64 } else { f64::NAN },
                reward_mean: reward_sum / reward_count as f64,
                global_sinr_db: env.global_sinr_db(),
                mean_power_w: env.mean_power_w(),
            };
            on_episode(&m)?;
            episode += 1;
            loss_sum = 0.0;
            loss_count = 0;
            reward_sum = 0.0;
            reward_count = 0;
            needs_reset = true;
        }
    }
    Ok(())
}

/// Outcome of one evaluation episode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpisodeResult {
    pub initial_global_sinr_db: f64,
    pub global_sinr_db: f64,
    pub mean_power_w: f64,
    pub reward_mean: f64,
}

/// Rolls `policy` out for `episodes` fresh episodes.
pub fn evaluate<P: Policy + ?Sized>(env: &mut NetworkEnv, policy: &mut P, episodes: usize) -> Result<Vec<EpisodeResult>> {
    let mut out = Vec::with_capacity(episodes);
    for _ in 0..episodes {
        env.reset()?;
        let initial = env.global_sinr_db();
        let mut reward_sum = 0.0;
        let mut steps = 0usize;
        loop {
            let action = policy.act(env)?;
            let outcome = env.step(&action)?;
            reward_sum += outcome.rewards.global;
            steps += 1;
            if outcome.done {
                break;
            }
        }
        out.push(EpisodeResult {
            initial_global_sinr_db: initial,
            global_sinr_db: env.global_sinr_db(),
            mean_power_w: env.mean_power_w(),
            reward_mean: reward_sum / steps as f64,
        });
    }
    Ok(out)
}
