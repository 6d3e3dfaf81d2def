//! Fixtures shared by the benchmarks.

use gqn_core::agent::{Experience, GlobalGraph, Formulation};
use gqn_core::env::{EnvConfig, JointAction, NetworkEnv};

/// A reset hex environment with `n_sites` sites and `n_users` users.
pub fn environment(n_sites: usize, n_users: usize) -> NetworkEnv {
    let mut env = NetworkEnv::new(EnvConfig {
        n_sites,
        n_users,
        seed: 1,
        ..EnvConfig::default()
    })
    .expect("valid config");
    env.reset().expect("reset");
    env
}

/// `n` no-op transitions from fresh episodes of `env`.
pub fn transitions(env: &mut NetworkEnv, n: usize) -> Vec<Experience> {
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        env.reset().expect("reset");
        let graph = env.agent_graph().clone();
        let state = GlobalGraph.samples(env.state(), &graph).remove(0);
        let action = JointAction(vec![1; env.n_agents()]);
        let outcome = env.step(&action).expect("step");
        let next_state = GlobalGraph.samples(&outcome.state, &graph).remove(0);
        out.push(Experience {
            state,
            actions: action.0,
            reward: outcome.rewards.global,
            next_state,
        });
    }
    out
}
