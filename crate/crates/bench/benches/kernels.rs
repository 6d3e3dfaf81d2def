use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use gqn_bench::{environment, transitions};
use gqn_core::agent::{gqn_forward, Learner, LearnerConfig};
use gqn_core::env::JointAction;
use gqn_core::nn::{ArchitectureSpec, QNetwork};
use gqn_core::radio::SinrReport;

fn sinr(c: &mut Criterion) {
    let mut g = c.benchmark_group("sinr");
    for (sites, users) in [(7, 500), (19, 10_000)] {
        let env = environment(sites, users);
        let radio = env.config().radio.clone();
        g.bench_function(format!("{sites}sites_{users}users"), |b| {
            b.iter(|| SinrReport::compute(black_box(env.link()), env.users(), &radio))
        });
    }
    g.finish();
}

fn env_step(c: &mut Criterion) {
    let mut env = environment(19, 10_000);
    let noop = JointAction(vec![1; env.n_agents()]);
    c.bench_function("env_step_19sites", |b| {
        b.iter(|| {
            if !env.is_active() {
                env.reset().unwrap();
            }
            env.step(black_box(&noop)).unwrap()
        })
    });
}

fn forward(c: &mut Criterion) {
    let mut g = c.benchmark_group("gqn_forward");
    for sites in [7, 19, 37] {
        let env = environment(sites, 500);
        let model = QNetwork::new(ArchitectureSpec::gqn(9, 3), 0);
        g.bench_function(format!("{}agents", env.n_agents()), |b| {
            b.iter(|| gqn_forward(env.state(), env.agent_graph(), black_box(&model)).unwrap())
        });
    }
    g.finish();
}

fn train_step(c: &mut Criterion) {
    let mut env = environment(19, 500);
    let data = transitions(&mut env, 128);
    let model = QNetwork::new(ArchitectureSpec::gqn(9, 3), 0);
    let mut seeded = Learner::new(model, LearnerConfig::default(), 0);
    for e in data {
        seeded.remember(e);
    }
    c.bench_function("train_step_batch64_57agents", |b| {
        b.iter_batched(
            || seeded.clone(),
            |mut learner| learner.train_step(0.5).unwrap(),
            BatchSize::LargeInput,
        )
    });
}

criterion_group!(benches, sinr, env_step, forward, train_step);
criterion_main!(benches);
