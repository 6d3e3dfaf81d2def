use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::algorithm::{Aggregation, Algorithm};
use super::config::{ExperimentConfig, RunSeeds};
use super::metrics::{MetricsRow, MetricsWriter};
use super::summary::{aggregate_curves, ci95, write_curves, Interval, RunSummary};
use crate::agent::{evaluate, run_training, EpisodeMetrics, EpisodeResult, GreedyPolicy, Learner, Policy, TrainingConfig};
use crate::baselines::HeuristicPolicy;
use crate::env::{EnvConfig, NetworkEnv, Scenario};
use crate::error::{Error, Result};
use crate::nn::{ArchitectureSpec, Checkpoint, QNetwork};

/// Values of w swept by default.
pub const DEFAULT_W_SWEEP: [f64; 5] = [0.05, 0.1, 0.15, 0.2, 0.5];

pub const METRICS_FILE: &str = "metrics.csv";
pub const CHECKPOINT_FILE: &str = "checkpoint.bin";
pub const SNAPSHOT_FILE: &str = "config.snapshot";

/// Outcome of a multi-seed training command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub algorithm: Algorithm,
    pub scenario: Scenario,
    pub w: f64,
    pub runs: Vec<RunSummary>,
    /// Across runs: mean global SINR of the last episodes.
    pub last_sinr_db: Interval,
    pub last_power_w: Interval,
    pub improvement_db: Interval,
}

/// Trains run `k` of `cfg` (or rolls out the heuristic) and writes its
/// metrics, checkpoint and configuration snapshot.
pub fn train_run(cfg: &ExperimentConfig, k: usize) -> Result<(Vec<MetricsRow>, RunSummary)> {
    cfg.validate()?;
    let dir = cfg.run_dir(k);
    std::fs::create_dir_all(&dir)?;
    let seeds = cfg.seeds(k);
    std::fs::write(dir.join(SNAPSHOT_FILE), snapshot(cfg, k, &seeds)?)?;
    let mut env = NetworkEnv::new(EnvConfig {
        seed: seeds.env,
        ..cfg.env.clone()
    })?;
    let mut writer = MetricsWriter::create(&dir.join(METRICS_FILE))?;
    let name = cfg.algorithm.name();
    let mut rows = Vec::new();
    let mut record = |m: &EpisodeMetrics| -> Result<()> {
        let row = MetricsRow::new(m, k, name);
        writer.write(&row)?;
        rows.push(row);
        Ok(())
    };

    if cfg.algorithm.is_learned() {
        let model = QNetwork::new(cfg.algorithm.architecture(&cfg.env, cfg.gcn_aggregation)?, seeds.init);
        let mut learner = Learner::new(model, cfg.learner, seeds.replay);
        let formulation = cfg.algorithm.formulation()?;
        let training = TrainingConfig {
            steps: cfg.steps,
            epsilon: cfg.epsilon,
            exploration_seed: seeds.exploration,
        };
        run_training(&mut env, &mut learner, formulation.as_ref(), &training, &mut record)?;
        save_checkpoint(&dir.join(CHECKPOINT_FILE), cfg, k, &seeds, &learner)?;
    } else {
        let episodes = cfg.steps / cfg.env.episode_length as u64;
        let mut policy = HeuristicPolicy;
        for e in 0..episodes {
            let r = evaluate(&mut env, &mut policy, 1)?[0];
            record(&EpisodeMetrics {
                step: (e + 1) * cfg.env.episode_length as u64,
                episode: e,
                epsilon: 0.0,
                loss: f64::NAN,
                reward_mean: r.reward_mean,
                global_sinr_db: r.global_sinr_db,
                mean_power_w: r.mean_power_w,
            })?;
        }
    }
    let summary = RunSummary::from_rows(k, &rows).unwrap_or(RunSummary {
        seed: k,
        episodes: 0,
        first_sinr_db: f64::NAN,
        last_sinr_db: f64::NAN,
        last_power_w: f64::NAN,
    });
    Ok((rows, summary))
}

fn snapshot(cfg: &ExperimentConfig, k: usize, seeds: &RunSeeds) -> Result<String> {
    Ok(format!(
        "# run {k}: env seed {}, init seed {}, exploration seed {}, replay seed {}\n{}",
        seeds.env,
        seeds.init,
        seeds.exploration,
        seeds.replay,
        cfg.to_toml()?
    ))
}

/// Writes the online network with everything needed to rebuild and resume it.
pub fn save_checkpoint(path: &Path, cfg: &ExperimentConfig, k: usize, seeds: &RunSeeds, learner: &Learner) -> Result<()> {
    let metadata = json!({
        "algorithm": cfg.algorithm,
        "architecture": learner.online.spec,
        "run": k,
        "seeds": seeds,
        "epsilon": cfg.epsilon,
        "env_steps": cfg.steps,
        "train_steps": learner.train_steps(),
        "experiment": cfg,
    });
    Checkpoint {
        metadata,
        params: learner.online.params.clone(),
    }
    .save(path)
}

/// Rebuilds a network and its algorithm from a checkpoint file.
pub fn load_model(path: &Path) -> Result<(Algorithm, QNetwork, serde_json::Value)> {
    let ckpt = Checkpoint::load(path)?;
    let field = |k: &str| {
        ckpt.metadata
            .get(k)
            .cloned()
            .ok_or_else(|| Error::CheckpointIncompatible(format!("metadata lacks {k:?}")))
    };
    let algorithm: Algorithm = serde_json::from_value(field("algorithm")?)
        .map_err(|e| Error::CheckpointIncompatible(format!("algorithm: {e}")))?;
    let spec: ArchitectureSpec = serde_json::from_value(field("architecture")?)
        .map_err(|e| Error::CheckpointIncompatible(format!("architecture: {e}")))?;
    let model = QNetwork::from_parts(spec, ckpt.params)?;
    Ok((algorithm, model, ckpt.metadata))
}

/// Runs all seeds of `cfg` in parallel and writes `summary.csv` and
/// `summary.json` next to the run directories.
pub fn cmd_train(cfg: &ExperimentConfig) -> Result<TrainReport> {
    cfg.validate()?;
    let results: Vec<(Vec<MetricsRow>, RunSummary)> =
        (0..cfg.n_seeds).into_par_iter().map(|k| train_run(cfg, k)).collect::<Result<_>>()?;
    let (curves, runs): (Vec<_>, Vec<_>) = results.into_iter().unzip();
    let root = cfg.output_dir.join(cfg.algorithm.name()).join(cfg.env.scenario.to_string());
    write_curves(&root.join("summary.csv"), &aggregate_curves(&curves)?)?;
    let report = summarize(cfg, runs)?;
    let json = serde_json::to_string_pretty(&report).map_err(|e| Error::state(e.to_string()))?;
    std::fs::write(root.join("summary.json"), json)?;
    Ok(report)
}

fn summarize(cfg: &ExperimentConfig, runs: Vec<RunSummary>) -> Result<TrainReport> {
    let col = |f: fn(&RunSummary) -> f64| ci95(&runs.iter().map(f).collect::<Vec<_>>());
    Ok(TrainReport {
        algorithm: cfg.algorithm,
        scenario: cfg.env.scenario,
        w: cfg.env.w,
        last_sinr_db: col(|r| r.last_sinr_db)?,
        last_power_w: col(|r| r.last_power_w)?,
        improvement_db: col(|r| r.improvement_db())?,
        runs,
    })
}

/// The heuristic on the same deployments a training run would see.
pub fn cmd_heuristic(cfg: &ExperimentConfig) -> Result<TrainReport> {
    cmd_train(&ExperimentConfig {
        algorithm: Algorithm::Heuristic,
        ..cfg.clone()
    })
}

/// Greedy rollout of a checkpoint (or the heuristic when none is given).
#[derive(Debug, Clone, PartialEq)]
pub struct EvalRequest {
    pub checkpoint: Option<PathBuf>,
    pub env: EnvConfig,
    pub episodes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub algorithm: Algorithm,
    pub n_agents: usize,
    pub n_parameters: Option<usize>,
    pub episodes: Vec<EpisodeResult>,
    pub initial_sinr_db: Interval,
    pub sinr_db: Interval,
    pub power_w: Interval,
}

pub fn cmd_eval(req: &EvalRequest) -> Result<EvalReport> {
    req.env.validate()?;
    if req.episodes == 0 {
        return Err(Error::Config("episodes must be positive".into()));
    }
    let mut env = NetworkEnv::new(req.env.clone())?;
    let (algorithm, n_parameters, episodes) = match &req.checkpoint {
        Some(path) => {
            let (algorithm, model, _) = load_model(path)?;
            let expected = algorithm.architecture(&req.env, Aggregation::Sum)?;
            if expected.input_dim != model.spec.input_dim || expected.n_actions != model.spec.n_actions {
                return Err(Error::CheckpointIncompatible(format!(
                    "checkpoint holds {} with input {} and {} actions; this environment needs input {} and {} actions",
                    model.spec.name, model.spec.input_dim, model.spec.n_actions, expected.input_dim, expected.n_actions
                )));
            }
            if !algorithm.supports(&req.env) {
                return Err(Error::Config(format!("{algorithm} cannot drive split agents")));
            }
            let formulation = algorithm.formulation()?;
            let mut policy = GreedyPolicy {
                model: &model,
                formulation: formulation.as_ref(),
            };
            let episodes = evaluate(&mut env, &mut policy as &mut dyn Policy, req.episodes)?;
            (algorithm, Some(model.n_parameters()), episodes)
        }
        None => (Algorithm::Heuristic, None, evaluate(&mut env, &mut HeuristicPolicy, req.episodes)?),
    };
    let col = |f: fn(&EpisodeResult) -> f64| ci95(&episodes.iter().map(f).collect::<Vec<_>>());
    for e in &episodes {
        if !(e.global_sinr_db.is_finite() && e.mean_power_w.is_finite()) {
            return Err(Error::NonFinite("evaluation episode".into()));
        }
    }
    Ok(EvalReport {
        algorithm,
        n_agents: env.n_agents(),
        n_parameters,
        initial_sinr_db: col(|e| e.initial_global_sinr_db)?,
        sinr_db: col(|e| e.global_sinr_db)?,
        power_w: col(|e| e.mean_power_w)?,
        episodes,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub w: f64,
    pub sinr_db: Interval,
    pub power_w: Interval,
}

/// One multi-seed training per w under `<out>/w<w>/`, with a summary table
/// in `<out>/sweep_w.csv`.
pub fn cmd_sweep_w(cfg: &ExperimentConfig, ws: &[f64]) -> Result<Vec<SweepRow>> {
    if cfg.env.scenario != Scenario::Joint {
        return Err(Error::invalid("the w-sweep needs the joint scenario"));
    }
    if ws.is_empty() {
        return Err(Error::invalid("empty w list"));
    }
    let mut rows = Vec::with_capacity(ws.len());
    for &w in ws {
        let mut c = cfg.clone();
        c.env.w = w;
        c.output_dir = cfg.output_dir.join(format!("w{w}"));
        let report = cmd_train(&c)?;
        rows.push(SweepRow {
            w,
            sinr_db: report.last_sinr_db,
            power_w: report.last_power_w,
        });
    }
    std::fs::create_dir_all(&cfg.output_dir)?;
    let mut out = csv::Writer::from_path(cfg.output_dir.join("sweep_w.csv"))?;
    out.write_record(["w", "sinr_mean", "sinr_ci", "power_mean", "power_ci", "n_runs"])?;
    for r in &rows {
        out.write_record([
            r.w.to_string(),
            r.sinr_db.mean.to_string(),
            r.sinr_db.half_width.to_string(),
            r.power_w.mean.to_string(),
            r.power_w.half_width.to_string(),
            r.sinr_db.n.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(rows)
}
