use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gqn_core::env::EnvConfig;
use gqn_core::harness::{
    cmd_eval, cmd_heuristic, cmd_sweep_w, cmd_train, load_model, EvalReport, EvalRequest, ExperimentConfig, Interval,
    Preset, TrainReport, DEFAULT_W_SWEEP,
};
use gqn_core::Error;

const EXIT_CONFIG: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

#[derive(Parser)]
#[command(name = "gqn", version, about = "Train and evaluate multi-agent antenna tilt and power controllers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train one algorithm over several seeds.
    Train(ExperimentArgs),
    /// Roll out a checkpoint greedily (or the heuristic) on fresh deployments.
    Eval(EvalArgs),
    /// Train the joint scenario once per power weight.
    SweepW {
        #[command(flatten)]
        experiment: ExperimentArgs,
        /// Comma-separated weights.
        #[arg(long = "w-list", value_delimiter = ',')]
        w_list: Option<Vec<f64>>,
    },
    /// Run the geometric tilt rule on the deployments a training run sees.
    HeuristicBaseline(ExperimentArgs),
}

/// Scenario flags shared by every subcommand.
#[derive(Args, Clone, Default)]
struct EnvArgs {
    /// tilt or joint
    #[arg(long)]
    scenario: Option<String>,
    /// hex or random
    #[arg(long)]
    layout: Option<String>,
    #[arg(long)]
    sites: Option<usize>,
    #[arg(long)]
    users: Option<usize>,
    /// Power-penalty weight of the joint reward.
    #[arg(long)]
    w: Option<f64>,
    /// global or local
    #[arg(long)]
    reward: Option<String>,
    /// One tilt agent and one power agent per cell.
    #[arg(long)]
    split: bool,
    #[arg(long)]
    isd_min: Option<f64>,
    #[arg(long)]
    isd_max: Option<f64>,
    #[arg(long)]
    episode_length: Option<usize>,
}

#[derive(Args, Clone)]
struct ExperimentArgs {
    /// gqn, gqn_gat, dqn, ndqn, gaq or heuristic
    #[arg(long)]
    algorithm: Option<String>,
    /// paper or desk
    #[arg(long, default_value = "paper")]
    preset: String,
    /// TOML file; its values override flags.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, env = "GQN_OUT_DIR")]
    out: Option<PathBuf>,
    #[arg(long)]
    steps: Option<u64>,
    #[arg(long)]
    seeds: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    target_period: Option<u64>,
    #[arg(long)]
    epsilon_decay: Option<u64>,
    /// sum or mean
    #[arg(long)]
    gcn_aggregation: Option<String>,
    #[command(flatten)]
    env: EnvArgs,
}

#[derive(Args)]
struct EvalArgs {
    /// Trained model; without it the heuristic is evaluated.
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    #[arg(long, default_value_t = 50)]
    episodes: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// paper or desk; only used without a checkpoint.
    #[arg(long, default_value = "paper")]
    preset: String,
    /// Write the full report as JSON here.
    #[arg(long)]
    report: Option<PathBuf>,
    #[command(flatten)]
    env: EnvArgs,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config_error() { EXIT_CONFIG } else { EXIT_RUNTIME })
        }
    }
}

fn run(command: Command) -> Result<(), Error> {
    match command {
        Command::Train(args) => print_train(&cmd_train(&args.resolve()?)?),
        Command::HeuristicBaseline(args) => print_train(&cmd_heuristic(&args.resolve()?)?),
        Command::SweepW { experiment, w_list } => {
            let cfg = experiment.resolve()?;
            let ws = w_list.unwrap_or_else(|| DEFAULT_W_SWEEP.to_vec());
            println!("{:>6}  {:>22}  {:>22}", "w", "final SINR (dB)", "final power (W)");
            for row in cmd_sweep_w(&cfg, &ws)? {
                println!("{:>6}  {:>22}  {:>22}", row.w, fmt_ci(&row.sinr_db), fmt_ci(&row.power_w));
            }
        }
        Command::Eval(args) => {
            let report = args.run()?;
            print_eval(&report);
            if let Some(path) = args.report {
                let json = serde_json::to_string_pretty(&report).map_err(|e| Error::InvalidState(e.to_string()))?;
                std::fs::write(path, json)?;
            }
        }
    }
    Ok(())
}

impl EnvArgs {
    fn table(&self) -> toml::Table {
        let mut t = toml::Table::new();
        put(&mut t, "scenario", self.scenario.clone());
        put(&mut t, "layout", self.layout.clone());
        put(&mut t, "n_sites", self.sites.map(|v| v as i64));
        put(&mut t, "n_users", self.users.map(|v| v as i64));
        put(&mut t, "w", self.w);
        put(&mut t, "reward_scope", self.reward.clone());
        put(&mut t, "episode_length", self.episode_length.map(|v| v as i64));
        if self.split {
            t.insert("split_agents".into(), true.into());
        }
        t
    }

    /// Applies the flags on top of `base`.
    fn apply(&self, base: &EnvConfig) -> Result<EnvConfig, Error> {
        let mut cfg = merge_into(base, &self.table())?;
        if let Some(lo) = self.isd_min {
            cfg.isd_range.0 = lo;
        }
        if let Some(hi) = self.isd_max {
            cfg.isd_range.1 = hi;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

impl ExperimentArgs {
    fn resolve(&self) -> Result<ExperimentConfig, Error> {
        let preset: Preset = self.preset.parse()?;
        let mut flags = toml::Table::new();
        put(&mut flags, "algorithm", self.algorithm.clone());
        put(&mut flags, "steps", self.steps.map(|v| v as i64));
        put(&mut flags, "n_seeds", self.seeds.map(|v| v as i64));
        put(&mut flags, "seed", self.seed.map(|v| v as i64));
        put(&mut flags, "gcn_aggregation", self.gcn_aggregation.clone());
        put(&mut flags, "output_dir", self.out.as_ref().map(|p| p.display().to_string()));
        let mut learner = toml::Table::new();
        put(&mut learner, "learning_rate", self.learning_rate);
        put(&mut learner, "batch_size", self.batch_size.map(|v| v as i64));
        put(&mut learner, "gamma", self.gamma);
        put(&mut learner, "target_period", self.target_period.map(|v| v as i64));
        if !learner.is_empty() {
            flags.insert("learner".into(), learner.into());
        }
        if let Some(d) = self.epsilon_decay {
            let mut eps = toml::Table::new();
            eps.insert("decay_steps".into(), (d as i64).into());
            flags.insert("epsilon".into(), eps.into());
        }
        let mut env = self.env.table();
        if self.env.isd_min.is_some() || self.env.isd_max.is_some() {
            let d = ExperimentConfig::new(gqn_core::harness::Algorithm::Gqn, preset).env.isd_range;
            let range = [self.env.isd_min.unwrap_or(d.0), self.env.isd_max.unwrap_or(d.1)];
            env.insert("isd_range".into(), toml::Value::try_from(range).expect("array"));
        }
        if !env.is_empty() {
            flags.insert("env".into(), env.into());
        }
        let file = self.config.as_deref().map(ExperimentConfig::read_table).transpose()?;
        ExperimentConfig::layered(preset, &flags, file.as_ref())
    }
}

impl EvalArgs {
    fn run(&self) -> Result<EvalReport, Error> {
        let base = match &self.checkpoint {
            Some(path) => {
                let (_, _, meta) = load_model(path)?;
                meta.get("experiment")
                    .and_then(|e| e.get("env"))
                    .and_then(|e| serde_json::from_value(e.clone()).ok())
                    .unwrap_or_default()
            }
            None => ExperimentConfig::new(gqn_core::harness::Algorithm::Heuristic, self.preset.parse()?).env,
        };
        let env = EnvConfig {
            seed: self.seed,
            ..self.env.apply(&base)?
        };
        cmd_eval(&EvalRequest {
            checkpoint: self.checkpoint.clone(),
            env,
            episodes: self.episodes,
        })
    }
}

fn put<V: Into<toml::Value>>(t: &mut toml::Table, key: &str, v: Option<V>) {
    if let Some(v) = v {
        t.insert(key.into(), v.into());
    }
}

fn merge_into(base: &EnvConfig, over: &toml::Table) -> Result<EnvConfig, Error> {
    let mut t = toml::Table::try_from(base).map_err(|e| Error::Config(e.to_string()))?;
    for (k, v) in over {
        t.insert(k.clone(), v.clone());
    }
    toml::Value::Table(t).try_into().map_err(|e| Error::Config(e.to_string()))
}

fn fmt_ci(i: &Interval) -> String {
    if i.half_width.is_nan() {
        format!("{:.3}", i.mean)
    } else {
        format!("{:.3} ± {:.3}", i.mean, i.half_width)
    }
}

fn print_train(r: &TrainReport) {
    println!("{} / {} ({} runs)", r.algorithm, r.scenario, r.runs.len());
    for run in &r.runs {
        println!(
            "  seed{}: {} episodes, SINR {:.3} -> {:.3} dB, power {:.2} W",
            run.seed, run.episodes, run.first_sinr_db, run.last_sinr_db, run.last_power_w
        );
    }
    println!("  final SINR (dB): {}", fmt_ci(&r.last_sinr_db));
    println!("  final power (W): {}", fmt_ci(&r.last_power_w));
    println!("  improvement (dB): {}", fmt_ci(&r.improvement_db));
}

fn print_eval(r: &EvalReport) {
    println!("{} on {} agents, {} episodes", r.algorithm, r.n_agents, r.episodes.len());
    if let Some(n) = r.n_parameters {
        println!("  parameters: {n}");
    }
    println!("  initial SINR (dB): {}", fmt_ci(&r.initial_sinr_db));
    println!("  final SINR (dB):   {}", fmt_ci(&r.sinr_db));
    println!("  final power (W):   {}", fmt_ci(&r.power_w));
}
