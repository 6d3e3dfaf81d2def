use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::action::{decode_actions, ActionSpace, JointAction};
use super::graph::{build_neighbor_graph, split_agents_per_parameter, NetworkGraph};
use super::observation::JointState;
use super::reward::{reward_global_joint, reward_global_tilt, reward_local_joint, reward_local_tilt};
use super::{EnvConfig, Layout, Scenario};
use crate::error::{Error, Result};
use crate::radio::{
    attach_users, generate_hexagonal_deployment, generate_random_deployment, place_users_uniform, Deployment,
    LinkBudget, Point, SinrReport, UserPopulation, MAX_TILT_DEG, MIN_TILT_DEG,
};

/// Global reward plus the per-cell local rewards of one state.
#[derive(Debug, Clone, PartialEq)]
pub struct Rewards {
    pub global: f64,
    pub local: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub state: JointState,
    pub rewards: Rewards,
    pub done: bool,
}

#[derive(Debug, Clone)]
struct Episode {
    deployment: Deployment,
    users: UserPopulation,
    link: LinkBudget,
    sinr: SinrReport,
    cell_graph: NetworkGraph,
    agent_graph: NetworkGraph,
    state: JointState,
    rewards: Rewards,
    steps: usize,
}

/// One simulated network. Single-threaded; independent instances share nothing.
#[derive(Debug, Clone)]
pub struct NetworkEnv {
    config: EnvConfig,
    rng: ChaCha8Rng,
    episode: Option<Episode>,
    episodes_started: u64,
}

impl NetworkEnv {
    pub fn new(config: EnvConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            config,
            episode: None,
            episodes_started: 0,
        })
    }

    pub fn config(&self) -> &EnvConfig {
        &self.config
    }

    pub fn action_space(&self) -> ActionSpace {
        self.config.action_space()
    }

    pub fn episodes_started(&self) -> u64 {
        self.episodes_started
    }

    /// Samples a new deployment, user drop and starting configuration.
    pub fn reset(&mut self) -> Result<(JointState, NetworkGraph)> {
        let (lo, hi) = self.config.isd_range;
        let isd = if hi > lo { self.rng.random_range(lo..=hi) } else { lo };
        let mut deployment = match self.config.layout {
            Layout::Hex => generate_hexagonal_deployment(self.config.n_sites, isd)?,
            Layout::Random => {
                let area = self.config.n_sites as f64 * 3f64.sqrt() / 2.0 * isd * isd;
                let seed = self.rng.next_u64();
                let mut d = generate_random_deployment(
                    self.config.n_sites,
                    self.config.random_min_isd_fraction * isd,
                    area,
                    seed,
                )?;
                d.intersite_distance = isd;
                d
            }
        };
        for cell in &mut deployment.cells {
            cell.height = self.config.radio.antenna_height;
            let tilt: f64 = self.rng.random_range(MIN_TILT_DEG..=MAX_TILT_DEG);
            cell.set_tilt(tilt.round());
            let power = match self.config.scenario {
                Scenario::Tilt => 40.0,
                Scenario::Joint => 10.0 + 5.0 * self.rng.random_range(0..=10u32) as f64,
            };
            cell.set_max_power(power);
        }
        let positions = place_users_uniform(self.config.n_users, deployment.half_extent(), &mut self.rng);
        self.start_episode(deployment, positions)
    }

    /// Starts an episode on a fixed topology (for replays and evaluation).
    pub fn reset_to(&mut self, deployment: Deployment, user_positions: Vec<Point>) -> Result<(JointState, NetworkGraph)> {
        if deployment.cells.is_empty() || user_positions.is_empty() {
            return Err(Error::invalid("scenario needs at least one cell and one user"));
        }
        self.start_episode(deployment, user_positions)
    }

    fn start_episode(&mut self, deployment: Deployment, positions: Vec<Point>) -> Result<(JointState, NetworkGraph)> {
        let radio = &self.config.radio;
        let mut link = LinkBudget::new(&deployment, &positions, radio);
        link.apply_shadowing(&deployment, radio, &mut self.rng);
        let mut users = UserPopulation::new(positions);
        users.attachment = attach_users(&link);
        let sinr = SinrReport::compute(&link, &users, radio);
        let cell_graph = build_neighbor_graph(&deployment, &link, &users.attachment, &self.config.graph);
        let cell_state = JointState::observe(&deployment, &users, &sinr, radio.empty_cell_sinr_db);
        let (state, agent_graph) = if self.config.split_agents {
            split_agents_per_parameter(&cell_state, &cell_graph, self.config.scenario)?
        } else {
            (cell_state, cell_graph.clone())
        };
        let rewards = self.rewards_for(&deployment, &sinr, &cell_graph);
        self.episodes_started += 1;
        self.episode = Some(Episode {
            deployment,
            users,
            link,
            sinr,
            cell_graph,
            agent_graph: agent_graph.clone(),
            state: state.clone(),
            rewards,
            steps: 0,
        });
        Ok((state, agent_graph))
    }

    fn rewards_for(&self, deployment: &Deployment, sinr: &SinrReport, graph: &NetworkGraph) -> Rewards {
        let powers: Vec<f64> = deployment.cells.iter().map(|c| c.max_power()).collect();
        let w = self.config.w;
        let n = deployment.n_cells();
        match self.config.scenario {
            Scenario::Tilt => Rewards {
                global: reward_global_tilt(sinr.global_db),
                local: (0..n).map(|c| reward_local_tilt(c, &sinr.per_cell_db, graph)).collect(),
            },
            Scenario::Joint => Rewards {
                global: reward_global_joint(sinr.global_db, &powers, w),
                local: (0..n)
                    .map(|c| reward_local_joint(c, &sinr.per_cell_db, &powers, graph, w))
                    .collect(),
            },
        }
    }

    /// Applies one joint action. Tilt and power changes are clipped to their ranges.
    pub fn step(&mut self, action: &JointAction) -> Result<StepOutcome> {
        let space = self.action_space();
        let length = self.config.episode_length;
        let ep = self
            .episode
            .as_mut()
            .ok_or_else(|| Error::state("step called before reset"))?;
        if ep.steps >= length {
            return Err(Error::state("episode finished; call reset"));
        }
        let deltas = decode_actions(space, action, ep.deployment.n_cells())?;
        for (cell, d) in ep.deployment.cells.iter_mut().zip(&deltas) {
            cell.set_tilt(cell.tilt() + d.tilt_deg);
            cell.set_max_power(cell.max_power() + d.power_w);
        }
        let radio = &self.config.radio;
        ep.link.refresh(&ep.deployment, radio);
        ep.users.attachment = attach_users(&ep.link);
        ep.sinr = SinrReport::compute(&ep.link, &ep.users, radio);
        let mut state = JointState::observe(&ep.deployment, &ep.users, &ep.sinr, radio.empty_cell_sinr_db);
        state.split = self.config.split_agents;
        ep.state = state;
        ep.steps += 1;
        let ep = self.episode.as_ref().expect("episode present");
        let rewards = self.rewards_for(&ep.deployment, &ep.sinr, &ep.cell_graph);
        let ep = self.episode.as_mut().expect("episode present");
        ep.rewards = rewards.clone();
        Ok(StepOutcome {
            state: ep.state.clone(),
            rewards,
            done: ep.steps >= length,
        })
    }

    fn current(&self) -> &Episode {
        self.episode.as_ref().expect("reset() must be called first")
    }

    pub fn is_active(&self) -> bool {
        self.episode.is_some()
    }

    pub fn deployment(&self) -> &Deployment {
        &self.current().deployment
    }

    pub fn users(&self) -> &UserPopulation {
        &self.current().users
    }

    pub fn link(&self) -> &LinkBudget {
        &self.current().link
    }

    pub fn sinr(&self) -> &SinrReport {
        &self.current().sinr
    }

    pub fn state(&self) -> &JointState {
        &self.current().state
    }

    /// Cell-level interference graph.
    pub fn cell_graph(&self) -> &NetworkGraph {
        &self.current().cell_graph
    }

    /// Graph over agents (equals the cell graph unless agents are split).
    pub fn agent_graph(&self) -> &NetworkGraph {
        &self.current().agent_graph
    }

    pub fn rewards(&self) -> &Rewards {
        &self.current().rewards
    }

    pub fn steps_taken(&self) -> usize {
        self.current().steps
    }

    pub fn n_agents(&self) -> usize {
        self.current().state.n_agents()
    }

    pub fn global_sinr_db(&self) -> f64 {
        self.current().sinr.global_db
    }

    pub fn mean_power_w(&self) -> f64 {
        let cells = &self.current().deployment.cells;
        cells.iter().map(|c| c.max_power()).sum::<f64>() / cells.len() as f64
    }
}
