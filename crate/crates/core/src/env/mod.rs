//! Seeded simulation of a UAV offloading surveillance data to ground edges.
//!
//! One episode is one sortie: the UAV accumulates camera data, offloads a
//! chunk to one selected edge per time-step, and lands when its battery is
//! exhausted or the step cap is reached. Edges queue and drain data at a
//! fixed clock rate; overfilling the selected edge drops the excess and is
//! penalized through the reward.
//!
//! All randomness comes from a single ChaCha8 stream owned by the
//! environment, drawn in a fixed order so trajectories are reproducible and
//! replayable by reference implementations:
//!
//! - `reset`: UAV backlog, then per edge (backlog, distance) in index order,
//!   then input size, then output size.
//! - `step`: per-edge distance-walk deltas in index order, then the next
//!   input size, then the next output size.
//!
//! All uniform draws are half-open `[lo, hi)`.

mod config;
mod reward;

pub use config::SimConfig;
pub use reward::{
    compute_delay, compute_energy, reward, transmission_time, RewardNormalizer, RewardParts,
};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::EnvError;

/// Queue fill and current distance of one edge.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeState {
    /// Queued data awaiting processing, in GB. Always within `[0, edge_capacity]`.
    pub backlog: f64,
    /// Distance to the UAV in m. Always within `[dist_min, dist_max]`.
    pub distance: f64,
}

/// Ground-truth simulation state; observations are derived from this.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvState {
    /// Data queued on the UAV, in GB. Always within `[0, uav_capacity]`.
    pub uav_backlog: f64,
    /// Remaining battery. The episode ends once this reaches zero or below.
    pub uav_energy: f64,
    /// Steps taken so far this episode.
    pub step_index: usize,
    /// Per-edge queue and distance.
    pub edges: Vec<EdgeState>,
    /// Camera data arriving this step, in GB.
    pub in_size: f64,
    /// Data scheduled for offload this step, in GB (capped by availability).
    pub out_size: f64,
}

/// Normalized feature vector fed to the Q-network.
///
/// Layout: `[uav_backlog/uav_capacity, in_size/in_max, out_size/out_max,
/// uav_energy/initial_energy]` followed, per edge, by
/// `[(edge_capacity - backlog)/edge_capacity, (distance - dist_min)/(dist_max - dist_min)]`.
/// Every feature lies in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation(Vec<f64>);

impl Observation {
    /// Wraps a raw feature vector. Useful for custom tasks (e.g. one-hot
    /// encodings) driven through the same agent machinery.
    pub fn from_features(features: Vec<f64>) -> Self {
        Observation(features)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Free-capacity feature of edge `e`.
    pub fn edge_free_capacity(&self, e: usize) -> f64 {
        self.0[4 + 2 * e]
    }

    /// Normalized distance feature of edge `e`.
    pub fn edge_distance(&self, e: usize) -> f64 {
        self.0[4 + 2 * e + 1]
    }
}

impl AsRef<[f64]> for Observation {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// One step's experience record, as stored in replay memory.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub obs: Observation,
    /// Selected edge index.
    pub action: usize,
    /// Weighted total reward.
    pub reward: f64,
    /// `(r_d, r_e, r_o)` components the total was combined from.
    pub reward_components: (f64, f64, f64),
    pub next_obs: Observation,
    pub done: bool,
}

/// Bookkeeping from the most recent step, for instrumentation and tests.
#[derive(Debug, Clone, PartialEq)]
pub struct StepTrace {
    pub action: usize,
    /// Volume actually transmitted this step.
    pub delivered: f64,
    /// Portion of `delivered` discarded because the edge was full.
    pub dropped: f64,
    pub overflow: bool,
    /// Selected edge backlog before the deposit.
    pub backlog_before: f64,
    /// Selected edge backlog after the deposit, before draining.
    pub backlog_after_deposit: f64,
    pub t_tx: f64,
    pub delay: f64,
    pub energy_spent: f64,
}

/// The seeded UAV-edge simulator.
///
/// Construct with [`Environment::new`], then drive episodes with
/// [`Environment::reset`] and [`Environment::step`]. A single instance is
/// single-threaded; run one instance per seed for parallel rollouts.
#[derive(Debug, Clone)]
pub struct Environment {
    config: SimConfig,
    normalizer: RewardNormalizer,
    rng: ChaCha8Rng,
    state: Option<EnvState>,
    done: bool,
    last_trace: Option<StepTrace>,
}

impl Environment {
    /// Validates the config and seeds the simulation stream. No episode is
    /// active until the first [`reset`](Environment::reset).
    pub fn new(config: SimConfig, seed: u64) -> Result<Self, EnvError> {
        config.validate()?;
        let normalizer = RewardNormalizer::from_config(&config);
        Ok(Self {
            config,
            normalizer,
            rng: ChaCha8Rng::seed_from_u64(seed),
            state: None,
            done: false,
            last_trace: None,
        })
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn normalizer(&self) -> &RewardNormalizer {
        &self.normalizer
    }

    /// Current simulation state, if an episode has started.
    pub fn state(&self) -> Option<&EnvState> {
        self.state.as_ref()
    }

    /// True when the current episode has ended (or none has started).
    pub fn is_terminal(&self) -> bool {
        self.done || self.state.is_none()
    }

    /// Details of the most recent step.
    pub fn last_trace(&self) -> Option<&StepTrace> {
        self.last_trace.as_ref()
    }

    /// Starts a new episode: backlogs and distances are drawn uniformly
    /// within their capacity bounds, the battery is refilled, and the first
    /// input/output sizes are sampled.
    pub fn reset(&mut self) -> Observation {
        let cfg = &self.config;
        let uav_backlog = self.rng.random_range(0.0..cfg.uav_capacity);
        let edges = (0..cfg.num_edges)
            .map(|_| EdgeState {
                backlog: self.rng.random_range(0.0..cfg.edge_capacity),
                distance: sample_range(&mut self.rng, cfg.dist_min, cfg.dist_max),
            })
            .collect();
        let in_size = sample_range(&mut self.rng, cfg.in_min, cfg.in_max);
        let out_size = sample_range(&mut self.rng, cfg.out_min, cfg.out_max);
        let state = EnvState {
            uav_backlog,
            uav_energy: cfg.initial_energy,
            step_index: 0,
            edges,
            in_size,
            out_size,
        };
        let obs = build_observation(&state, cfg);
        self.state = Some(state);
        self.done = false;
        self.last_trace = None;
        obs
    }

    /// Executes one offloading step against the selected edge.
    ///
    /// In order: the deliverable volume is capped by what the UAV holds, the
    /// step's delay/energy/overflow are scored against the selected edge, the
    /// deposit is applied (excess dropped at capacity), every edge drains one
    /// clock's worth of data, the UAV queue and battery are updated, the
    /// distances walk randomly within their bounds, and the next step's
    /// input/output sizes are drawn.
    pub fn step(&mut self, action: usize) -> Result<Transition, EnvError> {
        if self.done || self.state.is_none() {
            return Err(EnvError::EpisodeNotActive);
        }
        if action >= self.config.num_edges {
            return Err(EnvError::ActionOutOfRange {
                action,
                num_edges: self.config.num_edges,
            });
        }
        let cfg = self.config.clone();
        let state = self.state.as_mut().expect("episode active");
        let obs = build_observation(state, &cfg);

        // (1) The UAV cannot send more than it holds after this step's intake.
        let delivered = state.out_size.min(state.uav_backlog + state.in_size);

        // (2) Score the step against the selected edge as found.
        let edge = &state.edges[action];
        let backlog_before = edge.backlog;
        let distance = edge.distance;
        let t_tx = transmission_time(delivered, distance, &cfg);
        let delay = compute_delay(delivered, distance, backlog_before, &cfg);
        let energy_spent = compute_energy(t_tx, &cfg);

        // (3) Deposit, clamped at edge capacity; the excess is dropped.
        let free = cfg.edge_capacity - backlog_before;
        let accepted = delivered.min(free);
        let dropped = delivered - accepted;
        let overflow = delivered > free;
        let backlog_after_deposit = backlog_before + accepted;
        state.edges[action].backlog = backlog_after_deposit;

        // (4) Every edge processes up to one clock of queued data.
        for edge in &mut state.edges {
            edge.backlog -= edge.backlog.min(cfg.edge_clock);
        }

        // (5)-(6) UAV queue and battery.
        state.uav_backlog =
            (state.uav_backlog + state.in_size - delivered).clamp(0.0, cfg.uav_capacity);
        state.uav_energy -= energy_spent;

        // (7) Distances wander within their bounds.
        for edge in &mut state.edges {
            let delta = sample_range(&mut self.rng, -cfg.walk_step, cfg.walk_step);
            edge.distance = (edge.distance + delta).clamp(cfg.dist_min, cfg.dist_max);
        }

        // (8) Next step's arrivals.
        state.in_size = sample_range(&mut self.rng, cfg.in_min, cfg.in_max);
        state.out_size = sample_range(&mut self.rng, cfg.out_min, cfg.out_max);

        // (9) Termination.
        state.step_index += 1;
        let done = state.uav_energy <= 0.0 || state.step_index == cfg.max_steps;
        self.done = done;

        let parts = reward(delay, energy_spent, overflow, &cfg, &self.normalizer);
        let next_obs = build_observation(state, &cfg);
        self.last_trace = Some(StepTrace {
            action,
            delivered,
            dropped,
            overflow,
            backlog_before,
            backlog_after_deposit,
            t_tx,
            delay,
            energy_spent,
        });

        Ok(Transition {
            obs,
            action,
            reward: parts.total,
            reward_components: (parts.r_d, parts.r_e, parts.r_o),
            next_obs,
            done,
        })
    }
}

/// Uniform draw on `[lo, hi)`, tolerating a degenerate `lo == hi` range.
fn sample_range(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    if lo < hi {
        rng.random_range(lo..hi)
    } else {
        lo
    }
}

/// Normalizes the raw state into the `[0, 1]` feature vector.
///
/// Energy can momentarily go negative on the terminal step, so that feature
/// is floored at zero; degenerate ranges (e.g. `in_max == 0`) map to zero.
pub fn build_observation(state: &EnvState, config: &SimConfig) -> Observation {
    let mut features = Vec::with_capacity(config.obs_dim());
    features.push(state.uav_backlog / config.uav_capacity);
    features.push(ratio_or_zero(state.in_size, config.in_max));
    features.push(ratio_or_zero(state.out_size, config.out_max));
    features.push(state.uav_energy.max(0.0) / config.initial_energy);
    let dist_span = config.dist_max - config.dist_min;
    for edge in &state.edges {
        features.push((config.edge_capacity - edge.backlog) / config.edge_capacity);
        features.push(if dist_span > 0.0 {
            (edge.distance - config.dist_min) / dist_span
        } else {
            0.0
        });
    }
    Observation(features)
}

fn ratio_or_zero(value: f64, denom: f64) -> f64 {
    if denom > 0.0 {
        value / denom
    } else {
        0.0
    }
}
