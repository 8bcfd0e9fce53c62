//! Episode loop wiring the simulator and the DQN agent, the reward-variant
//! comparison experiment, and metric aggregation.

mod eval;

pub use eval::{evaluate, EvalSummary, Policy};

use serde::{Deserialize, Serialize};

use crate::agent::DqnAgent;
use crate::env::{Environment, SimConfig, Transition};
use crate::error::{ConfigError, TrainError};
use crate::nn::QNetwork;
use crate::AgentConfig;

/// Which reward signal the agent trains on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RewardVariant {
    /// The full weighted mix of delay, energy, and overflow.
    Full,
    /// The two-term comparison reward: delay removed, remaining weights
    /// renormalized to `beta' = beta / (1 - alpha)`.
    EnergyOverflow,
}

impl RewardVariant {
    pub fn name(self) -> &'static str {
        match self {
            RewardVariant::Full => "full",
            RewardVariant::EnergyOverflow => "energy_overflow",
        }
    }
}

/// Top-level training configuration: episode budget, seed, reward variant,
/// evaluation cadence, and the nested simulator/agent settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub total_episodes: u64,
    pub seed: u64,
    pub reward_variant: RewardVariant,
    /// Progress/evaluation reporting interval, in episodes.
    pub eval_every: u64,
    /// Episodes per greedy evaluation.
    pub eval_episodes: usize,
    pub sim: SimConfig,
    pub agent: AgentConfig,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            total_episodes: 5_000,
            seed: 0,
            reward_variant: RewardVariant::Full,
            eval_every: 100,
            eval_episodes: 20,
            sim: SimConfig::default(),
            agent: AgentConfig::default(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.sim.validate()?;
        self.agent.validate()?;
        if self.total_episodes == 0 {
            return Err(ConfigError::new(
                "total_episodes",
                "total_episodes must be at least 1",
            ));
        }
        if self.eval_episodes == 0 {
            return Err(ConfigError::new(
                "eval_episodes",
                "eval_episodes must be at least 1",
            ));
        }
        if self.reward_variant == RewardVariant::EnergyOverflow && self.sim.alpha >= 1.0 {
            return Err(ConfigError::new(
                "alpha",
                "reward_variant energy_overflow requires alpha < 1 so the \
                 remaining weights can be renormalized",
            ));
        }
        Ok(())
    }
}

/// Per-episode training metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    /// 1-based episode index.
    pub episode: u64,
    /// Sum of the variant's per-step rewards over the episode.
    pub total_reward: f64,
    pub steps: usize,
    pub overflow_count: usize,
    pub energy_used: f64,
    /// Exploration rate used throughout the episode.
    pub epsilon: f64,
    /// Mean gradient-step loss during the episode (0 when none ran).
    pub mean_loss: f64,
}

/// Result of a training run: the per-episode metric stream and the final
/// online network.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub records: Vec<EpisodeRecord>,
    pub network: QNetwork,
}

/// Observable milestones inside a training run, for progress reporting and
/// instrumented traces.
#[derive(Debug, Clone)]
pub enum TrainEvent<'a> {
    /// A gradient step ran with this many sampled transitions.
    TrainStep {
        episode: u64,
        batch_size: usize,
        loss: f64,
    },
    EpisodeEnd { record: &'a EpisodeRecord },
    /// The target network was refreshed after this episode.
    TargetSync { episode: u64 },
    /// Periodic greedy evaluation of the in-training policy.
    Eval {
        episode: u64,
        summary: &'a EvalSummary,
    },
}

/// The variant's reward for one step, recomputed from the environment's
/// reward components.
pub fn variant_reward(
    variant: RewardVariant,
    components: (f64, f64, f64),
    sim: &SimConfig,
) -> f64 {
    let (r_d, r_e, r_o) = components;
    match variant {
        RewardVariant::Full => {
            sim.alpha * r_d + sim.beta * r_e + (1.0 - sim.alpha - sim.beta) * r_o
        }
        RewardVariant::EnergyOverflow => {
            let beta_prime = sim.beta / (1.0 - sim.alpha);
            beta_prime * r_e + (1.0 - beta_prime) * r_o
        }
    }
}

/// Derives independent sub-stream seeds from the run seed (SplitMix64).
pub fn stream_seed(seed: u64, stream: u64) -> u64 {
    fn splitmix64(mut x: u64) -> u64 {
        x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = x;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    splitmix64(seed ^ splitmix64(stream))
}

const ENV_STREAM: u64 = 1;
const AGENT_STREAM: u64 = 2;
const EVAL_STREAM: u64 = 3;

/// Runs the full training loop: per step, select an action, step the
/// simulator, store the transition (re-weighted by the reward variant), and
/// take one gradient step; the target network syncs on the episode schedule.
/// Fully deterministic given the config.
pub fn run_training(config: &TrainConfig) -> Result<TrainOutcome, TrainError> {
    run_training_observed(config, &mut |_| {})
}

/// [`run_training`] with an observer for progress and instrumentation.
pub fn run_training_observed(
    config: &TrainConfig,
    observer: &mut dyn FnMut(TrainEvent<'_>),
) -> Result<TrainOutcome, TrainError> {
    config.validate()?;
    let mut env = Environment::new(config.sim.clone(), stream_seed(config.seed, ENV_STREAM))?;
    let mut agent = DqnAgent::new(
        config.sim.obs_dim(),
        config.sim.num_edges,
        config.agent.clone(),
        stream_seed(config.seed, AGENT_STREAM),
    )?;

    let mut records = Vec::with_capacity(config.total_episodes as usize);
    for episode in 1..=config.total_episodes {
        let epsilon = agent.current_epsilon();
        let mut obs = env.reset();
        let mut total_reward = 0.0;
        let mut overflow_count = 0usize;
        let mut steps = 0usize;
        let mut loss_sum = 0.0;
        let mut loss_count = 0u64;

        loop {
            let action = agent.select_action(&obs, epsilon)?;
            let t = env.step(action)?;
            let reward = variant_reward(config.reward_variant, t.reward_components, &config.sim);
            total_reward += reward;
            if t.reward_components.2 < 0.0 {
                overflow_count += 1;
            }
            steps += 1;
            let done = t.done;
            obs = t.next_obs.clone();
            agent.remember(Transition { reward, ..t });
            if let Some(loss) = agent.train_step()? {
                loss_sum += loss;
                loss_count += 1;
                observer(TrainEvent::TrainStep {
                    episode,
                    batch_size: agent.last_batch_size().unwrap_or(0),
                    loss,
                });
            }
            if done {
                break;
            }
        }

        let energy_left = env.state().map(|s| s.uav_energy).unwrap_or(0.0);
        let record = EpisodeRecord {
            episode,
            total_reward,
            steps,
            overflow_count,
            energy_used: config.sim.initial_energy - energy_left,
            epsilon,
            mean_loss: if loss_count > 0 {
                loss_sum / loss_count as f64
            } else {
                0.0
            },
        };
        observer(TrainEvent::EpisodeEnd { record: &record });
        records.push(record);

        if agent.finish_episode() {
            observer(TrainEvent::TargetSync { episode });
        }

        if config.eval_every > 0 && episode % config.eval_every == 0 {
            let summary = evaluate(
                &Policy::Dqn(agent.online().clone()),
                &config.sim,
                config.eval_episodes,
                stream_seed(config.seed, EVAL_STREAM),
            )?;
            observer(TrainEvent::Eval {
                episode,
                summary: &summary,
            });
        }
    }

    Ok(TrainOutcome {
        records,
        network: agent.online().clone(),
    })
}

/// A trained variant with its metric stream and final greedy evaluation
/// under the full reward metric.
#[derive(Debug, Clone)]
pub struct VariantOutcome {
    pub variant: RewardVariant,
    pub records: Vec<EpisodeRecord>,
    pub network: QNetwork,
    pub eval: EvalSummary,
}

/// Both reward variants trained with the same seed and evaluated with the
/// same full-reward metric.
#[derive(Debug, Clone)]
pub struct CompareOutcome {
    pub full: VariantOutcome,
    pub energy_overflow: VariantOutcome,
}

impl CompareOutcome {
    /// Deterministic presentation order: full first.
    pub fn variants(&self) -> [&VariantOutcome; 2] {
        [&self.full, &self.energy_overflow]
    }
}

/// Trains both reward variants with the same seed (in parallel) and
/// evaluates both final policies greedily under the full reward metric so
/// the scores are comparable.
pub fn compare_variants(config: &TrainConfig) -> Result<CompareOutcome, TrainError> {
    let full_cfg = TrainConfig {
        reward_variant: RewardVariant::Full,
        ..config.clone()
    };
    let eo_cfg = TrainConfig {
        reward_variant: RewardVariant::EnergyOverflow,
        ..config.clone()
    };
    eo_cfg.validate()?;

    let (full_res, eo_res) = std::thread::scope(|scope| {
        let full = scope.spawn(|| run_training(&full_cfg));
        let eo = scope.spawn(|| run_training(&eo_cfg));
        (full.join().expect("training thread"), eo.join().expect("training thread"))
    });
    let full_out = full_res?;
    let eo_out = eo_res?;

    let eval_seed = stream_seed(config.seed, EVAL_STREAM);
    let make = |variant, outcome: TrainOutcome| -> Result<VariantOutcome, TrainError> {
        let eval = evaluate(
            &Policy::Dqn(outcome.network.clone()),
            &config.sim,
            config.eval_episodes,
            eval_seed,
        )?;
        Ok(VariantOutcome {
            variant,
            records: outcome.records,
            network: outcome.network,
            eval,
        })
    };

    Ok(CompareOutcome {
        full: make(RewardVariant::Full, full_out)?,
        energy_overflow: make(RewardVariant::EnergyOverflow, eo_out)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_config(seed: u64) -> TrainConfig {
        TrainConfig {
            total_episodes: 3,
            seed,
            eval_every: 0,
            ..TrainConfig::default()
        }
    }

    #[test]
    fn run_produces_one_record_per_episode() {
        let outcome = run_training(&tiny_config(7)).unwrap();
        assert_eq!(outcome.records.len(), 3);
        let episodes: Vec<u64> = outcome.records.iter().map(|r| r.episode).collect();
        assert_eq!(episodes, vec![1, 2, 3]);
        for r in &outcome.records {
            assert!(r.steps <= 500);
            assert!(r.overflow_count <= r.steps);
        }
    }

    #[test]
    fn identical_config_and_seed_reproduce_records_exactly() {
        let a = run_training(&tiny_config(42)).unwrap();
        let b = run_training(&tiny_config(42)).unwrap();
        assert_eq!(a.records, b.records);
        assert!(a.network.params_eq(&b.network));
    }

    #[test]
    fn energy_overflow_reward_ignores_delay_component() {
        let sim = SimConfig::default();
        let base = variant_reward(RewardVariant::EnergyOverflow, (0.2, 0.6, 0.0), &sim);
        for r_d in [0.0, 0.4, 0.9, 1.0] {
            let perturbed = variant_reward(RewardVariant::EnergyOverflow, (r_d, 0.6, 0.0), &sim);
            assert_eq!(base, perturbed);
        }
        // The full variant does depend on it.
        let full_a = variant_reward(RewardVariant::Full, (0.2, 0.6, 0.0), &sim);
        let full_b = variant_reward(RewardVariant::Full, (0.9, 0.6, 0.0), &sim);
        assert!(full_a != full_b);
    }

    #[test]
    fn energy_overflow_weights_renormalize() {
        // With alpha = beta = 1/3: beta' = 0.5, so R' = (r_e + r_o) / 2.
        let sim = SimConfig::default();
        let r = variant_reward(RewardVariant::EnergyOverflow, (0.3, 0.8, -1.0), &sim);
        assert!((r - (0.5 * 0.8 - 0.5)).abs() < 1e-12);
    }

    #[test]
    fn energy_overflow_with_alpha_one_is_rejected() {
        let cfg = TrainConfig {
            reward_variant: RewardVariant::EnergyOverflow,
            sim: SimConfig {
                alpha: 1.0,
                beta: 0.0,
                ..SimConfig::default()
            },
            ..tiny_config(1)
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn observer_sees_batches_and_syncs() {
        let cfg = TrainConfig {
            total_episodes: 10,
            ..tiny_config(5)
        };
        let mut syncs = Vec::new();
        let mut batch_sizes = Vec::new();
        run_training_observed(&cfg, &mut |event| match event {
            TrainEvent::TargetSync { episode } => syncs.push(episode),
            TrainEvent::TrainStep { batch_size, .. } => batch_sizes.push(batch_size),
            _ => {}
        })
        .unwrap();
        assert_eq!(syncs, vec![5, 10]);
        assert!(!batch_sizes.is_empty());
        assert!(batch_sizes.iter().all(|&b| b == 64));
    }

    #[test]
    fn stream_seeds_are_distinct() {
        let s = 7;
        let a = stream_seed(s, ENV_STREAM);
        let b = stream_seed(s, AGENT_STREAM);
        let c = stream_seed(s, EVAL_STREAM);
        assert!(a != b && b != c && a != c);
        assert_eq!(a, stream_seed(s, ENV_STREAM));
    }
}
