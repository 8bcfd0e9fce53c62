//! The DQN control loop: ε-greedy selection, replay memory, TD targets
//! against a separated target network, and periodic target sync.

mod replay;

pub use replay::ReplayBuffer;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::env::{Observation, Transition};
use crate::error::{AgentError, ConfigError};
use crate::nn::{AdamParams, ForwardCache, Gradients, QNetwork};

/// Learning hyperparameters for the DQN agent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AgentConfig {
    /// Discount factor γ.
    pub gamma: f64,
    /// Transitions sampled per gradient step.
    pub batch_size: usize,
    /// Target network refresh interval, counted in completed episodes.
    pub target_update_every: u64,
    pub epsilon_start: f64,
    pub epsilon_end: f64,
    /// Episodes over which ε decays linearly from start to end.
    pub epsilon_decay_episodes: u64,
    /// Minimum buffer fill before gradient steps begin.
    pub learn_start: usize,
    /// Replay memory capacity.
    pub replay_capacity: usize,
    /// Optimizer settings.
    pub adam: AdamParams,
}

impl Default for AgentConfig {
    fn default() -> Self {
        Self {
            gamma: 0.99,
            batch_size: 64,
            target_update_every: 5,
            epsilon_start: 1.0,
            epsilon_end: 0.05,
            epsilon_decay_episodes: 2_500,
            learn_start: 64,
            replay_capacity: 50_000,
            adam: AdamParams::default(),
        }
    }
}

impl AgentConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(ConfigError::new(
                "gamma",
                format!("gamma must be in [0, 1], got {}", self.gamma),
            ));
        }
        if !(self.epsilon_end >= 0.0
            && self.epsilon_end <= self.epsilon_start
            && self.epsilon_start <= 1.0)
        {
            return Err(ConfigError::new(
                "epsilon_start",
                format!(
                    "requires 0 <= epsilon_end <= epsilon_start <= 1, got start={} end={}",
                    self.epsilon_start, self.epsilon_end
                ),
            ));
        }
        if self.batch_size == 0 {
            return Err(ConfigError::new("batch_size", "batch_size must be at least 1"));
        }
        if self.replay_capacity == 0 {
            return Err(ConfigError::new(
                "replay_capacity",
                "replay_capacity must be at least 1",
            ));
        }
        if self.target_update_every == 0 {
            return Err(ConfigError::new(
                "target_update_every",
                "target_update_every must be at least 1",
            ));
        }
        Ok(())
    }
}

/// Exploration rate for a 0-based episode index: linear decay from
/// `epsilon_start` to `epsilon_end` over `epsilon_decay_episodes`, then flat.
pub fn epsilon_at(config: &AgentConfig, episode: u64) -> f64 {
    if config.epsilon_decay_episodes == 0 {
        return config.epsilon_end;
    }
    let slope = (config.epsilon_start - config.epsilon_end)
        * (episode as f64 / config.epsilon_decay_episodes as f64);
    (config.epsilon_start - slope).max(config.epsilon_end)
}

/// TD regression targets for a batch: `r` at terminal transitions, otherwise
/// `r + γ · max_a Q_target(next_obs, a)`.
pub fn td_targets(
    batch: &[Transition],
    target_net: &QNetwork,
    gamma: f64,
) -> Result<Vec<f64>, AgentError> {
    batch
        .iter()
        .map(|t| {
            if t.done {
                Ok(t.reward)
            } else {
                let q = target_net.predict(t.next_obs.as_slice())?;
                Ok(t.reward + gamma * max_value(&q))
            }
        })
        .collect()
}

/// Index of the maximum Q-value; the lowest index wins ties.
pub fn argmax(q: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in q.iter().enumerate().skip(1) {
        if v > q[best] {
            best = i;
        }
    }
    best
}

fn max_value(q: &[f64]) -> f64 {
    q.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

/// Deep Q-learning agent: an online network θ, a frozen target copy θ⁻
/// refreshed at episode intervals, and bounded replay memory.
#[derive(Debug, Clone)]
pub struct DqnAgent {
    online: QNetwork,
    target: QNetwork,
    buffer: ReplayBuffer,
    config: AgentConfig,
    episodes_completed: u64,
    rng: ChaCha8Rng,
    train_steps: u64,
    last_batch_size: Option<usize>,
}

impl DqnAgent {
    /// Builds an agent around a freshly initialized network; the target
    /// starts as an exact copy.
    pub fn new(
        input_dim: usize,
        num_actions: usize,
        config: AgentConfig,
        seed: u64,
    ) -> Result<Self, AgentError> {
        let online = QNetwork::default_q(input_dim, num_actions, seed)?;
        Ok(Self::from_network(online, config, seed))
    }

    /// Wraps an existing network (e.g. loaded from a checkpoint).
    pub fn from_network(online: QNetwork, config: AgentConfig, seed: u64) -> Self {
        let target = online.clone();
        let buffer = ReplayBuffer::new(config.replay_capacity);
        Self {
            online,
            target,
            buffer,
            config,
            episodes_completed: 0,
            // Distinct stream from network init so action draws do not
            // correlate with weight draws.
            rng: ChaCha8Rng::seed_from_u64(seed.wrapping_add(0x9E37_79B9_7F4A_7C15)),
            train_steps: 0,
            last_batch_size: None,
        }
    }

    pub fn config(&self) -> &AgentConfig {
        &self.config
    }

    pub fn online(&self) -> &QNetwork {
        &self.online
    }

    pub fn target(&self) -> &QNetwork {
        &self.target
    }

    pub fn buffer(&self) -> &ReplayBuffer {
        &self.buffer
    }

    pub fn episodes_completed(&self) -> u64 {
        self.episodes_completed
    }

    pub fn train_steps(&self) -> u64 {
        self.train_steps
    }

    /// Batch size used by the most recent gradient step.
    pub fn last_batch_size(&self) -> Option<usize> {
        self.last_batch_size
    }

    /// Exploration rate for the episode about to run.
    pub fn current_epsilon(&self) -> f64 {
        epsilon_at(&self.config, self.episodes_completed)
    }

    /// ε-greedy action: uniform with probability `epsilon`, otherwise the
    /// argmax of the online Q-values (lowest index on ties). With
    /// `epsilon <= 0` no randomness is consumed, so the greedy arm is a pure
    /// function of the parameters and the observation.
    pub fn select_action(
        &mut self,
        obs: &Observation,
        epsilon: f64,
    ) -> Result<usize, AgentError> {
        let num_actions = self.online.output_dim();
        if epsilon > 0.0 && self.rng.random::<f64>() < epsilon {
            return Ok(self.rng.random_range(0..num_actions));
        }
        let q = self.online.predict(obs.as_slice())?;
        Ok(argmax(&q))
    }

    /// Stores a transition in replay memory.
    pub fn remember(&mut self, transition: Transition) {
        self.buffer.push(transition);
    }

    /// One gradient step on a uniformly sampled batch, or `None` while the
    /// buffer is below `learn_start`.
    ///
    /// The loss is the mean squared TD error over the batch; the gradient
    /// flows only through each sample's taken action.
    pub fn train_step(&mut self) -> Result<Option<f64>, AgentError> {
        if self.buffer.len() < self.config.learn_start.max(1) {
            return Ok(None);
        }
        let batch = self.buffer.sample(self.config.batch_size, &mut self.rng)?;
        let targets = td_targets(&batch, &self.target, self.config.gamma)?;

        let batch_len = batch.len() as f64;
        let num_actions = self.online.output_dim();
        let mut grads = Gradients::zeros_like(&self.online);
        let mut cache = ForwardCache::new();
        let mut dq = vec![0.0; num_actions];
        let mut loss = 0.0;
        for (transition, &y) in batch.iter().zip(&targets) {
            self.online.forward_cached(transition.obs.as_slice(), &mut cache)?;
            let err = cache.output()[transition.action] - y;
            loss += err * err;
            dq.fill(0.0);
            dq[transition.action] = 2.0 * err / batch_len;
            self.online.backward_accumulate(&cache, &dq, &mut grads)?;
        }
        loss /= batch_len;

        let adam = self.config.adam;
        self.online.adam_step(&grads, &adam)?;
        self.train_steps += 1;
        self.last_batch_size = Some(batch.len());
        Ok(Some(loss))
    }

    /// θ⁻ ← θ.
    pub fn sync_target(&mut self) {
        self.target = self.online.clone();
    }

    /// Marks the end of an episode and syncs the target network when the
    /// completed-episode count hits the update interval. Returns whether a
    /// sync happened.
    pub fn finish_episode(&mut self) -> bool {
        self.episodes_completed += 1;
        if self.episodes_completed % self.config.target_update_every == 0 {
            self.sync_target();
            true
        } else {
            false
        }
    }
}
