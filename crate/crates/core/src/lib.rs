//! UAV-to-edge offloading simulator and from-scratch deep Q-network trainer.
//!
//! A single UAV collects surveillance data while flying over a site and must
//! pick, every time-step, which ground edge receives the next chunk. The
//! agent learns the selection policy with a DQN trained on a reward that
//! weighs processing delay, energy spent, and edge queue overflow.
//!
//! The crate is organized along the pipeline:
//!
//! - [`env`] — the seeded discrete-time simulator and its reward model.
//! - [`nn`] — a minimal dense network with exact backprop, Adam, and a
//!   portable text checkpoint format.
//! - [`agent`] — ε-greedy control, replay memory, TD targets, target sync.
//! - [`train`] — the episode loop, reward-variant comparison, baseline
//!   policies, and evaluation.

pub mod agent;
pub mod env;
pub mod error;
pub mod nn;
pub mod train;

pub use agent::{epsilon_at, AgentConfig, DqnAgent, ReplayBuffer};
pub use env::{EdgeState, EnvState, Environment, Observation, SimConfig, Transition};
pub use error::{AgentError, ConfigError, EnvError, NnError, TrainError};
pub use nn::{Activation, AdamParams, LayerSpec, QNetwork};
pub use train::{
    compare_variants, evaluate, run_training, run_training_observed, CompareOutcome,
    EpisodeRecord, EvalSummary, Policy, RewardVariant, TrainConfig, TrainEvent, TrainOutcome,
    VariantOutcome,
};
