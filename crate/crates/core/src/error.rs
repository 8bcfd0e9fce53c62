//! Error types shared across the simulator, network, agent, and trainer.

use thiserror::Error;

/// A configuration invariant violation, naming the offending field.
#[derive(Debug, Clone, Error)]
#[error("invalid config: {field}: {message}")]
pub struct ConfigError {
    pub field: &'static str,
    pub message: String,
}

impl ConfigError {
    pub fn new(field: &'static str, message: impl Into<String>) -> Self {
        Self {
            field,
            message: message.into(),
        }
    }
}

/// Environment misuse or invalid simulation configuration.
#[derive(Debug, Error)]
pub enum EnvError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    /// `step` was called before `reset` or after the episode terminated.
    #[error("no active episode: call reset() before step(), and not after done")]
    EpisodeNotActive,
    #[error("action {action} out of range: must be < {num_edges}")]
    ActionOutOfRange { action: usize, num_edges: usize },
}

/// Network construction, shape, or checkpoint I/O failure.
#[derive(Debug, Error)]
pub enum NnError {
    #[error("layer dimension mismatch: layer {layer} outputs {output}, next layer expects {expected}")]
    DimensionMismatch {
        layer: usize,
        output: usize,
        expected: usize,
    },
    #[error("input length {got} does not match network input dim {expected}")]
    InputShape { expected: usize, got: usize },
    #[error("gradient/cache shape does not match network ({context})")]
    GradShape { context: &'static str },
    #[error("unsupported checkpoint version: expected '{expected}', found '{found}'")]
    VersionMismatch { expected: &'static str, found: String },
    #[error("malformed checkpoint at line {line}: {message}")]
    Format { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Agent-level failures.
#[derive(Debug, Error)]
pub enum AgentError {
    #[error("cannot sample from an empty replay buffer")]
    EmptyBuffer,
    #[error(transparent)]
    Nn(#[from] NnError),
}

/// Training and evaluation failures (propagated from the layers below).
#[derive(Debug, Error)]
pub enum TrainError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Nn(#[from] NnError),
    #[error(transparent)]
    Agent(#[from] AgentError),
}
