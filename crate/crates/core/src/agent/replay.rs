//! Bounded FIFO replay memory.

use std::collections::VecDeque;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::env::Transition;
use crate::error::AgentError;

/// Fixed-capacity experience store. Pushing past capacity evicts the oldest
/// record; sampling draws uniformly with replacement.
#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    records: VecDeque<Transition>,
    capacity: usize,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        Self {
            records: VecDeque::with_capacity(capacity.min(1 << 20)),
            capacity,
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Oldest-first access, mainly for tests and instrumentation.
    pub fn iter(&self) -> impl Iterator<Item = &Transition> {
        self.records.iter()
    }

    pub fn push(&mut self, transition: Transition) {
        if self.records.len() == self.capacity {
            self.records.pop_front();
        }
        self.records.push_back(transition);
    }

    /// Draws `k` records uniformly with replacement.
    pub fn sample(&self, k: usize, rng: &mut ChaCha8Rng) -> Result<Vec<Transition>, AgentError> {
        if self.records.is_empty() {
            return Err(AgentError::EmptyBuffer);
        }
        Ok((0..k)
            .map(|_| self.records[rng.random_range(0..self.records.len())].clone())
            .collect())
    }
}
