//! Simulation parameters for the UAV-to-edge offloading environment.

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;

/// All environment constants: topology, capacities, rates, powers, data-size
/// ranges, reward weights, and episode limits.
///
/// Units: data volumes in GB, distances in meters, rates in GB per time-step,
/// powers in energy units per time-step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    /// Number of edges the UAV can offload to (the action space size).
    pub num_edges: usize,
    /// Maximum UAV backlog in GB.
    pub uav_capacity: f64,
    /// Maximum per-edge backlog in GB.
    pub edge_capacity: f64,
    /// Minimum UAV-to-edge distance in m.
    pub dist_min: f64,
    /// Maximum UAV-to-edge distance in m.
    pub dist_max: f64,
    /// UAV transmission rate in GB per time-step (at reference distance zero).
    pub uav_data_rate: f64,
    /// Edge processing rate in GB per time-step.
    pub edge_clock: f64,
    /// Transmission power draw per time-step of transmitting.
    pub p_tx: f64,
    /// Flight power draw per time-step.
    pub p_move: f64,
    /// Battery budget at the start of each episode.
    pub initial_energy: f64,
    /// Lower bound of the per-step input (camera) data size in GB.
    pub in_min: f64,
    /// Upper bound of the per-step input data size in GB.
    pub in_max: f64,
    /// Lower bound of the per-step output (offload) data size in GB.
    pub out_min: f64,
    /// Upper bound of the per-step output data size in GB.
    pub out_max: f64,
    /// Weight of the delay reward term.
    pub alpha: f64,
    /// Weight of the energy reward term; overflow gets weight `1 - alpha - beta`.
    pub beta: f64,
    /// Step cap per episode.
    pub max_steps: usize,
    /// Reference distance for the transmission-rate distance penalty, in m.
    pub dist_ref: f64,
    /// Per-step bound of the distance random walk, in m.
    pub walk_step: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            num_edges: 10,
            uav_capacity: 250.0,
            edge_capacity: 1500.0,
            dist_min: 1.0,
            dist_max: 15.0,
            uav_data_rate: 0.9,
            edge_clock: 2.7,
            p_tx: 0.4 / 0.7,
            p_move: 0.6 / 0.7,
            initial_energy: 100.0,
            in_min: 0.5,
            in_max: 2.0,
            out_min: 0.5,
            out_max: 2.0,
            alpha: 1.0 / 3.0,
            beta: 1.0 / 3.0,
            max_steps: 500,
            dist_ref: 10.0,
            walk_step: 1.0,
        }
    }
}

impl SimConfig {
    /// Observation vector length: 4 UAV features plus 2 per edge.
    pub fn obs_dim(&self) -> usize {
        4 + 2 * self.num_edges
    }

    /// Checks every config invariant and reports the first violation by field.
    pub fn validate(&self) -> Result<(), ConfigError> {
        fn positive(field: &'static str, value: f64) -> Result<(), ConfigError> {
            if value > 0.0 && value.is_finite() {
                Ok(())
            } else {
                Err(ConfigError::new(
                    field,
                    format!("{field} must be strictly positive, got {value}"),
                ))
            }
        }

        if self.num_edges == 0 {
            return Err(ConfigError::new("num_edges", "num_edges must be at least 1"));
        }
        positive("uav_capacity", self.uav_capacity)?;
        positive("edge_capacity", self.edge_capacity)?;
        positive("uav_data_rate", self.uav_data_rate)?;
        positive("edge_clock", self.edge_clock)?;
        positive("p_tx", self.p_tx)?;
        positive("p_move", self.p_move)?;
        positive("initial_energy", self.initial_energy)?;
        positive("dist_ref", self.dist_ref)?;
        if !(self.dist_min > 0.0 && self.dist_min <= self.dist_max) {
            return Err(ConfigError::new(
                "dist_min",
                format!(
                    "requires 0 < dist_min <= dist_max, got dist_min={}, dist_max={}",
                    self.dist_min, self.dist_max
                ),
            ));
        }
        if !(self.in_min >= 0.0 && self.in_min <= self.in_max) {
            return Err(ConfigError::new(
                "in_min",
                format!(
                    "requires 0 <= in_min <= in_max, got in_min={}, in_max={}",
                    self.in_min, self.in_max
                ),
            ));
        }
        if !(self.out_min >= 0.0 && self.out_min <= self.out_max) {
            return Err(ConfigError::new(
                "out_min",
                format!(
                    "requires 0 <= out_min <= out_max, got out_min={}, out_max={}",
                    self.out_min, self.out_max
                ),
            ));
        }
        if !(self.alpha >= 0.0) {
            return Err(ConfigError::new("alpha", "alpha must be nonnegative"));
        }
        if !(self.beta >= 0.0) {
            return Err(ConfigError::new("beta", "beta must be nonnegative"));
        }
        if self.alpha + self.beta > 1.0 {
            return Err(ConfigError::new(
                "alpha",
                format!(
                    "alpha + beta must not exceed 1, got alpha={} beta={}",
                    self.alpha, self.beta
                ),
            ));
        }
        if self.max_steps == 0 {
            return Err(ConfigError::new("max_steps", "max_steps must be at least 1"));
        }
        if !(self.walk_step >= 0.0 && self.walk_step.is_finite()) {
            return Err(ConfigError::new(
                "walk_step",
                format!("walk_step must be nonnegative, got {}", self.walk_step),
            ));
        }
        Ok(())
    }
}
