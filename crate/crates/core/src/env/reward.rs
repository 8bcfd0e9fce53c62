//! Delay, energy, and reward computations for a single offloading step.

use super::config::SimConfig;

/// Transmission time for `out_size` GB at `distance` m: the effective rate is
/// the base rate divided by `1 + distance / dist_ref`.
pub fn transmission_time(out_size: f64, distance: f64, config: &SimConfig) -> f64 {
    debug_assert!(out_size >= 0.0);
    let rate = config.uav_data_rate / (1.0 + distance / config.dist_ref);
    out_size / rate
}

/// Total delay until the transmitted data is processed at the selected edge:
/// transmission + queue wait + processing, in time-steps.
pub fn compute_delay(out_size: f64, distance: f64, edge_backlog: f64, config: &SimConfig) -> f64 {
    debug_assert!(out_size >= 0.0 && edge_backlog >= 0.0);
    debug_assert!(distance >= config.dist_min && distance <= config.dist_max);
    let t_tx = transmission_time(out_size, distance, config);
    let t_wait = edge_backlog / config.edge_clock;
    let t_proc = out_size / config.edge_clock;
    t_tx + t_wait + t_proc
}

/// Energy drawn in one step: transmission power for the transmission time
/// plus flight power for the full step.
pub fn compute_energy(t_tx: f64, config: &SimConfig) -> f64 {
    debug_assert!(t_tx >= 0.0);
    config.p_tx * t_tx + config.p_move
}

/// Static worst-case normalizers so the delay and energy reward terms are
/// provably in [0, 1] for every reachable state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RewardNormalizer {
    pub delay_max: f64,
    pub energy_max: f64,
}

impl RewardNormalizer {
    /// Worst case over the reachable state space: maximum output size sent to
    /// the farthest edge with a full queue.
    pub fn from_config(config: &SimConfig) -> Self {
        let delay_max = compute_delay(
            config.out_max,
            config.dist_max,
            config.edge_capacity,
            config,
        );
        let t_tx_max = transmission_time(config.out_max, config.dist_max, config);
        let energy_max = compute_energy(t_tx_max, config);
        Self {
            delay_max,
            energy_max,
        }
    }
}

/// The reward and its components for one step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RewardParts {
    /// Weighted total.
    pub total: f64,
    /// Delay term in [0, 1]; larger means faster processing.
    pub r_d: f64,
    /// Energy term in [0, 1]; larger means cheaper step.
    pub r_e: f64,
    /// Overflow penalty: -1 when the selected edge overflowed, else 0.
    pub r_o: f64,
}

/// Combines raw delay and energy into the weighted step reward.
///
/// `r_d` and `r_e` shrink toward 0 as cost approaches the worst case, so
/// they stay positive and reward cheap, fast offloads.
pub fn reward(
    delay_raw: f64,
    energy_raw: f64,
    overflow: bool,
    config: &SimConfig,
    normalizer: &RewardNormalizer,
) -> RewardParts {
    debug_assert!(delay_raw >= 0.0 && energy_raw >= 0.0);
    let r_d = 1.0 - (delay_raw / normalizer.delay_max).clamp(0.0, 1.0);
    let r_e = 1.0 - (energy_raw / normalizer.energy_max).clamp(0.0, 1.0);
    let r_o = if overflow { -1.0 } else { 0.0 };
    let total = config.alpha * r_d + config.beta * r_e + (1.0 - config.alpha - config.beta) * r_o;
    RewardParts { total, r_d, r_e, r_o }
}
