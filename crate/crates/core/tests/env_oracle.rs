//! Replays full episodes against a straight-line reference implementation of
//! the environment dynamics, sharing the PRNG stream draw-for-draw, and
//! checks the documented state invariants over long random rollouts.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use uavedge_core::env::{Environment, SimConfig};

/// Minimal scripted re-implementation of the episode dynamics. Every rule is
/// written out linearly and independently of the library's step code; only
/// the PRNG stream (ChaCha8 seeded the same way, drawn in the documented
/// order) is shared.
struct ReferenceSim {
    cfg: SimConfig,
    rng: ChaCha8Rng,
    uav_backlog: f64,
    energy: f64,
    steps: usize,
    backlogs: Vec<f64>,
    distances: Vec<f64>,
    in_size: f64,
    out_size: f64,
    delay_max: f64,
    energy_max: f64,
}

impl ReferenceSim {
    fn new(cfg: SimConfig, seed: u64) -> Self {
        // Worst case: out_max to the farthest, fullest edge.
        let rate_worst = cfg.uav_data_rate / (1.0 + cfg.dist_max / cfg.dist_ref);
        let t_tx_worst = cfg.out_max / rate_worst;
        let delay_max = t_tx_worst + cfg.edge_capacity / cfg.edge_clock + cfg.out_max / cfg.edge_clock;
        let energy_max = cfg.p_tx * t_tx_worst + cfg.p_move;
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            uav_backlog: 0.0,
            energy: 0.0,
            steps: 0,
            backlogs: Vec::new(),
            distances: Vec::new(),
            in_size: 0.0,
            out_size: 0.0,
            delay_max,
            energy_max,
            cfg,
        }
    }

    fn draw(&mut self, lo: f64, hi: f64) -> f64 {
        if lo < hi {
            self.rng.random_range(lo..hi)
        } else {
            lo
        }
    }

    fn reset(&mut self) -> Vec<f64> {
        self.uav_backlog = self.draw(0.0, self.cfg.uav_capacity);
        self.backlogs.clear();
        self.distances.clear();
        for _ in 0..self.cfg.num_edges {
            let b = self.draw(0.0, self.cfg.edge_capacity);
            let d = self.draw(self.cfg.dist_min, self.cfg.dist_max);
            self.backlogs.push(b);
            self.distances.push(d);
        }
        self.in_size = self.draw(self.cfg.in_min, self.cfg.in_max);
        self.out_size = self.draw(self.cfg.out_min, self.cfg.out_max);
        self.energy = self.cfg.initial_energy;
        self.steps = 0;
        self.observe()
    }

    fn observe(&self) -> Vec<f64> {
        let mut o = vec![
            self.uav_backlog / self.cfg.uav_capacity,
            if self.cfg.in_max > 0.0 { self.in_size / self.cfg.in_max } else { 0.0 },
            if self.cfg.out_max > 0.0 { self.out_size / self.cfg.out_max } else { 0.0 },
            self.energy.max(0.0) / self.cfg.initial_energy,
        ];
        for e in 0..self.cfg.num_edges {
            o.push((self.cfg.edge_capacity - self.backlogs[e]) / self.cfg.edge_capacity);
            let span = self.cfg.dist_max - self.cfg.dist_min;
            o.push(if span > 0.0 {
                (self.distances[e] - self.cfg.dist_min) / span
            } else {
                0.0
            });
        }
        o
    }

    /// Steps (1)-(9), written out one after another.
    fn step(&mut self, a: usize) -> (f64, (f64, f64, f64), Vec<f64>, bool) {
        // (1)
        let delivered = self.out_size.min(self.uav_backlog + self.in_size);
        // (2)
        let rate = self.cfg.uav_data_rate / (1.0 + self.distances[a] / self.cfg.dist_ref);
        let t_tx = delivered / rate;
        let delay = t_tx
            + self.backlogs[a] / self.cfg.edge_clock
            + delivered / self.cfg.edge_clock;
        let energy_spent = self.cfg.p_tx * t_tx + self.cfg.p_move;
        // (3)
        let free = self.cfg.edge_capacity - self.backlogs[a];
        let overflow = delivered > free;
        self.backlogs[a] = (self.backlogs[a] + delivered).min(self.cfg.edge_capacity);
        // (4)
        for b in &mut self.backlogs {
            *b -= b.min(self.cfg.edge_clock);
        }
        // (5)
        self.uav_backlog =
            (self.uav_backlog + self.in_size - delivered).clamp(0.0, self.cfg.uav_capacity);
        // (6)
        self.energy -= energy_spent;
        // (7)
        for d in &mut self.distances {
            let lo = -self.cfg.walk_step;
            let hi = self.cfg.walk_step;
            let delta = if lo < hi { self.rng.random_range(lo..hi) } else { lo };
            *d = (*d + delta).clamp(self.cfg.dist_min, self.cfg.dist_max);
        }
        // (8)
        self.in_size = self.draw(self.cfg.in_min, self.cfg.in_max);
        self.out_size = self.draw(self.cfg.out_min, self.cfg.out_max);
        // (9)
        self.steps += 1;
        let done = self.energy <= 0.0 || self.steps == self.cfg.max_steps;

        let r_d = 1.0 - (delay / self.delay_max).clamp(0.0, 1.0);
        let r_e = 1.0 - (energy_spent / self.energy_max).clamp(0.0, 1.0);
        let r_o = if overflow { -1.0 } else { 0.0 };
        let reward = self.cfg.alpha * r_d
            + self.cfg.beta * r_e
            + (1.0 - self.cfg.alpha - self.cfg.beta) * r_o;
        (reward, (r_d, r_e, r_o), self.observe(), done)
    }
}

fn assert_close(a: &[f64], b: &[f64], tol: f64, what: &str) {
    assert_eq!(a.len(), b.len(), "{what}: length");
    for (i, (x, y)) in a.iter().zip(b).enumerate() {
        assert!((x - y).abs() <= tol, "{what}[{i}]: {x} vs {y}");
    }
}

#[test]
fn full_episodes_match_scripted_reference() {
    for seed in [7u64, 11, 23, 301] {
        let cfg = SimConfig::default();
        let mut env = Environment::new(cfg.clone(), seed).unwrap();
        let mut reference = ReferenceSim::new(cfg.clone(), seed);
        let mut action_rng = ChaCha8Rng::seed_from_u64(seed ^ 0xFF);

        let obs = env.reset();
        let ref_obs = reference.reset();
        assert_close(obs.as_slice(), &ref_obs, 1e-12, "reset obs");

        loop {
            let a = action_rng.random_range(0..cfg.num_edges);
            let t = env.step(a).unwrap();
            let (r, comps, next, done) = reference.step(a);
            assert!((t.reward - r).abs() < 1e-12, "reward: {} vs {r}", t.reward);
            assert!((t.reward_components.0 - comps.0).abs() < 1e-12);
            assert!((t.reward_components.1 - comps.1).abs() < 1e-12);
            assert_eq!(t.reward_components.2, comps.2);
            assert_close(t.next_obs.as_slice(), &next, 1e-12, "next obs");
            assert_eq!(t.done, done);
            if done {
                break;
            }
        }
    }
}

#[test]
fn reference_agrees_on_non_default_config() {
    let cfg = SimConfig {
        num_edges: 4,
        uav_capacity: 50.0,
        edge_capacity: 100.0,
        in_min: 0.0,
        in_max: 3.0,
        out_min: 1.0,
        out_max: 4.0,
        initial_energy: 30.0,
        alpha: 0.5,
        beta: 0.25,
        max_steps: 40,
        ..SimConfig::default()
    };
    let mut env = Environment::new(cfg.clone(), 5).unwrap();
    let mut reference = ReferenceSim::new(cfg.clone(), 5);
    let obs = env.reset();
    assert_close(obs.as_slice(), &reference.reset(), 1e-12, "reset obs");
    for i in 0.. {
        let a = i % cfg.num_edges;
        let t = env.step(a).unwrap();
        let (r, _, next, done) = reference.step(a);
        assert!((t.reward - r).abs() < 1e-12);
        assert_close(t.next_obs.as_slice(), &next, 1e-12, "next obs");
        assert_eq!(t.done, done);
        if done {
            break;
        }
    }
}

#[test]
fn invariants_hold_over_ten_thousand_random_steps() {
    let cfg = SimConfig::default();
    let mut env = Environment::new(cfg.clone(), 99).unwrap();
    let mut action_rng = ChaCha8Rng::seed_from_u64(1234);

    let mut total_steps = 0usize;
    while total_steps < 10_000 {
        let mut obs = env.reset();
        let mut prev_energy = cfg.initial_energy;
        let mut done_count = 0;
        loop {
            for &f in obs.as_slice() {
                assert!((0.0..=1.0).contains(&f), "feature out of range: {f}");
            }
            let a = action_rng.random_range(0..cfg.num_edges);
            let t = env.step(a).unwrap();
            total_steps += 1;

            let state = env.state().unwrap();
            // Energy strictly decreasing.
            assert!(state.uav_energy < prev_energy);
            prev_energy = state.uav_energy;
            // Backlog bounds.
            assert!(state.uav_backlog >= 0.0 && state.uav_backlog <= cfg.uav_capacity);
            for e in &state.edges {
                assert!(e.backlog >= 0.0 && e.backlog <= cfg.edge_capacity);
                assert!(e.distance >= cfg.dist_min && e.distance <= cfg.dist_max);
            }
            // Reward decomposition identity.
            let (r_d, r_e, r_o) = t.reward_components;
            let expect = cfg.alpha * r_d + cfg.beta * r_e + (1.0 - cfg.alpha - cfg.beta) * r_o;
            assert!((t.reward - expect).abs() < 1e-12);
            assert!((0.0..=1.0).contains(&r_d) && (0.0..=1.0).contains(&r_e));
            assert!(r_o == 0.0 || r_o == -1.0);
            // Conservation at the selected edge: deposit growth plus dropped
            // volume equals the delivered volume.
            let trace = env.last_trace().unwrap();
            let grown = trace.backlog_after_deposit - trace.backlog_before;
            assert!((grown + trace.dropped - trace.delivered).abs() < 1e-9);

            if t.done {
                done_count += 1;
                break;
            }
            obs = t.next_obs;
        }
        assert_eq!(done_count, 1);
        // Episode length bounded, and termination cause is visible.
        let state = env.state().unwrap();
        assert!(state.step_index <= cfg.max_steps);
        assert!(state.uav_energy <= 0.0 || state.step_index == cfg.max_steps);
        // done is reported exactly once: stepping again is an error.
        assert!(env.step(0).is_err());
    }
}

#[test]
fn episodes_end_within_step_cap_when_energy_is_plentiful() {
    let cfg = SimConfig {
        initial_energy: 1e12,
        max_steps: 50,
        ..SimConfig::default()
    };
    let mut env = Environment::new(cfg.clone(), 3).unwrap();
    env.reset();
    let mut steps = 0;
    loop {
        let t = env.step(steps % cfg.num_edges).unwrap();
        steps += 1;
        if t.done {
            break;
        }
        assert!(steps < 50);
    }
    assert_eq!(steps, 50);
}
