//! Trains the DQN machinery on a hand-built deterministic 3-state, 2-action
//! MDP and compares the learned Q-values and greedy policy against value
//! iteration.

use uavedge_core::agent::{epsilon_at, AgentConfig, DqnAgent};
use uavedge_core::env::{Observation, Transition};
use uavedge_core::nn::{Activation, LayerSpec, QNetwork};

/// States 0 and 1 are live, state 2 is terminal.
///
/// ```text
/// s0 --a0--> s1  (r = 0.0)      s1 --a0--> s2* (r = 1.0)
/// s0 --a1--> s2* (r = 0.2)      s1 --a1--> s0  (r = -0.5)
/// ```
fn mdp(state: usize, action: usize) -> (usize, f64, bool) {
    match (state, action) {
        (0, 0) => (1, 0.0, false),
        (0, 1) => (2, 0.2, true),
        (1, 0) => (2, 1.0, true),
        (1, 1) => (0, -0.5, false),
        _ => unreachable!("stepping a terminal state"),
    }
}

/// Independent Q* via value iteration to a 1e-12 fixed point.
fn value_iteration(gamma: f64) -> [[f64; 2]; 2] {
    let mut q = [[0.0f64; 2]; 2];
    loop {
        let mut next = q;
        let mut delta = 0.0f64;
        for s in 0..2 {
            for a in 0..2 {
                let (s2, r, terminal) = mdp(s, a);
                let future = if terminal {
                    0.0
                } else {
                    q[s2][0].max(q[s2][1])
                };
                next[s][a] = r + gamma * future;
                delta = delta.max((next[s][a] - q[s][a]).abs());
            }
        }
        q = next;
        if delta < 1e-12 {
            return q;
        }
    }
}

fn one_hot(state: usize) -> Observation {
    let mut f = vec![0.0; 3];
    f[state] = 1.0;
    Observation::from_features(f)
}

#[test]
fn value_iteration_fixed_point_is_correct() {
    let q = value_iteration(0.99);
    assert!((q[1][0] - 1.0).abs() < 1e-12);
    assert!((q[0][0] - 0.99).abs() < 1e-12);
    assert!((q[0][1] - 0.2).abs() < 1e-12);
    assert!((q[1][1] - (-0.5 + 0.99 * 0.99)).abs() < 1e-12);
}

#[test]
fn dqn_recovers_optimal_policy_and_values() {
    let gamma = 0.99;
    let q_star = value_iteration(gamma);

    let config = AgentConfig {
        gamma,
        // Short episodes: keep exploration high throughout so every
        // state-action pair stays visited.
        epsilon_end: 0.3,
        epsilon_decay_episodes: 500,
        ..AgentConfig::default()
    };
    let net = QNetwork::new(
        &[
            LayerSpec::new(3, 32, Activation::Relu),
            LayerSpec::new(32, 32, Activation::Relu),
            LayerSpec::new(32, 2, Activation::Identity),
        ],
        77,
    )
    .unwrap();
    let mut agent = DqnAgent::from_network(net, config.clone(), 77);

    let budget = 5_000u64;
    let mut episode = 0u64;
    'outer: loop {
        let mut state = (episode % 2) as usize;
        let epsilon = epsilon_at(&config, episode);
        // Cap the episode; a truncated final transition stays non-terminal.
        for _ in 0..20 {
            let action = agent.select_action(&one_hot(state), epsilon).unwrap();
            let (next, reward, terminal) = mdp(state, action);
            agent.remember(Transition {
                obs: one_hot(state),
                action,
                reward,
                reward_components: (0.0, 0.0, 0.0),
                next_obs: one_hot(next),
                done: terminal,
            });
            agent.train_step().unwrap();
            if agent.train_steps() >= budget {
                break 'outer;
            }
            if terminal {
                break;
            }
            state = next;
        }
        agent.finish_episode();
        episode += 1;
    }
    assert!(agent.train_steps() <= budget);

    let mut max_err = 0.0f64;
    for s in 0..2 {
        let q = agent.online().predict(one_hot(s).as_slice()).unwrap();
        for a in 0..2 {
            max_err = max_err.max((q[a] - q_star[s][a]).abs());
        }
        let greedy = if q[0] >= q[1] { 0 } else { 1 };
        let optimal = if q_star[s][0] >= q_star[s][1] { 0 } else { 1 };
        assert_eq!(greedy, optimal, "greedy policy differs at state {s}");
    }
    assert!(max_err < 0.05, "max |Q - Q*| = {max_err}");
}
