//! Shared proptest strategies: randomized trajectories biased toward exact
//! and near revisits so the sampler's skip rule actually fires.

use std::collections::BTreeMap;

use proptest::prelude::*;

use navhist::types::{FeatureTokens, Observation, Position, SamplerConfig, Trajectory};

/// Integer-valued token matrices keep cosine values landing on exact
/// thresholds often enough to exercise tie handling.
fn tokens_strategy(feat_dim: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(
        prop::collection::vec((-2i8..=2).prop_map(f64::from), feat_dim),
        1..=3,
    )
}

#[derive(Debug, Clone)]
enum Step {
    /// Move to a fresh grid position with fresh tokens.
    Fresh { dx: i8, dy: i8, tokens: Vec<Vec<f64>> },
    /// Return to an earlier frame's position (optionally jittered by one grid
    /// step) and optionally reuse its tokens.
    Revisit { back: prop::sample::Index, jitter: i8, reuse_tokens: bool, tokens: Vec<Vec<f64>> },
}

fn step_strategy(feat_dim: usize) -> impl Strategy<Value = Step> {
    prop_oneof![
        ((-4i8..=4), (-4i8..=4), tokens_strategy(feat_dim))
            .prop_map(|(dx, dy, tokens)| Step::Fresh { dx, dy, tokens }),
        (any::<prop::sample::Index>(), (-1i8..=1), any::<bool>(), tokens_strategy(feat_dim))
            .prop_map(|(back, jitter, reuse_tokens, tokens)| Step::Revisit {
                back,
                jitter,
                reuse_tokens,
                tokens
            }),
    ]
}

pub fn trajectory_strategy() -> impl Strategy<Value = Trajectory> {
    (2usize..=4)
        .prop_flat_map(|feat_dim| prop::collection::vec(step_strategy(feat_dim), 0..60))
        .prop_map(|steps| realize(&steps))
}

fn realize(steps: &[Step]) -> Trajectory {
    const GRID: f64 = 0.05;
    let mut visited: Vec<(Position, Vec<Vec<f64>>)> = Vec::new();
    let mut cur = (0i64, 0i64);
    let mut observations = Vec::new();
    for (t, step) in steps.iter().enumerate() {
        let (pos, tokens) = match step {
            // A revisit with nothing to revisit degrades to a fresh step.
            Step::Revisit { back, jitter, reuse_tokens, tokens } if !visited.is_empty() => {
                let (base_pos, base_tokens) = visited[back.index(visited.len())].clone();
                let pos = Position::new(base_pos.x + *jitter as f64 * GRID, base_pos.y, 0.9);
                let tokens = if *reuse_tokens { base_tokens } else { tokens.clone() };
                (pos, tokens)
            }
            Step::Fresh { dx, dy, tokens } => {
                cur = (cur.0 + *dx as i64, cur.1 + *dy as i64);
                let pos = Position::new(cur.0 as f64 * GRID, cur.1 as f64 * GRID, 0.9);
                (pos, tokens.clone())
            }
            Step::Revisit { tokens, .. } => (Position::new(0.0, 0.0, 0.9), tokens.clone()),
        };
        visited.push((pos, tokens.clone()));
        observations.push(
            Observation::new(
                t as u64,
                pos,
                0.0,
                FeatureTokens::new(tokens).expect("generated tokens are valid"),
                None,
                None,
            )
            .expect("generated observation is valid"),
        );
    }
    Trajectory::new(observations, BTreeMap::new()).expect("generated trajectory is valid")
}

pub fn config_strategy() -> impl Strategy<Value = SamplerConfig> {
    (
        1usize..=8,
        prop::sample::select(vec![0.0, 0.05, 0.1, 0.2]),
        prop::sample::select(vec![-0.5, 0.0, 0.9, 0.95, 1.0]),
        any::<bool>(),
    )
        .prop_map(|(window_w, epsilon_m, tau, pool_before_compare)| SamplerConfig {
            window_w,
            epsilon_m,
            tau,
            pool_before_compare,
        })
}
