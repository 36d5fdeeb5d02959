//! Trajectory policies over a house: a revisit-heavy closed tour, a seeded
//! random walk, and a BFS shortest path. Each run yields a trajectory plus
//! its episode summary.

use std::collections::{BTreeMap, BTreeSet};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::types::{Episode, Observation, Trajectory};

use super::features::{FeatureSynth, FeatureSynthConfig};
use super::house::{GridPos, House};

/// Success distance threshold for episode termination.
pub const SUCCESS_DIST_M: f64 = 2.0;

/// Salt mixed into the feature seed so the walk's move stream is independent
/// of the feature basis draws.
const WALK_SEED_SALT: u64 = 0x7761_6c6b;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Policy {
    /// Repeat a fixed 8-pose closed tour; heavy exact revisits.
    RevisitLoop,
    /// Seeded uniform walk over free neighbors.
    RandomWalk,
    /// Follow the BFS shortest path from start to goal.
    ShortestPath,
}

impl Policy {
    pub fn name(&self) -> &'static str {
        match self {
            Policy::RevisitLoop => "revisit_loop",
            Policy::RandomWalk => "random_walk",
            Policy::ShortestPath => "shortest_path",
        }
    }
}

impl FromStr for Policy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "revisit_loop" => Ok(Policy::RevisitLoop),
            "random_walk" => Ok(Policy::RandomWalk),
            "shortest_path" => Ok(Policy::ShortestPath),
            other => Err(Error::InvalidConfig(format!("unknown policy {other:?}"))),
        }
    }
}

/// A policy rollout: the observation trajectory and its episode summary.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyRun {
    pub trajectory: Trajectory,
    pub episode: Episode,
}

/// One pose along a rollout.
#[derive(Debug, Clone, Copy)]
struct Pose {
    cell: GridPos,
    heading_deg: f64,
    action: Option<&'static str>,
}

fn step_heading(from: GridPos, to: GridPos) -> (f64, &'static str) {
    if to.col == from.col + 1 {
        (0.0, "move_e")
    } else if to.row == from.row + 1 {
        (90.0, "move_s")
    } else if to.col + 1 == from.col {
        (180.0, "move_w")
    } else {
        (270.0, "move_n")
    }
}

/// Perimeter of the 3x3 block anchored at `start` (top-left), clockwise.
/// Eight distinct (cell, heading) poses; the heading at each cell points at
/// the next tour cell.
fn revisit_tour(house: &House, start: GridPos) -> Result<Vec<Pose>> {
    let (r, c) = (start.row, start.col);
    let ring = [
        GridPos::new(r, c),
        GridPos::new(r, c + 1),
        GridPos::new(r, c + 2),
        GridPos::new(r + 1, c + 2),
        GridPos::new(r + 2, c + 2),
        GridPos::new(r + 2, c + 1),
        GridPos::new(r + 2, c),
        GridPos::new(r + 1, c),
    ];
    if let Some(blocked) = ring.iter().find(|&&p| !house.is_free(p)) {
        return Err(Error::InvalidPolicyRun(format!(
            "revisit tour needs a free 3x3 ring at {start:?}; {blocked:?} is not free"
        )));
    }
    Ok((0..8)
        .map(|i| {
            let next = ring[(i + 1) % 8];
            let (heading_deg, action) = step_heading(ring[i], next);
            Pose { cell: ring[i], heading_deg, action: Some(action) }
        })
        .collect())
}

fn build_run(
    house: &House,
    poses: &[Pose],
    start: GridPos,
    goal: GridPos,
    episode_len: u64,
    synth: &FeatureSynth,
) -> Result<PolicyRun> {
    let mut rooms_visited: BTreeSet<String> = BTreeSet::new();
    let mut observations = Vec::with_capacity(poses.len());
    for (t, pose) in poses.iter().enumerate() {
        if let Some(room) = house.room_of(pose.cell) {
            rooms_visited.insert(room.to_string());
        }
        let position = house.cell_center(pose.cell);
        observations.push(Observation::new(
            t as u64,
            position,
            pose.heading_deg,
            synth.features(position, pose.heading_deg),
            house.room_of(pose.cell).map(str::to_string),
            pose.action.map(str::to_string),
        )?);
    }

    let shortest = house
        .bfs_distances(start)[goal.row * house.width() + goal.col]
        .ok_or(Error::UnreachableGoal)? as u64;
    if shortest == 0 {
        return Err(Error::InvalidPolicyRun("goal equals start".into()));
    }

    let final_cell = poses.last().expect("rollout is non-empty").cell;
    let success = house.cell_center(final_cell).distance(&house.cell_center(goal)) <= SUCCESS_DIST_M;

    let trajectory = Trajectory::new(observations, BTreeMap::new())?;
    let episode = Episode::new(success, shortest, episode_len, rooms_visited, house.n_rooms())?;
    Ok(PolicyRun { trajectory, episode })
}

/// Roll out `policy` on `house` from `start`.
///
/// `goal` defaults to the farthest free cell from `start`. `steps` bounds the
/// rollout for the revisit and random-walk policies (`revisit_loop` emits
/// exactly `steps` observations; `random_walk` takes `steps` moves); the
/// shortest-path policy walks the whole BFS path and ignores `steps`.
pub fn run_policy(
    house: &House,
    policy: Policy,
    start: GridPos,
    goal: Option<GridPos>,
    steps: usize,
    fcfg: &FeatureSynthConfig,
) -> Result<PolicyRun> {
    if !house.is_free(start) {
        return Err(Error::InvalidPolicyRun(format!("start {start:?} is not a free cell")));
    }
    let goal = match goal {
        Some(g) if !house.is_free(g) => {
            return Err(Error::InvalidPolicyRun(format!("goal {g:?} is not a free cell")))
        }
        Some(g) => g,
        None => house.farthest_free(start),
    };
    let synth = FeatureSynth::new(*fcfg)?;

    match policy {
        Policy::RevisitLoop => {
            if steps == 0 {
                return Err(Error::InvalidPolicyRun("steps must be >= 1".into()));
            }
            let tour = revisit_tour(house, start)?;
            let poses: Vec<Pose> = (0..steps).map(|t| tour[t % tour.len()]).collect();
            build_run(house, &poses, start, goal, steps as u64, &synth)
        }
        Policy::RandomWalk => {
            if steps == 0 {
                return Err(Error::InvalidPolicyRun("steps must be >= 1".into()));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(fcfg.seed ^ WALK_SEED_SALT);
            let mut poses = vec![Pose { cell: start, heading_deg: 0.0, action: None }];
            let mut cur = start;
            for _ in 0..steps {
                const DELTAS: [(isize, isize); 4] = [(0, 1), (1, 0), (0, -1), (-1, 0)];
                let options: Vec<GridPos> = DELTAS
                    .iter()
                    .filter_map(|&(dr, dc)| {
                        let row = cur.row.checked_add_signed(dr)?;
                        let col = cur.col.checked_add_signed(dc)?;
                        let q = GridPos::new(row, col);
                        house.is_free(q).then_some(q)
                    })
                    .collect();
                if options.is_empty() {
                    return Err(Error::InvalidPolicyRun(format!("walk stuck at {cur:?}")));
                }
                let next = options[rng.random_range(0..options.len())];
                let (heading_deg, action) = step_heading(cur, next);
                poses.push(Pose { cell: next, heading_deg, action: Some(action) });
                cur = next;
            }
            build_run(house, &poses, start, goal, steps as u64, &synth)
        }
        Policy::ShortestPath => {
            let path = house.shortest_path(start, goal)?;
            if path.len() < 2 {
                return Err(Error::InvalidPolicyRun("goal equals start".into()));
            }
            let moves = (path.len() - 1) as u64;
            let mut poses = Vec::with_capacity(path.len());
            for (i, &cell) in path.iter().enumerate() {
                let (heading_deg, action) = if i + 1 < path.len() {
                    let (h, a) = step_heading(cell, path[i + 1]);
                    (h, if i == 0 { None } else { Some(a) })
                } else {
                    let (h, a) = step_heading(path[i - 1], cell);
                    (h, Some(a))
                };
                poses.push(Pose { cell, heading_deg, action });
            }
            build_run(house, &poses, start, goal, moves, &synth)
        }
    }
}
