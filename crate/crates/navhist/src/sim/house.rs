//! Seeded grid-world houses: an occupancy grid of 0.2 m cells partitioned
//! into labeled rectangular rooms connected by single-cell doors.

use std::collections::VecDeque;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::Position;

/// Grid cell edge length; matches a 20 cm base-move step.
pub const CELL_M: f64 = 0.2;
/// Constant agent height.
pub const AGENT_Z_M: f64 = 0.9;

const MIN_SLAB_W: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tile {
    Free,
    Wall,
}

/// Grid coordinate, row-major.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GridPos {
    pub row: usize,
    pub col: usize,
}

impl GridPos {
    pub fn new(row: usize, col: usize) -> Self {
        GridPos { row, col }
    }
}

/// Rectangular room region, inclusive bounds. A room's rectangle may cover
/// wall cells (the partition wall on its east side); the free cells inside
/// the rectangle are exactly the room's floor plus its door.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Room {
    pub label: String,
    pub row0: usize,
    pub col0: usize,
    pub row1: usize,
    pub col1: usize,
}

impl Room {
    pub fn contains(&self, p: GridPos) -> bool {
        (self.row0..=self.row1).contains(&p.row) && (self.col0..=self.col1).contains(&p.col)
    }
}

#[derive(Serialize, Deserialize)]
struct HouseRepr {
    seed: u64,
    cell_m: f64,
    width: usize,
    height: usize,
    /// Row-major run-length encoding: [count, "f" | "w"] pairs.
    rle: Vec<(usize, String)>,
    rooms: Vec<Room>,
}

/// Occupancy grid plus room partition. Generated deterministically from a
/// seed; every free cell is reachable from every other.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "HouseRepr", into = "HouseRepr")]
pub struct House {
    seed: u64,
    width: usize,
    height: usize,
    tiles: Vec<Tile>,
    rooms: Vec<Room>,
}

impl House {
    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn rooms(&self) -> &[Room] {
        &self.rooms
    }

    pub fn n_rooms(&self) -> usize {
        self.rooms.len()
    }

    pub fn in_bounds(&self, p: GridPos) -> bool {
        p.row < self.height && p.col < self.width
    }

    pub fn tile(&self, p: GridPos) -> Tile {
        self.tiles[p.row * self.width + p.col]
    }

    pub fn is_free(&self, p: GridPos) -> bool {
        self.in_bounds(p) && self.tile(p) == Tile::Free
    }

    /// Free cells in row-major order.
    pub fn free_cells(&self) -> impl Iterator<Item = GridPos> + '_ {
        (0..self.height).flat_map(move |row| {
            (0..self.width)
                .map(move |col| GridPos::new(row, col))
                .filter(move |&p| self.is_free(p))
        })
    }

    pub fn first_free(&self) -> GridPos {
        self.free_cells().next().expect("a house always has free cells")
    }

    /// World coordinates of a cell center.
    pub fn cell_center(&self, p: GridPos) -> Position {
        Position::new(
            (p.col as f64 + 0.5) * CELL_M,
            (p.row as f64 + 0.5) * CELL_M,
            AGENT_Z_M,
        )
    }

    /// Label of the room containing a free cell.
    pub fn room_of(&self, p: GridPos) -> Option<&str> {
        if !self.is_free(p) {
            return None;
        }
        self.rooms.iter().find(|r| r.contains(p)).map(|r| r.label.as_str())
    }

    /// Deterministic neighbor order: east, south, west, north.
    fn neighbors(&self, p: GridPos) -> impl Iterator<Item = GridPos> + '_ {
        const DELTAS: [(isize, isize); 4] = [(0, 1), (1, 0), (0, -1), (-1, 0)];
        DELTAS.iter().filter_map(move |&(dr, dc)| {
            let row = p.row.checked_add_signed(dr)?;
            let col = p.col.checked_add_signed(dc)?;
            let q = GridPos::new(row, col);
            self.is_free(q).then_some(q)
        })
    }

    /// BFS step distances from `start` to every free cell.
    pub fn bfs_distances(&self, start: GridPos) -> Vec<Option<u32>> {
        let mut dist = vec![None; self.tiles.len()];
        if !self.is_free(start) {
            return dist;
        }
        let idx = |p: GridPos| p.row * self.width + p.col;
        dist[idx(start)] = Some(0);
        let mut queue = VecDeque::from([start]);
        while let Some(p) = queue.pop_front() {
            let d = dist[idx(p)].unwrap();
            for q in self.neighbors(p) {
                if dist[idx(q)].is_none() {
                    dist[idx(q)] = Some(d + 1);
                    queue.push_back(q);
                }
            }
        }
        dist
    }

    /// Shortest 4-connected path from `start` to `goal`, inclusive of both.
    pub fn shortest_path(&self, start: GridPos, goal: GridPos) -> Result<Vec<GridPos>> {
        if !self.is_free(start) || !self.is_free(goal) {
            return Err(Error::InvalidPolicyRun("start and goal must be free cells".into()));
        }
        let idx = |p: GridPos| p.row * self.width + p.col;
        let mut parent: Vec<Option<GridPos>> = vec![None; self.tiles.len()];
        let mut seen = vec![false; self.tiles.len()];
        seen[idx(start)] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(p) = queue.pop_front() {
            if p == goal {
                let mut path = vec![goal];
                let mut cur = goal;
                while let Some(prev) = parent[idx(cur)] {
                    path.push(prev);
                    cur = prev;
                }
                path.reverse();
                return Ok(path);
            }
            for q in self.neighbors(p) {
                if !seen[idx(q)] {
                    seen[idx(q)] = true;
                    parent[idx(q)] = Some(p);
                    queue.push_back(q);
                }
            }
        }
        Err(Error::UnreachableGoal)
    }

    /// Farthest free cell from `start` by BFS distance; ties break row-major.
    pub fn farthest_free(&self, start: GridPos) -> GridPos {
        let dist = self.bfs_distances(start);
        let mut best = start;
        let mut best_d = 0;
        for p in self.free_cells() {
            if let Some(d) = dist[p.row * self.width + p.col] {
                if d > best_d {
                    best_d = d;
                    best = p;
                }
            }
        }
        best
    }
}

/// Generate a deterministic house: `n_rooms` vertical slab rooms separated by
/// single-cell walls, each wall pierced by one door at a seeded row.
pub fn generate_house(seed: u64, n_rooms: usize, extent_m: f64) -> Result<House> {
    if n_rooms == 0 {
        return Err(Error::InvalidConfig("n_rooms must be >= 1".into()));
    }
    if !extent_m.is_finite() || extent_m <= 0.0 {
        return Err(Error::InvalidConfig(format!("extent_m {extent_m} must be finite and > 0")));
    }
    let n = (extent_m / CELL_M).round() as usize;
    if n < 3 {
        return Err(Error::Infeasible(format!("extent {extent_m} m is under {} m", 3.0 * CELL_M)));
    }
    let interior_w = n - 2;
    let needed = n_rooms * MIN_SLAB_W + (n_rooms - 1);
    if interior_w < needed {
        return Err(Error::Infeasible(format!(
            "extent {extent_m} m gives {interior_w} interior columns, {n_rooms} rooms need {needed}"
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // Slab widths: equal base width plus a seeded distribution of the remainder.
    let base = (interior_w - (n_rooms - 1)) / n_rooms;
    let rem = (interior_w - (n_rooms - 1)) % n_rooms;
    let mut extras = vec![0usize; n_rooms];
    let mut order: Vec<usize> = (0..n_rooms).collect();
    order.shuffle(&mut rng);
    for &slab in order.iter().take(rem) {
        extras[slab] = 1;
    }

    let mut tiles = vec![Tile::Wall; n * n];
    let mut rooms = Vec::with_capacity(n_rooms);
    let mut col = 1usize;
    for (i, extra) in extras.iter().enumerate() {
        let slab_w = base + extra;
        for row in 1..n - 1 {
            for c in col..col + slab_w {
                tiles[row * n + c] = Tile::Free;
            }
        }
        let last = i == n_rooms - 1;
        let rect_end = if last { col + slab_w - 1 } else { col + slab_w };
        rooms.push(Room {
            label: format!("room_{i}"),
            row0: 1,
            col0: col,
            row1: n - 2,
            col1: rect_end,
        });
        if !last {
            let door_row = rng.random_range(1..n - 1);
            tiles[door_row * n + col + slab_w] = Tile::Free;
        }
        col += slab_w + 1;
    }

    Ok(House { seed, width: n, height: n, tiles, rooms })
}

impl TryFrom<HouseRepr> for House {
    type Error = Error;

    fn try_from(r: HouseRepr) -> Result<Self> {
        if (r.cell_m - CELL_M).abs() > 1e-12 {
            return Err(Error::InvalidConfig(format!("unsupported cell size {}", r.cell_m)));
        }
        let mut tiles = Vec::with_capacity(r.width * r.height);
        for (count, kind) in &r.rle {
            let tile = match kind.as_str() {
                "f" => Tile::Free,
                "w" => Tile::Wall,
                other => return Err(Error::InvalidConfig(format!("unknown tile kind {other:?}"))),
            };
            tiles.extend(std::iter::repeat_n(tile, *count));
        }
        if tiles.len() != r.width * r.height {
            return Err(Error::InvalidConfig(format!(
                "rle covers {} cells, grid is {}x{}",
                tiles.len(),
                r.height,
                r.width
            )));
        }
        for room in &r.rooms {
            if room.row1 >= r.height || room.col1 >= r.width || room.row0 > room.row1 || room.col0 > room.col1 {
                return Err(Error::InvalidConfig(format!("room {:?} outside grid", room.label)));
            }
        }
        Ok(House { seed: r.seed, width: r.width, height: r.height, tiles, rooms: r.rooms })
    }
}

impl From<House> for HouseRepr {
    fn from(h: House) -> Self {
        let mut rle: Vec<(usize, String)> = Vec::new();
        for tile in &h.tiles {
            let kind = match tile {
                Tile::Free => "f",
                Tile::Wall => "w",
            };
            match rle.last_mut() {
                Some((count, k)) if k == kind => *count += 1,
                _ => rle.push((1, kind.to_string())),
            }
        }
        HouseRepr {
            seed: h.seed,
            cell_m: CELL_M,
            width: h.width,
            height: h.height,
            rle,
            rooms: h.rooms,
        }
    }
}
