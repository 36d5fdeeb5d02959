//! Shared domain types: observations, trajectories, sampler configuration and
//! the fixed-length sampled history.

use std::collections::{BTreeMap, BTreeSet};
use std::ops::Sub;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for the constant-height check during trajectory ingestion.
pub const HEIGHT_TOLERANCE_M: f64 = 1e-9;

/// Absolute agent position in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Position {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Position {
    pub const ZERO: Position = Position { x: 0.0, y: 0.0, z: 0.0 };

    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Position { x, y, z }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Euclidean norm.
    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    /// Euclidean distance to `other`.
    pub fn distance(&self, other: &Position) -> f64 {
        (*self - *other).norm()
    }
}

impl Sub for Position {
    type Output = Position;

    fn sub(self, rhs: Position) -> Position {
        Position::new(self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

impl From<[f64; 3]> for Position {
    fn from(v: [f64; 3]) -> Self {
        Position::new(v[0], v[1], v[2])
    }
}

impl From<Position> for [f64; 3] {
    fn from(p: Position) -> Self {
        [p.x, p.y, p.z]
    }
}

/// One timestep's feature token matrix, shape `n_tokens x feat_dim`.
///
/// Construction validates shape uniformity and finiteness, so a held value is
/// always well-formed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct FeatureTokens {
    tokens: Vec<Vec<f64>>,
}

impl FeatureTokens {
    pub fn new(tokens: Vec<Vec<f64>>) -> Result<Self> {
        if tokens.is_empty() {
            return Err(Error::EmptyTokenMatrix);
        }
        let dim = tokens[0].len();
        if dim == 0 {
            return Err(Error::InvalidObservation("feature dimension must be >= 1".into()));
        }
        for row in &tokens {
            if row.len() != dim {
                return Err(Error::LengthMismatch { left: dim, right: row.len() });
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidObservation("non-finite feature value".into()));
            }
        }
        Ok(FeatureTokens { tokens })
    }

    /// Single-token matrix from one vector.
    pub fn single(token: Vec<f64>) -> Result<Self> {
        FeatureTokens::new(vec![token])
    }

    pub fn n_tokens(&self) -> usize {
        self.tokens.len()
    }

    pub fn feat_dim(&self) -> usize {
        self.tokens[0].len()
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.tokens
    }

    /// Tokens concatenated row-major into one vector.
    pub fn flattened(&self) -> Vec<f64> {
        self.tokens.iter().flatten().copied().collect()
    }
}

impl TryFrom<Vec<Vec<f64>>> for FeatureTokens {
    type Error = Error;

    fn try_from(tokens: Vec<Vec<f64>>) -> Result<Self> {
        FeatureTokens::new(tokens)
    }
}

impl From<FeatureTokens> for Vec<Vec<f64>> {
    fn from(f: FeatureTokens) -> Self {
        f.tokens
    }
}

/// A single element of the observation queue.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub t: u64,
    #[serde(rename = "p")]
    pub position: Position,
    pub heading_deg: f64,
    #[serde(rename = "feature")]
    pub features: FeatureTokens,
    pub room_id: Option<String>,
    pub action: Option<String>,
}

impl Observation {
    pub fn new(
        t: u64,
        position: Position,
        heading_deg: f64,
        features: FeatureTokens,
        room_id: Option<String>,
        action: Option<String>,
    ) -> Result<Self> {
        let obs = Observation { t, position, heading_deg, features, room_id, action };
        obs.validate()?;
        Ok(obs)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.position.is_finite() {
            return Err(Error::InvalidObservation("non-finite position".into()));
        }
        if !self.heading_deg.is_finite() || self.heading_deg < 0.0 || self.heading_deg >= 360.0 {
            return Err(Error::InvalidObservation(format!(
                "heading_deg {} outside [0, 360)",
                self.heading_deg
            )));
        }
        Ok(())
    }
}

/// Chronologically ordered observation queue plus free-form metadata.
///
/// Index 0 is the initial time, the last index is the current time. The
/// cross-observation invariants (contiguous timesteps from 0, constant
/// height, uniform feature dimension) are enforced at construction, so
/// downstream consumers never re-validate.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    observations: Vec<Observation>,
    meta: BTreeMap<String, String>,
}

impl Trajectory {
    pub fn new(observations: Vec<Observation>, meta: BTreeMap<String, String>) -> Result<Self> {
        for (i, obs) in observations.iter().enumerate() {
            obs.validate()?;
            if obs.t != i as u64 {
                return Err(Error::InvalidTrajectory(format!(
                    "timestep {} at index {} (must increase by 1 from 0)",
                    obs.t, i
                )));
            }
        }
        if let Some(first) = observations.first() {
            let z0 = first.position.z;
            let dim = first.features.feat_dim();
            for obs in &observations {
                if (obs.position.z - z0).abs() > HEIGHT_TOLERANCE_M {
                    return Err(Error::InvalidTrajectory(format!(
                        "non-constant height: z={} vs {}",
                        obs.position.z, z0
                    )));
                }
                if obs.features.feat_dim() != dim {
                    return Err(Error::InvalidTrajectory(format!(
                        "feature dimension {} at t={} differs from {}",
                        obs.features.feat_dim(),
                        obs.t,
                        dim
                    )));
                }
            }
        }
        Ok(Trajectory { observations, meta })
    }

    pub fn empty() -> Self {
        Trajectory { observations: Vec::new(), meta: BTreeMap::new() }
    }

    /// Same observations with one extra metadata entry.
    pub fn with_meta_entry(mut self, key: &str, value: &str) -> Self {
        self.meta.insert(key.to_string(), value.to_string());
        self
    }

    pub fn observations(&self) -> &[Observation] {
        &self.observations
    }

    pub fn meta(&self) -> &BTreeMap<String, String> {
        &self.meta
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    pub fn last(&self) -> Option<&Observation> {
        self.observations.last()
    }

    /// Feature dimension shared by all observations, if any exist.
    pub fn feat_dim(&self) -> Option<usize> {
        self.observations.first().map(|o| o.features.feat_dim())
    }
}

/// Parameters of the history sampler.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    /// Fixed output window length W.
    pub window_w: usize,
    /// Spatial adjacency radius in meters.
    pub epsilon_m: f64,
    /// Cosine-similarity level above which two frames count as the same viewpoint.
    pub tau: f64,
    /// Max-pool the candidate's tokens before the cosine test (default). When
    /// false, the test compares raw flattened token matrices; unequal token
    /// counts then never match.
    pub pool_before_compare: bool,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig { window_w: 60, epsilon_m: 0.1, tau: 0.95, pool_before_compare: true }
    }
}

impl SamplerConfig {
    pub fn new(window_w: usize, epsilon_m: f64, tau: f64) -> Result<Self> {
        let cfg = SamplerConfig { window_w, epsilon_m, tau, ..SamplerConfig::default() };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.window_w < 1 {
            return Err(Error::InvalidConfig("window_w must be >= 1".into()));
        }
        if !self.epsilon_m.is_finite() || self.epsilon_m < 0.0 {
            return Err(Error::InvalidConfig(format!("epsilon_m {} must be finite and >= 0", self.epsilon_m)));
        }
        if !self.tau.is_finite() || !(-1.0..=1.0).contains(&self.tau) {
            return Err(Error::InvalidConfig(format!("tau {} must lie in [-1, 1]", self.tau)));
        }
        Ok(())
    }
}

/// Serialized form of [`SampledHistory`]; also the on-disk JSON schema.
#[derive(Serialize, Deserialize)]
struct SampledHistoryRepr {
    w: usize,
    n_valid: usize,
    source_t: Vec<i64>,
    rel_positions: Vec<[f64; 3]>,
    features: Vec<Vec<f64>>,
}

/// Fixed-length-W sampler output: pooled features, relative positions and the
/// originating timesteps, newest first. Padded slots replicate the last valid
/// entry; an all-dummy history (from an empty queue) has `n_valid == 0` and
/// `source_t == -1` everywhere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SampledHistoryRepr", into = "SampledHistoryRepr")]
pub struct SampledHistory {
    features: Vec<Vec<f64>>,
    rel_positions: Vec<Position>,
    source_t: Vec<i64>,
    n_valid: usize,
}

impl SampledHistory {
    pub fn new(
        features: Vec<Vec<f64>>,
        rel_positions: Vec<Position>,
        source_t: Vec<i64>,
        n_valid: usize,
    ) -> Result<Self> {
        let h = SampledHistory { features, rel_positions, source_t, n_valid };
        h.validate()?;
        Ok(h)
    }

    /// All-dummy history of length `w`: zero-length feature vectors, zero
    /// relative positions, `source_t = -1`. No feature dimension is known for
    /// an empty queue.
    pub fn dummy(w: usize) -> Self {
        SampledHistory {
            features: vec![Vec::new(); w],
            rel_positions: vec![Position::ZERO; w],
            source_t: vec![-1; w],
            n_valid: 0,
        }
    }

    fn validate(&self) -> Result<()> {
        let w = self.features.len();
        if w == 0 {
            return Err(Error::InvalidHistory("window length must be >= 1".into()));
        }
        if self.rel_positions.len() != w || self.source_t.len() != w {
            return Err(Error::InvalidHistory("component lengths differ".into()));
        }
        if self.n_valid > w {
            return Err(Error::InvalidHistory(format!("n_valid {} exceeds window {}", self.n_valid, w)));
        }
        for p in &self.rel_positions {
            if !p.is_finite() {
                return Err(Error::InvalidHistory("non-finite relative position".into()));
            }
        }
        for f in &self.features {
            if f.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidHistory("non-finite feature value".into()));
            }
        }
        if self.n_valid == 0 {
            if self.source_t.iter().any(|&t| t != -1) {
                return Err(Error::InvalidHistory("dummy history must have source_t = -1 everywhere".into()));
            }
            return Ok(());
        }
        // Valid entries: newest first, anchored at the current frame.
        for i in 0..self.n_valid {
            if self.source_t[i] < 0 {
                return Err(Error::InvalidHistory(format!("negative source_t at valid slot {i}")));
            }
            if i > 0 && self.source_t[i] >= self.source_t[i - 1] {
                return Err(Error::InvalidHistory("valid entries must be in reverse chronological order".into()));
            }
        }
        let anchor = self.rel_positions[0];
        if anchor.x != 0.0 || anchor.y != 0.0 || anchor.z != 0.0 {
            return Err(Error::InvalidHistory("entry 0 must have relative position (0,0,0)".into()));
        }
        // Padded slots replicate the last valid entry.
        let last = self.n_valid - 1;
        for i in self.n_valid..w {
            if self.source_t[i] != self.source_t[last]
                || self.rel_positions[i] != self.rel_positions[last]
                || self.features[i] != self.features[last]
            {
                return Err(Error::InvalidHistory(format!("padded slot {i} does not replicate the last valid entry")));
            }
        }
        Ok(())
    }

    pub fn window_w(&self) -> usize {
        self.features.len()
    }

    pub fn n_valid(&self) -> usize {
        self.n_valid
    }

    pub fn features(&self) -> &[Vec<f64>] {
        &self.features
    }

    pub fn rel_positions(&self) -> &[Position] {
        &self.rel_positions
    }

    pub fn source_t(&self) -> &[i64] {
        &self.source_t
    }
}

impl TryFrom<SampledHistoryRepr> for SampledHistory {
    type Error = Error;

    fn try_from(r: SampledHistoryRepr) -> Result<Self> {
        if r.w != r.features.len() {
            return Err(Error::InvalidHistory(format!(
                "declared w={} but {} feature entries",
                r.w,
                r.features.len()
            )));
        }
        SampledHistory::new(
            r.features,
            r.rel_positions.into_iter().map(Position::from).collect(),
            r.source_t,
            r.n_valid,
        )
    }
}

impl From<SampledHistory> for SampledHistoryRepr {
    fn from(h: SampledHistory) -> Self {
        SampledHistoryRepr {
            w: h.features.len(),
            n_valid: h.n_valid,
            source_t: h.source_t,
            rel_positions: h.rel_positions.into_iter().map(<[f64; 3]>::from).collect(),
            features: h.features,
        }
    }
}

/// Outcome summary of one navigation episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Episode {
    pub success: bool,
    /// Shortest possible episode length in steps (`w`).
    #[serde(rename = "w")]
    pub shortest_len: u64,
    /// Achieved episode length in steps (`e`).
    #[serde(rename = "e")]
    pub episode_len: u64,
    pub rooms_visited: BTreeSet<String>,
    pub total_rooms: usize,
}

impl Episode {
    pub fn new(
        success: bool,
        shortest_len: u64,
        episode_len: u64,
        rooms_visited: BTreeSet<String>,
        total_rooms: usize,
    ) -> Result<Self> {
        let ep = Episode { success, shortest_len, episode_len, rooms_visited, total_rooms };
        ep.validate()?;
        Ok(ep)
    }

    pub fn validate(&self) -> Result<()> {
        if self.shortest_len == 0 || self.episode_len == 0 {
            return Err(Error::NonPositiveLength);
        }
        if self.total_rooms == 0 {
            return Err(Error::InvalidEpisode("total_rooms must be >= 1".into()));
        }
        if self.rooms_visited.len() > self.total_rooms {
            return Err(Error::RoomsExceedTotal {
                visited: self.rooms_visited.len(),
                total: self.total_rooms,
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn obs(t: u64, x: f64) -> Observation {
        Observation::new(
            t,
            Position::new(x, 0.0, 0.9),
            0.0,
            FeatureTokens::single(vec![1.0, 0.0]).unwrap(),
            None,
            None,
        )
        .unwrap()
    }

    #[test]
    fn feature_tokens_reject_empty_and_ragged() {
        assert!(matches!(FeatureTokens::new(vec![]), Err(Error::EmptyTokenMatrix)));
        assert!(FeatureTokens::new(vec![vec![1.0, 2.0], vec![3.0]]).is_err());
        assert!(FeatureTokens::new(vec![vec![f64::NAN]]).is_err());
    }

    #[test]
    fn observation_rejects_out_of_range_heading() {
        let f = FeatureTokens::single(vec![1.0]).unwrap();
        assert!(Observation::new(0, Position::ZERO, 360.0, f.clone(), None, None).is_err());
        assert!(Observation::new(0, Position::ZERO, -1.0, f, None, None).is_err());
    }

    #[test]
    fn trajectory_requires_contiguous_timesteps() {
        let res = Trajectory::new(vec![obs(0, 0.0), obs(2, 0.1)], BTreeMap::new());
        assert!(res.is_err());
    }

    #[test]
    fn trajectory_requires_constant_height() {
        let mut second = obs(1, 0.1);
        second.position.z = 1.1;
        let res = Trajectory::new(vec![obs(0, 0.0), second], BTreeMap::new());
        assert!(res.is_err());
    }

    #[test]
    fn dummy_history_round_trips() {
        let d = SampledHistory::dummy(3);
        let json = serde_json::to_string(&d).unwrap();
        let back: SampledHistory = serde_json::from_str(&json).unwrap();
        assert_eq!(d, back);
        assert_eq!(back.n_valid(), 0);
    }

    #[test]
    fn history_validation_rejects_bad_anchor() {
        let res = SampledHistory::new(
            vec![vec![1.0], vec![1.0]],
            vec![Position::new(0.5, 0.0, 0.0), Position::ZERO],
            vec![1, 0],
            2,
        );
        assert!(res.is_err());
    }

    #[test]
    fn episode_validation() {
        let rooms: BTreeSet<String> = ["a".to_string()].into();
        assert!(Episode::new(true, 0, 5, rooms.clone(), 2).is_err());
        assert!(Episode::new(true, 5, 5, rooms.clone(), 0).is_err());
        let two: BTreeSet<String> = ["a".to_string(), "b".to_string()].into();
        assert!(Episode::new(true, 5, 5, two, 1).is_err());
        assert!(Episode::new(true, 5, 5, rooms, 2).is_ok());
    }
}
