//! Adaptive 3D-aware history sampling.
//!
//! [`sample_history`] walks the observation queue newest-first, keeps a frame
//! unless it is both spatially adjacent to an already-selected frame (L2
//! distance `< epsilon_m`) and captured from a similar viewpoint (cosine
//! similarity `> tau`), and pads with the last valid entry up to the window
//! length W. [`oracle_sample`] is an independent straight-line reference used
//! as the equivalence oracle; the two must agree exactly on every input.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::types::{FeatureTokens, Position, SampledHistory, SamplerConfig, Trajectory};

/// Per-dimension maximum over a frame's tokens, reducing the matrix to one
/// vector. Errors on an empty matrix or ragged rows.
pub fn max_pool(tokens: &[Vec<f64>]) -> Result<Vec<f64>> {
    let first = tokens.first().ok_or(Error::EmptyTokenMatrix)?;
    let dim = first.len();
    let mut out = first.clone();
    for row in &tokens[1..] {
        if row.len() != dim {
            return Err(Error::LengthMismatch { left: dim, right: row.len() });
        }
        for (o, v) in out.iter_mut().zip(row) {
            *o = o.max(*v);
        }
    }
    Ok(out)
}

impl FeatureTokens {
    /// Max-pool over this matrix; infallible because construction guarantees
    /// a non-empty, rectangular matrix.
    pub fn max_pool(&self) -> Vec<f64> {
        max_pool(self.rows()).expect("FeatureTokens is non-empty and rectangular")
    }
}

/// Cosine similarity clamped to `[-1, 1]` against rounding. Errors on length
/// mismatch or a zero-norm operand.
pub fn cosine_similarity(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch { left: a.len(), right: b.len() });
    }
    let mut dot = 0.0;
    let mut na = 0.0;
    let mut nb = 0.0;
    for (x, y) in a.iter().zip(b) {
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        return Err(Error::ZeroNorm);
    }
    Ok((dot / (na.sqrt() * nb.sqrt())).clamp(-1.0, 1.0))
}

/// Cosine for the skip test: degenerate operands (zero norm or mismatched
/// lengths) count as different viewpoints and yield 0.
fn cosine_or_zero(a: &[f64], b: &[f64]) -> f64 {
    cosine_similarity(a, b).unwrap_or(0.0)
}

/// Select up to W non-redundant frames from `traj`, newest first, then pad.
///
/// An empty queue yields the all-dummy history. Otherwise the newest frame is
/// always selected and anchors the relative coordinates; comparisons are
/// strict (`<` for epsilon, `>` for tau), so `epsilon_m = 0` or `tau = 1`
/// disables skipping entirely.
pub fn sample_history(traj: &Trajectory, cfg: &SamplerConfig) -> Result<SampledHistory> {
    cfg.validate()?;
    let obs = traj.observations();
    if obs.is_empty() {
        return Ok(SampledHistory::dummy(cfg.window_w));
    }

    let pooled: Vec<Vec<f64>> = obs.iter().map(|o| o.features.max_pool()).collect();
    let flats: Vec<Vec<f64>> = if cfg.pool_before_compare {
        Vec::new()
    } else {
        obs.iter().map(|o| o.features.flattened()).collect()
    };

    let newest = obs.len() - 1;
    let p_ref = obs[newest].position;

    let mut features: Vec<Vec<f64>> = Vec::with_capacity(cfg.window_w);
    let mut rel_positions: Vec<Position> = Vec::with_capacity(cfg.window_w);
    let mut source_t: Vec<i64> = Vec::with_capacity(cfg.window_w);
    let mut selected_idx: Vec<usize> = Vec::with_capacity(cfg.window_w);

    for i in (0..=newest).rev() {
        let rel = obs[i].position - p_ref;
        if i < newest {
            let redundant = selected_idx.iter().enumerate().any(|(j, &sel)| {
                if (rel - rel_positions[j]).norm() >= cfg.epsilon_m {
                    return false;
                }
                let sim = if cfg.pool_before_compare {
                    cosine_or_zero(&pooled[i], &features[j])
                } else {
                    cosine_or_zero(&flats[i], &flats[sel])
                };
                sim > cfg.tau
            });
            if redundant {
                continue;
            }
        }
        features.push(pooled[i].clone());
        rel_positions.push(rel);
        source_t.push(obs[i].t as i64);
        selected_idx.push(i);
        if features.len() == cfg.window_w {
            break;
        }
    }

    // The newest frame is always selected, so n_valid >= 1 for non-empty
    // input and padding always has a last valid entry to replicate.
    let n_valid = features.len();
    while features.len() < cfg.window_w {
        features.push(features[n_valid - 1].clone());
        rel_positions.push(rel_positions[n_valid - 1]);
        source_t.push(source_t[n_valid - 1]);
    }

    SampledHistory::new(features, rel_positions, source_t, n_valid)
}

/// Brute-force reference sampler: a literal, unoptimized transliteration of
/// the selection procedure, with its own inline pooling, distance and cosine
/// arithmetic. Kept deliberately independent of [`sample_history`] so the two
/// can serve as an equivalence check on each other.
pub fn oracle_sample(traj: &Trajectory, cfg: &SamplerConfig) -> Result<SampledHistory> {
    fn pool(tokens: &[Vec<f64>]) -> Vec<f64> {
        let dim = tokens[0].len();
        let mut out = vec![f64::NEG_INFINITY; dim];
        for row in tokens {
            for k in 0..dim {
                if row[k] > out[k] {
                    out[k] = row[k];
                }
            }
        }
        out
    }

    fn cos(a: &[f64], b: &[f64]) -> f64 {
        if a.len() != b.len() {
            return 0.0;
        }
        let mut dot = 0.0;
        let mut na = 0.0;
        let mut nb = 0.0;
        for (x, y) in a.iter().zip(b) {
            dot += x * y;
            na += x * x;
            nb += y * y;
        }
        if na == 0.0 || nb == 0.0 {
            return 0.0;
        }
        (dot / (na.sqrt() * nb.sqrt())).clamp(-1.0, 1.0)
    }

    fn dist(a: Position, b: Position) -> f64 {
        let dx = a.x - b.x;
        let dy = a.y - b.y;
        let dz = a.z - b.z;
        (dx * dx + dy * dy + dz * dz).sqrt()
    }

    cfg.validate()?;
    let g = traj.observations();
    if g.is_empty() {
        return Ok(SampledHistory::dummy(cfg.window_w));
    }

    let p_ref = g[g.len() - 1].position;
    let mut v: Vec<Vec<f64>> = Vec::new();
    let mut p: Vec<Position> = Vec::new();
    let mut src: Vec<i64> = Vec::new();
    let mut raw: Vec<Vec<f64>> = Vec::new();
    let mut k = 0usize;

    let mut i = g.len();
    while i > 0 {
        i -= 1;
        let p_rel = Position::new(
            g[i].position.x - p_ref.x,
            g[i].position.y - p_ref.y,
            g[i].position.z - p_ref.z,
        );
        if i < g.len() - 1 {
            let mut skip = false;
            for j in 0..k {
                if dist(p_rel, p[j]) < cfg.epsilon_m {
                    let sim = if cfg.pool_before_compare {
                        cos(&pool(g[i].features.rows()), &v[j])
                    } else {
                        cos(&g[i].features.flattened(), &raw[j])
                    };
                    if sim > cfg.tau {
                        skip = true;
                        break;
                    }
                }
            }
            if skip {
                continue;
            }
        }
        v.push(pool(g[i].features.rows()));
        p.push(p_rel);
        src.push(g[i].t as i64);
        raw.push(g[i].features.flattened());
        k += 1;
        if k == cfg.window_w {
            break;
        }
    }

    let n_valid = k;
    while k < cfg.window_w {
        v.push(v[v.len() - 1].clone());
        p.push(p[p.len() - 1]);
        src.push(src[src.len() - 1]);
        k += 1;
    }

    SampledHistory::new(v, p, src, n_valid)
}

/// Selection statistics over a `(trajectory, history)` pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RedundancyStats {
    pub n_total: usize,
    pub n_selected: usize,
    pub n_padded: usize,
    pub retained_fraction: f64,
    /// Minimum pairwise distance (meters) among selected entries; 0 when
    /// fewer than two entries exist.
    pub min_pairwise_dist_m: f64,
    /// Mean pairwise cosine similarity among selected entries; 0 when fewer
    /// than two entries exist.
    pub mean_pairwise_cos: f64,
}

/// Counts and pairwise statistics over the non-padded entries of `history`.
pub fn redundancy_stats(traj: &Trajectory, history: &SampledHistory) -> Result<RedundancyStats> {
    if traj.is_empty() {
        return Err(Error::EmptyInput("trajectory"));
    }
    let n_total = traj.len();
    let n_selected = history.n_valid();
    let n_padded = history.window_w() - n_selected;

    let rels = &history.rel_positions()[..n_selected];
    let feats = &history.features()[..n_selected];

    let mut min_dist = 0.0;
    let mut mean_cos = 0.0;
    if n_selected >= 2 {
        min_dist = f64::INFINITY;
        let mut cos_sum = 0.0;
        let mut pairs = 0usize;
        for a in 0..n_selected {
            for b in (a + 1)..n_selected {
                min_dist = min_dist.min(rels[a].distance(&rels[b]));
                cos_sum += cosine_or_zero(&feats[a], &feats[b]);
                pairs += 1;
            }
        }
        mean_cos = cos_sum / pairs as f64;
    }

    Ok(RedundancyStats {
        n_total,
        n_selected,
        n_padded,
        retained_fraction: n_selected as f64 / n_total as f64,
        min_pairwise_dist_m: min_dist,
        mean_pairwise_cos: mean_cos,
    })
}
