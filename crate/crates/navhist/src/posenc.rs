//! Axis-separated sinusoidal 2D positional encoding and additive fusion.
//!
//! Each axis gets a length `d = c/2` vector with interleaved sin/cos pairs at
//! geometrically decaying frequencies; the x and y encodings concatenate to a
//! length-`c` vector that is added to a feature and passed through an affine
//! map (identity by default). Only x and y are encoded; height is constant.

use crate::error::{Error, Result};
use crate::types::Position;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PosEncConfig {
    feat_dim: usize,
    base: f64,
}

impl PosEncConfig {
    pub const DEFAULT_BASE: f64 = 10000.0;

    /// `feat_dim` must be a positive multiple of 4 so each axis holds whole
    /// sin/cos pairs.
    pub fn new(feat_dim: usize, base: f64) -> Result<Self> {
        if feat_dim == 0 || !feat_dim.is_multiple_of(4) {
            return Err(Error::InvalidConfig(format!(
                "feat_dim {feat_dim} must be a positive multiple of 4"
            )));
        }
        if !base.is_finite() || base <= 1.0 {
            return Err(Error::InvalidConfig(format!("base {base} must be finite and > 1")));
        }
        Ok(PosEncConfig { feat_dim, base })
    }

    pub fn with_default_base(feat_dim: usize) -> Result<Self> {
        PosEncConfig::new(feat_dim, Self::DEFAULT_BASE)
    }

    pub fn feat_dim(&self) -> usize {
        self.feat_dim
    }

    /// Per-axis encoding length `d = c/2`.
    pub fn axis_len(&self) -> usize {
        self.feat_dim / 2
    }

    pub fn base(&self) -> f64 {
        self.base
    }
}

/// Angular frequencies `omega_k = exp(-2k ln(base) / d)` for
/// `k = 0 .. d/2 - 1`; strictly decreasing with `omega_0 = 1`.
pub fn frequencies(cfg: &PosEncConfig) -> Vec<f64> {
    let d = cfg.axis_len() as f64;
    (0..cfg.axis_len() / 2)
        .map(|k| (-2.0 * k as f64 * cfg.base.ln() / d).exp())
        .collect()
}

/// Length-`d` encoding of one coordinate: element m is
/// `sin(v * omega_{m/2})` for even m and `cos(v * omega_{m/2})` for odd m.
pub fn encode_axis(v: f64, cfg: &PosEncConfig) -> Vec<f64> {
    let omega = frequencies(cfg);
    (0..cfg.axis_len())
        .map(|m| {
            let angle = v * omega[m / 2];
            if m % 2 == 0 {
                angle.sin()
            } else {
                angle.cos()
            }
        })
        .collect()
}

/// Concatenated `[encode_axis(x), encode_axis(y)]`, total length `c`.
pub fn encode_2d(x: f64, y: f64, cfg: &PosEncConfig) -> Vec<f64> {
    let mut out = encode_axis(x, cfg);
    out.extend(encode_axis(y, cfg));
    out
}

/// Affine map applied after the positional encoding is added. In a full
/// model this slot holds a learned projection; the default is the identity
/// so desk-scale behavior is fully determined.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineFusion {
    weight: Vec<Vec<f64>>,
    bias: Vec<f64>,
}

impl AffineFusion {
    pub fn identity(c: usize) -> Self {
        let mut weight = vec![vec![0.0; c]; c];
        for (i, row) in weight.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        AffineFusion { weight, bias: vec![0.0; c] }
    }

    pub fn new(weight: Vec<Vec<f64>>, bias: Vec<f64>) -> Result<Self> {
        let c = weight.len();
        if c == 0 || bias.len() != c {
            return Err(Error::InvalidConfig("fusion weight/bias dimensions differ".into()));
        }
        for row in &weight {
            if row.len() != c {
                return Err(Error::InvalidConfig("fusion weight must be square".into()));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidConfig("non-finite fusion weight".into()));
            }
        }
        if bias.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig("non-finite fusion bias".into()));
        }
        Ok(AffineFusion { weight, bias })
    }

    pub fn dim(&self) -> usize {
        self.bias.len()
    }
}

/// Position-enhanced feature: `weight * (feature + PE(x, y)) + bias`. Only
/// the x and y components of `rel_pos` contribute.
pub fn fuse_position(
    feature: &[f64],
    rel_pos: Position,
    cfg: &PosEncConfig,
    fusion: &AffineFusion,
) -> Result<Vec<f64>> {
    let c = cfg.feat_dim();
    if feature.len() != c {
        return Err(Error::LengthMismatch { left: feature.len(), right: c });
    }
    if fusion.dim() != c {
        return Err(Error::LengthMismatch { left: fusion.dim(), right: c });
    }
    let pe = encode_2d(rel_pos.x, rel_pos.y, cfg);
    let enhanced: Vec<f64> = feature.iter().zip(&pe).map(|(f, p)| f + p).collect();
    let out = fusion
        .weight
        .iter()
        .zip(&fusion.bias)
        .map(|(row, b)| row.iter().zip(&enhanced).map(|(w, v)| w * v).sum::<f64>() + b)
        .collect();
    Ok(out)
}
