//! Smooth synthetic observation features from seeded random cosine bases.
//!
//! The map sends a pose (x, y, heading) to a deterministic unit vector whose
//! cosine similarity decays with pose separation: approximately
//! `exp(-||dp||^2 / (2 l^2) - |du|^2 / (2 s^2))` for positional offset `dp`
//! and heading-direction offset `du`. Nearby same-heading poses stay close to
//! similarity 1; poses far apart in space or heading decorrelate.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};

use crate::error::{Error, Result};
use crate::types::{FeatureTokens, Position};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureSynthConfig {
    pub feat_dim: usize,
    pub n_basis: usize,
    pub length_scale_m: f64,
    pub heading_scale_deg: f64,
    pub seed: u64,
}

impl Default for FeatureSynthConfig {
    fn default() -> Self {
        FeatureSynthConfig {
            feat_dim: 32,
            n_basis: 8,
            length_scale_m: 1.0,
            heading_scale_deg: 45.0,
            seed: 0,
        }
    }
}

impl FeatureSynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.feat_dim == 0 || self.n_basis == 0 {
            return Err(Error::InvalidConfig("feat_dim and n_basis must be >= 1".into()));
        }
        if !self.length_scale_m.is_finite() || self.length_scale_m <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "length_scale_m {} must be finite and > 0",
                self.length_scale_m
            )));
        }
        if !self.heading_scale_deg.is_finite() || self.heading_scale_deg <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "heading_scale_deg {} must be finite and > 0",
                self.heading_scale_deg
            )));
        }
        Ok(())
    }
}

/// Frozen random cosine basis; reusable across many pose evaluations.
#[derive(Debug, Clone)]
pub struct FeatureSynth {
    cfg: FeatureSynthConfig,
    /// Per output dimension, `n_basis` frequency vectors over the scaled
    /// (x, y, cos h, sin h) input embedding.
    freqs: Vec<Vec<[f64; 4]>>,
    phases: Vec<Vec<f64>>,
}

impl FeatureSynth {
    pub fn new(cfg: FeatureSynthConfig) -> Result<Self> {
        cfg.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let normal = StandardNormal;
        let phase = Uniform::new(0.0, std::f64::consts::TAU)
            .expect("valid uniform range");
        let mut freqs = Vec::with_capacity(cfg.feat_dim);
        let mut phases = Vec::with_capacity(cfg.feat_dim);
        for _ in 0..cfg.feat_dim {
            let mut dim_freqs = Vec::with_capacity(cfg.n_basis);
            let mut dim_phases = Vec::with_capacity(cfg.n_basis);
            for _ in 0..cfg.n_basis {
                dim_freqs.push([
                    normal.sample(&mut rng),
                    normal.sample(&mut rng),
                    normal.sample(&mut rng),
                    normal.sample(&mut rng),
                ]);
                dim_phases.push(phase.sample(&mut rng));
            }
            freqs.push(dim_freqs);
            phases.push(dim_phases);
        }
        Ok(FeatureSynth { cfg, freqs, phases })
    }

    pub fn config(&self) -> &FeatureSynthConfig {
        &self.cfg
    }

    /// Unit-norm single-token features for a pose.
    pub fn features(&self, position: Position, heading_deg: f64) -> FeatureTokens {
        let heading_rad = heading_deg.to_radians();
        let heading_scale_rad = self.cfg.heading_scale_deg.to_radians();
        let z = [
            position.x / self.cfg.length_scale_m,
            position.y / self.cfg.length_scale_m,
            heading_rad.cos() / heading_scale_rad,
            heading_rad.sin() / heading_scale_rad,
        ];
        let scale = 1.0 / (self.cfg.n_basis as f64).sqrt();
        let mut v: Vec<f64> = self
            .freqs
            .iter()
            .zip(&self.phases)
            .map(|(dim_freqs, dim_phases)| {
                dim_freqs
                    .iter()
                    .zip(dim_phases)
                    .map(|(w, b)| (w[0] * z[0] + w[1] * z[1] + w[2] * z[2] + w[3] * z[3] + b).cos())
                    .sum::<f64>()
                    * scale
            })
            .collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm < 1e-12 {
            v[0] = 1.0;
            for x in v[1..].iter_mut() {
                *x = 0.0;
            }
        } else {
            for x in &mut v {
                *x /= norm;
            }
        }
        FeatureTokens::single(v).expect("synthetic features are finite and non-empty")
    }
}

/// One-shot convenience over [`FeatureSynth`]; rebuilds the basis per call.
pub fn synth_features(position: Position, heading_deg: f64, cfg: &FeatureSynthConfig) -> Result<FeatureTokens> {
    Ok(FeatureSynth::new(*cfg)?.features(position, heading_deg))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::cosine_similarity;

    fn cos_at(cfg: &FeatureSynthConfig, a: (Position, f64), b: (Position, f64)) -> f64 {
        let synth = FeatureSynth::new(*cfg).unwrap();
        let fa = synth.features(a.0, a.1);
        let fb = synth.features(b.0, b.1);
        cosine_similarity(&fa.rows()[0], &fb.rows()[0]).unwrap()
    }

    #[test]
    fn identical_pose_gives_unit_similarity() {
        let cfg = FeatureSynthConfig::default();
        let p = Position::new(1.2, -0.4, 0.9);
        assert_eq!(cos_at(&cfg, (p, 30.0), (p, 30.0)), 1.0);
    }

    #[test]
    fn output_is_unit_norm() {
        let cfg = FeatureSynthConfig::default();
        let synth = FeatureSynth::new(cfg).unwrap();
        let f = synth.features(Position::new(0.3, 0.7, 0.9), 120.0);
        let norm: f64 = f.rows()[0].iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!((norm - 1.0).abs() < 1e-12);
        assert_eq!(f.n_tokens(), 1);
        assert_eq!(f.feat_dim(), cfg.feat_dim);
    }

    #[test]
    fn opposite_headings_decorrelate() {
        let p = Position::new(0.0, 0.0, 0.9);
        let mut below = 0;
        for seed in 0..100 {
            let cfg = FeatureSynthConfig { heading_scale_deg: 45.0, seed, ..Default::default() };
            if cos_at(&cfg, (p, 0.0), (p, 180.0)) < 0.95 {
                below += 1;
            }
        }
        assert!(below >= 95, "only {below}/100 seeds below 0.95");
    }

    #[test]
    fn distant_positions_decorrelate() {
        let a = Position::new(0.0, 0.0, 0.9);
        let b = Position::new(5.0, 0.0, 0.9);
        let mut below = 0;
        for seed in 0..100 {
            let cfg = FeatureSynthConfig { length_scale_m: 0.5, seed, ..Default::default() };
            if cos_at(&cfg, (a, 0.0), (b, 0.0)) < 0.5 {
                below += 1;
            }
        }
        assert!(below >= 95, "only {below}/100 seeds below 0.5");
    }

    #[test]
    fn nearby_same_heading_poses_stay_similar() {
        let a = Position::new(1.0, 1.0, 0.9);
        let b = Position::new(1.05, 1.0, 0.9);
        let cfg = FeatureSynthConfig { length_scale_m: 2.0, seed: 3, ..Default::default() };
        assert!(cos_at(&cfg, (a, 90.0), (b, 90.0)) > 0.95);
    }

    #[test]
    fn config_validation() {
        assert!(FeatureSynthConfig { feat_dim: 0, ..Default::default() }.validate().is_err());
        assert!(FeatureSynthConfig { length_scale_m: 0.0, ..Default::default() }.validate().is_err());
        assert!(FeatureSynthConfig { heading_scale_deg: -1.0, ..Default::default() }.validate().is_err());
    }
}
