//! Observation-memory toolkit for embodied navigation.
//!
//! The centerpiece is an adaptive 3D-aware history sampler that compresses a
//! FIFO queue of observations into a fixed-length window by dropping frames
//! that are both spatially adjacent to an already-kept frame and captured
//! from a similar viewpoint. Around it sit:
//!
//! - axis-separated sinusoidal 2D positional encoding and additive fusion,
//! - navigation metrics (SR, SEL, %Rooms) and a composite training objective,
//! - a deterministic grid-world simulator producing revisit-heavy and
//!   shortest-path episodes with smooth synthetic features,
//! - an EQA context pipeline (final-W frame selection, prompt assembly,
//!   structured response parsing) over a pluggable generation client,
//! - JSON-lines trajectory and episode file formats.
//!
//! Every sampler run is checked against [`sampler::oracle_sample`], an
//! independent brute-force reference that must agree exactly.

pub mod eqa;
pub mod error;
pub mod io;
pub mod metrics;
pub mod posenc;
pub mod sampler;
pub mod sim;
pub mod types;

pub use error::{Error, Result};
pub use types::{
    Episode, FeatureTokens, Observation, Position, SampledHistory, SamplerConfig, Trajectory,
};
