//! Deterministic synthetic grid-world substrate: seeded houses, smooth
//! locality-preserving features, and trajectory policies that exercise the
//! sampler and metrics end to end.

mod features;
mod house;
mod policy;

pub use features::{synth_features, FeatureSynth, FeatureSynthConfig};
pub use house::{generate_house, GridPos, House, Room, Tile, AGENT_Z_M, CELL_M};
pub use policy::{run_policy, Policy, PolicyRun, SUCCESS_DIST_M};
