//! Shot decisions for 2D simulated soccer.
//!
//! An analytic aim-noise model filters candidate targets on the goal line, a
//! small tanh network trained on labeled kick scenes scores the survivors,
//! and a paired shot-episode harness compares policies.

pub mod aim;
pub mod dynamics;
pub mod error;
pub mod exec;
pub mod experiment;
pub mod geometry;
pub mod metrics;
pub mod mlp;
pub mod policy;
pub mod rng;
pub mod scene;
pub mod stats;

pub use error::{Error, Result};
