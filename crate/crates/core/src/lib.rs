//! Volumetric path tracing with path-graph refinement of per-path radiance.

pub mod error;
pub mod harness;
pub mod image;
pub mod math;
pub mod pathgraph;
pub mod scene;
pub mod spectrum;
pub mod transport;

pub use error::{Error, Result};
pub use image::Image;
pub use math::{Aabb, Ray, Vec3};
pub use spectrum::Spectrum;
