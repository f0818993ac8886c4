//! Synthetic imaging of airless heightfield terrain.
//!
//! The pipeline: load or build a terrain grid with registered albedo,
//! derive shading products (normal, displacement, horizon maps), then cast
//! camera rays against the bilinear surface and shade each hit with a
//! selectable reflectance law and cast-shadow test. Single frames and
//! interpolated multi-frame passes share the same deterministic renderer.
//!
//! Conventions used throughout: world x east, y north, z up, meters;
//! angles cross the public API in degrees and are converted to radians
//! once at the point of use; grids are row-major with row 0 southernmost.

pub mod camera;
pub mod error;
pub mod illumination;
pub mod math;
pub mod photometry;
pub mod render;
pub mod scene;
pub mod sequence;
pub mod terrain;

pub use error::{Error, Result};
