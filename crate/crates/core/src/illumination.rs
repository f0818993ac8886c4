//! Sun state and illumination geometry.
//!
//! The sun is a directional source described by elevation above the horizon
//! and azimuth clockwise from north, both degrees, plus a collimated
//! intensity I0.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::math::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SunState {
    /// Degrees above the horizon, in [-90, 90].
    pub elevation_deg: f64,
    /// Degrees clockwise from north (+y).
    pub azimuth_deg: f64,
    /// Collimated intensity I0, nonnegative.
    pub intensity: f64,
}

impl SunState {
    pub fn new(elevation_deg: f64, azimuth_deg: f64, intensity: f64) -> Result<Self> {
        if !(-90.0..=90.0).contains(&elevation_deg) || !elevation_deg.is_finite() {
            return Err(Error::domain(format!(
                "sun elevation must lie in [-90, 90] degrees, got {elevation_deg}"
            )));
        }
        if !azimuth_deg.is_finite() {
            return Err(Error::domain(format!(
                "sun azimuth must be finite, got {azimuth_deg}"
            )));
        }
        if !intensity.is_finite() || intensity < 0.0 {
            return Err(Error::domain(format!(
                "sun intensity must be nonnegative and finite, got {intensity}"
            )));
        }
        Ok(SunState {
            elevation_deg,
            azimuth_deg,
            intensity,
        })
    }

    /// Sun state that realizes a requested phase angle for a nadir-looking
    /// camera over level ground: elevation = 90 - phase.
    pub fn from_phase_angle(phase_deg: f64, azimuth_deg: f64, intensity: f64) -> Result<Self> {
        if !(0.0..=180.0).contains(&phase_deg) || !phase_deg.is_finite() {
            return Err(Error::domain(format!(
                "phase angle must lie in [0, 180] degrees, got {phase_deg}"
            )));
        }
        SunState::new(90.0 - phase_deg, azimuth_deg, intensity)
    }
}

/// Unit vector pointing from the surface toward the sun.
pub fn sun_direction(sun: &SunState) -> Vec3 {
    let el = sun.elevation_deg.to_radians();
    let az = sun.azimuth_deg.to_radians();
    Vec3::new(az.sin() * el.cos(), az.cos() * el.cos(), el.sin())
}

/// Angle between the directions to the sun and to the viewer, in degrees.
/// Both arguments must be unit vectors (within 1e-6).
pub fn phase_angle(sun_dir: &Vec3, view_dir: &Vec3) -> Result<f64> {
    for (name, v) in [("sun", sun_dir), ("view", view_dir)] {
        if (v.norm() - 1.0).abs() > 1e-6 {
            return Err(Error::domain(format!(
                "{name} direction must be unit length, |v| = {}",
                v.norm()
            )));
        }
    }
    Ok(sun_dir.dot(view_dir).clamp(-1.0, 1.0).acos().to_degrees())
}
