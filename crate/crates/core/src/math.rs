//! Small shared math helpers and vector aliases.

pub use nalgebra::{Matrix3, Rotation3, Vector3};

/// 3-component f64 vector used for positions and directions.
pub type Vec3 = Vector3<f64>;

/// Normalizes an angle in degrees to the half-open interval (-180, 180].
pub fn normalize_angle_deg(deg: f64) -> f64 {
    let r = deg.rem_euclid(360.0);
    if r > 180.0 {
        r - 360.0
    } else {
        r
    }
}

/// Wraps an angle difference in degrees onto (-180, 180] so that linear
/// interpolation between two angles follows the shorter arc.
pub fn shortest_arc_deg(from: f64, to: f64) -> f64 {
    normalize_angle_deg(to - from)
}
