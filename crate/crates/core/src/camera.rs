//! Pinhole camera model.
//!
//! Conventions, fixed across the whole pipeline:
//!
//! * Camera frame: +x right along image rows, +y down along image columns,
//!   boresight -z. At the identity attitude the boresight points world -z
//!   (nadir), image right is world +x (east), image down is world +y.
//! * Attitude: intrinsic Z-Y-X, world_from_camera = Rz(yaw) Ry(pitch)
//!   Rx(roll). Angles are degrees in every public field and argument,
//!   converted to radians once here.
//! * Pixels: (u, v) with u rightward and v downward; rays pass through the
//!   pixel center (u + 0.5, v + 0.5). The principal point is the image
//!   center (width/2, height/2) in pixel units.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::math::{normalize_angle_deg, Rotation3, Vec3};

/// Sensor and optics description.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Intrinsics {
    pub focal_length_m: f64,
    pub pixel_pitch_m: f64,
    pub width_px: u32,
    pub height_px: u32,
    /// Multiplies radiance before quantization to 8 bits.
    pub exposure_scale: f64,
}

impl Intrinsics {
    pub fn new(
        focal_length_m: f64,
        pixel_pitch_m: f64,
        width_px: u32,
        height_px: u32,
        exposure_scale: f64,
    ) -> Result<Self> {
        if !focal_length_m.is_finite() || focal_length_m <= 0.0 {
            return Err(Error::domain(format!(
                "focal length must be positive and finite, got {focal_length_m}"
            )));
        }
        if !pixel_pitch_m.is_finite() || pixel_pitch_m <= 0.0 {
            return Err(Error::domain(format!(
                "pixel pitch must be positive and finite, got {pixel_pitch_m}"
            )));
        }
        if width_px == 0 || height_px == 0 {
            return Err(Error::domain(format!(
                "image dimensions must be positive, got {width_px}x{height_px}"
            )));
        }
        if !exposure_scale.is_finite() || exposure_scale <= 0.0 {
            return Err(Error::domain(format!(
                "exposure scale must be positive and finite, got {exposure_scale}"
            )));
        }
        Ok(Intrinsics {
            focal_length_m,
            pixel_pitch_m,
            width_px,
            height_px,
            exposure_scale,
        })
    }
}

/// Camera position and attitude in the world frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Pose {
    pub position_m: [f64; 3],
    pub roll_deg: f64,
    pub pitch_deg: f64,
    pub yaw_deg: f64,
}

impl Pose {
    /// Builds a pose, normalizing each angle into (-180, 180].
    pub fn new(position_m: [f64; 3], roll_deg: f64, pitch_deg: f64, yaw_deg: f64) -> Result<Self> {
        if position_m.iter().any(|c| !c.is_finite()) {
            return Err(Error::domain(format!(
                "pose position must be finite, got {position_m:?}"
            )));
        }
        for (name, v) in [("roll", roll_deg), ("pitch", pitch_deg), ("yaw", yaw_deg)] {
            if !v.is_finite() {
                return Err(Error::domain(format!("pose {name} must be finite, got {v}")));
            }
        }
        Ok(Pose {
            position_m,
            roll_deg: normalize_angle_deg(roll_deg),
            pitch_deg: normalize_angle_deg(pitch_deg),
            yaw_deg: normalize_angle_deg(yaw_deg),
        })
    }

    pub fn position(&self) -> Vec3 {
        Vec3::new(self.position_m[0], self.position_m[1], self.position_m[2])
    }

    /// world_from_camera rotation for this attitude.
    pub fn rotation(&self) -> Rotation3<f64> {
        rotation_from_rpy(self.roll_deg, self.pitch_deg, self.yaw_deg)
    }
}

/// Intrinsics plus pose.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CameraModel {
    pub intrinsics: Intrinsics,
    pub pose: Pose,
}

/// World-frame ray with unit direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray {
    pub origin: Vec3,
    pub direction: Vec3,
}

impl Ray {
    pub fn new(origin: Vec3, direction: Vec3) -> Result<Self> {
        let norm = direction.norm();
        if !norm.is_finite() || norm == 0.0 {
            return Err(Error::domain(format!(
                "ray direction must be a nonzero finite vector, got {direction:?}"
            )));
        }
        Ok(Ray {
            origin,
            direction: direction / norm,
        })
    }

    /// Point at parameter `t` (meters, since the direction is unit).
    pub fn at(&self, t: f64) -> Vec3 {
        self.origin + self.direction * t
    }
}

/// world_from_camera = Rz(yaw) Ry(pitch) Rx(roll), angles in degrees.
pub fn rotation_from_rpy(roll_deg: f64, pitch_deg: f64, yaw_deg: f64) -> Rotation3<f64> {
    Rotation3::from_euler_angles(
        roll_deg.to_radians(),
        pitch_deg.to_radians(),
        yaw_deg.to_radians(),
    )
}

/// Ray through pixel center (u + 0.5, v + 0.5). Sub-pixel coordinates are
/// allowed inside [0, width) x [0, height).
pub fn pixel_ray(intrinsics: &Intrinsics, pose: &Pose, u: f64, v: f64) -> Result<Ray> {
    if !(u >= 0.0 && u < intrinsics.width_px as f64) || !(v >= 0.0 && v < intrinsics.height_px as f64)
    {
        return Err(Error::out_of_range(format!(
            "pixel ({u}, {v}) outside {}x{} image",
            intrinsics.width_px, intrinsics.height_px
        )));
    }
    let cx = intrinsics.width_px as f64 / 2.0;
    let cy = intrinsics.height_px as f64 / 2.0;
    let p = intrinsics.pixel_pitch_m;
    let cam_dir = Vec3::new(
        (u + 0.5 - cx) * p,
        (v + 0.5 - cy) * p,
        -intrinsics.focal_length_m,
    );
    let world_dir = pose.rotation() * cam_dir.normalize();
    Ok(Ray {
        origin: pose.position(),
        direction: world_dir,
    })
}

/// Full field of view (horizontal, vertical) in degrees.
pub fn fov_from_intrinsics(intrinsics: &Intrinsics) -> (f64, f64) {
    let half = |px: u32| {
        (px as f64 * intrinsics.pixel_pitch_m / (2.0 * intrinsics.focal_length_m)).atan()
    };
    (
        2.0 * half(intrinsics.width_px).to_degrees(),
        2.0 * half(intrinsics.height_px).to_degrees(),
    )
}

/// Ground sample distance in meters at a slant range: one pixel footprint
/// range * pitch / focal_length.
pub fn ground_sample_distance(intrinsics: &Intrinsics, slant_range_m: f64) -> Result<f64> {
    if !slant_range_m.is_finite() || slant_range_m <= 0.0 {
        return Err(Error::domain(format!(
            "slant range must be positive and finite, got {slant_range_m}"
        )));
    }
    Ok(slant_range_m * intrinsics.pixel_pitch_m / intrinsics.focal_length_m)
}
