//! Surface reflectance models.
//!
//! Three laws, selected by [`ReflectanceModel`]:
//!
//! * `lambert`: I = I0 cos(theta_i), clamped at 0.
//! * `ls_paper`: I = (I0 / pi) / r^2, a simplified Lommel-Seeliger variant
//!   that keeps only the inverse-square range factor. Deliberately has no
//!   angular term; the key name marks it as the nonstandard form it is.
//! * `hapke_paper`: I = I0 (cos(theta_i) cos(theta_e) / pi) *
//!   ((1 - B0) / (1 + B0) + B0), a reduced Hapke form whose opposition
//!   bracket depends only on B0. Also marked by its key name.
//!
//! Negative incidence/emission cosines clamp to 0 before use. Shadowed
//! points return exactly 0 regardless of the model.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reflectance law selection. The serialized names double as the scenario
/// file keys.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum ReflectanceModel {
    #[serde(rename = "lambert")]
    Lambert,
    #[serde(rename = "ls_paper")]
    LommelSeeliger,
    #[serde(rename = "hapke_paper")]
    Hapke {
        /// Opposition surge amplitude B0 in [0, 1].
        b0: f64,
    },
}

/// Local geometry at a shaded point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShadingGeometry {
    /// Surface normal dotted with the sun direction.
    pub cos_incidence: f64,
    /// Surface normal dotted with the view direction.
    pub cos_emission: f64,
    /// Distance factor for range-dependent laws; 1 for a normalized
    /// directional source.
    pub range_to_light: f64,
    /// True when terrain blocks the sun at this point.
    pub in_shadow: bool,
}

/// I0 cos(theta_i), clamped at 0.
pub fn lambert(i0: f64, cos_incidence: f64) -> f64 {
    i0 * cos_incidence.max(0.0)
}

/// (I0 / pi) / r^2. The range must be positive.
pub fn lommel_seeliger(i0: f64, range_to_light: f64) -> Result<f64> {
    if !range_to_light.is_finite() || range_to_light <= 0.0 {
        return Err(Error::domain(format!(
            "light range must be positive and finite, got {range_to_light}"
        )));
    }
    Ok(i0 / std::f64::consts::PI / (range_to_light * range_to_light))
}

/// I0 (cos(theta_i) cos(theta_e) / pi) * ((1 - B0) / (1 + B0) + B0) with B0
/// in [0, 1]; cosines clamp at 0.
pub fn hapke(i0: f64, cos_incidence: f64, cos_emission: f64, b0: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&b0) || !b0.is_finite() {
        return Err(Error::domain(format!(
            "opposition amplitude B0 must lie in [0, 1], got {b0}"
        )));
    }
    let bracket = (1.0 - b0) / (1.0 + b0) + b0;
    Ok(i0 * (cos_incidence.max(0.0) * cos_emission.max(0.0) / std::f64::consts::PI) * bracket)
}

/// Radiance at a point: albedo times the selected law, 0 in shadow.
pub fn shade(
    model: &ReflectanceModel,
    albedo: f64,
    i0: f64,
    geometry: &ShadingGeometry,
) -> Result<f64> {
    if geometry.in_shadow {
        return Ok(0.0);
    }
    let value = match model {
        ReflectanceModel::Lambert => lambert(i0, geometry.cos_incidence),
        ReflectanceModel::LommelSeeliger => lommel_seeliger(i0, geometry.range_to_light)?,
        ReflectanceModel::Hapke { b0 } => {
            hapke(i0, geometry.cos_incidence, geometry.cos_emission, *b0)?
        }
    };
    Ok(albedo * value)
}
