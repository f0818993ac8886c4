//! Scene: everything one render needs, bound together and validated.

use crate::camera::CameraModel;
use crate::error::{Error, Result};
use crate::illumination::SunState;
use crate::photometry::ReflectanceModel;
use crate::render::{RenderOptions, ShadowMethod};
use crate::terrain::{
    compute_horizon_map, derive_normal_map, DemGrid, HorizonMap, NormalMap, Raster,
};

/// Immutable description of one rendering task. Shared by reference across
/// worker threads.
#[derive(Debug, Clone)]
pub struct Scene {
    pub dem: DemGrid,
    /// Albedo in [0, 1], registered to the elevation grid.
    pub albedo: Raster,
    pub normals: NormalMap,
    /// Required only when the shadow method is the horizon map.
    pub horizon: Option<HorizonMap>,
    pub sun: SunState,
    pub camera: CameraModel,
    pub model: ReflectanceModel,
    pub options: RenderOptions,
    /// Finite light distance for range-dependent laws; None means a
    /// directional source with the range normalized to 1.
    pub light_distance_m: Option<f64>,
}

impl Scene {
    /// Derives the maps the options call for and assembles a validated
    /// scene. `horizon_sectors` is only consulted when the shadow method
    /// needs the horizon map.
    pub fn assemble(
        dem: DemGrid,
        albedo: Raster,
        sun: SunState,
        camera: CameraModel,
        model: ReflectanceModel,
        options: RenderOptions,
        horizon_sectors: usize,
    ) -> Result<Scene> {
        let normals = derive_normal_map(&dem);
        let horizon = match options.shadow_method {
            ShadowMethod::HorizonMap => Some(compute_horizon_map(&dem, horizon_sectors)?),
            _ => None,
        };
        let scene = Scene {
            dem,
            albedo,
            normals,
            horizon,
            sun,
            camera,
            model,
            options,
            light_distance_m: None,
        };
        scene.validate()?;
        Ok(scene)
    }

    /// Checks the cross-field invariants. Called by the renderer before any
    /// pixel work.
    pub fn validate(&self) -> Result<()> {
        if !self.albedo.same_grid(self.dem.raster()) {
            return Err(Error::config(format!(
                "albedo raster ({}x{}) is not registered to the elevation grid ({}x{})",
                self.albedo.rows(),
                self.albedo.cols(),
                self.dem.rows(),
                self.dem.cols()
            )));
        }
        if let Some(bad) = self
            .albedo
            .values()
            .iter()
            .find(|v| !v.is_nan() && !(0.0..=1.0).contains(*v))
        {
            return Err(Error::config(format!(
                "albedo value {bad} outside [0, 1]"
            )));
        }
        if !self.normals.same_grid(self.dem.raster()) {
            return Err(Error::config(
                "normal map is not registered to the elevation grid",
            ));
        }
        if self.options.shadow_method == ShadowMethod::HorizonMap {
            match &self.horizon {
                None => {
                    return Err(Error::config(
                        "shadow method is the horizon map but the scene has none",
                    ))
                }
                Some(h) if !h.same_grid(self.dem.raster()) => {
                    return Err(Error::config(
                        "horizon map is not registered to the elevation grid",
                    ))
                }
                _ => {}
            }
        }
        let o = &self.options;
        if !o.shadow_step_m.is_finite() || o.shadow_step_m <= 0.0 {
            return Err(Error::config(format!(
                "shadow step must be positive and finite, got {}",
                o.shadow_step_m
            )));
        }
        if !o.max_range_m.is_finite() || o.max_range_m <= 0.0 {
            return Err(Error::config(format!(
                "max range must be positive and finite, got {}",
                o.max_range_m
            )));
        }
        if !o.background.is_finite() || o.background < 0.0 {
            return Err(Error::config(format!(
                "background radiance must be nonnegative and finite, got {}",
                o.background
            )));
        }
        if let Some(r) = self.light_distance_m {
            if !r.is_finite() || r <= 0.0 {
                return Err(Error::config(format!(
                    "light distance must be positive and finite, got {r}"
                )));
            }
        }
        if let ReflectanceModel::Hapke { b0 } = self.model {
            if !(0.0..=1.0).contains(&b0) || !b0.is_finite() {
                return Err(Error::config(format!(
                    "opposition amplitude B0 must lie in [0, 1], got {b0}"
                )));
            }
        }
        Ok(())
    }
}
