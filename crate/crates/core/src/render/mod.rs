//! Deterministic image formation.
//!
//! Rendering is bit-reproducible for a given scene regardless of worker
//! count: rows are partitioned into disjoint slices, every per-pixel value
//! is computed independently, and the per-row statistics are folded in row
//! order after the workers join.

mod intersect;
mod shadow;

pub use intersect::{intersect_heightfield, Hit};
pub use shadow::shadow_test;

use std::fs;
use std::path::Path;
use std::thread;

use serde::{Deserialize, Serialize};

use crate::camera::{ground_sample_distance, pixel_ray, Pose};
use crate::error::{Error, Result};
use crate::illumination::{sun_direction, SunState};
use crate::photometry::{shade, ReflectanceModel, ShadingGeometry};
use crate::scene::Scene;
use crate::terrain::{save_raster, Raster};

/// How cast shadows are decided per shaded point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShadowMethod {
    /// March toward the sun sampling the surface until the ray leaves the
    /// grid or climbs above the terrain ceiling.
    Raymarch,
    /// Compare the sun elevation against a precomputed per-cell horizon.
    #[serde(alias = "horizon")]
    HorizonMap,
    /// No occlusion test at all; every point is lit.
    None,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenderOptions {
    pub shadow_method: ShadowMethod,
    /// March step in meters for `ShadowMethod::Raymarch`.
    pub shadow_step_m: f64,
    /// Rays miss beyond this distance in meters.
    pub max_range_m: f64,
    /// Radiance assigned to pixels whose ray never meets the surface.
    pub background: f64,
}

impl RenderOptions {
    /// Defaults tied to the grid resolution: half-cell shadow marching.
    pub fn default_for_cell(cell_size: f64) -> RenderOptions {
        RenderOptions {
            shadow_method: ShadowMethod::Raymarch,
            shadow_step_m: 0.5 * cell_size,
            max_range_m: 1e8,
            background: 0.0,
        }
    }
}

/// Summary written alongside every rendered frame.
#[derive(Debug, Clone, Serialize)]
pub struct RenderMetadata {
    pub width_px: u32,
    pub height_px: u32,
    pub sun: SunState,
    pub pose: Pose,
    pub model: ReflectanceModel,
    pub shadow_method: ShadowMethod,
    /// Pixels whose ray met the surface.
    pub hit_pixel_count: usize,
    /// Mean over hit pixels of the sun-to-view angle in degrees; None when
    /// nothing was hit.
    pub mean_phase_angle_deg: Option<f64>,
    /// Ground sample distance in meters at the pixel (width/2, height/2);
    /// None when that ray misses.
    pub center_gsd_m: Option<f64>,
}

/// Scene radiance per pixel, row-major with row 0 at the image top.
#[derive(Debug, Clone)]
pub struct ImageBuffer {
    pub width: u32,
    pub height: u32,
    pub radiance: Vec<f64>,
    pub metadata: RenderMetadata,
}

impl ImageBuffer {
    pub fn radiance_at(&self, u: u32, v: u32) -> f64 {
        assert!(u < self.width && v < self.height, "pixel ({u}, {v}) outside image");
        self.radiance[(v * self.width + u) as usize]
    }

    pub fn mean_radiance(&self) -> f64 {
        if self.radiance.is_empty() {
            return 0.0;
        }
        self.radiance.iter().sum::<f64>() / self.radiance.len() as f64
    }
}

/// 8-bit grayscale image ready for PGM output.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    pub width: u32,
    pub height: u32,
    pub pixels: Vec<u8>,
}

/// Renders with one worker per available core.
pub fn render(scene: &Scene) -> Result<ImageBuffer> {
    render_with_workers(scene, crate::terrain::default_workers())
}

/// Renders with an explicit worker count. Output is bit-identical for any
/// count.
pub fn render_with_workers(scene: &Scene, workers: usize) -> Result<ImageBuffer> {
    scene.validate()?;
    let intr = &scene.camera.intrinsics;
    let w = intr.width_px as usize;
    let h = intr.height_px as usize;
    let sun_dir = sun_direction(&scene.sun);

    let mut radiance = vec![0.0f64; w * h];
    let mut stats = vec![RowStats::default(); h];
    let workers = workers.clamp(1, h);
    if workers == 1 {
        render_rows(scene, sun_dir, 0, w, &mut radiance, &mut stats)?;
    } else {
        let rows_per = h.div_ceil(workers);
        thread::scope(|s| {
            let mut handles = Vec::new();
            for (ci, (rad, st)) in radiance
                .chunks_mut(rows_per * w)
                .zip(stats.chunks_mut(rows_per))
                .enumerate()
            {
                handles.push(s.spawn(move || {
                    render_rows(scene, sun_dir, ci * rows_per, w, rad, st)
                }));
            }
            handles
                .into_iter()
                .try_for_each(|j| j.join().expect("render worker panicked"))
        })?;
    }

    let mut phase_sum = 0.0;
    let mut hits = 0usize;
    for s in &stats {
        phase_sum += s.phase_sum;
        hits += s.hits;
    }
    let mean_phase_angle_deg = (hits > 0).then(|| phase_sum / hits as f64);

    let (_, center) = render_pixel(scene, sun_dir, w / 2, h / 2)?;
    let center_gsd_m = match center {
        Some(c) => Some(ground_sample_distance(intr, c.t)?),
        None => None,
    };

    Ok(ImageBuffer {
        width: intr.width_px,
        height: intr.height_px,
        radiance,
        metadata: RenderMetadata {
            width_px: intr.width_px,
            height_px: intr.height_px,
            sun: scene.sun,
            pose: scene.camera.pose,
            model: scene.model,
            shadow_method: scene.options.shadow_method,
            hit_pixel_count: hits,
            mean_phase_angle_deg,
            center_gsd_m,
        },
    })
}

#[derive(Debug, Default, Clone, Copy)]
struct RowStats {
    phase_sum: f64,
    hits: usize,
}

fn render_rows(
    scene: &Scene,
    sun_dir: crate::math::Vec3,
    first_row: usize,
    width: usize,
    radiance: &mut [f64],
    stats: &mut [RowStats],
) -> Result<()> {
    for (r, row_stats) in stats.iter_mut().enumerate() {
        let v = first_row + r;
        for u in 0..width {
            let (value, hit) = render_pixel(scene, sun_dir, u, v)?;
            radiance[r * width + u] = value;
            if let Some(info) = hit {
                row_stats.phase_sum += info.phase_deg;
                row_stats.hits += 1;
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy)]
struct PixelHit {
    t: f64,
    phase_deg: f64,
}

fn render_pixel(
    scene: &Scene,
    sun_dir: crate::math::Vec3,
    u: usize,
    v: usize,
) -> Result<(f64, Option<PixelHit>)> {
    let ray = pixel_ray(&scene.camera.intrinsics, &scene.camera.pose, u as f64, v as f64)?;
    let Some(hit) = intersect_heightfield(&scene.dem, &ray, scene.options.max_range_m) else {
        return Ok((scene.options.background, None));
    };
    let view_dir = -ray.direction;
    let phase_deg = sun_dir.dot(&view_dir).clamp(-1.0, 1.0).acos().to_degrees();

    // Shading data with any nodata in its footprint goes black; the pixel
    // still counts as a surface hit.
    let value = 'shaded: {
        let Some(normal) = scene.normals.sample(hit.point.x, hit.point.y) else {
            break 'shaded 0.0;
        };
        let albedo = scene
            .albedo
            .sample_bilinear(hit.point.x, hit.point.y)
            .unwrap_or(f64::NAN);
        if albedo.is_nan() {
            break 'shaded 0.0;
        }
        let lifted = hit.point + normal * (1e-3 * scene.dem.cell_size());
        let geom = ShadingGeometry {
            cos_incidence: normal.dot(&sun_dir),
            cos_emission: normal.dot(&view_dir),
            range_to_light: scene.light_distance_m.unwrap_or(1.0),
            in_shadow: shadow_test(
                &scene.dem,
                scene.horizon.as_ref(),
                &lifted,
                &sun_dir,
                &scene.options,
            ),
        };
        shade(&scene.model, albedo, scene.sun.intensity, &geom)
            .map_err(|e| Error::Render(e.to_string()))?
    };
    Ok((value, Some(PixelHit { t: hit.t, phase_deg })))
}

/// Maps radiance to 8-bit levels: DN = round(clamp(r * exposure, 0, 1) * 255).
pub fn quantize(image: &ImageBuffer, exposure_scale: f64) -> GrayImage {
    let pixels = image
        .radiance
        .iter()
        .map(|r| ((r * exposure_scale).clamp(0.0, 1.0) * 255.0).round() as u8)
        .collect();
    GrayImage {
        width: image.width,
        height: image.height,
        pixels,
    }
}

/// Binary (P5) PGM, maxval 255.
pub fn write_pgm(image: &GrayImage, path: &Path) -> Result<()> {
    let mut bytes = format!("P5\n{} {}\n255\n", image.width, image.height).into_bytes();
    bytes.extend_from_slice(&image.pixels);
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Dumps the float radiance as a bare grid (row 0 = top image row, cell
/// size 1); the grid container carries no georeference here.
pub fn save_radiance(image: &ImageBuffer, path: &Path) -> Result<()> {
    let r = Raster::from_values(
        image.height as usize,
        image.width as usize,
        1.0,
        0.0,
        0.0,
        image.radiance.clone(),
    )?;
    save_raster(&r, path)
}

/// Pretty-printed JSON sidecar for a frame.
pub fn write_metadata(metadata: &RenderMetadata, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(metadata)
        .map_err(|e| Error::Render(format!("metadata serialization failed: {e}")))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}
