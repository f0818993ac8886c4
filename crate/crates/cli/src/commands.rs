//! Subcommand bodies: terrain preprocessing, single renders (optionally
//! swept over one parameter), and trajectory sequences.

use std::fs;
use std::path::{Path, PathBuf};

use lsr_core::camera::Intrinsics;
use lsr_core::error::{Error, Result};
use lsr_core::illumination::SunState;
use lsr_core::render::{
    quantize, render_with_workers, save_radiance, write_metadata, write_pgm, ShadowMethod,
};
use lsr_core::scene::Scene;
use lsr_core::sequence::generate_sequence;
use lsr_core::terrain::{
    compute_horizon_map_with_workers, default_workers, derive_displacement_map, derive_normal_map,
    load_dem, save_raster,
};

use crate::scenario::{load_scenario, LoadedScenario};

fn effective_workers(requested: Option<usize>) -> usize {
    requested.unwrap_or_else(default_workers).max(1)
}

/// Summary of one preprocessing run, written alongside the rasters.
#[derive(serde::Serialize)]
struct PrepReport {
    rows: usize,
    cols: usize,
    cell_size_m: f64,
    min_elevation_m: f64,
    max_elevation_m: f64,
    reference_elevation_m: f64,
    n_azimuths: usize,
    nodata_cell_count: usize,
}

/// Derives and writes the normal, displacement, and horizon rasters for a
/// terrain grid, plus a small JSON report. Byte-idempotent: rerunning over
/// the same inputs rewrites identical files.
pub fn cmd_prep(
    dem_path: &Path,
    out_dir: &Path,
    n_azimuths: usize,
    reference_elevation: Option<f64>,
    workers: Option<usize>,
) -> Result<()> {
    if n_azimuths == 0 {
        return Err(Error::config("--n-azimuths: must be at least 1"));
    }
    let dem = load_dem(dem_path)?;
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;

    let values = dem.raster().values();
    let finite: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    if finite.is_empty() {
        return Err(Error::config(format!(
            "{}: grid contains no valid cells",
            dem_path.display()
        )));
    }
    let min = finite.iter().copied().fold(f64::INFINITY, f64::min);
    let max = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let reference =
        reference_elevation.unwrap_or_else(|| finite.iter().sum::<f64>() / finite.len() as f64);
    if !reference.is_finite() {
        return Err(Error::config(format!(
            "--reference-elevation: must be finite, got {reference}"
        )));
    }

    let normals = derive_normal_map(&dem);
    for (name, raster) in [
        ("normal_x.bin", normals.nx()),
        ("normal_y.bin", normals.ny()),
        ("normal_z.bin", normals.nz()),
    ] {
        save_raster(raster, &out_dir.join(name))?;
        log::info!("wrote {}", out_dir.join(name).display());
    }

    let displacement = derive_displacement_map(&dem, reference);
    save_raster(&displacement, &out_dir.join("displacement.bin"))?;
    log::info!("wrote {}", out_dir.join("displacement.bin").display());

    let horizon = compute_horizon_map_with_workers(&dem, n_azimuths, effective_workers(workers))?;
    for (k, sector) in horizon.sectors().iter().enumerate() {
        let name = format!("horizon_{k:03}.bin");
        save_raster(sector, &out_dir.join(&name))?;
    }
    log::info!("wrote {n_azimuths} horizon sector rasters");

    let report = PrepReport {
        rows: dem.rows(),
        cols: dem.cols(),
        cell_size_m: dem.cell_size(),
        min_elevation_m: min,
        max_elevation_m: max,
        reference_elevation_m: reference,
        n_azimuths,
        nodata_cell_count: values.len() - finite.len(),
    };
    let report_path = out_dir.join("prep_report.json");
    let mut text = serde_json::to_string_pretty(&report)
        .map_err(|e| Error::Render(format!("prep report serialization: {e}")))?;
    text.push('\n');
    fs::write(&report_path, text).map_err(|e| Error::io(&report_path, e))?;
    log::info!("wrote {}", report_path.display());
    Ok(())
}

/// One swept parameter: `name=lo:hi:n` produces `n` evenly spaced values,
/// endpoints included.
#[derive(Debug)]
struct Sweep {
    param: SweepParam,
    lo: f64,
    hi: f64,
    n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum SweepParam {
    SunElevation,
    SunAzimuth,
    SunIntensity,
    PhaseAngle,
    ExposureScale,
}

fn parse_sweep(raw: &str) -> Result<Sweep> {
    let bad = |msg: &str| Error::config(format!("--sweep \"{raw}\": {msg}"));
    let (name, range) = raw
        .split_once('=')
        .ok_or_else(|| bad("expected <param>=<lo>:<hi>:<n>"))?;
    let param = match name {
        "sun_elevation" => SweepParam::SunElevation,
        "sun_azimuth" => SweepParam::SunAzimuth,
        "sun_intensity" => SweepParam::SunIntensity,
        "phase_angle" => SweepParam::PhaseAngle,
        "exposure_scale" => SweepParam::ExposureScale,
        other => {
            return Err(bad(&format!(
                "unknown parameter \"{other}\" (expected sun_elevation, sun_azimuth, \
                 sun_intensity, phase_angle, or exposure_scale)"
            )))
        }
    };
    let parts: Vec<&str> = range.split(':').collect();
    let [lo, hi, n] = parts.as_slice() else {
        return Err(bad("expected <param>=<lo>:<hi>:<n>"));
    };
    let lo: f64 = lo.parse().map_err(|_| bad("lower bound is not a number"))?;
    let hi: f64 = hi.parse().map_err(|_| bad("upper bound is not a number"))?;
    let n: usize = n.parse().map_err(|_| bad("sample count is not an integer"))?;
    if !lo.is_finite() || !hi.is_finite() {
        return Err(bad("bounds must be finite"));
    }
    if n == 0 {
        return Err(bad("sample count must be at least 1"));
    }
    Ok(Sweep { param, lo, hi, n })
}

impl Sweep {
    fn value(&self, k: usize) -> f64 {
        if self.n == 1 {
            self.lo
        } else {
            self.lo + (self.hi - self.lo) * k as f64 / (self.n - 1) as f64
        }
    }

    fn apply(&self, scene: &mut Scene, value: f64) -> Result<()> {
        let recfg = |e: Error| Error::config(format!("--sweep: {e}"));
        let sun = scene.sun;
        match self.param {
            SweepParam::SunElevation => {
                scene.sun =
                    SunState::new(value, sun.azimuth_deg, sun.intensity).map_err(recfg)?;
            }
            SweepParam::SunAzimuth => {
                scene.sun =
                    SunState::new(sun.elevation_deg, value, sun.intensity).map_err(recfg)?;
            }
            SweepParam::SunIntensity => {
                scene.sun =
                    SunState::new(sun.elevation_deg, sun.azimuth_deg, value).map_err(recfg)?;
            }
            SweepParam::PhaseAngle => {
                scene.sun = SunState::from_phase_angle(value, sun.azimuth_deg, sun.intensity)
                    .map_err(recfg)?;
            }
            SweepParam::ExposureScale => {
                let i = scene.camera.intrinsics;
                scene.camera.intrinsics = Intrinsics::new(
                    i.focal_length_m,
                    i.pixel_pitch_m,
                    i.width_px,
                    i.height_px,
                    value,
                )
                .map_err(recfg)?;
            }
        }
        Ok(())
    }
}

/// `img.pgm` -> `img_007.pgm`; extensionless paths keep no extension.
fn suffixed(path: &Path, k: usize) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}_{k:03}.{}", ext.to_string_lossy()),
        None => format!("{stem}_{k:03}"),
    };
    path.with_file_name(name)
}

fn render_one(
    scene: &Scene,
    workers: usize,
    out: &Path,
    dump_radiance: Option<&Path>,
) -> Result<()> {
    let image = render_with_workers(scene, workers)?;
    let gray = quantize(&image, scene.camera.intrinsics.exposure_scale);
    write_pgm(&gray, out)?;
    write_metadata(&image.metadata, &out.with_extension("json"))?;
    if let Some(dump) = dump_radiance {
        save_radiance(&image, dump)?;
    }
    log::info!(
        "rendered {} ({} of {} pixels hit terrain)",
        out.display(),
        image.metadata.hit_pixel_count,
        image.width as u64 * image.height as u64,
    );
    Ok(())
}

/// Renders a pose-mode scenario to a PGM image plus a JSON metadata
/// sidecar, optionally dumping raw radiance and sweeping one parameter.
pub fn cmd_render(
    scenario_path: &Path,
    out: &Path,
    workers: Option<usize>,
    shadow_override: Option<ShadowMethod>,
    dump_radiance: Option<&Path>,
    sweep: Option<&str>,
) -> Result<()> {
    let sweep = sweep.map(parse_sweep).transpose()?;
    let workers = effective_workers(workers);
    let LoadedScenario { scene, trajectory } =
        load_scenario(scenario_path, shadow_override, workers)?;
    if trajectory.is_some() {
        return Err(Error::config(
            "scenario is in trajectory mode; the render command needs camera.pose \
             (use the sequence command instead)",
        ));
    }

    match sweep {
        None => render_one(&scene, workers, out, dump_radiance),
        Some(sweep) => {
            for k in 0..sweep.n {
                let mut variant = scene.clone();
                sweep.apply(&mut variant, sweep.value(k))?;
                render_one(
                    &variant,
                    workers,
                    &suffixed(out, k),
                    dump_radiance.map(|d| suffixed(d, k)).as_deref(),
                )?;
            }
            Ok(())
        }
    }
}

/// Renders a trajectory-mode scenario to numbered frames plus a manifest.
pub fn cmd_sequence(
    scenario_path: &Path,
    out_dir: &Path,
    workers: Option<usize>,
    shadow_override: Option<ShadowMethod>,
) -> Result<()> {
    let workers = effective_workers(workers);
    let LoadedScenario { scene, trajectory } =
        load_scenario(scenario_path, shadow_override, workers)?;
    let Some(trajectory) = trajectory else {
        return Err(Error::config(
            "scenario is in pose mode; the sequence command needs a trajectory \
             (use the render command instead)",
        ));
    };
    let frames = generate_sequence(&scene, &trajectory, out_dir, workers)?;
    log::info!("wrote {} frames to {}", frames.len(), out_dir.display());
    Ok(())
}
