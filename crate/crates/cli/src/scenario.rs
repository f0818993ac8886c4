//! Scenario files: a JSON schema describing one render or one sequence.
//!
//! Parsing is total: every malformed input comes back as a configuration
//! error naming the offending field path. Semantic checks run before any
//! referenced file is opened, so a broken scenario never triggers partial
//! I/O. Relative paths resolve against the scenario file's directory.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use lsr_core::camera::{CameraModel, Intrinsics, Pose};
use lsr_core::error::{Error, Result};
use lsr_core::illumination::SunState;
use lsr_core::photometry::ReflectanceModel;
use lsr_core::render::{RenderOptions, ShadowMethod};
use lsr_core::scene::Scene;
use lsr_core::sequence::{Trajectory, Waypoint, WaypointPosition};
use lsr_core::terrain::{
    compute_horizon_map_with_workers, derive_normal_map, load_albedo, load_dem, Raster,
};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    schema_version: u32,
    dem_path: String,
    albedo_path: Option<String>,
    albedo_value: Option<f64>,
    /// Accepted for completeness; only `prep` derives displacement.
    #[allow(dead_code)]
    reference_elevation: Option<f64>,
    sun: SunSpec,
    camera: CameraSpec,
    model: Option<ModelSpec>,
    options: Option<OptionsSpec>,
    trajectory: Option<TrajectorySpec>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct SunSpec {
    elevation_deg: Option<f64>,
    phase_angle_deg: Option<f64>,
    azimuth_deg: f64,
    intensity: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CameraSpec {
    focal_length_m: f64,
    pixel_pitch_m: f64,
    width_px: u32,
    height_px: u32,
    exposure_scale: Option<f64>,
    pose: Option<PoseSpec>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct PoseSpec {
    position_m: Option<[f64; 3]>,
    altitude_m: Option<f64>,
    roll_deg: Option<f64>,
    pitch_deg: Option<f64>,
    yaw_deg: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelSpec {
    kind: String,
    b0: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct OptionsSpec {
    shadow_method: Option<String>,
    shadow_step_m: Option<f64>,
    max_range_m: Option<f64>,
    background: Option<f64>,
    n_azimuths: Option<usize>,
    light_distance_m: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TrajectorySpec {
    frames_between: Option<usize>,
    waypoints: Vec<WaypointSpec>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct WaypointSpec {
    position_m: Option<[f64; 3]>,
    altitude_m: Option<f64>,
    roll_deg: Option<f64>,
    pitch_deg: Option<f64>,
    yaw_deg: Option<f64>,
    sun: Option<SunSpec>,
}

/// A scenario turned into renderable pieces. `trajectory` is present iff
/// the file drives sequence mode.
#[derive(Debug)]
pub struct LoadedScenario {
    pub scene: Scene,
    pub trajectory: Option<Trajectory>,
}

fn cfg(msg: String) -> Error {
    Error::config(msg)
}

fn require_finite(path: &str, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(cfg(format!("{path}: must be finite, got {v}")))
    }
}

fn require_positive(path: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(cfg(format!("{path}: must be positive and finite, got {v}")))
    }
}

fn sun_from_spec(path: &str, spec: &SunSpec) -> Result<SunState> {
    let intensity = spec.intensity.unwrap_or(1.0);
    if !intensity.is_finite() || intensity < 0.0 {
        return Err(cfg(format!(
            "{path}.intensity: must be nonnegative and finite, got {intensity}"
        )));
    }
    require_finite(&format!("{path}.azimuth_deg"), spec.azimuth_deg)?;
    match (spec.elevation_deg, spec.phase_angle_deg) {
        (Some(_), Some(_)) => Err(cfg(format!(
            "{path}.elevation_deg and {path}.phase_angle_deg are mutually exclusive"
        ))),
        (None, None) => Err(cfg(format!(
            "{path}.elevation_deg or {path}.phase_angle_deg is required"
        ))),
        (Some(el), None) => {
            if !(-90.0..=90.0).contains(&el) {
                return Err(cfg(format!(
                    "{path}.elevation_deg: must lie in [-90, 90], got {el}"
                )));
            }
            SunState::new(el, spec.azimuth_deg, intensity)
        }
        (None, Some(phase)) => {
            if !(0.0..=180.0).contains(&phase) {
                return Err(cfg(format!(
                    "{path}.phase_angle_deg: must lie in [0, 180], got {phase}"
                )));
            }
            SunState::from_phase_angle(phase, spec.azimuth_deg, intensity)
        }
    }
}

fn model_from_spec(spec: Option<&ModelSpec>) -> Result<ReflectanceModel> {
    let Some(spec) = spec else {
        return Ok(ReflectanceModel::Lambert);
    };
    match spec.kind.as_str() {
        "lambert" => {
            if spec.b0.is_some() {
                return Err(cfg("model.b0: only meaningful for kind \"hapke_paper\"".into()));
            }
            Ok(ReflectanceModel::Lambert)
        }
        "ls_paper" => {
            if spec.b0.is_some() {
                return Err(cfg("model.b0: only meaningful for kind \"hapke_paper\"".into()));
            }
            Ok(ReflectanceModel::LommelSeeliger)
        }
        "hapke_paper" => {
            let b0 = spec.b0.unwrap_or(0.0);
            if !b0.is_finite() || !(0.0..=1.0).contains(&b0) {
                return Err(cfg(format!("model.b0: must lie in [0, 1], got {b0}")));
            }
            Ok(ReflectanceModel::Hapke { b0 })
        }
        other => Err(cfg(format!(
            "model.kind: unknown value \"{other}\" (expected \"lambert\", \"ls_paper\", or \"hapke_paper\")"
        ))),
    }
}

/// Parses a `--shadow` style method name; also used for the scenario field.
pub fn parse_shadow_method(path: &str, value: &str) -> Result<ShadowMethod> {
    match value {
        "raymarch" => Ok(ShadowMethod::Raymarch),
        "horizon" | "horizon_map" => Ok(ShadowMethod::HorizonMap),
        "none" => Ok(ShadowMethod::None),
        other => Err(cfg(format!(
            "{path}: unknown value \"{other}\" (expected \"raymarch\", \"horizon\", or \"none\")"
        ))),
    }
}

fn pose_from_spec(path: &str, spec: &PoseSpec, altitude_anchor: Option<(f64, f64)>) -> Result<Pose> {
    let roll = spec.roll_deg.unwrap_or(0.0);
    let pitch = spec.pitch_deg.unwrap_or(0.0);
    let yaw = spec.yaw_deg.unwrap_or(0.0);
    for (name, v) in [("roll_deg", roll), ("pitch_deg", pitch), ("yaw_deg", yaw)] {
        require_finite(&format!("{path}.{name}"), v)?;
    }
    let position = match (spec.position_m, spec.altitude_m) {
        (Some(_), Some(_)) => {
            return Err(cfg(format!(
                "{path}.position_m and {path}.altitude_m are mutually exclusive"
            )))
        }
        (None, None) => {
            return Err(cfg(format!(
                "{path}.position_m or {path}.altitude_m is required"
            )))
        }
        (Some(p), None) => {
            for (k, v) in p.iter().enumerate() {
                require_finite(&format!("{path}.position_m[{k}]"), *v)?;
            }
            p
        }
        (None, Some(h)) => {
            require_finite(&format!("{path}.altitude_m"), h)?;
            let (cx, cy) =
                altitude_anchor.expect("altitude pose resolved before the grid is known");
            [cx, cy, h]
        }
    };
    Pose::new(position, roll, pitch, yaw)
}

fn waypoint_from_spec(path: &str, spec: &WaypointSpec) -> Result<Waypoint> {
    let roll = spec.roll_deg.unwrap_or(0.0);
    let pitch = spec.pitch_deg.unwrap_or(0.0);
    let yaw = spec.yaw_deg.unwrap_or(0.0);
    for (name, v) in [("roll_deg", roll), ("pitch_deg", pitch), ("yaw_deg", yaw)] {
        require_finite(&format!("{path}.{name}"), v)?;
    }
    let position = match (spec.position_m, spec.altitude_m) {
        (Some(_), Some(_)) => {
            return Err(cfg(format!(
                "{path}.position_m and {path}.altitude_m are mutually exclusive"
            )))
        }
        (None, None) => {
            return Err(cfg(format!(
                "{path}.position_m or {path}.altitude_m is required"
            )))
        }
        (Some(p), None) => {
            for (k, v) in p.iter().enumerate() {
                require_finite(&format!("{path}.position_m[{k}]"), *v)?;
            }
            WaypointPosition::World(p)
        }
        (None, Some(h)) => {
            require_finite(&format!("{path}.altitude_m"), h)?;
            WaypointPosition::Altitude(h)
        }
    };
    let sun = match &spec.sun {
        Some(s) => Some(sun_from_spec(&format!("{path}.sun"), s)?),
        None => None,
    };
    Ok(Waypoint {
        position,
        roll_deg: roll,
        pitch_deg: pitch,
        yaw_deg: yaw,
        sun,
    })
}

fn resolve_path(base: &Path, raw: &str) -> PathBuf {
    let p = Path::new(raw);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

/// Reads, validates, and assembles a scenario. `shadow_override` replaces
/// the file's shadow method before any derived map is computed; `workers`
/// bounds horizon precomputation parallelism.
pub fn load_scenario(
    path: &Path,
    shadow_override: Option<ShadowMethod>,
    workers: usize,
) -> Result<LoadedScenario> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let file: ScenarioFile = serde_json::from_str(&text)
        .map_err(|e| cfg(format!("scenario {}: {e}", path.display())))?;

    if file.schema_version != SCHEMA_VERSION {
        return Err(cfg(format!(
            "schema_version: expected {SCHEMA_VERSION}, got {}",
            file.schema_version
        )));
    }

    // Everything checkable without touching the filesystem comes first.
    let sun = sun_from_spec("sun", &file.sun)?;
    let model = model_from_spec(file.model.as_ref())?;

    let cam = &file.camera;
    require_positive("camera.focal_length_m", cam.focal_length_m)?;
    require_positive("camera.pixel_pitch_m", cam.pixel_pitch_m)?;
    if cam.width_px == 0 {
        return Err(cfg("camera.width_px: must be positive".into()));
    }
    if cam.height_px == 0 {
        return Err(cfg("camera.height_px: must be positive".into()));
    }
    let exposure = cam.exposure_scale.unwrap_or(1.0);
    require_positive("camera.exposure_scale", exposure)?;
    let intrinsics = Intrinsics::new(
        cam.focal_length_m,
        cam.pixel_pitch_m,
        cam.width_px,
        cam.height_px,
        exposure,
    )?;

    match (&cam.pose, &file.trajectory) {
        (Some(_), Some(_)) => {
            return Err(cfg(
                "camera.pose and trajectory are mutually exclusive; pick one output mode".into(),
            ))
        }
        (None, None) => {
            return Err(cfg(
                "camera.pose or trajectory is required to pick an output mode".into(),
            ))
        }
        _ => {}
    }

    if let (Some(_), Some(_)) = (&file.albedo_path, file.albedo_value) {
        return Err(cfg("albedo_path and albedo_value are mutually exclusive".into()));
    }
    if let Some(a) = file.albedo_value {
        if !a.is_finite() || !(0.0..=1.0).contains(&a) {
            return Err(cfg(format!("albedo_value: must lie in [0, 1], got {a}")));
        }
    }

    let trajectory = match &file.trajectory {
        Some(t) => {
            if t.waypoints.is_empty() {
                return Err(cfg("trajectory.waypoints: must not be empty".into()));
            }
            let waypoints = t
                .waypoints
                .iter()
                .enumerate()
                .map(|(k, w)| waypoint_from_spec(&format!("trajectory.waypoints[{k}]"), w))
                .collect::<Result<Vec<_>>>()?;
            Some(Trajectory {
                waypoints,
                frames_between: t.frames_between.unwrap_or(0),
            })
        }
        None => None,
    };

    let opts = file.options.as_ref();
    let shadow_method = match shadow_override {
        Some(m) => m,
        None => match opts.and_then(|o| o.shadow_method.as_deref()) {
            Some(s) => parse_shadow_method("options.shadow_method", s)?,
            None => ShadowMethod::Raymarch,
        },
    };
    if let Some(o) = opts {
        if let Some(v) = o.shadow_step_m {
            require_positive("options.shadow_step_m", v)?;
        }
        if let Some(v) = o.max_range_m {
            require_positive("options.max_range_m", v)?;
        }
        if let Some(v) = o.background {
            if !v.is_finite() || v < 0.0 {
                return Err(cfg(format!(
                    "options.background: must be nonnegative and finite, got {v}"
                )));
            }
        }
        if let Some(v) = o.light_distance_m {
            require_positive("options.light_distance_m", v)?;
        }
        if o.n_azimuths == Some(0) {
            return Err(cfg("options.n_azimuths: must be at least 1".into()));
        }
    }
    let n_azimuths = opts.and_then(|o| o.n_azimuths).unwrap_or(64);

    // Scenario is sound; now touch the filesystem.
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    let dem = load_dem(&resolve_path(base, &file.dem_path))?;

    let albedo = match &file.albedo_path {
        Some(p) => load_albedo(&resolve_path(base, p), &dem)?,
        None => Raster::filled_like(dem.raster(), file.albedo_value.unwrap_or(1.0)),
    };

    let options = RenderOptions {
        shadow_method,
        shadow_step_m: opts
            .and_then(|o| o.shadow_step_m)
            .unwrap_or(0.5 * dem.cell_size()),
        max_range_m: opts.and_then(|o| o.max_range_m).unwrap_or(1e8),
        background: opts.and_then(|o| o.background).unwrap_or(0.0),
    };

    let pose = match &cam.pose {
        Some(spec) => pose_from_spec("camera.pose", spec, Some(dem.center()))?,
        // Sequence mode: the per-frame pose replaces this placeholder.
        None => Pose::new([0.0, 0.0, 0.0], 0.0, 0.0, 0.0)?,
    };

    let horizon = if options.shadow_method == ShadowMethod::HorizonMap {
        Some(compute_horizon_map_with_workers(&dem, n_azimuths, workers)?)
    } else {
        None
    };

    let scene = Scene {
        normals: derive_normal_map(&dem),
        albedo,
        horizon,
        sun,
        camera: CameraModel { intrinsics, pose },
        model,
        options,
        light_distance_m: opts.and_then(|o| o.light_distance_m),
        dem,
    };
    scene.validate()?;

    Ok(LoadedScenario { scene, trajectory })
}
