//! Trajectory interpolation and multi-frame rendering.

use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::camera::Pose;
use crate::error::{Error, Result};
use crate::illumination::SunState;
use crate::math::shortest_arc_deg;
use crate::render::{quantize, render_with_workers, write_metadata, write_pgm, ImageBuffer};
use crate::scene::Scene;
use crate::terrain::DemGrid;

/// Where a waypoint sits. `Altitude` hangs the camera over the grid center
/// at the given height above the elevation datum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WaypointPosition {
    World([f64; 3]),
    Altitude(f64),
}

/// One key pose along a pass, with an optional sun override.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Waypoint {
    pub position: WaypointPosition,
    pub roll_deg: f64,
    pub pitch_deg: f64,
    pub yaw_deg: f64,
    /// None inherits the scene sun (or an interpolated one when both
    /// bracketing waypoints override it).
    pub sun: Option<SunState>,
}

impl Waypoint {
    pub fn new(position: WaypointPosition, roll_deg: f64, pitch_deg: f64, yaw_deg: f64) -> Waypoint {
        Waypoint {
            position,
            roll_deg,
            pitch_deg,
            yaw_deg,
            sun: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub waypoints: Vec<Waypoint>,
    /// Interpolated frames inserted between each adjacent waypoint pair.
    pub frames_between: usize,
}

/// A fully resolved frame: world pose plus the sun chosen for it.
#[derive(Debug, Clone, Copy)]
pub struct FrameSpec {
    pub pose: Pose,
    pub sun: Option<SunState>,
}

/// Expands a trajectory into frame specs. Waypoints are reproduced exactly;
/// in-between frames interpolate position linearly and each attitude angle
/// along its shortest arc. Waypoints must already carry world positions;
/// resolve altitude form with [`resolve_altitudes`] first.
pub fn interpolate_trajectory(trajectory: &Trajectory) -> Result<Vec<FrameSpec>> {
    if trajectory.waypoints.is_empty() {
        return Err(Error::config("trajectory has no waypoints"));
    }
    let world = |w: &Waypoint| -> Result<[f64; 3]> {
        match w.position {
            WaypointPosition::World(p) => Ok(p),
            WaypointPosition::Altitude(_) => Err(Error::config(
                "altitude waypoint not resolved against a terrain grid",
            )),
        }
    };
    let mut frames = Vec::new();
    let n = trajectory.waypoints.len();
    for (k, w) in trajectory.waypoints.iter().enumerate() {
        let p = world(w)?;
        frames.push(FrameSpec {
            pose: Pose::new(p, w.roll_deg, w.pitch_deg, w.yaw_deg)?,
            sun: w.sun,
        });
        if k + 1 == n {
            break;
        }
        let a = w;
        let b = &trajectory.waypoints[k + 1];
        let pa = p;
        let pb = world(b)?;
        let m = trajectory.frames_between;
        for s in 1..=m {
            let f = s as f64 / (m as f64 + 1.0);
            let pos = [
                pa[0] + f * (pb[0] - pa[0]),
                pa[1] + f * (pb[1] - pa[1]),
                pa[2] + f * (pb[2] - pa[2]),
            ];
            let lerp_angle = |x: f64, y: f64| x + f * shortest_arc_deg(x, y);
            let sun = match (a.sun, b.sun) {
                (Some(sa), Some(sb)) => Some(lerp_sun(&sa, &sb, f)?),
                (Some(sa), None) => Some(sa),
                (None, Some(sb)) => Some(sb),
                (None, None) => None,
            };
            frames.push(FrameSpec {
                pose: Pose::new(
                    pos,
                    lerp_angle(a.roll_deg, b.roll_deg),
                    lerp_angle(a.pitch_deg, b.pitch_deg),
                    lerp_angle(a.yaw_deg, b.yaw_deg),
                )?,
                sun,
            });
        }
    }
    Ok(frames)
}

fn lerp_sun(a: &SunState, b: &SunState, f: f64) -> Result<SunState> {
    SunState::new(
        a.elevation_deg + f * (b.elevation_deg - a.elevation_deg),
        a.azimuth_deg + f * shortest_arc_deg(a.azimuth_deg, b.azimuth_deg),
        a.intensity + f * (b.intensity - a.intensity),
    )
}

/// Rewrites altitude waypoints as world positions over the grid center.
pub fn resolve_altitudes(trajectory: &Trajectory, dem: &DemGrid) -> Trajectory {
    let (cx, cy) = dem.center();
    let mut out = trajectory.clone();
    for w in &mut out.waypoints {
        if let WaypointPosition::Altitude(h) = w.position {
            w.position = WaypointPosition::World([cx, cy, h]);
        }
    }
    out
}

/// Manifest entry for one rendered frame.
#[derive(Debug, Serialize)]
pub struct ManifestFrame {
    pub index: usize,
    pub image: String,
    pub metadata: String,
    pub pose: Pose,
    pub sun: SunState,
}

#[derive(Debug, Serialize)]
pub struct SequenceManifest {
    pub frame_count: usize,
    pub frames: Vec<ManifestFrame>,
}

/// Renders every frame of a trajectory into `out_dir` as
/// `frame_NNNNNN.pgm` + `frame_NNNNNN.json`, plus `manifest.json`. The
/// scene's own camera pose is ignored; its intrinsics, sun, and options
/// apply to every frame unless a waypoint overrides the sun. Frames render
/// sequentially, each with `workers` row workers.
pub fn generate_sequence(
    scene: &Scene,
    trajectory: &Trajectory,
    out_dir: &Path,
    workers: usize,
) -> Result<Vec<ImageBuffer>> {
    let resolved = resolve_altitudes(trajectory, &scene.dem);
    let frames = interpolate_trajectory(&resolved)?;
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;

    let mut images = Vec::with_capacity(frames.len());
    let mut manifest = SequenceManifest {
        frame_count: frames.len(),
        frames: Vec::with_capacity(frames.len()),
    };
    for (index, spec) in frames.iter().enumerate() {
        let mut frame_scene = scene.clone();
        frame_scene.camera.pose = spec.pose;
        if let Some(sun) = spec.sun {
            frame_scene.sun = sun;
        }
        let image = render_with_workers(&frame_scene, workers)
            .map_err(|e| Error::Render(format!("frame {index}: {e}")))?;
        let image_name = format!("frame_{index:06}.pgm");
        let metadata_name = format!("frame_{index:06}.json");
        write_pgm(
            &quantize(&image, frame_scene.camera.intrinsics.exposure_scale),
            &out_dir.join(&image_name),
        )?;
        write_metadata(&image.metadata, &out_dir.join(&metadata_name))?;
        manifest.frames.push(ManifestFrame {
            index,
            image: image_name,
            metadata: metadata_name,
            pose: spec.pose,
            sun: frame_scene.sun,
        });
        images.push(image);
    }
    let manifest_path = out_dir.join("manifest.json");
    let mut text = serde_json::to_string_pretty(&manifest)
        .map_err(|e| Error::Render(format!("manifest serialization failed: {e}")))?;
    text.push('\n');
    fs::write(&manifest_path, text).map_err(|e| Error::io(&manifest_path, e))?;
    Ok(images)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::camera::{CameraModel, Intrinsics};
    use crate::photometry::ReflectanceModel;
    use crate::render::{render_with_workers, RenderOptions};
    use crate::terrain::{derive_normal_map, Raster};

    fn wp(pos: [f64; 3], roll: f64, pitch: f64, yaw: f64) -> Waypoint {
        Waypoint::new(WaypointPosition::World(pos), roll, pitch, yaw)
    }

    #[test]
    fn waypoints_alone_come_back_exactly() {
        let t = Trajectory {
            waypoints: vec![
                wp([0.0, 0.0, 100.0], 1.0, 2.0, 3.0),
                wp([10.0, -5.0, 200.0], 4.0, 5.0, 6.0),
            ],
            frames_between: 0,
        };
        let frames = interpolate_trajectory(&t).unwrap();
        assert_eq!(frames.len(), 2);
        assert_eq!(frames[0].pose.position_m, [0.0, 0.0, 100.0]);
        assert_eq!(frames[1].pose.position_m, [10.0, -5.0, 200.0]);
        assert_eq!(frames[1].pose.yaw_deg, 6.0);
    }

    #[test]
    fn frame_count_is_waypoints_plus_inserted_frames() {
        for (n_wp, fb) in [(2usize, 3usize), (4, 0), (3, 5), (1, 7)] {
            let t = Trajectory {
                waypoints: (0..n_wp)
                    .map(|k| wp([k as f64, 0.0, 50.0], 0.0, 0.0, 0.0))
                    .collect(),
                frames_between: fb,
            };
            let frames = interpolate_trajectory(&t).unwrap();
            let expect = n_wp + fb * n_wp.saturating_sub(1);
            assert_eq!(frames.len(), expect, "waypoints {n_wp}, between {fb}");
        }
    }

    #[test]
    fn midpoint_frame_bisects_position_and_attitude() {
        let t = Trajectory {
            waypoints: vec![
                wp([0.0, 0.0, 100.0], 0.0, 10.0, 20.0),
                wp([10.0, 20.0, 300.0], 4.0, 20.0, 40.0),
            ],
            frames_between: 1,
        };
        let frames = interpolate_trajectory(&t).unwrap();
        assert_eq!(frames.len(), 3);
        let mid = &frames[1].pose;
        assert_eq!(mid.position_m, [5.0, 10.0, 200.0]);
        assert!((mid.roll_deg - 2.0).abs() < 1e-12);
        assert!((mid.pitch_deg - 15.0).abs() < 1e-12);
        assert!((mid.yaw_deg - 30.0).abs() < 1e-12);
    }

    #[test]
    fn yaw_interpolates_across_the_wrap() {
        let t = Trajectory {
            waypoints: vec![
                wp([0.0, 0.0, 100.0], 0.0, 0.0, 170.0),
                wp([0.0, 0.0, 100.0], 0.0, 0.0, -170.0),
            ],
            frames_between: 1,
        };
        let frames = interpolate_trajectory(&t).unwrap();
        // Shortest arc goes through 180, not back through 0.
        assert!((frames[1].pose.yaw_deg - 180.0).abs() < 1e-12);
    }

    #[test]
    fn empty_trajectory_is_a_config_error() {
        let t = Trajectory {
            waypoints: vec![],
            frames_between: 2,
        };
        assert!(matches!(
            interpolate_trajectory(&t),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn unresolved_altitude_is_a_config_error() {
        let t = Trajectory {
            waypoints: vec![Waypoint::new(WaypointPosition::Altitude(100.0), 0.0, 0.0, 0.0)],
            frames_between: 0,
        };
        assert!(interpolate_trajectory(&t).is_err());
        let dem = DemGrid::constant(9, 9, 1.0, 0.0, 0.0, 0.0).unwrap();
        let resolved = resolve_altitudes(&t, &dem);
        let frames = interpolate_trajectory(&resolved).unwrap();
        assert_eq!(frames[0].pose.position_m, [4.0, 4.0, 100.0]);
    }

    #[test]
    fn sun_override_rules_cover_all_pairings() {
        let sun_a = SunState::new(20.0, 90.0, 1.0).unwrap();
        let sun_b = SunState::new(40.0, 110.0, 2.0).unwrap();
        let mut a = wp([0.0, 0.0, 100.0], 0.0, 0.0, 0.0);
        let mut b = wp([10.0, 0.0, 100.0], 0.0, 0.0, 0.0);
        a.sun = Some(sun_a);
        b.sun = Some(sun_b);
        let t = Trajectory {
            waypoints: vec![a, b],
            frames_between: 1,
        };
        let frames = interpolate_trajectory(&t).unwrap();
        let mid = frames[1].sun.unwrap();
        assert!((mid.elevation_deg - 30.0).abs() < 1e-12);
        assert!((mid.azimuth_deg - 100.0).abs() < 1e-12);
        assert!((mid.intensity - 1.5).abs() < 1e-12);

        let mut only_a = t.clone();
        only_a.waypoints[1].sun = None;
        let frames = interpolate_trajectory(&only_a).unwrap();
        assert_eq!(frames[1].sun.unwrap().elevation_deg, 20.0);
        assert!(frames[2].sun.is_none(), "bare waypoint keeps the scene sun");

        let mut neither = t.clone();
        neither.waypoints[0].sun = None;
        neither.waypoints[1].sun = None;
        let frames = interpolate_trajectory(&neither).unwrap();
        assert!(frames.iter().all(|f| f.sun.is_none()));
    }

    fn small_scene() -> Scene {
        let dem = DemGrid::constant(16, 16, 1.0, 0.0, 0.0, 0.0).unwrap();
        let albedo = Raster::filled_like(dem.raster(), 0.5);
        Scene {
            albedo,
            normals: derive_normal_map(&dem),
            horizon: None,
            sun: SunState::new(45.0, 90.0, 1.0).unwrap(),
            camera: CameraModel {
                intrinsics: Intrinsics::new(0.1, 1e-5, 8, 8, 1.0).unwrap(),
                pose: Pose::new([7.5, 7.5, 1000.0], 0.0, 0.0, 0.0).unwrap(),
            },
            model: ReflectanceModel::Lambert,
            options: RenderOptions::default_for_cell(1.0),
            light_distance_m: None,
            dem,
        }
    }

    #[test]
    fn sequence_writes_frames_and_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let scene = small_scene();
        let t = Trajectory {
            waypoints: vec![
                wp([7.5, 7.5, 500.0], 0.0, 0.0, 0.0),
                wp([7.5, 7.5, 1500.0], 0.0, 0.0, 10.0),
            ],
            frames_between: 2,
        };
        let images = generate_sequence(&scene, &t, dir.path(), 2).unwrap();
        assert_eq!(images.len(), 4);
        for k in 0..4 {
            assert!(dir.path().join(format!("frame_{k:06}.pgm")).exists());
            assert!(dir.path().join(format!("frame_{k:06}.json")).exists());
        }
        let manifest: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join("manifest.json")).unwrap())
                .unwrap();
        assert_eq!(manifest["frame_count"], 4);
        assert_eq!(manifest["frames"].as_array().unwrap().len(), 4);
        assert_eq!(manifest["frames"][0]["image"], "frame_000000.pgm");
        let yaw = manifest["frames"][3]["pose"]["yaw_deg"].as_f64().unwrap();
        assert!((yaw - 10.0).abs() < 1e-12);
    }

    #[test]
    fn sequence_frames_match_standalone_renders_bit_for_bit() {
        let dir = tempfile::tempdir().unwrap();
        let scene = small_scene();
        let t = Trajectory {
            waypoints: vec![
                wp([7.5, 7.5, 500.0], 0.0, 1.0, 0.0),
                wp([8.5, 7.5, 700.0], 0.0, 2.0, 5.0),
            ],
            frames_between: 1,
        };
        let images = generate_sequence(&scene, &t, dir.path(), 1).unwrap();
        let frames = interpolate_trajectory(&t).unwrap();
        for (img, spec) in images.iter().zip(&frames) {
            let mut standalone = scene.clone();
            standalone.camera.pose = spec.pose;
            let other = render_with_workers(&standalone, 3).unwrap();
            let same = img
                .radiance
                .iter()
                .zip(&other.radiance)
                .all(|(a, b)| a.to_bits() == b.to_bits());
            assert!(same, "sequence frame differs from a standalone render");
        }
    }

    #[test]
    fn brightening_sun_sweep_brightens_the_frames() {
        let dir = tempfile::tempdir().unwrap();
        let scene = small_scene();
        let mut a = wp([7.5, 7.5, 1000.0], 0.0, 0.0, 0.0);
        let mut b = wp([7.5, 7.5, 1000.0], 0.0, 0.0, 0.0);
        a.sun = Some(SunState::new(10.0, 90.0, 1.0).unwrap());
        b.sun = Some(SunState::new(70.0, 90.0, 1.0).unwrap());
        let t = Trajectory {
            waypoints: vec![a, b],
            frames_between: 3,
        };
        let images = generate_sequence(&scene, &t, dir.path(), 1).unwrap();
        let means: Vec<f64> = images.iter().map(|i| i.mean_radiance()).collect();
        for pair in means.windows(2) {
            assert!(
                pair[1] > pair[0],
                "mean radiance must climb with sun elevation: {means:?}"
            );
        }
    }
}
