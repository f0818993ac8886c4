//! Helpers shared by the binary-level test suites: invoking the built
//! `lsr` executable, writing terrain fixtures, and reading PGM output.
//!
//! Each test target compiles its own copy and uses a different subset.
#![allow(dead_code)]

use std::collections::hash_map::DefaultHasher;
use std::fs;
use std::hash::{Hash, Hasher};
use std::path::{Path, PathBuf};
use std::process::Command;

use lsr_core::terrain::{save_dem, DemGrid};

/// Runs the compiled binary with `args`, returning (exit code, stdout,
/// stderr). `envs` adds environment variables for this invocation only.
pub fn run_lsr(args: &[&str], envs: &[(&str, &str)]) -> (i32, String, String) {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_lsr"));
    cmd.args(args);
    for (k, v) in envs {
        cmd.env(k, v);
    }
    let out = cmd.output().expect("failed to spawn lsr");
    (
        out.status.code().expect("lsr was killed by a signal"),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

pub fn flat_dem(rows: usize, cols: usize, cell_size: f64, elevation: f64) -> DemGrid {
    DemGrid::constant(rows, cols, cell_size, 0.0, 0.0, elevation).unwrap()
}

/// Flat floor with one raised column of cells (a north-south ridge wall)
/// at `wall_col`.
pub fn ridge_dem(rows: usize, cols: usize, wall_col: usize, height: f64) -> DemGrid {
    let values: Vec<f64> = (0..rows * cols)
        .map(|k| if k % cols == wall_col { height } else { 0.0 })
        .collect();
    DemGrid::new(rows, cols, 1.0, 0.0, 0.0, values, None).unwrap()
}

/// Flat floor that steps up to a plateau for all columns >= `step_col`.
pub fn step_dem(rows: usize, cols: usize, step_col: usize, height: f64) -> DemGrid {
    let values: Vec<f64> = (0..rows * cols)
        .map(|k| if k % cols >= step_col { height } else { 0.0 })
        .collect();
    DemGrid::new(rows, cols, 1.0, 0.0, 0.0, values, None).unwrap()
}

pub fn write_dem(dir: &Path, name: &str, dem: &DemGrid) -> PathBuf {
    let path = dir.join(name);
    save_dem(dem, &path).unwrap();
    path
}

pub fn write_scenario(dir: &Path, name: &str, value: &serde_json::Value) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, serde_json::to_string_pretty(value).unwrap()).unwrap();
    path
}

/// Nadir-looking scenario whose ground sample distance is exactly 1 m:
/// pixel (u, v) of a `px`-wide image looks at world x = cx + (u + 0.5) -
/// px/2 on flat ground.
pub fn nadir_scenario(dem_rel: &str, px: u32, cx: f64, cy: f64) -> serde_json::Value {
    serde_json::json!({
        "schema_version": 1,
        "dem_path": dem_rel,
        "albedo_value": 0.5,
        "sun": { "elevation_deg": 90.0, "azimuth_deg": 0.0 },
        "camera": {
            "focal_length_m": 0.1,
            "pixel_pitch_m": 1e-5,
            "width_px": px,
            "height_px": px,
            "pose": { "position_m": [cx, cy, 10000.0] }
        }
    })
}

/// Parses a binary `P5` image with maxval 255.
pub fn read_pgm(path: &Path) -> (u32, u32, Vec<u8>) {
    let bytes = fs::read(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    let header_end = bytes
        .windows(5)
        .position(|w| w == b"\n255\n")
        .expect("no maxval line")
        + 5;
    let header = std::str::from_utf8(&bytes[..header_end]).expect("header is not UTF-8");
    let mut lines = header.lines();
    assert_eq!(lines.next(), Some("P5"), "bad magic in {}", path.display());
    let dims: Vec<u32> = lines
        .next()
        .expect("no dimension line")
        .split_whitespace()
        .map(|t| t.parse().expect("bad dimension"))
        .collect();
    let (w, h) = (dims[0], dims[1]);
    let pixels = bytes[header_end..].to_vec();
    assert_eq!(pixels.len(), (w * h) as usize, "pixel payload size");
    (w, h, pixels)
}

pub fn hash_bytes(bytes: &[u8]) -> u64 {
    let mut h = DefaultHasher::new();
    bytes.hash(&mut h);
    h.finish()
}

pub fn hash_file(path: &Path) -> u64 {
    hash_bytes(&fs::read(path).unwrap_or_else(|e| panic!("{}: {e}", path.display())))
}
