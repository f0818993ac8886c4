//! `lsr`: renders synthetic grayscale images of terrain grids.
//!
//! Three subcommands: `prep` derives reusable per-cell rasters from a
//! terrain grid, `render` produces one image from a scenario file, and
//! `sequence` produces a numbered frame set along a trajectory. Exit codes:
//! 0 success, 2 configuration error, 3 I/O or file-format error, 4 render
//! error. Log verbosity comes from the `LSR_LOG` environment variable.

mod commands;
mod scenario;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use lsr_core::error::Error;
use lsr_core::render::ShadowMethod;

#[derive(Parser)]
#[command(
    name = "lsr",
    version,
    about = "Synthetic terrain imaging: preprocessing, single renders, and sequences"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Derive normal, displacement, and horizon rasters from a terrain grid.
    Prep {
        /// Terrain grid (ASCII grid, PGM, or binary raster).
        dem: PathBuf,
        /// Directory for the derived rasters and the prep report.
        out_dir: PathBuf,
        /// Number of horizon azimuth sectors.
        #[arg(long, default_value_t = 64)]
        n_azimuths: usize,
        /// Reference elevation for the displacement raster
        /// (default: mean valid elevation).
        #[arg(long)]
        reference_elevation: Option<f64>,
        /// Worker threads (default: available parallelism).
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Render one scenario to a PGM image plus a JSON metadata sidecar.
    Render {
        /// Scenario file (JSON).
        scenario: PathBuf,
        /// Output image path; a metadata sidecar lands next to it.
        out: PathBuf,
        /// Worker threads (default: available parallelism).
        #[arg(long)]
        workers: Option<usize>,
        /// Override the scenario's shadow method: raymarch, horizon, or none.
        #[arg(long)]
        shadow: Option<String>,
        /// Also write the unquantized radiance as a binary raster.
        #[arg(long)]
        dump_radiance: Option<PathBuf>,
        /// Render a series over one parameter: PARAM=LO:HI:N with PARAM
        /// one of sun_elevation, sun_azimuth, sun_intensity, phase_angle,
        /// exposure_scale.
        #[arg(long)]
        sweep: Option<String>,
    },
    /// Render a trajectory scenario to numbered frames plus a manifest.
    Sequence {
        /// Scenario file (JSON) with a trajectory.
        scenario: PathBuf,
        /// Directory for the frames and manifest.
        out_dir: PathBuf,
        /// Worker threads (default: available parallelism).
        #[arg(long)]
        workers: Option<usize>,
        /// Override the scenario's shadow method: raymarch, horizon, or none.
        #[arg(long)]
        shadow: Option<String>,
    },
}

/// 2 for mistakes in what was asked, 3 for unreadable or malformed files,
/// 4 for failures while producing an image.
fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Config(_) | Error::Domain(_) | Error::OutOfRange(_) => 2,
        Error::Parse { .. } | Error::Structure { .. } | Error::Io { .. } => 3,
        Error::Render(_) => 4,
    }
}

fn shadow_override(flag: Option<&str>) -> lsr_core::error::Result<Option<ShadowMethod>> {
    flag.map(|s| scenario::parse_shadow_method("--shadow", s))
        .transpose()
}

fn run(cli: Cli) -> lsr_core::error::Result<()> {
    match cli.command {
        Command::Prep {
            dem,
            out_dir,
            n_azimuths,
            reference_elevation,
            workers,
        } => commands::cmd_prep(&dem, &out_dir, n_azimuths, reference_elevation, workers),
        Command::Render {
            scenario,
            out,
            workers,
            shadow,
            dump_radiance,
            sweep,
        } => commands::cmd_render(
            &scenario,
            &out,
            workers,
            shadow_override(shadow.as_deref())?,
            dump_radiance.as_deref(),
            sweep.as_deref(),
        ),
        Command::Sequence {
            scenario,
            out_dir,
            workers,
            shadow,
        } => commands::cmd_sequence(
            &scenario,
            &out_dir,
            workers,
            shadow_override(shadow.as_deref())?,
        ),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("LSR_LOG"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
