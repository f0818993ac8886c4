//! Terrain data: elevation grids, derived maps, grid file formats.
//!
//! World frame: x east, y north, z up, meters. Grid row 0 is the
//! southernmost row, column 0 the westernmost column; samples sit at cell
//! centers.

mod dem;
mod derive;
mod io;
mod raster;

pub use dem::DemGrid;
pub use derive::{
    compute_horizon_map, compute_horizon_map_with_workers, default_workers,
    derive_displacement_map, derive_normal_map, HorizonMap, NormalMap,
};
pub use io::{load_albedo, load_dem, load_raster, save_dem, save_dem_ascii, save_dem_binary, save_raster};
pub use raster::Raster;
