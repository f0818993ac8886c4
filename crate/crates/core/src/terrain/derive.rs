//! Products derived from an elevation grid.
//!
//! * Normal map: per-cell unit surface normal from finite differences,
//!   central in the interior and one-sided at edges. Normals always have a
//!   positive up component because the surface is a heightfield.
//! * Displacement map: elevation minus a reference elevation.
//! * Horizon map: per cell and per azimuth sector, the largest elevation
//!   angle of terrain over that sector's center direction, floored at 0.
//!   Sector k points at azimuth k * 360/n degrees clockwise from north;
//!   rays are sampled every half cell out to the grid edge.
//!
//! Any derived value whose stencil touches a nodata cell is nodata. Results
//! are independent of the worker count: rows are computed independently and
//! assembled in row order.

use std::thread;

use crate::error::{Error, Result};
use crate::math::Vec3;
use crate::terrain::dem::DemGrid;
use crate::terrain::raster::Raster;

/// Per-cell unit surface normals, stored as three component rasters.
#[derive(Debug, Clone)]
pub struct NormalMap {
    nx: Raster,
    ny: Raster,
    nz: Raster,
}

impl NormalMap {
    pub fn nx(&self) -> &Raster {
        &self.nx
    }

    pub fn ny(&self) -> &Raster {
        &self.ny
    }

    pub fn nz(&self) -> &Raster {
        &self.nz
    }

    pub fn rows(&self) -> usize {
        self.nx.rows()
    }

    pub fn cols(&self) -> usize {
        self.nx.cols()
    }

    /// Normal at a cell, None when the cell is nodata.
    pub fn at_cell(&self, row: usize, col: usize) -> Option<Vec3> {
        let v = Vec3::new(
            self.nx.get(row, col),
            self.ny.get(row, col),
            self.nz.get(row, col),
        );
        if v.iter().any(|c| c.is_nan()) {
            None
        } else {
            Some(v)
        }
    }

    /// Bilinearly interpolated, renormalized normal at a world position.
    /// None outside the grid or when the interpolation touches nodata.
    pub fn sample(&self, x: f64, y: f64) -> Option<Vec3> {
        let nx = self.nx.sample_bilinear(x, y).ok()?;
        let ny = self.ny.sample_bilinear(x, y).ok()?;
        let nz = self.nz.sample_bilinear(x, y).ok()?;
        let v = Vec3::new(nx, ny, nz);
        if v.iter().any(|c| c.is_nan()) {
            return None;
        }
        let norm = v.norm();
        if norm == 0.0 {
            return None;
        }
        Some(v / norm)
    }

    /// True when the map is registered to `raster`'s grid.
    pub fn same_grid(&self, raster: &Raster) -> bool {
        self.nx.same_grid(raster)
    }
}

/// Per-cell horizon elevation angles in degrees, one raster per azimuth
/// sector.
#[derive(Debug, Clone)]
pub struct HorizonMap {
    sectors: Vec<Raster>,
}

impl HorizonMap {
    pub fn n_azimuths(&self) -> usize {
        self.sectors.len()
    }

    pub fn sectors(&self) -> &[Raster] {
        &self.sectors
    }

    /// Azimuth of sector `k`'s center direction, degrees clockwise from
    /// north.
    pub fn sector_center_deg(&self, k: usize) -> f64 {
        k as f64 * 360.0 / self.sectors.len() as f64
    }

    /// Sector whose center direction is nearest to `az_deg`.
    pub fn sector_for_azimuth(&self, az_deg: f64) -> usize {
        let n = self.sectors.len();
        let width = 360.0 / n as f64;
        (az_deg.rem_euclid(360.0) / width).round() as usize % n
    }

    /// Stored horizon angle in degrees; NaN marks a nodata cell.
    pub fn angle_deg(&self, sector: usize, row: usize, col: usize) -> f64 {
        self.sectors[sector].get(row, col)
    }

    /// Horizon angle for the cell nearest `(x, y)` in the sector covering
    /// `az_deg`.
    pub fn angle_at(&self, x: f64, y: f64, az_deg: f64) -> f64 {
        let sector = self.sector_for_azimuth(az_deg);
        let (row, col) = self.sectors[sector].nearest_cell(x, y);
        self.sectors[sector].get(row, col)
    }

    /// True when the map is registered to `raster`'s grid.
    pub fn same_grid(&self, raster: &Raster) -> bool {
        self.sectors.first().map(|s| s.same_grid(raster)).unwrap_or(false)
    }
}

/// Derives per-cell unit normals from the elevation grid.
pub fn derive_normal_map(dem: &DemGrid) -> NormalMap {
    let rows = dem.rows();
    let cols = dem.cols();
    let cs = dem.cell_size();
    let mut nx = Raster::filled_like(dem.raster(), 0.0);
    let mut ny = Raster::filled_like(dem.raster(), 0.0);
    let mut nz = Raster::filled_like(dem.raster(), 0.0);
    for i in 0..rows {
        for j in 0..cols {
            // No surface at a hole: the stencil alone would not notice since
            // the central difference skips the center sample.
            if dem.elevation(i, j).is_nan() {
                nx.set(i, j, f64::NAN);
                ny.set(i, j, f64::NAN);
                nz.set(i, j, f64::NAN);
                continue;
            }
            let dzdx = if j == 0 {
                (dem.elevation(i, 1) - dem.elevation(i, 0)) / cs
            } else if j == cols - 1 {
                (dem.elevation(i, cols - 1) - dem.elevation(i, cols - 2)) / cs
            } else {
                (dem.elevation(i, j + 1) - dem.elevation(i, j - 1)) / (2.0 * cs)
            };
            let dzdy = if i == 0 {
                (dem.elevation(1, j) - dem.elevation(0, j)) / cs
            } else if i == rows - 1 {
                (dem.elevation(rows - 1, j) - dem.elevation(rows - 2, j)) / cs
            } else {
                (dem.elevation(i + 1, j) - dem.elevation(i - 1, j)) / (2.0 * cs)
            };
            // NaN slopes propagate into all three components.
            let len = (dzdx * dzdx + dzdy * dzdy + 1.0).sqrt();
            nx.set(i, j, -dzdx / len);
            ny.set(i, j, -dzdy / len);
            nz.set(i, j, 1.0 / len);
        }
    }
    NormalMap { nx, ny, nz }
}

/// Elevation minus `reference_elevation`, same grid as the input.
pub fn derive_displacement_map(dem: &DemGrid, reference_elevation: f64) -> Raster {
    let mut out = Raster::filled_like(dem.raster(), 0.0);
    for i in 0..dem.rows() {
        for j in 0..dem.cols() {
            out.set(i, j, dem.elevation(i, j) - reference_elevation);
        }
    }
    out
}

/// Computes the horizon map with `n_azimuths` equal sectors.
///
/// Rows are processed in parallel; the result does not depend on the worker
/// count.
pub fn compute_horizon_map(dem: &DemGrid, n_azimuths: usize) -> Result<HorizonMap> {
    compute_horizon_map_with_workers(dem, n_azimuths, default_workers())
}

/// As [`compute_horizon_map`] with an explicit worker count.
pub fn compute_horizon_map_with_workers(
    dem: &DemGrid,
    n_azimuths: usize,
    workers: usize,
) -> Result<HorizonMap> {
    if n_azimuths == 0 {
        return Err(Error::domain("horizon map needs at least one azimuth sector"));
    }
    let rows = dem.rows();
    let cols = dem.cols();
    let workers = workers.clamp(1, rows);

    // Each row yields cols * n_azimuths angles, (col, sector)-indexed.
    let mut row_results: Vec<Vec<f64>> = Vec::with_capacity(rows);
    if workers <= 1 {
        for i in 0..rows {
            row_results.push(horizon_row(dem, i, n_azimuths));
        }
    } else {
        let chunk = rows.div_ceil(workers);
        thread::scope(|s| {
            let handles: Vec<_> = (0..workers)
                .map(|w| {
                    let lo = w * chunk;
                    let hi = ((w + 1) * chunk).min(rows);
                    s.spawn(move || {
                        (lo..hi)
                            .map(|i| horizon_row(dem, i, n_azimuths))
                            .collect::<Vec<_>>()
                    })
                })
                .collect();
            for h in handles {
                row_results.extend(h.join().expect("horizon worker panicked"));
            }
        });
    }

    let mut sectors = vec![Raster::filled_like(dem.raster(), 0.0); n_azimuths];
    for (i, row) in row_results.iter().enumerate() {
        for j in 0..cols {
            for (k, sector) in sectors.iter_mut().enumerate() {
                sector.set(i, j, row[j * n_azimuths + k]);
            }
        }
    }
    Ok(HorizonMap { sectors })
}

/// Worker count used when the caller does not pick one: the machine's
/// available parallelism, or 1 when that cannot be determined.
pub fn default_workers() -> usize {
    thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

fn horizon_row(dem: &DemGrid, row: usize, n_azimuths: usize) -> Vec<f64> {
    let cols = dem.cols();
    let mut out = vec![0.0; cols * n_azimuths];
    let y0 = dem.raster().cell_y(row);
    for j in 0..cols {
        let z0 = dem.elevation(row, j);
        let x0 = dem.raster().cell_x(j);
        for k in 0..n_azimuths {
            let v = if z0.is_nan() {
                f64::NAN
            } else {
                let az = (k as f64 * 360.0 / n_azimuths as f64).to_radians();
                trace_horizon(dem, x0, y0, z0, az.sin(), az.cos())
            };
            out[j * n_azimuths + k] = v;
        }
    }
    out
}

/// Max elevation angle along one direction, sampled every half cell,
/// floored at 0. Returns degrees.
fn trace_horizon(dem: &DemGrid, x0: f64, y0: f64, z0: f64, dx: f64, dy: f64) -> f64 {
    let dz_cap = dem.max_elevation() - z0;
    if dz_cap.is_nan() || dz_cap <= 0.0 {
        // Nothing anywhere rises above this cell.
        return 0.0;
    }
    let step = 0.5 * dem.cell_size();
    let mut best = 0.0f64;
    let mut k = 1usize;
    loop {
        let t = k as f64 * step;
        // Even terrain at the global maximum cannot beat `best` this far out.
        if best > 0.0 && t * best.tan() >= dz_cap {
            break;
        }
        let px = x0 + t * dx;
        let py = y0 + t * dy;
        if !dem.contains(px, py) {
            break;
        }
        match dem.sample_bilinear(px, py) {
            Ok(z) if !z.is_nan() => {
                let angle = (z - z0).atan2(t);
                if angle > best {
                    best = angle;
                }
            }
            // Holes along the ray never block.
            _ => {}
        }
        k += 1;
    }
    best.to_degrees()
}
