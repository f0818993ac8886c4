//! Digital elevation model grid.
//!
//! A `DemGrid` wraps a [`Raster`] of elevations in meters and remembers the
//! nodata sentinel of the file it came from. Nodata cells are stored as NaN
//! so that interpolation and derivation propagate holes without special
//! casing. The grid is immutable after construction; derived products and
//! the renderer share it by reference across threads.

use crate::error::{Error, Result};
use crate::terrain::raster::Raster;

#[derive(Debug, Clone)]
pub struct DemGrid {
    raster: Raster,
    /// Sentinel from the source file, used again on save. NaN in storage.
    nodata: Option<f64>,
    /// Cached maximum over non-nodata cells, NaN when the grid is all holes.
    max_elevation: f64,
}

impl DemGrid {
    /// Builds a grid from row-major elevations (row 0 southernmost).
    /// Cells equal to `nodata` are normalized to NaN in storage.
    pub fn new(
        rows: usize,
        cols: usize,
        cell_size: f64,
        origin_x: f64,
        origin_y: f64,
        mut elevations: Vec<f64>,
        nodata: Option<f64>,
    ) -> Result<Self> {
        if rows < 2 || cols < 2 {
            return Err(Error::domain(format!(
                "elevation grid needs at least 2x2 cells, got {rows}x{cols}"
            )));
        }
        if let Some(sentinel) = nodata {
            if !sentinel.is_finite() {
                return Err(Error::domain(format!(
                    "nodata sentinel must be finite, got {sentinel}"
                )));
            }
            for v in elevations.iter_mut() {
                if *v == sentinel {
                    *v = f64::NAN;
                }
            }
        }
        let raster = Raster::from_values(rows, cols, cell_size, origin_x, origin_y, elevations)?;
        let max_elevation = raster.finite_min_max().map(|(_, hi)| hi).unwrap_or(f64::NAN);
        Ok(DemGrid {
            raster,
            nodata,
            max_elevation,
        })
    }

    /// Flat grid of constant elevation, mostly for tests and demos.
    pub fn constant(
        rows: usize,
        cols: usize,
        cell_size: f64,
        origin_x: f64,
        origin_y: f64,
        elevation: f64,
    ) -> Result<Self> {
        Self::new(
            rows,
            cols,
            cell_size,
            origin_x,
            origin_y,
            vec![elevation; rows * cols],
            None,
        )
    }

    pub fn raster(&self) -> &Raster {
        &self.raster
    }

    pub fn rows(&self) -> usize {
        self.raster.rows()
    }

    pub fn cols(&self) -> usize {
        self.raster.cols()
    }

    pub fn cell_size(&self) -> f64 {
        self.raster.cell_size()
    }

    pub fn origin_x(&self) -> f64 {
        self.raster.origin_x()
    }

    pub fn origin_y(&self) -> f64 {
        self.raster.origin_y()
    }

    pub fn nodata(&self) -> Option<f64> {
        self.nodata
    }

    /// Elevation at cell (row, col); NaN marks nodata.
    pub fn elevation(&self, row: usize, col: usize) -> f64 {
        self.raster.get(row, col)
    }

    /// Highest non-nodata elevation, NaN for an all-nodata grid.
    pub fn max_elevation(&self) -> f64 {
        self.max_elevation
    }

    pub fn sample_bilinear(&self, x: f64, y: f64) -> Result<f64> {
        self.raster.sample_bilinear(x, y)
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        self.raster.contains(x, y)
    }

    /// World coordinates of the grid center (midpoint of the cell-center
    /// rectangle).
    pub fn center(&self) -> (f64, f64) {
        (
            0.5 * (self.origin_x() + self.raster.max_x()),
            0.5 * (self.origin_y() + self.raster.max_y()),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_degenerate_grids() {
        let err = DemGrid::new(1, 5, 1.0, 0.0, 0.0, vec![0.0; 5], None).unwrap_err();
        assert!(matches!(err, Error::Domain(_)), "rows < 2 must fail: {err}");
        let err = DemGrid::new(2, 2, 0.0, 0.0, 0.0, vec![0.0; 4], None).unwrap_err();
        assert!(matches!(err, Error::Domain(_)), "cell_size 0 must fail: {err}");
        let err = DemGrid::new(2, 2, 1.0, 0.0, 0.0, vec![0.0, f64::INFINITY, 0.0, 0.0], None)
            .unwrap_err();
        assert!(matches!(err, Error::Domain(_)), "inf elevation must fail: {err}");
    }

    #[test]
    fn nodata_sentinel_becomes_nan() {
        let dem = DemGrid::new(
            2,
            2,
            1.0,
            0.0,
            0.0,
            vec![-9999.0, 1.0, 2.0, 3.0],
            Some(-9999.0),
        )
        .unwrap();
        assert!(dem.elevation(0, 0).is_nan());
        assert_eq!(dem.elevation(1, 1), 3.0);
        assert_eq!(dem.max_elevation(), 3.0);
    }

    #[test]
    fn center_is_domain_midpoint() {
        let dem = DemGrid::constant(3, 5, 2.0, 10.0, 20.0, 0.0).unwrap();
        let (cx, cy) = dem.center();
        assert_eq!(cx, 10.0 + 4.0);
        assert_eq!(cy, 20.0 + 2.0);
    }
}
