//! Single-channel float grid with georeferencing.
//!
//! A raster stores row-major f64 samples at cell centers. World coordinates
//! map onto the grid as x = origin_x + col * cell_size (east) and
//! y = origin_y + row * cell_size (north), so row 0 is the southernmost row.
//! NaN marks nodata; every other sample is finite.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    rows: usize,
    cols: usize,
    cell_size: f64,
    origin_x: f64,
    origin_y: f64,
    values: Vec<f64>,
}

impl Raster {
    /// Builds a raster from row-major values. Values must be finite or NaN.
    pub fn from_values(
        rows: usize,
        cols: usize,
        cell_size: f64,
        origin_x: f64,
        origin_y: f64,
        values: Vec<f64>,
    ) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::domain(format!(
                "raster dimensions must be positive, got {rows}x{cols}"
            )));
        }
        if !cell_size.is_finite() || cell_size <= 0.0 {
            return Err(Error::domain(format!(
                "cell size must be positive and finite, got {cell_size}"
            )));
        }
        if !origin_x.is_finite() || !origin_y.is_finite() {
            return Err(Error::domain("raster origin must be finite".to_string()));
        }
        if values.len() != rows * cols {
            return Err(Error::domain(format!(
                "expected {} values for a {rows}x{cols} raster, got {}",
                rows * cols,
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| v.is_infinite()) {
            return Err(Error::domain(format!(
                "raster values must be finite or NaN, got {v}"
            )));
        }
        Ok(Raster {
            rows,
            cols,
            cell_size,
            origin_x,
            origin_y,
            values,
        })
    }

    /// Raster of constant value with the given shape and georeference.
    pub fn filled(
        rows: usize,
        cols: usize,
        cell_size: f64,
        origin_x: f64,
        origin_y: f64,
        value: f64,
    ) -> Result<Self> {
        Self::from_values(rows, cols, cell_size, origin_x, origin_y, vec![value; rows * cols])
    }

    /// Raster of constant value sharing `other`'s shape and georeference.
    pub fn filled_like(other: &Raster, value: f64) -> Self {
        Raster {
            rows: other.rows,
            cols: other.cols,
            cell_size: other.cell_size,
            origin_x: other.origin_x,
            origin_y: other.origin_y,
            values: vec![value; other.rows * other.cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn origin_x(&self) -> f64 {
        self.origin_x
    }

    pub fn origin_y(&self) -> f64 {
        self.origin_y
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Sample at cell (row, col). Panics on out-of-bounds indices.
    pub fn get(&self, row: usize, col: usize) -> f64 {
        assert!(row < self.rows && col < self.cols, "cell index out of bounds");
        self.values[row * self.cols + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        assert!(row < self.rows && col < self.cols, "cell index out of bounds");
        self.values[row * self.cols + col] = value;
    }

    /// World x coordinate of column `col`'s cell center.
    pub fn cell_x(&self, col: usize) -> f64 {
        self.origin_x + col as f64 * self.cell_size
    }

    /// World y coordinate of row `row`'s cell center.
    pub fn cell_y(&self, row: usize) -> f64 {
        self.origin_y + row as f64 * self.cell_size
    }

    /// Maximum world x still inside the sampling domain.
    pub fn max_x(&self) -> f64 {
        self.origin_x + (self.cols - 1) as f64 * self.cell_size
    }

    /// Maximum world y still inside the sampling domain.
    pub fn max_y(&self) -> f64 {
        self.origin_y + (self.rows - 1) as f64 * self.cell_size
    }

    /// True when `(x, y)` lies inside the rectangle spanned by cell centers.
    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.origin_x && x <= self.max_x() && y >= self.origin_y && y <= self.max_y()
    }

    /// True when both rasters share shape and georeference.
    pub fn same_grid(&self, other: &Raster) -> bool {
        self.rows == other.rows
            && self.cols == other.cols
            && self.cell_size == other.cell_size
            && self.origin_x == other.origin_x
            && self.origin_y == other.origin_y
    }

    /// Index of the cell whose center is nearest to `(x, y)`, clamped to the
    /// grid.
    pub fn nearest_cell(&self, x: f64, y: f64) -> (usize, usize) {
        let col = ((x - self.origin_x) / self.cell_size).round();
        let row = ((y - self.origin_y) / self.cell_size).round();
        let col = col.clamp(0.0, (self.cols - 1) as f64) as usize;
        let row = row.clamp(0.0, (self.rows - 1) as f64) as usize;
        (row, col)
    }

    /// Bilinear interpolation between the four surrounding cell centers.
    ///
    /// Exact at cell centers. Queries touching a NaN cell return NaN.
    /// Queries outside the cell-center rectangle are an error.
    pub fn sample_bilinear(&self, x: f64, y: f64) -> Result<f64> {
        let gx = (x - self.origin_x) / self.cell_size;
        let gy = (y - self.origin_y) / self.cell_size;
        let max_gx = (self.cols - 1) as f64;
        let max_gy = (self.rows - 1) as f64;
        if !(gx >= 0.0 && gx <= max_gx && gy >= 0.0 && gy <= max_gy) {
            return Err(Error::out_of_range(format!(
                "bilinear query ({x}, {y}) outside grid domain [{}, {}] x [{}, {}]",
                self.origin_x,
                self.max_x(),
                self.origin_y,
                self.max_y()
            )));
        }
        Ok(self.sample_bilinear_unchecked(gx, gy))
    }

    /// Bilinear interpolation in grid units, caller guarantees
    /// 0 <= gx <= cols-1 and 0 <= gy <= rows-1.
    pub(crate) fn sample_bilinear_unchecked(&self, gx: f64, gy: f64) -> f64 {
        // Clamp the base cell so exact upper-edge queries use fraction 1.0
        // in the last interior cell.
        let j0 = if self.cols > 1 {
            (gx.floor() as usize).min(self.cols - 2)
        } else {
            0
        };
        let i0 = if self.rows > 1 {
            (gy.floor() as usize).min(self.rows - 2)
        } else {
            0
        };
        let fx = gx - j0 as f64;
        let fy = gy - i0 as f64;
        let j1 = (j0 + 1).min(self.cols - 1);
        let i1 = (i0 + 1).min(self.rows - 1);
        // Zero-weight corners are skipped rather than multiplied so a NaN
        // neighbor cannot contaminate an exact cell-center query.
        let mut acc = 0.0;
        for (v, w) in [
            (self.get(i0, j0), (1.0 - fx) * (1.0 - fy)),
            (self.get(i0, j1), fx * (1.0 - fy)),
            (self.get(i1, j0), (1.0 - fx) * fy),
            (self.get(i1, j1), fx * fy),
        ] {
            if w != 0.0 {
                acc += v * w;
            }
        }
        acc
    }

    /// Minimum and maximum over all non-NaN samples, None when every sample
    /// is nodata.
    pub fn finite_min_max(&self) -> Option<(f64, f64)> {
        let mut out: Option<(f64, f64)> = None;
        for &v in &self.values {
            if v.is_nan() {
                continue;
            }
            out = Some(match out {
                None => (v, v),
                Some((lo, hi)) => (lo.min(v), hi.max(v)),
            });
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid_2x2() -> Raster {
        // values: row 0 (south): 0, 2 / row 1 (north): 4, 6
        Raster::from_values(2, 2, 10.0, 0.0, 0.0, vec![0.0, 2.0, 4.0, 6.0]).unwrap()
    }

    #[test]
    fn bilinear_is_exact_at_cell_centers() {
        let r = grid_2x2();
        assert_eq!(r.sample_bilinear(0.0, 0.0).unwrap(), 0.0);
        assert_eq!(r.sample_bilinear(10.0, 0.0).unwrap(), 2.0);
        assert_eq!(r.sample_bilinear(0.0, 10.0).unwrap(), 4.0);
        assert_eq!(r.sample_bilinear(10.0, 10.0).unwrap(), 6.0);
    }

    #[test]
    fn bilinear_midpoint_averages_corners() {
        let r = grid_2x2();
        let mid = r.sample_bilinear(5.0, 5.0).unwrap();
        assert!((mid - 3.0).abs() < 1e-12, "midpoint sample {mid} != 3.0");
    }

    #[test]
    fn bilinear_outside_domain_is_range_error() {
        let r = grid_2x2();
        let err = r.sample_bilinear(10.5, 0.0).unwrap_err();
        assert!(matches!(err, Error::OutOfRange(_)), "unexpected error {err:?}");
        assert!(r.sample_bilinear(-0.1, 5.0).is_err());
        assert!(r.sample_bilinear(5.0, 10.0 + 1e-9).is_err());
    }

    #[test]
    fn bilinear_touching_nan_is_nan() {
        let mut r = grid_2x2();
        r.set(0, 0, f64::NAN);
        assert!(r.sample_bilinear(5.0, 5.0).unwrap().is_nan());
        // The far cell center does not touch the NaN corner.
        assert_eq!(r.sample_bilinear(10.0, 10.0).unwrap(), 6.0);
    }

    #[test]
    fn infinite_values_are_rejected() {
        let err =
            Raster::from_values(2, 2, 1.0, 0.0, 0.0, vec![0.0, f64::INFINITY, 0.0, 0.0]).unwrap_err();
        assert!(matches!(err, Error::Domain(_)));
    }

    #[test]
    fn nearest_cell_rounds_and_clamps() {
        let r = grid_2x2();
        assert_eq!(r.nearest_cell(4.9, 0.0), (0, 0));
        assert_eq!(r.nearest_cell(5.1, 9.9), (1, 1));
        assert_eq!(r.nearest_cell(-100.0, 100.0), (1, 0));
    }
}
