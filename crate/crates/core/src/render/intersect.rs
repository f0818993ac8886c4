//! Ray vs heightfield intersection.
//!
//! The surface is the bilinear interpolant between cell centers, the same
//! surface `DemGrid::sample_bilinear` evaluates. A 2-D DDA walks the ray's
//! horizontal projection across the (rows-1) x (cols-1) patch lattice; inside
//! each patch the interpolant restricted to the ray is quadratic in the ray
//! parameter, so the crossing is found exactly from the quadratic roots
//! rather than by marching.

use crate::camera::Ray;
use crate::math::Vec3;
use crate::terrain::DemGrid;

/// First surface crossing along a ray.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hit {
    pub point: Vec3,
    /// Meters along the (unit) ray direction.
    pub t: f64,
    /// Row and column of the patch's south-west cell.
    pub cell: (usize, usize),
}

/// Returns the nearest crossing with `0 <= t <= max_range`, or None if the
/// ray leaves the grid or runs out of range first. Patches touching a nodata
/// cell are transparent.
pub fn intersect_heightfield(dem: &DemGrid, ray: &Ray, max_range: f64) -> Option<Hit> {
    if max_range.is_nan() || max_range <= 0.0 {
        return None;
    }
    let cs = dem.cell_size();
    let x0 = dem.origin_x();
    let y0 = dem.origin_y();
    let x1 = x0 + (dem.cols() - 1) as f64 * cs;
    let y1 = y0 + (dem.rows() - 1) as f64 * cs;
    let o = ray.origin;
    let d = ray.direction;

    // Clip the horizontal projection against the cell-center rectangle.
    let mut t_enter = 0.0f64;
    let mut t_exit = max_range;
    for (oc, dc, lo, hi) in [(o.x, d.x, x0, x1), (o.y, d.y, y0, y1)] {
        if dc == 0.0 {
            if oc < lo || oc > hi {
                return None;
            }
        } else {
            let ta = (lo - oc) / dc;
            let tb = (hi - oc) / dc;
            let (ta, tb) = if ta <= tb { (ta, tb) } else { (tb, ta) };
            t_enter = t_enter.max(ta);
            t_exit = t_exit.min(tb);
        }
    }
    if t_enter > t_exit {
        return None;
    }

    let patch_rows = dem.rows() - 1;
    let patch_cols = dem.cols() - 1;
    let clamp_patch = |g: f64, n: usize| (g.floor() as isize).clamp(0, n as isize - 1);

    if d.x == 0.0 && d.y == 0.0 {
        // Vertical ray: one patch covers the whole interval.
        let j = clamp_patch((o.x - x0) / cs, patch_cols);
        let i = clamp_patch((o.y - y0) / cs, patch_rows);
        return solve_patch(dem, &o, &d, i as usize, j as usize, t_enter, t_exit);
    }

    let start = o + d * t_enter;
    let mut j = clamp_patch((start.x - x0) / cs, patch_cols);
    let mut i = clamp_patch((start.y - y0) / cs, patch_rows);

    let (step_x, mut t_max_x, t_delta_x) = dda_axis(o.x, d.x, start.x, x0, cs, j, t_enter);
    let (step_y, mut t_max_y, t_delta_y) = dda_axis(o.y, d.y, start.y, y0, cs, i, t_enter);

    let mut t_curr = t_enter;
    loop {
        let t_next = t_max_x.min(t_max_y).min(t_exit);
        if let Some(hit) = solve_patch(dem, &o, &d, i as usize, j as usize, t_curr, t_next) {
            return Some(hit);
        }
        if t_next >= t_exit {
            return None;
        }
        if t_max_x <= t_max_y {
            j += step_x;
            t_curr = t_max_x;
            t_max_x += t_delta_x;
            if j < 0 || j >= patch_cols as isize {
                return None;
            }
        } else {
            i += step_y;
            t_curr = t_max_y;
            t_max_y += t_delta_y;
            if i < 0 || i >= patch_rows as isize {
                return None;
            }
        }
    }
}

/// DDA setup for one horizontal axis: step sign, ray parameter of the first
/// patch-boundary crossing, and the parameter advance per cell.
fn dda_axis(
    _origin: f64,
    dir: f64,
    start: f64,
    grid_origin: f64,
    cs: f64,
    index: isize,
    t_enter: f64,
) -> (isize, f64, f64) {
    if dir > 0.0 {
        let boundary = grid_origin + (index + 1) as f64 * cs;
        (1, t_enter + (boundary - start) / dir, cs / dir)
    } else if dir < 0.0 {
        let boundary = grid_origin + index as f64 * cs;
        (-1, t_enter + (boundary - start) / dir, -cs / dir)
    } else {
        (0, f64::INFINITY, f64::INFINITY)
    }
}

/// Nearest root of z_ray(t) = z_patch(t) within [ta, tb] (with a small slop
/// so boundary crossings are not lost to rounding), or None.
fn solve_patch(
    dem: &DemGrid,
    o: &Vec3,
    d: &Vec3,
    i: usize,
    j: usize,
    ta: f64,
    tb: f64,
) -> Option<Hit> {
    if tb < ta {
        return None;
    }
    let z00 = dem.elevation(i, j);
    let z01 = dem.elevation(i, j + 1);
    let z10 = dem.elevation(i + 1, j);
    let z11 = dem.elevation(i + 1, j + 1);
    if z00.is_nan() || z01.is_nan() || z10.is_nan() || z11.is_nan() {
        return None;
    }
    // The bilinear patch stays inside its corner span, and ray height is
    // linear over the interval, so disjoint spans cannot cross.
    let zmin = z00.min(z01).min(z10).min(z11);
    let zmax = z00.max(z01).max(z10).max(z11);
    let za = o.z + ta * d.z;
    let zb = o.z + tb * d.z;
    if za.min(zb) > zmax || za.max(zb) < zmin {
        return None;
    }

    let cs = dem.cell_size();
    let xi0 = (o.x - (dem.origin_x() + j as f64 * cs)) / cs;
    let eta0 = (o.y - (dem.origin_y() + i as f64 * cs)) / cs;
    let dxi = d.x / cs;
    let deta = d.y / cs;
    let c10 = z01 - z00;
    let c01 = z10 - z00;
    let c11 = z00 - z01 - z10 + z11;

    // F(t) = z_ray - z_patch = A t^2 + B t + C
    let a = -(c11 * dxi * deta);
    let b = d.z - (c10 * dxi + c01 * deta + c11 * (xi0 * deta + eta0 * dxi));
    let c = o.z - (z00 + c10 * xi0 + c01 * eta0 + c11 * xi0 * eta0);

    let eps = 1e-9 * (1.0 + tb.abs());
    let lo = ta - eps;
    let hi = tb + eps;
    let mut best: Option<f64> = None;
    let mut consider = |t: f64| {
        if t >= lo && t <= hi && t >= 0.0 {
            best = Some(best.map_or(t, |b: f64| b.min(t)));
        }
    };
    if a == 0.0 {
        if b != 0.0 {
            consider(-c / b);
        }
    } else {
        let disc = b * b - 4.0 * a * c;
        if disc < 0.0 {
            return None;
        }
        // Citardauq pairing avoids cancellation when |B| dominates.
        let q = -0.5 * (b + b.signum() * disc.sqrt());
        consider(q / a);
        if q != 0.0 {
            consider(c / q);
        }
    }
    let t = best?;
    Some(Hit {
        point: o + d * t,
        t,
        cell: (i, j),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::camera::Ray;
    use crate::terrain::DemGrid;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn flat(rows: usize, cols: usize, cs: f64, z: f64) -> DemGrid {
        DemGrid::constant(rows, cols, cs, 0.0, 0.0, z).unwrap()
    }

    fn ray(origin: [f64; 3], dir: [f64; 3]) -> Ray {
        Ray::new(Vec3::new(origin[0], origin[1], origin[2]), Vec3::new(dir[0], dir[1], dir[2]))
            .unwrap()
    }

    #[test]
    fn nadir_ray_hits_flat_plane_at_range_equal_to_height() {
        let dem = flat(11, 11, 1.0, 0.0);
        let hit = intersect_heightfield(&dem, &ray([5.0, 5.0, 100.0], [0.0, 0.0, -1.0]), 1e6)
            .expect("must hit");
        assert!((hit.t - 100.0).abs() < 1e-9, "t = {}", hit.t);
        assert!(hit.point.z.abs() < 1e-9);
        assert_eq!(hit.cell, (5, 5));
    }

    #[test]
    fn oblique_ray_hits_flat_plane_where_geometry_says() {
        let dem = flat(21, 21, 1.0, 0.0);
        // 45 degrees down toward +x: crosses z=0 after travelling 10*sqrt(2).
        let s = 1.0 / 2f64.sqrt();
        let hit = intersect_heightfield(&dem, &ray([2.0, 10.0, 10.0], [s, 0.0, -s]), 1e6)
            .expect("must hit");
        assert!((hit.t - 10.0 * 2f64.sqrt()).abs() < 1e-9);
        assert!((hit.point.x - 12.0).abs() < 1e-9);
    }

    #[test]
    fn ray_from_below_pointing_up_crosses_the_surface() {
        let dem = flat(11, 11, 1.0, 5.0);
        let hit = intersect_heightfield(&dem, &ray([5.0, 5.0, 0.0], [0.0, 0.0, 1.0]), 1e6)
            .expect("must hit");
        assert!((hit.t - 5.0).abs() < 1e-9);
    }

    #[test]
    fn ray_missing_the_grid_returns_none() {
        let dem = flat(11, 11, 1.0, 0.0);
        assert!(intersect_heightfield(&dem, &ray([50.0, 50.0, 10.0], [0.0, 0.0, -1.0]), 1e6)
            .is_none());
        // Horizontal ray above the terrain.
        assert!(intersect_heightfield(&dem, &ray([-5.0, 5.0, 10.0], [1.0, 0.0, 0.0]), 1e6)
            .is_none());
    }

    #[test]
    fn max_range_cuts_off_distant_hits() {
        let dem = flat(11, 11, 1.0, 0.0);
        let r = ray([5.0, 5.0, 100.0], [0.0, 0.0, -1.0]);
        assert!(intersect_heightfield(&dem, &r, 99.0).is_none());
        assert!(intersect_heightfield(&dem, &r, 101.0).is_some());
    }

    #[test]
    fn ramp_intersection_matches_the_plane_solution() {
        // z = x over the grid; patches reproduce a plane exactly.
        let n = 33;
        let vals: Vec<f64> = (0..n * n)
            .map(|k| (k % n) as f64 * 0.5)
            .collect();
        let dem = DemGrid::new(n, n, 0.5, 0.0, 0.0, vals, None).unwrap();
        let o = Vec3::new(2.0, 7.0, 9.0);
        let dir = Vec3::new(1.0, 0.2, -1.4).normalize();
        // Solve o.z + t d.z = o.x + t d.x.
        let t_plane = (o.x - o.z) / (dir.z - dir.x);
        let hit =
            intersect_heightfield(&dem, &Ray::new(o, dir).unwrap(), 1e6).expect("must hit");
        assert!((hit.t - t_plane).abs() < 1e-9, "t {} vs {}", hit.t, t_plane);
        assert!((hit.point.z - hit.point.x).abs() < 1e-9);
    }

    #[test]
    fn vertical_ray_off_cell_center_uses_the_bilinear_value() {
        let mut vals = vec![0.0; 4];
        vals[0] = 0.0; // (0,0)
        vals[1] = 2.0; // (0,1)
        vals[2] = 4.0; // (1,0)
        vals[3] = 6.0; // (1,1)
        let dem = DemGrid::new(2, 2, 1.0, 0.0, 0.0, vals, None).unwrap();
        let expected = dem.sample_bilinear(0.25, 0.75).unwrap();
        let hit = intersect_heightfield(&dem, &ray([0.25, 0.75, 50.0], [0.0, 0.0, -1.0]), 1e6)
            .expect("must hit");
        assert!((hit.point.z - expected).abs() < 1e-12);
    }

    #[test]
    fn nodata_patches_are_transparent() {
        let mut vals = vec![0.0; 121];
        vals[5 * 11 + 5] = f64::NAN;
        let dem = DemGrid::new(11, 11, 1.0, 0.0, 0.0, vals, None).unwrap();
        // Straight down into the hole: all four patches around center are gone.
        assert!(intersect_heightfield(&dem, &ray([5.0, 5.0, 10.0], [0.0, 0.0, -1.0]), 1e6)
            .is_none());
        // A clean column still hits.
        assert!(intersect_heightfield(&dem, &ray([2.0, 2.0, 10.0], [0.0, 0.0, -1.0]), 1e6)
            .is_some());
    }

    #[test]
    fn hit_point_lies_on_the_sampled_surface() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let n = 24;
        let vals: Vec<f64> = (0..n * n).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let dem = DemGrid::new(n, n, 1.0, 0.0, 0.0, vals, None).unwrap();
        let mut hits = 0;
        for _ in 0..300 {
            let o = Vec3::new(
                rng.gen_range(0.0..23.0),
                rng.gen_range(0.0..23.0),
                rng.gen_range(5.0..40.0),
            );
            // Aim at a spot inside the grid below the terrain floor so the
            // ray cannot drift out of the domain before descending.
            let target = Vec3::new(
                rng.gen_range(1.0..22.0),
                rng.gen_range(1.0..22.0),
                -4.0,
            );
            let dir = (target - o).normalize();
            if let Some(hit) = intersect_heightfield(&dem, &Ray::new(o, dir).unwrap(), 1e6) {
                hits += 1;
                let z = dem.sample_bilinear(hit.point.x, hit.point.y).unwrap();
                assert!(
                    (z - hit.point.z).abs() < 1e-6,
                    "surface z {} vs hit z {}",
                    z,
                    hit.point.z
                );
            }
        }
        assert!(hits > 250, "only {hits} of 300 rays hit");
    }

    /// Independent check: a fine marcher that samples the same bilinear
    /// surface every cs/50 and bisects the first sign change.
    fn march_oracle(dem: &DemGrid, r: &Ray, max_range: f64) -> Option<f64> {
        let step = dem.cell_size() / 50.0;
        let above = |t: f64| -> Option<bool> {
            let p = r.at(t);
            match dem.sample_bilinear(p.x, p.y) {
                Ok(z) if !z.is_nan() => Some(p.z > z),
                _ => None,
            }
        };
        let mut t_prev: Option<(f64, bool)> = None;
        let mut t = 0.0;
        while t <= max_range {
            if let Some(up) = above(t) {
                if let Some((tp, was_up)) = t_prev {
                    if was_up != up {
                        let (mut lo, mut hi) = (tp, t);
                        for _ in 0..80 {
                            let mid = 0.5 * (lo + hi);
                            if above(mid) == Some(was_up) {
                                lo = mid;
                            } else {
                                hi = mid;
                            }
                        }
                        return Some(0.5 * (lo + hi));
                    }
                }
                t_prev = Some((t, up));
            } else {
                t_prev = None;
            }
            t += step;
        }
        None
    }

    #[test]
    fn dda_agrees_with_a_fine_marching_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(4242);
        let n = 16;
        let vals: Vec<f64> = (0..n * n).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let dem = DemGrid::new(n, n, 1.0, 0.0, 0.0, vals, None).unwrap();
        let mut matched = 0;
        let mut oracle_missed = 0;
        for _ in 0..200 {
            let o = Vec3::new(
                rng.gen_range(1.0..14.0),
                rng.gen_range(1.0..14.0),
                rng.gen_range(4.0..20.0),
            );
            let target = Vec3::new(rng.gen_range(1.0..14.0), rng.gen_range(1.0..14.0), 0.0);
            let dir = (target - o).normalize();
            let r = Ray::new(o, dir).unwrap();
            let got = intersect_heightfield(&dem, &r, 1e4);
            let want = march_oracle(&dem, &r, 1e4);
            match (got, want) {
                (Some(h), Some(t)) if (h.t - t).abs() < 1e-6 => matched += 1,
                (Some(h), other) => {
                    // The coarse oracle can step over a crossing the exact
                    // solve catches, but it must never find an earlier one.
                    if let Some(t) = other {
                        assert!(h.t < t, "oracle found an earlier hit: {} vs {}", t, h.t);
                    }
                    let z = dem.sample_bilinear(h.point.x, h.point.y).unwrap();
                    assert!((z - h.point.z).abs() < 1e-6, "off-surface hit");
                    oracle_missed += 1;
                }
                (None, Some(t)) => panic!("dda missed a crossing the oracle saw at t = {t}"),
                (None, None) => {}
            }
        }
        assert!(matched > 150, "only {matched} matched rays");
        assert!(oracle_missed < 10, "{oracle_missed} oracle misses");
    }
}
