//! Cast-shadow queries for surface points.

use crate::math::Vec3;
use crate::render::{RenderOptions, ShadowMethod};
use crate::terrain::{DemGrid, HorizonMap};

/// True when terrain blocks the path from `point` toward `sun_dir` (unit,
/// pointing at the light). With `ShadowMethod::None` every point is lit. For
/// the other methods a sun at or below the local horizontal is always in
/// shadow.
///
/// `horizon` must be present when the method is `HorizonMap`; the renderer
/// validates that before any query.
pub fn shadow_test(
    dem: &DemGrid,
    horizon: Option<&HorizonMap>,
    point: &Vec3,
    sun_dir: &Vec3,
    options: &RenderOptions,
) -> bool {
    if options.shadow_method == ShadowMethod::None {
        return false;
    }
    let elevation_rad = sun_dir.z.clamp(-1.0, 1.0).asin();
    if elevation_rad <= 0.0 {
        return true;
    }
    match options.shadow_method {
        ShadowMethod::None => unreachable!(),
        ShadowMethod::Raymarch => raymarch(dem, point, sun_dir, options.shadow_step_m),
        ShadowMethod::HorizonMap => {
            let map = horizon.expect("horizon shadow method without a horizon map");
            let azimuth_deg = sun_dir.x.atan2(sun_dir.y).to_degrees();
            let blocking = map.angle_at(point.x, point.y, azimuth_deg);
            // Nodata cells carry no horizon; treat them as lit.
            !blocking.is_nan() && elevation_rad.to_degrees() < blocking
        }
    }
}

fn raymarch(dem: &DemGrid, point: &Vec3, sun_dir: &Vec3, step: f64) -> bool {
    // Small lift breaks ties against the surface the point itself sits on.
    let eps = 1e-3 * dem.cell_size();
    let zmax = dem.max_elevation();
    let mut k = 0u64;
    loop {
        let t = eps + k as f64 * step;
        let p = point + sun_dir * t;
        if !dem.contains(p.x, p.y) {
            return false;
        }
        if p.z > zmax {
            // Above every sample; an ascending ray can never re-enter.
            return false;
        }
        if let Ok(z) = dem.sample_bilinear(p.x, p.y) {
            if z > p.z {
                return true;
            }
        }
        k += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::terrain::compute_horizon_map;

    fn opts(method: ShadowMethod, step: f64) -> RenderOptions {
        RenderOptions {
            shadow_method: method,
            shadow_step_m: step,
            ..RenderOptions::default_for_cell(1.0)
        }
    }

    fn sun(elevation_deg: f64, azimuth_deg: f64) -> Vec3 {
        let el = elevation_deg.to_radians();
        let az = azimuth_deg.to_radians();
        Vec3::new(az.sin() * el.cos(), az.cos() * el.cos(), el.sin())
    }

    /// 5 rows x 16 cols, flat at 0 except a 10 m wall along column x = 10.
    fn wall_dem() -> DemGrid {
        let (rows, cols) = (5, 16);
        let mut vals = vec![0.0; rows * cols];
        for r in 0..rows {
            vals[r * cols + 10] = 10.0;
        }
        DemGrid::new(rows, cols, 1.0, 0.0, 0.0, vals, None).unwrap()
    }

    #[test]
    fn flat_terrain_never_shadows() {
        let dem = DemGrid::constant(8, 8, 1.0, 0.0, 0.0, 0.0).unwrap();
        let o = opts(ShadowMethod::Raymarch, 0.5);
        for el in [5.0, 30.0, 80.0] {
            for az in [0.0, 90.0, 200.0] {
                assert!(!shadow_test(&dem, None, &Vec3::new(3.5, 3.5, 0.0), &sun(el, az), &o));
            }
        }
    }

    #[test]
    fn wall_shadows_points_close_behind_it() {
        let dem = wall_dem();
        let o = opts(ShadowMethod::Raymarch, 0.5);
        // From (5, 2): ray toward the east wall at 60 degrees reaches
        // x = 10 at height 5 tan(60) = 8.66 < 10, so blocked.
        assert!(shadow_test(&dem, None, &Vec3::new(5.0, 2.0, 0.0), &sun(60.0, 90.0), &o));
        // From (0, 2) the same ray is at 17.3 m when it clears the wall.
        assert!(!shadow_test(&dem, None, &Vec3::new(0.0, 2.0, 0.0), &sun(60.0, 90.0), &o));
        // Sun from the west instead: nothing east of the point matters.
        assert!(!shadow_test(&dem, None, &Vec3::new(5.0, 2.0, 0.0), &sun(60.0, 270.0), &o));
    }

    #[test]
    fn shadow_length_follows_the_wall_height() {
        let dem = wall_dem();
        let o = opts(ShadowMethod::Raymarch, 0.05);
        // Wall crest 10 m at x = 10. At 45 degrees from the east the ray
        // from (x, ., 0) passes the crest at height 10 - x, so points with
        // x > 0 sit in shadow; at 50 degrees the same ray clears it.
        for (x, el, expect) in [
            (2.0, 45.0, true),
            (0.5, 45.0, true),
            (0.5, 50.0, false),
            (2.0, 80.0, false),
            // East of the wall with the sun from the east: nothing blocks.
            (12.0, 45.0, false),
        ] {
            let got = shadow_test(&dem, None, &Vec3::new(x, 2.0, 0.0), &sun(el, 90.0), &o);
            assert_eq!(got, expect, "at x = {x}, elevation {el}");
        }
    }

    #[test]
    fn sun_at_or_below_horizontal_shadows_everything() {
        let dem = DemGrid::constant(8, 8, 1.0, 0.0, 0.0, 0.0).unwrap();
        let p = Vec3::new(3.5, 3.5, 0.0);
        for method in [ShadowMethod::Raymarch, ShadowMethod::HorizonMap] {
            let o = opts(method, 0.5);
            let map = compute_horizon_map(&dem, 8).unwrap();
            assert!(shadow_test(&dem, Some(&map), &p, &sun(0.0, 90.0), &o));
            assert!(shadow_test(&dem, Some(&map), &p, &sun(-10.0, 90.0), &o));
        }
    }

    #[test]
    fn method_none_is_always_lit() {
        let dem = wall_dem();
        let o = opts(ShadowMethod::None, 0.5);
        assert!(!shadow_test(&dem, None, &Vec3::new(5.0, 2.0, 0.0), &sun(60.0, 90.0), &o));
        assert!(!shadow_test(&dem, None, &Vec3::new(5.0, 2.0, 0.0), &sun(-10.0, 90.0), &o));
    }

    #[test]
    fn horizon_method_matches_the_stored_angles() {
        let dem = wall_dem();
        let map = compute_horizon_map(&dem, 4).unwrap();
        let o = opts(ShadowMethod::HorizonMap, 0.5);
        let p = Vec3::new(5.0, 2.0, 0.0);
        // atan(10 / 5) = 63.4 degrees toward the east.
        let blocking = map.angle_at(5.0, 2.0, 90.0);
        assert!((blocking - (10.0f64 / 5.0).atan().to_degrees()).abs() < 1.0);
        assert!(shadow_test(&dem, Some(&map), &p, &sun(blocking - 2.0, 90.0), &o));
        assert!(!shadow_test(&dem, Some(&map), &p, &sun(blocking + 2.0, 90.0), &o));
    }

    #[test]
    fn raymarch_and_horizon_agree_on_the_wall_scene() {
        let dem = wall_dem();
        let map = compute_horizon_map(&dem, 64).unwrap();
        let om = opts(ShadowMethod::Raymarch, 0.25);
        let oh = opts(ShadowMethod::HorizonMap, 0.25);
        let mut disagree = 0;
        let mut total = 0;
        for xi in 0..60 {
            let x = xi as f64 * 0.25;
            for el in [20.0, 45.0, 70.0] {
                let p = Vec3::new(x, 2.0, dem.sample_bilinear(x, 2.0).unwrap());
                let a = shadow_test(&dem, None, &p, &sun(el, 90.0), &om);
                let b = shadow_test(&dem, Some(&map), &p, &sun(el, 90.0), &oh);
                total += 1;
                if a != b {
                    disagree += 1;
                }
            }
        }
        // Half-cells hugging the crest round to the crest cell's horizon, so
        // a cliff is the worst case for the nearest-cell lookup; anything
        // beyond a sliver of disagreement means a real bug.
        assert!(
            disagree * 10 < total,
            "{disagree}/{total} disagreements between raymarch and horizon"
        );
    }
}
