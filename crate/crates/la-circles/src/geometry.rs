//! Circle geometry: circumcircle through three points and midpoint-circle
//! rasterization of a circle into its integer test-point set.

use std::collections::BTreeSet;

use crate::error::{Error, Result};

/// Triples whose (scaled) circumcenter denominator falls below this are
/// rejected as collinear. Squared-pixel units.
pub const COLLINEAR_EPS: f64 = 1e-9;

/// A circle with sub-pixel center and radius, in image coordinates
/// (x = column, y = row).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Circle {
    pub x0: f64,
    pub y0: f64,
    pub r: f64,
}

impl Circle {
    pub fn new(x0: f64, y0: f64, r: f64) -> Self {
        Self { x0, y0, r }
    }
}

/// Integer circumference pixels of a rasterized circle, clipped to an image.
///
/// Produced by [`rasterize_circle`], whose output points are distinct,
/// in-bounds and sorted by (x, y). `n_total` is the surviving point count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TestSet {
    pub points: Vec<(usize, usize)>,
    pub n_total: usize,
}

/// Center and radius of the circle through three points.
///
/// Solves the two perpendicular-bisector equations by Cramer's rule:
/// `x0 = det(A)/D`, `y0 = det(B)/D` with
/// `D = 4*((x2-x1)*(y3-y1) - (x3-x1)*(y2-y1))`, then takes the radius as the
/// distance from the center to the first point. Degenerate triples
/// (collinear or with repeated points) make `|D|` vanish and are rejected.
pub fn circle_from_three_points(
    p1: (f64, f64),
    p2: (f64, f64),
    p3: (f64, f64),
) -> Result<Circle> {
    let (x1, y1) = p1;
    let (x2, y2) = p2;
    let (x3, y3) = p3;

    let d = 4.0 * ((x2 - x1) * (y3 - y1) - (x3 - x1) * (y2 - y1));
    if d.abs() < COLLINEAR_EPS {
        return Err(Error::CollinearPoints);
    }

    let s2 = x2 * x2 + y2 * y2 - (x1 * x1 + y1 * y1);
    let s3 = x3 * x3 + y3 * y3 - (x1 * x1 + y1 * y1);

    let x0 = (s2 * 2.0 * (y3 - y1) - s3 * 2.0 * (y2 - y1)) / d;
    let y0 = (2.0 * (x2 - x1) * s3 - 2.0 * (x3 - x1) * s2) / d;
    let r = ((x0 - x1).powi(2) + (y0 - y1).powi(2)).sqrt();

    Ok(Circle { x0, y0, r })
}

/// Rasterizes a circle with the midpoint circle algorithm and clips the
/// result to a `width` x `height` image.
///
/// Center and radius are rounded to integers first; the first octant is
/// traced from (r, 0) upwards-left with integer decision updates and then
/// reflected eightfold. Seam duplicates are emitted once; points outside the
/// image are dropped.
pub fn rasterize_circle(c: &Circle, width: usize, height: usize) -> Result<TestSet> {
    let r = c.r.round() as i64;
    if r < 1 {
        return Err(Error::DegenerateRadius(c.r));
    }
    let cx = c.x0.round() as i64;
    let cy = c.y0.round() as i64;

    let mut set: BTreeSet<(i64, i64)> = BTreeSet::new();
    for &(ox, oy) in &octant_offsets(r) {
        for &(dx, dy) in &[
            (ox, oy),
            (-ox, oy),
            (ox, -oy),
            (-ox, -oy),
            (oy, ox),
            (-oy, ox),
            (oy, -ox),
            (-oy, -ox),
        ] {
            set.insert((cx + dx, cy + dy));
        }
    }

    let points: Vec<(usize, usize)> = set
        .into_iter()
        .filter(|&(x, y)| x >= 0 && y >= 0 && (x as usize) < width && (y as usize) < height)
        .map(|(x, y)| (x as usize, y as usize))
        .collect();
    let n_total = points.len();
    Ok(TestSet { points, n_total })
}

/// First-octant offsets (x >= y >= 0) of a radius-`r` midpoint circle around
/// the origin. Decision variable: x decrements when the midpoint
/// (x - 1/2, y + 1) lies on or outside the circle.
fn octant_offsets(r: i64) -> Vec<(i64, i64)> {
    let mut pts = Vec::with_capacity(r as usize + 2);
    let mut x = r;
    let mut y = 0i64;
    let mut d = 1 - r;
    pts.push((x, y));
    while x > y {
        y += 1;
        if d < 0 {
            d += 2 * y + 1;
        } else {
            x -= 1;
            d += 2 * (y - x) + 1;
        }
        if x < y {
            break;
        }
        pts.push((x, y));
    }
    pts
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    #[test]
    fn unit_circle_from_symmetric_points() {
        let c = circle_from_three_points((1.0, 0.0), (0.0, 1.0), (-1.0, 0.0)).unwrap();
        assert_abs_diff_eq!(c.x0, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(c.y0, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(c.r, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn collinear_points_rejected() {
        let err = circle_from_three_points((0.0, 0.0), (2.0, 0.0), (4.0, 0.0)).unwrap_err();
        assert!(matches!(err, Error::CollinearPoints));
    }

    #[test]
    fn duplicate_points_rejected() {
        let err = circle_from_three_points((1.0, 2.0), (1.0, 2.0), (4.0, 5.0)).unwrap_err();
        assert!(matches!(err, Error::CollinearPoints));
    }

    /// Oracle: sample three well-separated angles on a known circle and check
    /// the known parameters are recovered.
    #[test]
    fn recovers_known_circles() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        for _ in 0..1000 {
            let cx = rng.gen_range(-100.0..100.0);
            let cy = rng.gen_range(-100.0..100.0);
            let r = rng.gen_range(1.0..200.0);
            let a0 = rng.gen_range(0.0..std::f64::consts::TAU);
            let a1 = a0 + rng.gen_range(0.35..2.0);
            let a2 = a1 + rng.gen_range(0.35..2.0);
            let pt = |a: f64| (cx + r * a.cos(), cy + r * a.sin());
            let c = circle_from_three_points(pt(a0), pt(a1), pt(a2)).unwrap();
            assert_abs_diff_eq!(c.x0, cx, epsilon = 1e-6);
            assert_abs_diff_eq!(c.y0, cy, epsilon = 1e-6);
            assert_abs_diff_eq!(c.r, r, epsilon = 1e-6);
        }
    }

    #[test]
    fn all_inputs_lie_on_the_returned_circle() {
        let pts = [(3.0, 7.0), (11.0, 2.0), (6.0, 14.0)];
        let c = circle_from_three_points(pts[0], pts[1], pts[2]).unwrap();
        for (x, y) in pts {
            let dist = ((x - c.x0).powi(2) + (y - c.y0).powi(2)).sqrt();
            assert_abs_diff_eq!(dist, c.r, epsilon = 1e-6);
        }
    }

    #[test]
    fn radius_one_cross() {
        let ts = rasterize_circle(&Circle::new(5.0, 5.0, 1.0), 11, 11).unwrap();
        let got: BTreeSet<_> = ts.points.iter().copied().collect();
        let want: BTreeSet<_> = [(6, 5), (5, 6), (4, 5), (5, 4)].into_iter().collect();
        assert_eq!(got, want);
        assert_eq!(ts.n_total, 4);
    }

    #[test]
    fn clipping_keeps_only_in_bounds_quadrant() {
        let ts = rasterize_circle(&Circle::new(0.0, 0.0, 3.0), 10, 10).unwrap();
        assert!(ts.n_total > 0);
        // All survivors are in the x >= 0, y >= 0 quadrant by construction of
        // the clip; make sure nothing else leaked and the count matches the
        // unclipped quadrant.
        let full = rasterize_circle(&Circle::new(20.0, 20.0, 3.0), 64, 64).unwrap();
        let quadrant = full
            .points
            .iter()
            .filter(|&&(x, y)| x >= 20 && y >= 20)
            .count();
        assert_eq!(ts.n_total, quadrant);
    }

    #[test]
    fn degenerate_radius_rejected() {
        let err = rasterize_circle(&Circle::new(5.0, 5.0, 0.4), 10, 10).unwrap_err();
        assert!(matches!(err, Error::DegenerateRadius(_)));
    }

    /// Independent reference: per scanline of the first octant the midpoint
    /// rule picks x = round(sqrt(r^2 - y^2)); reflect and dedup.
    fn reference_circle_points(cx: i64, cy: i64, r: i64) -> BTreeSet<(i64, i64)> {
        let mut set = BTreeSet::new();
        for y in 0..=r {
            let x = ((r * r - y * y) as f64).sqrt().round() as i64;
            if x < y {
                break;
            }
            for &(dx, dy) in &[
                (x, y),
                (-x, y),
                (x, -y),
                (-x, -y),
                (y, x),
                (-y, x),
                (y, -x),
                (-y, -x),
            ] {
                set.insert((cx + dx, cy + dy));
            }
        }
        set
    }

    #[test]
    fn matches_reference_rasterizer_for_small_radii() {
        for r in 1..=30 {
            let ts = rasterize_circle(&Circle::new(64.0, 64.0, r as f64), 129, 129).unwrap();
            let got: BTreeSet<_> = ts
                .points
                .iter()
                .map(|&(x, y)| (x as i64, y as i64))
                .collect();
            let want = reference_circle_points(64, 64, r);
            assert_eq!(got, want, "radius {}", r);
        }
    }

    proptest! {
        #[test]
        fn permutation_invariance(
            cx in -50.0..50.0f64, cy in -50.0..50.0f64, r in 2.0..80.0f64,
            a0 in 0.0..6.28f64, d1 in 0.5..2.0f64, d2 in 0.5..2.0f64,
        ) {
            let pt = |a: f64| (cx + r * a.cos(), cy + r * a.sin());
            let p = [pt(a0), pt(a0 + d1), pt(a0 + d1 + d2)];
            let base = circle_from_three_points(p[0], p[1], p[2]).unwrap();
            for perm in [[0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]] {
                let c = circle_from_three_points(p[perm[0]], p[perm[1]], p[perm[2]]).unwrap();
                prop_assert!((c.x0 - base.x0).abs() <= 1e-9);
                prop_assert!((c.y0 - base.y0).abs() <= 1e-9);
                prop_assert!((c.r - base.r).abs() <= 1e-9);
            }
        }

        #[test]
        fn raster_points_stay_within_one_pixel_of_the_circle(
            cx in 10.0..90.0f64, cy in 10.0..90.0f64, r in 1.0..40.0f64,
        ) {
            let ts = rasterize_circle(&Circle::new(cx, cy, r), 128, 128).unwrap();
            let rcx = cx.round();
            let rcy = cy.round();
            let rr = r.round();
            for &(x, y) in &ts.points {
                let dist = ((x as f64 - rcx).powi(2) + (y as f64 - rcy).powi(2)).sqrt();
                prop_assert!((dist - rr).abs() <= 1.0, "({}, {}) dist {} vs r {}", x, y, dist, rr);
            }
            // Distinctness.
            let set: BTreeSet<_> = ts.points.iter().collect();
            prop_assert_eq!(set.len(), ts.n_total);
        }

        #[test]
        fn eightfold_symmetry_for_integer_centers(cx in 40i64..60, cy in 40i64..60, r in 1i64..30) {
            let ts = rasterize_circle(&Circle::new(cx as f64, cy as f64, r as f64), 128, 128).unwrap();
            let set: BTreeSet<(i64, i64)> = ts
                .points
                .iter()
                .map(|&(x, y)| (x as i64 - cx, y as i64 - cy))
                .collect();
            for &(dx, dy) in &set {
                for img in [(-dx, dy), (dx, -dy), (-dx, -dy), (dy, dx), (-dy, dx), (dy, -dx), (-dy, -dx)] {
                    prop_assert!(set.contains(&img));
                }
            }
        }
    }
}
