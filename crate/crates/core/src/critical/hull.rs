use serde::{Deserialize, Serialize};

use crate::{Complex64, ComplexPoint};

fn cross(o: Complex64, a: Complex64, b: Complex64) -> f64 {
    (a.re - o.re) * (b.im - o.im) - (a.im - o.im) * (b.re - o.re)
}

/// Convex hull in counter-clockwise order (monotone chain), without
/// collinear vertices. Degenerates to one or two points when appropriate.
pub fn convex_hull(points: &[ComplexPoint]) -> Vec<ComplexPoint> {
    let mut p: Vec<Complex64> = points.to_vec();
    p.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    p.dedup();
    if p.len() < 3 {
        return p;
    }
    let mut hull: Vec<Complex64> = Vec::with_capacity(2 * p.len());
    for &q in &p {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], q) <= 0.0 {
            hull.pop();
        }
        hull.push(q);
    }
    let lower = hull.len() + 1;
    for &q in p.iter().rev().skip(1) {
        while hull.len() >= lower && cross(hull[hull.len() - 2], hull[hull.len() - 1], q) <= 0.0 {
            hull.pop();
        }
        hull.push(q);
    }
    hull.pop();
    hull
}

fn segment_distance(p: Complex64, a: Complex64, b: Complex64) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = (((p - a) * ab.conj()).re / len2).clamp(0.0, 1.0);
    (p - (a + ab * t)).norm()
}

/// Euclidean distance from `p` to the convex polygon `hull` (0 inside).
pub fn distance_to_hull(p: ComplexPoint, hull: &[ComplexPoint]) -> f64 {
    match hull.len() {
        0 => f64::INFINITY,
        1 => (p - hull[0]).norm(),
        2 => segment_distance(p, hull[0], hull[1]),
        m => {
            let inside = (0..m).all(|i| cross(hull[i], hull[(i + 1) % m], p) >= 0.0);
            if inside {
                0.0
            } else {
                (0..m)
                    .map(|i| segment_distance(p, hull[i], hull[(i + 1) % m]))
                    .fold(f64::INFINITY, f64::min)
            }
        }
    }
}

/// Largest distance between two hull vertices.
pub fn hull_diameter(hull: &[ComplexPoint]) -> f64 {
    let mut d: f64 = 0.0;
    for (i, a) in hull.iter().enumerate() {
        for b in &hull[i + 1..] {
            d = d.max((a - b).norm());
        }
    }
    d
}

/// A critical point found outside the inflated hull of the roots.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HullViolation {
    pub index: usize,
    pub point: ComplexPoint,
    pub distance: f64,
}

/// Outcome of the Gauss–Lucas containment check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussLucasReport {
    pub hull: Vec<ComplexPoint>,
    /// Allowed slack: `tol * diameter(hull)`.
    pub slack: f64,
    pub violations: Vec<HullViolation>,
}

impl GaussLucasReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks that every critical point lies in the convex hull of the roots,
/// inflated by `tol` times the hull diameter.
pub fn verify_gauss_lucas(roots: &[ComplexPoint], crits: &[ComplexPoint], tol: f64) -> GaussLucasReport {
    let hull = convex_hull(roots);
    let slack = tol * hull_diameter(&hull);
    let violations = crits
        .iter()
        .enumerate()
        .filter_map(|(index, &point)| {
            let distance = distance_to_hull(point, &hull);
            (distance > slack).then_some(HullViolation { index, point, distance })
        })
        .collect();
    GaussLucasReport {
        hull,
        slack,
        violations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn square_hull_drops_interior_and_collinear() {
        let pts = [
            c(0.0, 0.0),
            c(1.0, 0.0),
            c(1.0, 1.0),
            c(0.0, 1.0),
            c(0.5, 0.5),
            c(0.5, 0.0),
        ];
        let h = convex_hull(&pts);
        assert_eq!(h.len(), 4);
        assert_eq!(distance_to_hull(c(0.5, 0.5), &h), 0.0);
        assert!((distance_to_hull(c(2.0, 0.5), &h) - 1.0).abs() < 1e-15);
        assert!((hull_diameter(&h) - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn degenerate_hulls() {
        let seg = convex_hull(&[c(0.0, 0.0), c(1.0, 0.0), c(0.5, 0.0)]);
        assert_eq!(seg.len(), 2);
        assert_eq!(distance_to_hull(c(0.25, 0.0), &seg), 0.0);
        assert!((distance_to_hull(c(0.25, 0.5), &seg) - 0.5).abs() < 1e-15);
        let pt = convex_hull(&[c(2.0, 2.0), c(2.0, 2.0)]);
        assert_eq!(pt.len(), 1);
        assert!(verify_gauss_lucas(&[c(2.0, 2.0); 3], &[c(2.0, 2.0); 2], 1e-9).passed());
    }

    #[test]
    fn flags_outside_points() {
        let roots = [c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0)];
        let rep = verify_gauss_lucas(&roots, &[c(0.2, 0.2), c(1.0, 1.0)], 1e-9);
        assert_eq!(rep.violations.len(), 1);
        assert_eq!(rep.violations[0].index, 1);
    }
}
