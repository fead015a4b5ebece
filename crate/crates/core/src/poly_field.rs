//! Fields of `P_n(z) = prod (z - X_i)` evaluated straight from the roots:
//! `log|P_n|`, the logarithmic derivative `L_n = P_n'/P_n = sum 1/(z - X_i)`,
//! the normalized `(1/n) log|L_n|`, and the circle supremum
//! `M_n(R) = sup_{|z|=R} |L_n(z)|`.
//!
//! Nothing here expands coefficients; every evaluation is `O(n)` with
//! compensated summation.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::numeric::{CompensatedComplexSum, CompensatedSum};
use crate::{Complex64, ComplexPoint, Error, Result};

/// `|z - X_i| < POLE_REL_TOL * (1 + |z|)` counts as hitting the root `X_i`.
pub const POLE_REL_TOL: f64 = 1e-14;

/// The roots `X_1, ..., X_n` of `P_n` in sample order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Complex64>", into = "Vec<Complex64>")]
pub struct RootSample {
    points: Vec<ComplexPoint>,
}

impl TryFrom<Vec<Complex64>> for RootSample {
    type Error = Error;

    fn try_from(points: Vec<Complex64>) -> Result<Self> {
        RootSample::new(points)
    }
}

impl From<RootSample> for Vec<Complex64> {
    fn from(r: RootSample) -> Self {
        r.points
    }
}

impl RootSample {
    pub fn new(points: Vec<ComplexPoint>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidArgument("a root sample needs at least one point".into()));
        }
        if let Some(p) = points.iter().find(|p| !(p.re.is_finite() && p.im.is_finite())) {
            return Err(Error::InvalidArgument(format!("non-finite root {p}")));
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[ComplexPoint] {
        &self.points
    }

    pub fn n(&self) -> usize {
        self.points.len()
    }

    pub fn max_modulus(&self) -> f64 {
        self.points.iter().map(|p| p.norm()).fold(0.0, f64::max)
    }

    pub fn mean(&self) -> Complex64 {
        let mut s = CompensatedComplexSum::new();
        for p in &self.points {
            s.add(*p);
        }
        s.value() / self.n() as f64
    }

    pub fn translated(&self, by: Complex64) -> RootSample {
        RootSample {
            points: self.points.iter().map(|p| p + by).collect(),
        }
    }
}

/// Value of `L_n` at a point.
///
/// At a pole `value` is `(+inf, 0)`; `at_zero` is set only when the
/// compensated sum is exactly zero. The two flags never hold together.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FieldValue {
    pub value: Complex64,
    pub at_pole: bool,
    pub at_zero: bool,
}

impl FieldValue {
    fn pole() -> Self {
        Self {
            value: Complex64::new(f64::INFINITY, 0.0),
            at_pole: true,
            at_zero: false,
        }
    }

    pub fn norm(&self) -> f64 {
        if self.at_pole {
            f64::INFINITY
        } else {
            self.value.norm()
        }
    }
}

/// `log|P_n(z)| = sum log|z - X_i|`; `-inf` iff `z` equals a root.
#[allow(non_snake_case)]
pub fn eval_log_abs_P(roots: &RootSample, z: ComplexPoint) -> f64 {
    let mut s = CompensatedSum::new();
    for x in roots.points() {
        let d = (z - x).norm();
        if d == 0.0 {
            return f64::NEG_INFINITY;
        }
        s.add(d.ln());
    }
    s.value()
}

/// `L_n(z) = sum 1/(z - X_i)`.
#[allow(non_snake_case)]
pub fn eval_L(roots: &RootSample, z: ComplexPoint) -> FieldValue {
    eval_l_points(roots.points(), z)
}

pub(crate) fn eval_l_points(points: &[Complex64], z: Complex64) -> FieldValue {
    let guard = POLE_REL_TOL * (1.0 + z.norm());
    let guard2 = guard * guard;
    let mut s = CompensatedComplexSum::new();
    for x in points {
        let d = z - x;
        let d2 = d.norm_sqr();
        if d2 < guard2 {
            return FieldValue::pole();
        }
        s.add(d.conj() / d2);
    }
    let value = s.value();
    FieldValue {
        value,
        at_pole: false,
        at_zero: value == Complex64::new(0.0, 0.0),
    }
}

/// `log|L_n(z)|` with `+inf` at poles and `-inf` at exact zeros.
pub fn log_abs_l(roots: &RootSample, z: ComplexPoint) -> f64 {
    let v = eval_L(roots, z);
    if v.at_pole {
        f64::INFINITY
    } else if v.at_zero {
        f64::NEG_INFINITY
    } else {
        v.value.norm().ln()
    }
}

/// `(1/n) log|L_n(z)|`.
#[allow(non_snake_case)]
pub fn scaled_log_abs_L(roots: &RootSample, z: ComplexPoint) -> f64 {
    log_abs_l(roots, z) / roots.n() as f64
}

/// Settings for the circle-supremum search.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchSettings {
    /// Angular samples per root; the scan uses at least `4n` points.
    pub samples_per_root: usize,
    pub min_samples: usize,
    /// Number of sampled local maxima refined by golden-section search.
    pub refine_top: usize,
    pub golden_iterations: usize,
}

impl Default for SearchSettings {
    fn default() -> Self {
        Self {
            samples_per_root: 4,
            min_samples: 1024,
            refine_top: 8,
            golden_iterations: 80,
        }
    }
}

/// Lower bound on `M_n(R) = sup_{|z|=R} |L_n(z)|` from a dense angular scan
/// refined around its best local maxima. `+inf` when a root lies on the circle
/// within the pole tolerance.
pub fn sup_on_circle(roots: &RootSample, radius: f64, refine: &SearchSettings) -> Result<f64> {
    if !(radius.is_finite() && radius > 0.0) {
        return Err(Error::InvalidArgument(format!("radius must be positive, got {radius}")));
    }
    if roots
        .points()
        .iter()
        .any(|x| (x.norm() - radius).abs() < POLE_REL_TOL * (1.0 + radius))
    {
        return Ok(f64::INFINITY);
    }
    let m = (refine.samples_per_root.max(4) * roots.n())
        .max(refine.min_samples)
        .max(8);
    let step = TAU / m as f64;
    let at = |theta: f64| eval_L(roots, Complex64::from_polar(radius, theta)).norm();
    let values: Vec<f64> = (0..m).map(|i| at(i as f64 * step)).collect();
    let mut best = values.iter().copied().fold(0.0, f64::max);

    // Candidates: local maxima of the scan, plus the angle of every root
    // (a root close to the circle makes a peak narrower than the grid).
    let mut candidates: Vec<(f64, f64)> = (0..m)
        .filter(|&i| {
            let prev = values[(i + m - 1) % m];
            let next = values[(i + 1) % m];
            values[i] >= prev && values[i] >= next
        })
        .map(|i| (i as f64 * step, values[i]))
        .collect();
    for x in roots.points() {
        if x.norm() > 0.0 {
            let theta = x.arg();
            let v = at(theta);
            best = best.max(v);
            candidates.push((theta, v));
        }
    }
    candidates.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.total_cmp(&b.0)));
    candidates.truncate(refine.refine_top.max(1));

    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    for (theta, _) in candidates {
        let (mut a, mut b) = (theta - step, theta + step);
        let mut x1 = b - INV_PHI * (b - a);
        let mut x2 = a + INV_PHI * (b - a);
        let (mut f1, mut f2) = (at(x1), at(x2));
        for _ in 0..refine.golden_iterations {
            if f1 > f2 {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - INV_PHI * (b - a);
                f1 = at(x1);
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + INV_PHI * (b - a);
                f2 = at(x2);
            }
        }
        best = best.max(f1).max(f2);
    }
    Ok(best)
}
