//! Distances between finitely supported probability measures on the plane.
//!
//! [`wasserstein1`] solves the transportation problem exactly (network
//! simplex on weights integerized at `1e-12` resolution) or approximates it
//! by averaging one-dimensional transport costs over random projections.
//! The sliced value is never larger than the exact one, but it is a
//! different quantity and should not be mixed with exact values silently.
//! [`bounded_lipschitz`] is a cheaper lower bound over a fixed dictionary
//! of bounded 1-Lipschitz functions.

mod simplex;

use std::collections::HashMap;
use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::diagnostics::TestFunction;
use crate::measures::Seed;
use crate::numeric::{splitmix64, CompensatedSum};
use crate::{Complex64, ComplexPoint, Error, Result};

/// Weight tolerance for [`EmpiricalMeasure::new`].
pub const WEIGHT_TOL: f64 = 1e-12;
/// Largest `atoms(mu) * atoms(nu)` accepted by the exact solver.
pub const EXACT_MAX_PRODUCT: usize = 4_000_000;
/// Default number of projections for the sliced approximation.
pub const DEFAULT_SLICES: usize = 64;

const MASS_UNITS: f64 = 1e12;

/// A probability measure with finitely many atoms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalMeasure {
    atoms: Vec<ComplexPoint>,
    weights: Vec<f64>,
}

impl EmpiricalMeasure {
    pub fn new(atoms: Vec<ComplexPoint>, weights: Vec<f64>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InfeasibleWeights("a measure needs at least one atom".into()));
        }
        if atoms.len() != weights.len() {
            return Err(Error::InfeasibleWeights(format!(
                "{} atoms but {} weights",
                atoms.len(),
                weights.len()
            )));
        }
        if let Some(a) = atoms.iter().find(|a| !(a.re.is_finite() && a.im.is_finite())) {
            return Err(Error::InfeasibleWeights(format!("non-finite atom {a}")));
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::InfeasibleWeights(format!("weights must be positive, got {w}")));
        }
        let total: f64 = weights.iter().copied().collect::<CompensatedSum>().value();
        if (total - 1.0).abs() > WEIGHT_TOL {
            return Err(Error::InfeasibleWeights(format!("weights sum to {total}, not 1")));
        }
        Ok(Self { atoms, weights })
    }

    /// Uniform measure on `points`, one atom per entry (repeats allowed).
    pub fn from_points(points: &[ComplexPoint]) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InfeasibleWeights("cannot build a measure from no points".into()));
        }
        let w = 1.0 / points.len() as f64;
        Self::new(points.to_vec(), vec![w; points.len()])
    }

    pub fn atoms(&self) -> &[ComplexPoint] {
        &self.atoms
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Identical atoms combined, in order of first appearance.
    pub fn merged(&self) -> EmpiricalMeasure {
        let mut index: HashMap<(u64, u64), usize> = HashMap::new();
        let mut atoms = Vec::new();
        let mut weights: Vec<f64> = Vec::new();
        for (a, w) in self.atoms.iter().zip(&self.weights) {
            let key = ((a.re + 0.0).to_bits(), (a.im + 0.0).to_bits());
            match index.get(&key) {
                Some(&k) => weights[k] += w,
                None => {
                    index.insert(key, atoms.len());
                    atoms.push(*a);
                    weights.push(*w);
                }
            }
        }
        EmpiricalMeasure { atoms, weights }
    }

    /// Push-forward under `z -> scale * z + shift`.
    pub fn mapped(&self, scale: Complex64, shift: Complex64) -> EmpiricalMeasure {
        EmpiricalMeasure {
            atoms: self.atoms.iter().map(|a| scale * a + shift).collect(),
            weights: self.weights.clone(),
        }
    }
}

/// How [`wasserstein1`] evaluates the distance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum W1Method {
    Exact,
    Sliced { projections: usize, seed: u64 },
}

/// Splits unit mass into integers summing exactly to `MASS_UNITS`.
fn integerize(weights: &[f64]) -> Vec<i64> {
    let mut units: Vec<i64> = weights
        .iter()
        .map(|w| (w * MASS_UNITS).round().max(1.0) as i64)
        .collect();
    let total: i64 = units.iter().sum();
    let target = MASS_UNITS as i64;
    let (largest, _) = units.iter().enumerate().max_by_key(|(_, u)| **u).unwrap();
    units[largest] += target - total;
    units
}

/// Exact W1 between two measures by min-cost flow.
pub fn wasserstein1_exact(mu: &EmpiricalMeasure, nu: &EmpiricalMeasure) -> Result<f64> {
    let a = mu.merged();
    let b = nu.merged();
    let (n1, n2) = (a.len(), b.len());
    if n1.saturating_mul(n2) > EXACT_MAX_PRODUCT {
        return Err(Error::TransportTooLarge(n1, n2));
    }
    let supply = integerize(&a.weights);
    let demand = integerize(&b.weights);
    let cost: Vec<f64> = a
        .atoms
        .iter()
        .flat_map(|x| b.atoms.iter().map(move |y| (x - y).norm()))
        .collect();
    let flow = simplex::transport(&supply, &demand, &cost);
    let mut total = CompensatedSum::new();
    for (f, c) in flow.iter().zip(&cost) {
        if *f != 0 {
            total.add(*f as f64 * c);
        }
    }
    Ok(total.value() / MASS_UNITS)
}

/// One-dimensional W1 between weighted point sets: the integral of
/// `|F - G|` over the real line.
pub fn wasserstein1_line(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    let mut events: Vec<(f64, f64)> = Vec::with_capacity(a.len() + b.len());
    events.extend(a.iter().map(|&(x, w)| (x, w)));
    events.extend(b.iter().map(|&(x, w)| (x, -w)));
    events.sort_by(|p, q| p.0.total_cmp(&q.0));
    let mut diff = 0.0;
    let mut total = CompensatedSum::new();
    for k in 0..events.len() {
        diff += events[k].1;
        if k + 1 < events.len() {
            total.add(diff.abs() * (events[k + 1].0 - events[k].0));
        }
    }
    total.value()
}

fn projections(count: usize, seed: u64) -> Vec<Complex64> {
    let mut rng = Seed::new(seed).rng();
    (0..count)
        .map(|_| Complex64::from_polar(1.0, PI * rng.random::<f64>()))
        .collect()
}

fn sliced_values(mu: &EmpiricalMeasure, nu: &EmpiricalMeasure, count: usize, seed: u64) -> Vec<f64> {
    projections(count, seed)
        .into_iter()
        .map(|u| {
            let project = |m: &EmpiricalMeasure| -> Vec<(f64, f64)> {
                m.atoms
                    .iter()
                    .zip(&m.weights)
                    .map(|(z, w)| ((z * u.conj()).re, *w))
                    .collect()
            };
            wasserstein1_line(&project(mu), &project(nu))
        })
        .collect()
}

/// Mean and standard error of the sliced approximation.
pub fn sliced_wasserstein1(
    mu: &EmpiricalMeasure,
    nu: &EmpiricalMeasure,
    projections: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    if projections == 0 {
        return Err(Error::InvalidArgument(
            "sliced transport needs at least one projection".into(),
        ));
    }
    let v = sliced_values(mu, nu, projections, seed);
    let k = v.len() as f64;
    let mean = v.iter().copied().collect::<CompensatedSum>().value() / k;
    let var = if v.len() > 1 {
        v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (k - 1.0)
    } else {
        0.0
    };
    Ok((mean, (var / k).sqrt()))
}

/// W1 distance with Euclidean ground cost.
pub fn wasserstein1(mu: &EmpiricalMeasure, nu: &EmpiricalMeasure, method: W1Method) -> Result<f64> {
    match method {
        W1Method::Exact => wasserstein1_exact(mu, nu),
        W1Method::Sliced { projections, seed } => Ok(sliced_wasserstein1(mu, nu, projections, seed)?.0),
    }
}

/// Exact W1 when the atom-count product allows it, otherwise the sliced
/// approximation with [`DEFAULT_SLICES`] projections. The flag is `true`
/// when the exact solver ran.
pub fn wasserstein1_auto(mu: &EmpiricalMeasure, nu: &EmpiricalMeasure, seed: u64) -> Result<(f64, bool)> {
    let (a, b) = (mu.merged(), nu.merged());
    if a.len().saturating_mul(b.len()) <= EXACT_MAX_PRODUCT {
        Ok((wasserstein1_exact(&a, &b)?, true))
    } else {
        Ok((sliced_wasserstein1(&a, &b, DEFAULT_SLICES, seed)?.0, false))
    }
}

/// Largest `|int f dmu - int f dnu|` over a dictionary of functions with
/// values in `[0, 1]` and Lipschitz constant at most `1`:
///
/// * ramps `clamp(<z, u> - t, 0, 1)` for `projections` equispaced
///   directions `u` and `grid` offsets `t` spanning the projected supports;
/// * tents `max(0, 1 - |z - a|)` for centers `a` on a `grid x grid`
///   lattice over the joint bounding box.
///
/// The result is a lower bound for the bounded-Lipschitz distance and never
/// exceeds W1 or 1.
pub fn bounded_lipschitz(mu: &EmpiricalMeasure, nu: &EmpiricalMeasure, projections: usize, grid: usize) -> f64 {
    let gap = |f: &dyn Fn(Complex64) -> f64| -> f64 {
        let mut s = CompensatedSum::new();
        for (z, w) in mu.atoms.iter().zip(&mu.weights) {
            s.add(w * f(*z));
        }
        for (z, w) in nu.atoms.iter().zip(&nu.weights) {
            s.add(-w * f(*z));
        }
        s.value().abs()
    };
    let all: Vec<Complex64> = mu.atoms.iter().chain(&nu.atoms).copied().collect();
    let mut best: f64 = 0.0;
    let steps = grid.max(2);
    for k in 0..projections {
        let u = Complex64::from_polar(1.0, PI * k as f64 / projections as f64);
        let proj = |z: Complex64| (z * u.conj()).re;
        let lo = all.iter().map(|z| proj(*z)).fold(f64::INFINITY, f64::min) - 1.0;
        let hi = all.iter().map(|z| proj(*z)).fold(f64::NEG_INFINITY, f64::max);
        for i in 0..steps {
            let t = lo + (hi - lo) * i as f64 / (steps - 1) as f64;
            best = best.max(gap(&|z| (proj(z) - t).clamp(0.0, 1.0)));
        }
    }
    if grid > 0 {
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for z in &all {
            x0 = x0.min(z.re);
            x1 = x1.max(z.re);
            y0 = y0.min(z.im);
            y1 = y1.max(z.im);
        }
        for i in 0..steps {
            for j in 0..steps {
                let a = Complex64::new(
                    x0 + (x1 - x0) * i as f64 / (steps - 1) as f64,
                    y0 + (y1 - y0) * j as f64 / (steps - 1) as f64,
                );
                best = best.max(gap(&|z| (1.0 - (z - a).norm()).max(0.0)));
            }
        }
        // Tents centred on the atoms themselves.
        for a in &all {
            best = best.max(gap(&|z| (1.0 - (z - a).norm()).max(0.0)));
        }
    }
    best.min(1.0)
}

/// `sum_k w_k phi(a_k)`.
pub fn integrate_test_function(measure: &EmpiricalMeasure, phi: &TestFunction) -> f64 {
    measure
        .atoms
        .iter()
        .zip(&measure.weights)
        .map(|(z, w)| w * phi.value(*z))
        .collect::<CompensatedSum>()
        .value()
}

/// Seed for the projections of trial-level sliced estimates.
pub fn slice_seed(seed: u64, n: usize) -> u64 {
    splitmix64(seed ^ (n as u64).rotate_left(32))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn construction() {
        let m = EmpiricalMeasure::from_points(&[c(0.5, 0.0)]).unwrap();
        assert_eq!(m.weights(), &[1.0]);
        let m = EmpiricalMeasure::from_points(&[c(0.0, 0.0); 4]).unwrap();
        assert_eq!(m.weights(), &[0.25; 4]);
        assert_eq!(m.merged().len(), 1);
        assert!(EmpiricalMeasure::from_points(&[]).is_err());
        assert!(EmpiricalMeasure::new(vec![c(0.0, 0.0)], vec![0.9]).is_err());
        assert!(EmpiricalMeasure::new(vec![c(0.0, 0.0), c(1.0, 0.0)], vec![1.5, -0.5]).is_err());
    }

    #[test]
    fn exact_examples() {
        let a = EmpiricalMeasure::from_points(&[c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        let b = EmpiricalMeasure::from_points(&[c(0.25, 0.0), c(0.75, 0.0)]).unwrap();
        assert_abs_diff_eq!(wasserstein1(&a, &b, W1Method::Exact).unwrap(), 0.25, epsilon = 1e-12);
        assert_eq!(wasserstein1(&a, &a, W1Method::Exact).unwrap(), 0.0);
        let d0 = EmpiricalMeasure::from_points(&[c(0.0, 0.0)]).unwrap();
        let d1 = EmpiricalMeasure::from_points(&[c(1.0, 0.0)]).unwrap();
        assert_abs_diff_eq!(wasserstein1(&d0, &d1, W1Method::Exact).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn line_distance_examples() {
        assert_abs_diff_eq!(wasserstein1_line(&[(0.0, 1.0)], &[(3.0, 1.0)]), 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(
            wasserstein1_line(&[(0.0, 0.5), (1.0, 0.5)], &[(0.25, 0.5), (0.75, 0.5)]),
            0.25,
            epsilon = 1e-15
        );
    }

    #[test]
    fn oversized_exact_is_rejected() {
        let pts: Vec<Complex64> = (0..2001).map(|k| c(k as f64, 0.0)).collect();
        let m = EmpiricalMeasure::from_points(&pts).unwrap();
        assert!(matches!(
            wasserstein1_exact(&m, &m),
            Err(Error::TransportTooLarge(2001, 2001))
        ));
        let (v, exact) = wasserstein1_auto(&m, &m, 1).unwrap();
        assert_eq!((v, exact), (0.0, false));
    }

    #[test]
    fn bounded_lipschitz_examples() {
        let d0 = EmpiricalMeasure::from_points(&[c(0.0, 0.0)]).unwrap();
        let d2 = EmpiricalMeasure::from_points(&[c(2.0, 0.0)]).unwrap();
        assert_eq!(bounded_lipschitz(&d0, &d0, 16, 16), 0.0);
        let bl = bounded_lipschitz(&d0, &d2, 16, 16);
        assert!(bl <= 1.0 && bl > 0.99, "{bl}");
        let d = EmpiricalMeasure::from_points(&[c(0.3, 0.0)]).unwrap();
        let bl = bounded_lipschitz(&d0, &d, 16, 16);
        assert!(bl <= 0.3 + 1e-12 && bl > 0.29);
    }

    #[test]
    fn integrate_examples() {
        let phi = TestFunction::smooth_bump(c(1.0, 1.0), 0.5);
        let at_center = EmpiricalMeasure::from_points(&[c(1.0, 1.0)]).unwrap();
        assert_eq!(integrate_test_function(&at_center, &phi), 1.0);
        let outside = EmpiricalMeasure::from_points(&[c(3.0, 1.0), c(-1.0, 0.0)]).unwrap();
        assert_eq!(integrate_test_function(&outside, &phi), 0.0);
    }

    fn measure_strategy() -> impl Strategy<Value = EmpiricalMeasure> {
        proptest::collection::vec((-3.0f64..3.0, -3.0f64..3.0, 0.1f64..1.0), 1..9).prop_map(|v| {
            let total: f64 = v.iter().map(|t| t.2).sum();
            let atoms = v.iter().map(|t| c(t.0, t.1)).collect();
            let mut weights: Vec<f64> = v.iter().map(|t| t.2 / total).collect();
            let s: f64 = weights.iter().sum();
            weights[0] += 1.0 - s;
            EmpiricalMeasure::new(atoms, weights).unwrap()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn metric_axioms(a in measure_strategy(), b in measure_strategy(), m in measure_strategy()) {
            let ab = wasserstein1_exact(&a, &b).unwrap();
            let ba = wasserstein1_exact(&b, &a).unwrap();
            prop_assert!((ab - ba).abs() <= 1e-12);
            prop_assert_eq!(wasserstein1_exact(&a, &a).unwrap(), 0.0);
            let am = wasserstein1_exact(&a, &m).unwrap();
            let mb = wasserstein1_exact(&m, &b).unwrap();
            prop_assert!(ab <= am + mb + 1e-9);
        }

        #[test]
        fn translation_and_scaling(a in measure_strategy(), b in measure_strategy(), re in -5.0f64..5.0, im in -5.0f64..5.0, s in 0.1f64..4.0) {
            let base = wasserstein1_exact(&a, &b).unwrap();
            let shift = c(re, im);
            let one = c(1.0, 0.0);
            let moved = wasserstein1_exact(&a.mapped(one, shift), &b.mapped(one, shift)).unwrap();
            prop_assert!((moved - base).abs() <= 1e-10);
            let rot = Complex64::from_polar(s, re);
            let scaled = wasserstein1_exact(&a.mapped(rot, shift), &b.mapped(rot, shift)).unwrap();
            prop_assert!((scaled - s * base).abs() <= 1e-10 * (1.0 + s));
        }

        #[test]
        fn weaker_gauges_bounded_by_exact(a in measure_strategy(), b in measure_strategy(), seed in 0u64..1000) {
            let exact = wasserstein1_exact(&a, &b).unwrap();
            let (sliced, _) = sliced_wasserstein1(&a, &b, 16, seed).unwrap();
            prop_assert!(sliced <= exact + 1e-9);
            prop_assert!(bounded_lipschitz(&a, &b, 8, 8) <= exact + 1e-9);
        }
    }
}
