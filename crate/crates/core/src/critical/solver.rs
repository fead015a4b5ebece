use std::collections::HashMap;
use std::f64::consts::TAU;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::measures::Seed;
use crate::numeric::CompensatedComplexSum;
use crate::poly_field::RootSample;
use crate::{Complex64, ComplexPoint, Error, Result};

/// Roots grouped into distinct centers with multiplicities.
#[derive(Clone, Debug, PartialEq)]
pub struct DistinctRoots {
    pub centers: Vec<ComplexPoint>,
    pub multiplicities: Vec<usize>,
}

impl DistinctRoots {
    pub fn total(&self) -> usize {
        self.multiplicities.iter().sum()
    }

    pub fn k(&self) -> usize {
        self.centers.len()
    }
}

/// Bit-pattern key under which `0.0` and `-0.0` coincide.
fn exact_key(z: Complex64) -> (u64, u64) {
    ((z.re + 0.0).to_bits(), (z.im + 0.0).to_bits())
}

/// Groups roots into distinct centers, in order of first appearance.
///
/// With `tol == 0` only equal points are merged. Otherwise points within
/// `tol * (1 + |x|)` of each other are chained into one cluster whose center
/// is the centroid.
pub fn distinct_reduce(roots: &RootSample, tol: f64) -> Result<DistinctRoots> {
    if !(tol >= 0.0 && tol.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "multiplicity tolerance must be >= 0, got {tol}"
        )));
    }
    let pts = roots.points();
    if tol == 0.0 {
        let mut index: HashMap<(u64, u64), usize> = HashMap::with_capacity(pts.len());
        let mut centers = Vec::new();
        let mut multiplicities = Vec::new();
        for &p in pts {
            let slot = *index.entry(exact_key(p)).or_insert_with(|| {
                centers.push(p);
                multiplicities.push(0);
                centers.len() - 1
            });
            multiplicities[slot] += 1;
        }
        return Ok(DistinctRoots {
            centers,
            multiplicities,
        });
    }

    // Single-linkage clustering via union-find over a sweep in the real part.
    let n = pts.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    let max_mod = roots.max_modulus();
    let reach = tol * (1.0 + max_mod);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| pts[a].re.total_cmp(&pts[b].re));
    for (pos, &i) in order.iter().enumerate() {
        for &j in &order[pos + 1..] {
            if pts[j].re - pts[i].re > reach {
                break;
            }
            let limit = tol * (1.0 + pts[i].norm().max(pts[j].norm()));
            if (pts[i] - pts[j]).norm() <= limit {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut slot_of_root: HashMap<usize, usize> = HashMap::new();
    let mut sums: Vec<Complex64> = Vec::new();
    let mut multiplicities = Vec::new();
    for (i, &p) in pts.iter().enumerate() {
        let r = find(&mut parent, i);
        let slot = *slot_of_root.entry(r).or_insert_with(|| {
            sums.push(Complex64::new(0.0, 0.0));
            multiplicities.push(0);
            sums.len() - 1
        });
        sums[slot] += p;
        multiplicities[slot] += 1;
    }
    let centers = sums.iter().zip(&multiplicities).map(|(s, &m)| s / m as f64).collect();
    Ok(DistinctRoots {
        centers,
        multiplicities,
    })
}

/// Settings of the Aberth–Ehrlich critical-point solver.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverSettings {
    /// Residual tolerance for `|R(z)| * min_j |z - w_j|`;
    /// `None` means `1e-12 * (1 + max|w_j|)`. A zero also counts as
    /// converged when its residual is within the rounding floor of `R`.
    pub tol: Option<f64>,
    pub max_sweeps: usize,
    /// Passed to [`distinct_reduce`]; `0` groups only identical roots.
    pub multiplicity_tol: f64,
    /// Seed of the random rotation applied to the starting points.
    pub seed: u64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            tol: None,
            max_sweeps: 200,
            multiplicity_tol: 0.0,
            seed: 0x0C41_7FEE,
        }
    }
}

/// The `n - 1` critical points of `P_n`, counted with multiplicity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalSet {
    pub points: Vec<ComplexPoint>,
    /// Per point: `|R(z)| * min_j |z - w_j|` for simple zeros of
    /// `R(z) = sum m_j/(z - w_j)`, `0` for copies of a repeated root.
    pub residuals: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl CriticalSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }

    pub fn mean(&self) -> Complex64 {
        let mut s = CompensatedComplexSum::new();
        for p in &self.points {
            s.add(*p);
        }
        s.value() / self.points.len().max(1) as f64
    }

    /// JSON form: `{"points": [[re, im], ...], "iterations", "max_residual", "converged"}`.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "points": self.points,
            "iterations": self.iterations,
            "max_residual": self.max_residual(),
            "converged": self.converged,
        })
    }
}

#[inline]
fn inv(d: Complex64) -> Complex64 {
    let q = 1.0 / (d.re * d.re + d.im * d.im);
    Complex64::new(d.re * q, -d.im * q)
}

/// `(sum 1/(z-w_j), R(z), sum m_j/(z-w_j)^2, min_j |z-w_j|)`.
#[inline]
fn secular_sums(z: Complex64, centers: &[Complex64], weights: &[f64]) -> (Complex64, Complex64, Complex64, f64) {
    let mut s0 = Complex64::new(0.0, 0.0);
    let mut r = Complex64::new(0.0, 0.0);
    let mut r1 = Complex64::new(0.0, 0.0);
    let mut dmin2 = f64::INFINITY;
    for (w, &m) in centers.iter().zip(weights) {
        let d = z - w;
        let d2 = d.re * d.re + d.im * d.im;
        dmin2 = dmin2.min(d2);
        let q = 1.0 / d2;
        let t = Complex64::new(d.re * q, -d.im * q);
        s0 += t;
        r += t * m;
        r1 += t * t * m;
    }
    (s0, r, r1, dmin2.sqrt())
}

/// Residual `|R(z)| * min_j |z - w_j|` with compensated summation, and the
/// residual floor implied by rounding `z - w_j` to working precision.
fn residual_with_floor(z: Complex64, centers: &[Complex64], weights: &[f64]) -> (f64, f64) {
    let mut r = CompensatedComplexSum::new();
    let mut dmin = f64::INFINITY;
    let mut floor = 0.0;
    for (w, &m) in centers.iter().zip(weights) {
        let d = z - w;
        let dn = d.norm();
        if dn == 0.0 {
            return (f64::INFINITY, 0.0);
        }
        dmin = dmin.min(dn);
        r.add(inv(d) * m);
        floor += m * (z.norm() + w.norm()) / (dn * dn);
    }
    (r.value().norm() * dmin, 4.0 * f64::EPSILON * floor * dmin)
}

fn residual(z: Complex64, centers: &[Complex64], weights: &[f64]) -> f64 {
    residual_with_floor(z, centers, weights).0
}

struct AberthOutcome {
    zeros: Vec<Complex64>,
    residuals: Vec<f64>,
    sweeps: usize,
    converged: bool,
}

/// Simultaneous Aberth–Ehrlich iteration for the `k - 1` zeros of
/// `Q(z) = R(z) prod_j (z - w_j)`, using `Q'/Q = sum 1/(z-w_j) + R'(z)/R(z)`.
/// Jacobi-style: each sweep reads only the previous sweep's iterates.
fn aberth(
    centers: &[Complex64],
    weights: &[f64],
    mut z: Vec<Complex64>,
    tol: f64,
    max_sweeps: usize,
    scale: f64,
) -> AberthOutcome {
    let m = z.len();
    let mut done = vec![false; m];
    let mut res = vec![f64::INFINITY; m];
    let mut sweeps = 0;
    let tiny = f64::EPSILON * scale;
    while sweeps < max_sweeps && done.iter().any(|d| !d) {
        sweeps += 1;
        let snapshot = z.clone();
        for i in 0..m {
            if done[i] {
                continue;
            }
            let zi = snapshot[i];
            let (s0, r, r1, dmin) = secular_sums(zi, centers, weights);
            if !(dmin > 0.0) || !r.re.is_finite() || !r.im.is_finite() {
                // Sitting on a pole: nudge off it.
                z[i] = zi + Complex64::from_polar(1e-8 * scale, 0.7 + i as f64);
                continue;
            }
            res[i] = r.norm() * dmin;
            if res[i] <= tol {
                done[i] = true;
                continue;
            }
            // Newton correction for Q: N = Q/Q' = 1 / (s0 - r1/r) = r / (s0 r - r1).
            let newton = r / (s0 * r - r1);
            let mut repulsion = Complex64::new(0.0, 0.0);
            for (l, zl) in snapshot.iter().enumerate() {
                if l != i {
                    let d = zi - zl;
                    if d.re != 0.0 || d.im != 0.0 {
                        repulsion += inv(d);
                    }
                }
            }
            let step = newton / (Complex64::new(1.0, 0.0) - newton * repulsion);
            if !(step.re.is_finite() && step.im.is_finite()) {
                z[i] = zi + Complex64::from_polar(1e-8 * scale, 1.3 + i as f64);
                continue;
            }
            z[i] = zi - step;
            if step.norm() <= 4.0 * f64::EPSILON * zi.norm() + tiny {
                // Stagnated at working precision.
                res[i] = residual(z[i], centers, weights);
                done[i] = true;
            }
        }
    }
    let mut converged = true;
    for i in 0..m {
        let (mut r, floor) = residual_with_floor(z[i], centers, weights);
        // One Newton polish, kept only if it helps.
        let (s0, rv, r1, _) = secular_sums(z[i], centers, weights);
        let polished = z[i] - rv / (s0 * rv - r1);
        if polished.re.is_finite() && polished.im.is_finite() {
            let rp = residual(polished, centers, weights);
            if rp < r {
                z[i] = polished;
                r = rp;
            }
        }
        res[i] = r;
        converged &= r <= tol.max(floor);
    }
    AberthOutcome {
        zeros: z,
        residuals: res,
        sweeps,
        converged,
    }
}

/// Critical points of `P_n`: `m_j - 1` exact copies of every repeated root
/// `w_j`, followed by the `k - 1` simple zeros of `R(z) = sum m_j / (z - w_j)`.
///
/// Each center `w_j` seeds the first-order zero `w_j - m_j/S_j` of its
/// pole-plus-constant approximation, slightly jittered; the center whose
/// offset is largest relative to its nearest neighbour is dropped. If the
/// iteration cap is hit the solve is repeated from a circle around the
/// centroid and the better of the two runs is returned.
pub fn critical_points(roots: &RootSample, opts: &SolverSettings) -> Result<CriticalSet> {
    let n = roots.n();
    if n < 2 {
        return Err(Error::InvalidArgument("critical points need n >= 2".into()));
    }
    let dr = distinct_reduce(roots, opts.multiplicity_tol)?;
    let mut points = Vec::with_capacity(n - 1);
    let mut residuals = Vec::with_capacity(n - 1);
    for (w, &m) in dr.centers.iter().zip(&dr.multiplicities) {
        for _ in 1..m {
            points.push(*w);
            residuals.push(0.0);
        }
    }
    let k = dr.k();
    if k == 1 {
        return Ok(CriticalSet {
            points,
            residuals,
            iterations: 0,
            converged: true,
        });
    }

    let centers = &dr.centers;
    let weights: Vec<f64> = dr.multiplicities.iter().map(|&m| m as f64).collect();
    let max_mod = centers.iter().map(|w| w.norm()).fold(0.0, f64::max);
    let tol = opts.tol.unwrap_or(1e-12 * (1.0 + max_mod));
    let centroid = centers.iter().sum::<Complex64>() / k as f64;
    let spread = centers.iter().map(|w| (w - centroid).norm()).fold(0.0, f64::max);
    let diameter = 2.0 * spread;
    let scale = max_mod.max(spread).max(f64::MIN_POSITIVE);

    // Near w_j, R(z) ~ m_j/(z - w_j) + S_j with S_j = sum_{l != j} m_l/(w_j - w_l),
    // so w_j - m_j/S_j approximates a zero; the center with the largest such
    // offset relative to its spacing is the one without a partner.
    let mut rng = Seed::new(opts.seed).rng();
    let mut guesses: Vec<(f64, Complex64)> = centers
        .iter()
        .enumerate()
        .map(|(j, w)| {
            let mut s = Complex64::new(0.0, 0.0);
            let mut near = f64::INFINITY;
            for (l, (v, &m)) in centers.iter().zip(&weights).enumerate() {
                if l != j {
                    s += inv(w - v) * m;
                    near = near.min((w - v).norm());
                }
            }
            let offset = if s.norm() > 0.0 {
                -weights[j] / s
            } else {
                Complex64::new(diameter, 0.0)
            };
            let jitter = Complex64::from_polar(1e-3 * offset.norm(), TAU * rng.random::<f64>());
            (offset.norm() / near, w + offset + jitter)
        })
        .collect();
    let drop = guesses
        .iter()
        .enumerate()
        .max_by(|a, b| (a.1).0.total_cmp(&(b.1).0))
        .map(|(j, _)| j)
        .unwrap_or(0);
    guesses.remove(drop);
    let start: Vec<Complex64> = guesses.into_iter().map(|(_, z)| z).collect();

    let mut out = aberth(centers, &weights, start, tol, opts.max_sweeps, scale);
    if !out.converged {
        let radius = 1.5 * spread;
        let offset = rng.random::<f64>();
        let circle: Vec<Complex64> = (0..k - 1)
            .map(|i| centroid + Complex64::from_polar(radius, TAU * (i as f64 + offset) / (k - 1) as f64))
            .collect();
        let retry = aberth(centers, &weights, circle, tol, opts.max_sweeps, scale);
        let worst = |o: &AberthOutcome| o.residuals.iter().copied().fold(0.0, f64::max);
        let sweeps = out.sweeps + retry.sweeps;
        if retry.converged || worst(&retry) < worst(&out) {
            out = retry;
        }
        out.sweeps = sweeps;
    }
    points.extend_from_slice(&out.zeros);
    residuals.extend_from_slice(&out.residuals);
    Ok(CriticalSet {
        points,
        residuals,
        iterations: out.sweeps,
        converged: out.converged,
    })
}
