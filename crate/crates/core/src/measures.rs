//! Root distributions `mu`: parametric families, seeded i.i.d. sampling, and
//! the logarithmic energy integrals that decide whether a point (or a radius)
//! belongs to the exceptional sets where `mu` is too concentrated.
//!
//! JSON schema of a [`DistributionSpec`]:
//!
//! ```json
//! {"family": "uniform_disk", "params": {"center": [0.0, 0.0], "radius": 1.0}, "shift": [0.0, 0.0]}
//! ```
//!
//! | family          | params                                                  |
//! |-----------------|---------------------------------------------------------|
//! | `point_mass`    | `at: [re, im]`                                          |
//! | `finite_atoms`  | `points: [[re, im], ...]`, `weights: [w, ...]`          |
//! | `uniform_circle`| `center: [re, im]`, `radius: r`                         |
//! | `uniform_disk`  | `center: [re, im]`, `radius: r`                         |
//! | `gaussian`      | `center: [re, im]`, `scale: s` (std. dev. per axis)     |
//! | `radial_cauchy` | `center: [re, im]`, `scale: s` (bivariate Cauchy)       |
//! | `mixture`       | `components: [spec, ...]`, `weights: [w, ...]`          |
//!
//! `shift` is optional (default `[0, 0]`) and is added to every sample.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::numeric::{self, breakpoints, halton2, integrate, integrate_breaks, log_minus, QuadratureSettings};
use crate::{Complex64, ComplexPoint, Error, Result};

/// Parametric family of a root distribution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "params", rename_all = "snake_case")]
pub enum Family {
    PointMass {
        at: Complex64,
    },
    FiniteAtoms {
        points: Vec<Complex64>,
        weights: Vec<f64>,
    },
    UniformCircle {
        center: Complex64,
        radius: f64,
    },
    UniformDisk {
        center: Complex64,
        radius: f64,
    },
    /// Independent `N(0, scale^2)` real and imaginary parts.
    Gaussian {
        center: Complex64,
        scale: f64,
    },
    /// Bivariate Cauchy law, density `s / (2 pi (s^2 + |y-c|^2)^{3/2})`.
    /// No moments of order >= 1.
    RadialCauchy {
        center: Complex64,
        scale: f64,
    },
    Mixture {
        components: Vec<DistributionSpec>,
        weights: Vec<f64>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistributionSpec {
    #[serde(flatten)]
    pub family: Family,
    #[serde(default)]
    pub shift: Complex64,
}

impl From<Family> for DistributionSpec {
    fn from(family: Family) -> Self {
        Self {
            family,
            shift: Complex64::new(0.0, 0.0),
        }
    }
}

const WEIGHT_SUM_TOL: f64 = 1e-12;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn finite(z: Complex64) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

fn check_weights(weights: &[f64], len: usize, what: &str) -> Result<()> {
    if weights.len() != len || len == 0 {
        return Err(Error::InvalidDistribution(format!(
            "{what}: {} weights for {len} entries",
            weights.len()
        )));
    }
    if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
        return Err(Error::InvalidDistribution(format!(
            "{what}: weight {w} is not a nonnegative number"
        )));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > WEIGHT_SUM_TOL {
        return Err(Error::InvalidDistribution(format!(
            "{what}: weights sum to {total}, not 1"
        )));
    }
    Ok(())
}

fn check_length(x: f64, what: &str) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidDistribution(format!(
            "{what} must be positive and finite, got {x}"
        )))
    }
}

impl DistributionSpec {
    pub fn point_mass(at: Complex64) -> Self {
        Family::PointMass { at }.into()
    }

    pub fn finite_atoms(points: Vec<Complex64>, weights: Vec<f64>) -> Self {
        Family::FiniteAtoms { points, weights }.into()
    }

    pub fn uniform_circle(center: Complex64, radius: f64) -> Self {
        Family::UniformCircle { center, radius }.into()
    }

    pub fn uniform_disk(center: Complex64, radius: f64) -> Self {
        Family::UniformDisk { center, radius }.into()
    }

    pub fn gaussian(center: Complex64, scale: f64) -> Self {
        Family::Gaussian { center, scale }.into()
    }

    pub fn radial_cauchy(center: Complex64, scale: f64) -> Self {
        Family::RadialCauchy { center, scale }.into()
    }

    pub fn mixture(components: Vec<DistributionSpec>, weights: Vec<f64>) -> Self {
        Family::Mixture { components, weights }.into()
    }

    pub fn shifted(mut self, by: Complex64) -> Self {
        self.shift += by;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !finite(self.shift) {
            return Err(Error::InvalidDistribution("shift must be finite".into()));
        }
        match &self.family {
            Family::PointMass { at } => {
                if !finite(*at) {
                    return Err(Error::InvalidDistribution("point mass location must be finite".into()));
                }
            }
            Family::FiniteAtoms { points, weights } => {
                check_weights(weights, points.len(), "finite_atoms")?;
                if points.iter().any(|p| !finite(*p)) {
                    return Err(Error::InvalidDistribution("atoms must be finite".into()));
                }
            }
            Family::UniformCircle { center, radius } | Family::UniformDisk { center, radius } => {
                if !finite(*center) {
                    return Err(Error::InvalidDistribution("center must be finite".into()));
                }
                check_length(*radius, "radius")?;
            }
            Family::Gaussian { center, scale } | Family::RadialCauchy { center, scale } => {
                if !finite(*center) {
                    return Err(Error::InvalidDistribution("center must be finite".into()));
                }
                check_length(*scale, "scale")?;
            }
            Family::Mixture { components, weights } => {
                check_weights(weights, components.len(), "mixture")?;
                for comp in components {
                    comp.validate()?;
                }
            }
        }
        Ok(())
    }

    /// Characteristic spread of the law around its own center.
    pub fn scale(&self) -> f64 {
        match &self.family {
            Family::PointMass { .. } => 0.0,
            Family::FiniteAtoms { points, .. } => {
                let n = points.len() as f64;
                let centroid = points.iter().sum::<Complex64>() / n;
                points.iter().map(|p| (p - centroid).norm()).fold(0.0, f64::max)
            }
            Family::UniformCircle { radius, .. } | Family::UniformDisk { radius, .. } => *radius,
            Family::Gaussian { scale, .. } | Family::RadialCauchy { scale, .. } => *scale,
            Family::Mixture { components, .. } => components.iter().map(|c| c.scale()).fold(0.0, f64::max),
        }
    }

    /// Radius of the origin-centered disk that holds the bulk of the law:
    /// `|center + shift| + scale`, at least 1.
    pub fn extent(&self) -> f64 {
        let own = match &self.family {
            Family::PointMass { at } => (at + self.shift).norm(),
            Family::FiniteAtoms { points, .. } => points.iter().map(|p| (p + self.shift).norm()).fold(0.0, f64::max),
            Family::UniformCircle { center, radius } | Family::UniformDisk { center, radius } => {
                (center + self.shift).norm() + radius
            }
            Family::Gaussian { center, scale } | Family::RadialCauchy { center, scale } => {
                (center + self.shift).norm() + scale
            }
            Family::Mixture { components, .. } => components
                .iter()
                .map(|c| c.clone().shifted(self.shift).extent())
                .fold(0.0, f64::max),
        };
        own.max(1.0)
    }

    /// True when every sample equals one fixed point.
    pub fn is_degenerate(&self) -> bool {
        self.declared_atoms().len() == 1 && self.declared_atoms()[0].1 >= 1.0 - WEIGHT_SUM_TOL
    }

    /// Atoms declared by the spec (after shifts), with their total masses.
    /// Continuous families contribute none.
    pub fn declared_atoms(&self) -> Vec<(Complex64, f64)> {
        let mut out: Vec<(Complex64, f64)> = Vec::new();
        self.collect_atoms(Complex64::new(0.0, 0.0), 1.0, &mut out);
        out
    }

    fn collect_atoms(&self, offset: Complex64, mass: f64, out: &mut Vec<(Complex64, f64)>) {
        let off = offset + self.shift;
        let mut push = |p: Complex64, w: f64| {
            if w > 0.0 {
                match out.iter_mut().find(|(q, _)| *q == p) {
                    Some(entry) => entry.1 += w,
                    None => out.push((p, w)),
                }
            }
        };
        match &self.family {
            Family::PointMass { at } => push(at + off, mass),
            Family::FiniteAtoms { points, weights } => {
                for (p, w) in points.iter().zip(weights) {
                    push(p + off, mass * w);
                }
            }
            Family::Mixture { components, weights } => {
                for (comp, w) in components.iter().zip(weights) {
                    comp.collect_atoms(off, mass * w, out);
                }
            }
            _ => {}
        }
    }
}

/// Seed of a deterministic random stream.
///
/// Distinct `(master, stream)` pairs select disjoint ChaCha8 streams.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Seed {
    pub master: u64,
    pub stream: u64,
}

impl Seed {
    pub fn new(master: u64) -> Self {
        Self { master, stream: 0 }
    }

    /// Stream for sub-task `index`; counter based, so children of one seed
    /// can be generated in any order or in parallel.
    pub fn child(&self, index: u64) -> Seed {
        Seed {
            master: self.master,
            stream: numeric::splitmix64(self.stream ^ numeric::splitmix64(index.wrapping_add(0x5EED))),
        }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master);
        rng.set_stream(self.stream);
        rng
    }
}

/// Draws `n` i.i.d. points from `spec`. Identical arguments give bit-identical output.
pub fn sample(spec: &DistributionSpec, n: usize, seed: Seed) -> Result<Vec<ComplexPoint>> {
    spec.validate()?;
    if n == 0 {
        return Err(Error::InvalidArgument("sample size must be at least 1".into()));
    }
    let mut rng = seed.rng();
    Ok((0..n).map(|_| draw(spec, &mut rng)).collect())
}

fn pick<R: Rng>(weights: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return i;
        }
    }
    // u landed in the rounding slack above the last cumulative weight.
    weights.iter().rposition(|w| *w > 0.0).unwrap_or(weights.len() - 1)
}

fn draw<R: Rng>(spec: &DistributionSpec, rng: &mut R) -> Complex64 {
    let z = match &spec.family {
        Family::PointMass { at } => *at,
        Family::FiniteAtoms { points, weights } => points[pick(weights, rng)],
        Family::UniformCircle { center, radius } => {
            let theta = TAU * rng.random::<f64>();
            center + Complex64::from_polar(*radius, theta)
        }
        Family::UniformDisk { center, radius } => {
            let r = radius * rng.random::<f64>().sqrt();
            let theta = TAU * rng.random::<f64>();
            center + Complex64::from_polar(r, theta)
        }
        Family::Gaussian { center, scale } => {
            let x: f64 = StandardNormal.sample(rng);
            let y: f64 = StandardNormal.sample(rng);
            center + c(scale * x, scale * y)
        }
        Family::RadialCauchy { center, scale } => {
            // |Y| has CDF 1 - 1/sqrt(1 + r^2) for unit scale.
            let u: f64 = rng.random();
            let r = cauchy_radius(u);
            let theta = TAU * rng.random::<f64>();
            center + Complex64::from_polar(scale * r, theta)
        }
        Family::Mixture { components, weights } => draw(&components[pick(weights, rng)], rng),
    };
    z + spec.shift
}

fn cauchy_radius(u: f64) -> f64 {
    let q = 1.0 / (1.0 - u);
    ((q - 1.0) * (q + 1.0)).sqrt()
}

/// Quasi-random discretization of `spec` into roughly `m` weighted atoms.
///
/// Atomic parts are reproduced exactly; continuous parts use a Halton
/// sequence pushed through the inverse radial CDF (equispaced angles for
/// circles).
pub fn discretize(spec: &DistributionSpec, m: usize) -> Result<(Vec<ComplexPoint>, Vec<f64>)> {
    spec.validate()?;
    let m = m.max(1);
    let mut points = Vec::new();
    let mut weights = Vec::new();
    discretize_into(spec, m, Complex64::new(0.0, 0.0), 1.0, &mut points, &mut weights);
    Ok((points, weights))
}

fn discretize_into(
    spec: &DistributionSpec,
    m: usize,
    offset: Complex64,
    mass: f64,
    points: &mut Vec<Complex64>,
    weights: &mut Vec<f64>,
) {
    let off = offset + spec.shift;
    let mut continuous = |map: &dyn Fn(f64, f64) -> Complex64| {
        let w = mass / m as f64;
        for i in 0..m {
            let (u, v) = halton2(i as u64);
            points.push(map(u, v) + off);
            weights.push(w);
        }
    };
    match &spec.family {
        Family::PointMass { at } => {
            points.push(at + off);
            weights.push(mass);
        }
        Family::FiniteAtoms {
            points: atoms,
            weights: ws,
        } => {
            for (p, w) in atoms.iter().zip(ws) {
                if *w > 0.0 {
                    points.push(p + off);
                    weights.push(mass * w);
                }
            }
        }
        Family::UniformCircle { center, radius } => {
            let w = mass / m as f64;
            for i in 0..m {
                let theta = TAU * (i as f64 + 0.5) / m as f64;
                points.push(center + Complex64::from_polar(*radius, theta) + off);
                weights.push(w);
            }
        }
        Family::UniformDisk { center, radius } => {
            continuous(&|u, v| center + Complex64::from_polar(radius * u.sqrt(), TAU * v))
        }
        Family::Gaussian { center, scale } => continuous(&|u, v| {
            let r = scale * (-2.0 * (1.0 - u).ln()).sqrt();
            center + Complex64::from_polar(r, TAU * v)
        }),
        Family::RadialCauchy { center, scale } => {
            continuous(&|u, v| center + Complex64::from_polar(scale * cauchy_radius(u), TAU * v))
        }
        Family::Mixture {
            components,
            weights: ws,
        } => {
            // Largest-remainder allocation of the m points.
            let raw: Vec<f64> = ws.iter().map(|w| w * m as f64).collect();
            let mut counts: Vec<usize> = raw.iter().map(|x| x.floor() as usize).collect();
            let mut rest = m.saturating_sub(counts.iter().sum());
            let mut order: Vec<usize> = (0..ws.len()).collect();
            order.sort_by(|&a, &b| (raw[b] - raw[b].floor()).total_cmp(&(raw[a] - raw[a].floor())));
            for &i in order.iter().cycle().take(ws.len() * 2) {
                if rest == 0 {
                    break;
                }
                if ws[i] > 0.0 {
                    counts[i] += 1;
                    rest -= 1;
                }
            }
            for ((comp, w), k) in components.iter().zip(ws).zip(counts) {
                if *w > 0.0 {
                    discretize_into(comp, k.max(1), off, mass * w, points, weights);
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Logarithmic energies
// ---------------------------------------------------------------------------

/// `G(s) = int_0^s -t log t dt`, the radial antiderivative of `log_-` in the plane.
fn radial_log_antiderivative(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else {
        let s2 = s * s;
        -0.5 * s2 * s.ln() + 0.25 * s2
    }
}

fn check_quad(quad: &QuadratureSettings) -> Result<()> {
    if quad.max_subdivisions < numeric::MIN_SUBDIVISIONS {
        return Err(Error::InvalidArgument(format!(
            "quadrature needs at least {} subdivisions",
            numeric::MIN_SUBDIVISIONS
        )));
    }
    Ok(())
}

/// `int log_-|y - z| d mu(y)`.
///
/// Returns `+inf` exactly when `z` is a declared atom of `mu`; continuous
/// families always give a finite value. The result is nonnegative.
pub fn log_minus_energy(spec: &DistributionSpec, z: ComplexPoint, quad: &QuadratureSettings) -> Result<f64> {
    spec.validate()?;
    check_quad(quad)?;
    Ok(energy_local(spec, z, quad))
}

fn energy_local(spec: &DistributionSpec, z: Complex64, quad: &QuadratureSettings) -> f64 {
    let w = z - spec.shift;
    match &spec.family {
        Family::PointMass { at } => log_minus((at - w).norm()),
        Family::FiniteAtoms { points, weights } => points
            .iter()
            .zip(weights)
            .filter(|(_, wt)| **wt > 0.0)
            .map(|(p, wt)| wt * log_minus((p - w).norm()))
            .sum(),
        Family::UniformCircle { center, radius } => circle_energy((w - center).norm(), *radius, quad),
        Family::UniformDisk { center, radius } => disk_energy((w - center).norm(), *radius, quad),
        Family::Gaussian { center, scale } => {
            let s2 = scale * scale;
            let density = move |r2: f64| (-0.5 * r2 / s2).exp() / (TAU * s2);
            density_energy(w - center, &density, *scale, quad)
        }
        Family::RadialCauchy { center, scale } => {
            let s = *scale;
            let density = move |r2: f64| s / (TAU * (s * s + r2).powf(1.5));
            density_energy(w - center, &density, s, quad)
        }
        Family::Mixture { components, weights } => {
            let mut total = 0.0;
            for (comp, wt) in components.iter().zip(weights) {
                if *wt > 0.0 {
                    total += wt * energy_local(comp, w, quad);
                }
            }
            total
        }
    }
}

/// Uniform law on the circle of radius `rho`, point at distance `d` from its center.
fn circle_energy(d: f64, rho: f64, quad: &QuadratureSettings) -> f64 {
    if d == 0.0 {
        return log_minus(rho);
    }
    // distance^2 = rho^2 + d^2 - 2 rho d cos(phi), phi in [0, pi] by symmetry
    let dist = |phi: f64| {
        let h = (0.5 * phi).sin();
        ((rho - d) * (rho - d) + 4.0 * rho * d * h * h).sqrt()
    };
    let kink = ((rho * rho + d * d - 1.0) / (2.0 * rho * d)).clamp(-2.0, 2.0);
    let interior = if kink.abs() <= 1.0 { Some(kink.acos()) } else { None };
    let br = breakpoints(0.0, PI, interior);
    let est = integrate_breaks(|phi| log_minus(dist(phi)), &br, quad);
    (est.value / PI).max(0.0)
}

/// Uniform law on the disk of radius `rho`, point at distance `d` from its
/// center. The radial integral is done in closed form along rays from the point.
fn disk_energy(d: f64, rho: f64, quad: &QuadratureSettings) -> f64 {
    let area = PI * rho * rho;
    if d == 0.0 {
        return TAU * radial_log_antiderivative(rho.min(1.0)) / area;
    }
    // Ray from the point in direction phi (measured from the outward radial direction).
    let segment = |phi: f64| -> (f64, f64) {
        let p = d * phi.cos();
        let disc = p * p - d * d + rho * rho;
        if disc <= 0.0 {
            return (0.0, 0.0);
        }
        let sq = disc.sqrt();
        let (lo, hi) = (-p - sq, -p + sq);
        (lo.max(0.0), hi.max(0.0))
    };
    let integrand = |phi: f64| {
        let (lo, hi) = segment(phi);
        radial_log_antiderivative(hi.min(1.0)) - radial_log_antiderivative(lo.min(1.0))
    };
    let mut interior = Vec::new();
    // The ray meets the boundary at distance exactly 1.
    let k = (rho * rho - d * d - 1.0) / (2.0 * d);
    if k.abs() <= 1.0 {
        interior.push(k.acos());
    }
    // Tangent rays when the point is outside.
    if d > rho {
        interior.push((-(d * d - rho * rho).sqrt() / d).acos());
    }
    let br = breakpoints(0.0, PI, interior);
    let est = integrate_breaks(integrand, &br, quad);
    (2.0 * est.value / area).max(0.0)
}

/// Radially symmetric density `density(|y - c|^2)` with length scale `scale`,
/// point at offset `w = z - c`.
///
/// Polar coordinates around the point. On the innermost annulus the density
/// is frozen and the log singularity integrated in closed form (the linear
/// term vanishes by angular symmetry); the rest is adaptive quadrature.
fn density_energy(w: Complex64, density: &dyn Fn(f64) -> f64, scale: f64, quad: &QuadratureSettings) -> f64 {
    let t0 = 1e-4 * scale.min(1.0);
    let core = TAU * density(w.norm_sqr()) * radial_log_antiderivative(t0);
    let inner_quad = QuadratureSettings {
        abs_tol: quad.abs_tol * 0.1,
        rel_tol: quad.rel_tol,
        max_subdivisions: quad.max_subdivisions,
    };
    let d = w.norm();
    let angular = |theta: f64| {
        let u = Complex64::from_polar(1.0, theta);
        // closest approach of the ray to the density center
        let closest = -(w * u.conj()).re;
        let marks = [0.125, 0.5, 1.0, 2.0, 4.0, 8.0]
            .into_iter()
            .map(|k| k * scale)
            .chain(std::iter::once(closest))
            .chain([closest - scale, closest + scale]);
        let br = breakpoints(t0, 1.0, marks);
        integrate_breaks(|t| -t * t.ln() * density((w + u * t).norm_sqr()), &br, &inner_quad).value
    };
    // Angular breakpoints at the direction of the center and its opposite.
    let toward = if d > 0.0 { (-w).arg().rem_euclid(TAU) } else { 0.0 };
    let opposite = (toward + PI).rem_euclid(TAU);
    let br = breakpoints(0.0, TAU, [toward, opposite, PI / 2.0, PI, 1.5 * PI]);
    let outer = integrate_breaks(angular, &br, quad).value;
    (core + outer).max(0.0)
}

/// `int_R log_-|R - x| dR` over the real line for a fixed `x`; equals 2.
pub fn line_log_minus_integral(x: f64, quad: &QuadratureSettings) -> f64 {
    integrate_breaks(|r| log_minus((r - x).abs()), &[x - 1.0, x, x + 1.0], quad).value
}

const RADIAL_ATOM_TOL: f64 = 1e-14;

/// `int log_-|x - R| d mu_bar(x)` where `mu_bar` is the law of `|X|`.
///
/// `+inf` exactly when `R` is an atom of the radial part: a declared atom at
/// modulus `R`, or an origin-centered circle of radius `R`.
pub fn radial_log_energy(spec: &DistributionSpec, radius: f64, quad: &QuadratureSettings) -> Result<f64> {
    spec.validate()?;
    check_quad(quad)?;
    if !(radius.is_finite() && radius > 0.0) {
        return Err(Error::InvalidArgument(format!("radius must be positive, got {radius}")));
    }
    Ok(radial_local(spec, Complex64::new(0.0, 0.0), radius, quad))
}

fn radial_atom_term(modulus: f64, radius: f64) -> f64 {
    if (modulus - radius).abs() <= RADIAL_ATOM_TOL * radius.max(1.0) {
        f64::INFINITY
    } else {
        log_minus((modulus - radius).abs())
    }
}

fn radial_local(spec: &DistributionSpec, offset: Complex64, radius: f64, quad: &QuadratureSettings) -> f64 {
    let off = offset + spec.shift;
    match &spec.family {
        Family::PointMass { at } => radial_atom_term((at + off).norm(), radius),
        Family::FiniteAtoms { points, weights } => points
            .iter()
            .zip(weights)
            .filter(|(_, w)| **w > 0.0)
            .map(|(p, w)| w * radial_atom_term((p + off).norm(), radius))
            .sum(),
        Family::UniformCircle { center, radius: rho } => {
            let dist = (center + off).norm();
            if dist == 0.0 {
                return radial_atom_term(*rho, radius);
            }
            // |c + rho e^{i phi}| for phi in [0, pi]; singular where it equals R.
            let modulus = |phi: f64| (dist * dist + rho * rho + 2.0 * dist * rho * phi.cos()).max(0.0).sqrt();
            let crossings = [radius - 1.0, radius, radius + 1.0].into_iter().filter_map(|x| {
                if x < 0.0 {
                    return None;
                }
                let cs = (x * x - dist * dist - rho * rho) / (2.0 * dist * rho);
                (cs.abs() <= 1.0).then(|| cs.acos())
            });
            let br = breakpoints(0.0, PI, crossings);
            let est = integrate_breaks(|phi| log_minus((modulus(phi) - radius).abs()), &br, quad);
            (est.value / PI).max(0.0)
        }
        Family::UniformDisk { center, radius: rho } => {
            let dist = (center + off).norm();
            let rho = *rho;
            let area = PI * rho * rho;
            // Density of |X|: s * (angle of the circle |y| = s inside the disk) / area.
            let density = move |s: f64| {
                if s <= 0.0 {
                    return 0.0;
                }
                let angle = if dist == 0.0 {
                    if s < rho {
                        TAU
                    } else {
                        0.0
                    }
                } else if s + dist <= rho {
                    TAU
                } else if s >= dist + rho || s <= dist - rho {
                    0.0
                } else {
                    2.0 * ((s * s + dist * dist - rho * rho) / (2.0 * s * dist))
                        .clamp(-1.0, 1.0)
                        .acos()
                };
                s * angle / area
            };
            let edges = [(rho - dist).abs(), rho + dist];
            radial_density_energy(&density, radius, &edges, quad)
        }
        Family::Gaussian { center, scale } => {
            let s2 = scale * scale;
            let profile = move |r2: f64| (-0.5 * r2 / s2).exp() / (TAU * s2);
            radial_profile_energy(center + off, &profile, radius, quad)
        }
        Family::RadialCauchy { center, scale } => {
            let s = *scale;
            let profile = move |r2: f64| s / (TAU * (s * s + r2).powf(1.5));
            radial_profile_energy(center + off, &profile, radius, quad)
        }
        Family::Mixture { components, weights } => {
            let mut total = 0.0;
            for (comp, w) in components.iter().zip(weights) {
                if *w > 0.0 {
                    total += w * radial_local(comp, off, radius, quad);
                }
            }
            total
        }
    }
}

/// Radial energy for a planar density `profile(|y - center|^2)`.
fn radial_profile_energy(
    center: Complex64,
    profile: &dyn Fn(f64) -> f64,
    radius: f64,
    quad: &QuadratureSettings,
) -> f64 {
    let dist = center.norm();
    let inner = QuadratureSettings {
        abs_tol: quad.abs_tol * 0.1,
        ..*quad
    };
    let density = |s: f64| {
        if s <= 0.0 {
            return 0.0;
        }
        if dist == 0.0 {
            return TAU * s * profile(s * s);
        }
        // Angular integral over the circle |y| = s, symmetric about the center direction.
        let ring = integrate(
            |phi| profile(s * s + dist * dist - 2.0 * s * dist * phi.cos()),
            0.0,
            PI,
            &inner,
        );
        2.0 * s * ring.value
    };
    radial_density_energy(&density, radius, &[dist], quad)
}

/// `int log_-|s - R| g(s) ds` for a density `g` of `|X|` on `[0, inf)`.
fn radial_density_energy(g: &dyn Fn(f64) -> f64, radius: f64, edges: &[f64], quad: &QuadratureSettings) -> f64 {
    let a = (radius - 1.0).max(0.0);
    let b = radius + 1.0;
    let br = breakpoints(a, b, edges.iter().copied().chain(std::iter::once(radius)));
    integrate_breaks(|s| log_minus((s - radius).abs()) * g(s), &br, quad)
        .value
        .max(0.0)
}
