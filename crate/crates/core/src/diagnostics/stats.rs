use std::f64::consts::{PI, TAU};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::critical::distinct_reduce;
use crate::measures::{log_minus_energy, sample, DistributionSpec, Seed};
use crate::numeric::{integrate_breaks, median, CompensatedSum, QuadratureSettings};
use crate::poly_field::{log_abs_l, scaled_log_abs_L, RootSample};
use crate::{Complex64, ComplexPoint, Error, Result};

/// Seed of trial `trial` at sample size `n`.
pub fn trial_seed(seed: Seed, n: usize, trial: usize) -> Seed {
    seed.child(n as u64).child(trial as u64)
}

fn check_ladder(n_list: &[usize], trials: usize, min_n: usize) -> Result<()> {
    if n_list.is_empty() || n_list.iter().any(|&n| n < min_n) {
        return Err(Error::InvalidArgument(format!(
            "sample sizes must be at least {min_n}, got {n_list:?}"
        )));
    }
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    Ok(())
}

/// Rejects points carrying mass or with infinite `log_-` energy.
pub fn certify_off_atom(spec: &DistributionSpec, z: ComplexPoint) -> Result<()> {
    if spec.declared_atoms().iter().any(|(a, _)| *a == z) {
        return Err(Error::AtomicPoint(format!("{z} is an atom of the distribution")));
    }
    let energy = log_minus_energy(spec, z, &QuadratureSettings::default())?;
    if !energy.is_finite() {
        return Err(Error::AtomicPoint(format!("log_- energy at {z} diverges")));
    }
    Ok(())
}

/// One line of the field-smallness table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lemma2Row {
    pub n: usize,
    pub trials: usize,
    pub exceedances: usize,
    /// Fraction of trials with `|(1/n) log|L_n(z)|| >= eps`.
    pub frequency: f64,
    pub median_abs: f64,
}

/// Empirical frequency of `|(1/n) log|L_n(z)|| >= eps` for each `n`.
pub fn lemma2_statistic(
    spec: &DistributionSpec,
    z: ComplexPoint,
    eps: f64,
    n_list: &[usize],
    trials: usize,
    seed: Seed,
) -> Result<Vec<Lemma2Row>> {
    spec.validate()?;
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!("eps must be positive, got {eps}")));
    }
    check_ladder(n_list, trials, 1)?;
    certify_off_atom(spec, z)?;
    n_list
        .iter()
        .map(|&n| {
            let values: Vec<f64> = (0..trials)
                .into_par_iter()
                .map(|t| -> Result<f64> {
                    let roots = RootSample::new(sample(spec, n, trial_seed(seed, n, t))?)?;
                    Ok(scaled_log_abs_L(&roots, z).abs())
                })
                .collect::<Result<_>>()?;
            let exceedances = values.iter().filter(|v| **v >= eps).count();
            Ok(Lemma2Row {
                n,
                trials,
                exceedances,
                frequency: exceedances as f64 / trials as f64,
                median_abs: median(&values),
            })
        })
        .collect()
}

/// `sup_t #{k : t <= v_k <= t + delta} / len`, by a sliding window over the
/// sorted values.
pub fn concentration_function(values: &[f64], delta: f64) -> Result<f64> {
    if values.is_empty() || !(delta >= 0.0) {
        return Err(Error::InvalidArgument("need values and delta >= 0".into()));
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mut best = 0;
    let mut hi = 0;
    for lo in 0..v.len() {
        while hi < v.len() && v[hi] <= v[lo] + delta {
            hi += 1;
        }
        best = best.max(hi - lo);
    }
    Ok(best as f64 / v.len() as f64)
}

/// Which part of `Y = 1/(z - X)` is summed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Component {
    Re,
    Im,
}

impl Component {
    fn of(self, w: Complex64) -> f64 {
        match self {
            Component::Re => w.re,
            Component::Im => w.im,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationRow {
    pub n: usize,
    pub trials: usize,
    pub component: Component,
    pub delta: f64,
    pub q: f64,
    pub q_sqrt_n: f64,
}

/// Picks the real or imaginary part of `1/(z - X)`, whichever has positive
/// sample variance first.
fn choose_component(spec: &DistributionSpec, z: ComplexPoint, seed: Seed) -> Result<Component> {
    let ys: Vec<Complex64> = sample(spec, 256, seed.child(u64::MAX))?
        .iter()
        .map(|x| 1.0 / (z - x))
        .collect();
    for comp in [Component::Re, Component::Im] {
        let v: Vec<f64> = ys.iter().map(|y| comp.of(*y)).collect();
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (v.len() - 1) as f64;
        if var.is_finite() && var > 1e-24 * (1.0 + mean * mean) {
            return Ok(comp);
        }
    }
    Err(Error::Degenerate(format!(
        "both parts of 1/(z - X) are degenerate at z = {z}"
    )))
}

/// Monte Carlo estimate of the concentration function of `sum_k Re Y_k`
/// (or `Im`, when the real part is degenerate), `Y_k = 1/(z - X_k)`.
pub fn concentration_estimate(
    spec: &DistributionSpec,
    z: ComplexPoint,
    n_list: &[usize],
    delta: f64,
    trials: usize,
    seed: Seed,
) -> Result<Vec<ConcentrationRow>> {
    spec.validate()?;
    if spec.is_degenerate() {
        return Err(Error::Degenerate("the distribution is a point mass".into()));
    }
    if !(delta > 0.0) {
        return Err(Error::InvalidArgument(format!("delta must be positive, got {delta}")));
    }
    check_ladder(n_list, trials, 1)?;
    if spec.declared_atoms().iter().any(|(a, _)| *a == z) {
        return Err(Error::AtomicPoint(format!("{z} is an atom of the distribution")));
    }
    let component = choose_component(spec, z, seed)?;
    n_list
        .iter()
        .map(|&n| {
            let sums: Vec<f64> = (0..trials)
                .into_par_iter()
                .map(|t| -> Result<f64> {
                    let xs = sample(spec, n, trial_seed(seed, n, t))?;
                    Ok(xs
                        .iter()
                        .map(|x| component.of(1.0 / (z - x)))
                        .collect::<CompensatedSum>()
                        .value())
                })
                .collect::<Result<_>>()?;
            let q = concentration_function(&sums, delta)?;
            Ok(ConcentrationRow {
                n,
                trials,
                component,
                delta,
                q,
                q_sqrt_n: q * (n as f64).sqrt(),
            })
        })
        .collect()
}

/// `int_rect (g + sigma ln|z - s|)^2 dz` for `s` inside the rectangle,
/// with the radial integral in closed form along rays from `s`.
fn polar_log_square(s: Complex64, rect: (f64, f64, f64, f64), g: f64, sigma: f64) -> f64 {
    let (x0, x1, y0, y1) = rect;
    let reach = |t: f64| -> f64 {
        let (sn, cs) = t.sin_cos();
        let tx = if cs > 0.0 {
            (x1 - s.re) / cs
        } else if cs < 0.0 {
            (x0 - s.re) / cs
        } else {
            f64::INFINITY
        };
        let ty = if sn > 0.0 {
            (y1 - s.im) / sn
        } else if sn < 0.0 {
            (y0 - s.im) / sn
        } else {
            f64::INFINITY
        };
        tx.min(ty).max(0.0)
    };
    let radial = |t: f64| -> f64 {
        let p = reach(t);
        if p <= 0.0 {
            return 0.0;
        }
        let u = g + sigma * p.ln();
        0.5 * p * p * (u * u - sigma * u + 0.5)
    };
    let mut breaks: Vec<f64> = [(x0, y0), (x1, y0), (x1, y1), (x0, y1)]
        .iter()
        .map(|&(x, y)| (y - s.im).atan2(x - s.re).rem_euclid(TAU))
        .collect();
    breaks.push(0.0);
    breaks.push(TAU);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let quad = QuadratureSettings {
        abs_tol: 1e-15,
        rel_tol: 1e-12,
        max_subdivisions: 200,
    };
    integrate_breaks(radial, &breaks, &quad).value
}

struct Pole {
    at: Complex64,
    /// `log|L_n| ~ g - ln|z - at|` near the pole.
    g: f64,
}

const MAX_DEPTH: u32 = 3;
const EDGE_SUB: usize = 8;

fn tightness_cell(roots: &RootSample, poles: &[&Pole], rect: (f64, f64, f64, f64), radius: f64, depth: u32) -> f64 {
    let (x0, x1, y0, y1) = rect;
    let (w, h) = (x1 - x0, y1 - y0);
    let centre = Complex64::new(0.5 * (x0 + x1), 0.5 * (y0 + y1));
    let closest = Complex64::new(0.0f64.clamp(x0, x1), 0.0f64.clamp(y0, y1)).norm();
    if closest >= radius {
        return 0.0;
    }
    let far = [x0.abs().max(x1.abs()), y0.abs().max(y1.abs())];
    let straddles = Complex64::new(far[0], far[1]).norm() > radius;
    let near: Vec<&Pole> = poles
        .iter()
        .copied()
        .filter(|p| p.at.re >= x0 - w && p.at.re <= x1 + w && p.at.im >= y0 - h && p.at.im <= y1 + h)
        .collect();
    let inside: Vec<&Pole> = near
        .iter()
        .copied()
        .filter(|p| p.at.re >= x0 && p.at.re < x1 && p.at.im >= y0 && p.at.im < y1)
        .collect();
    let field2 = |z: Complex64| {
        let v = log_abs_l(roots, z);
        if v.is_finite() {
            v * v
        } else {
            0.0
        }
    };

    if near.is_empty() && !straddles {
        return field2(centre) * w * h;
    }
    if near.is_empty() && straddles {
        // Disk boundary: sub-sample and keep points inside.
        let mut acc = 0.0;
        for a in 0..EDGE_SUB {
            for b in 0..EDGE_SUB {
                let z = Complex64::new(
                    x0 + (a as f64 + 0.5) * w / EDGE_SUB as f64,
                    y0 + (b as f64 + 0.5) * h / EDGE_SUB as f64,
                );
                if z.norm() < radius {
                    acc += field2(z);
                }
            }
        }
        return acc * w * h / (EDGE_SUB * EDGE_SUB) as f64;
    }
    if inside.len() == 1 && near.len() == 1 && !straddles {
        return polar_log_square(inside[0].at, rect, inside[0].g, -1.0);
    }
    if depth >= MAX_DEPTH {
        if inside.len() == 1 && centre.norm() < radius {
            return polar_log_square(inside[0].at, rect, inside[0].g, -1.0);
        }
        return if centre.norm() < radius {
            field2(centre) * w * h
        } else {
            0.0
        };
    }
    let (xm, ym) = (0.5 * (x0 + x1), 0.5 * (y0 + y1));
    [(x0, xm, y0, ym), (xm, x1, y0, ym), (x0, xm, ym, y1), (xm, x1, ym, y1)]
        .into_iter()
        .map(|r| tightness_cell(roots, &near, r, radius, depth + 1))
        .sum()
}

/// `T_n = (1/n^2) int_{|z| < r} log^2|L_n(z)| dz` on a `resolution^2` grid
/// over `[-r, r]^2`.
///
/// Cells are integrated by the midpoint rule, except:
/// * cells crossing `|z| = r` are sub-sampled `8 x 8`;
/// * cells containing or adjacent to a root are quartered (up to three
///   times); a sub-cell holding exactly one isolated root is integrated
///   in polar coordinates around it, using `log|L_n| ~ ln m - ln|z - x|`
///   for a root of multiplicity `m`.
///
/// Zeros of `L_n` are integrable singularities of `log^2` and are left to
/// the midpoint rule.
pub fn tightness_statistic(roots: &RootSample, r: f64, resolution: usize) -> Result<f64> {
    if !(r.is_finite() && r > 0.0) || resolution == 0 {
        return Err(Error::InvalidArgument(format!(
            "need r > 0 and a positive resolution, got r = {r}, resolution = {resolution}"
        )));
    }
    let dr = distinct_reduce(roots, 0.0)?;
    let poles: Vec<Pole> = dr
        .centers
        .iter()
        .zip(&dr.multiplicities)
        .filter(|(c, _)| c.norm() < r * (1.0 + 2.0 / resolution as f64) + 1e-12)
        .map(|(&at, &m)| Pole { at, g: (m as f64).ln() })
        .collect();
    let h = 2.0 * r / resolution as f64;
    // Bucket poles by cell so each cell only scans its 3 x 3 neighbourhood.
    let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); resolution * resolution];
    for (k, p) in poles.iter().enumerate() {
        let i = (((p.at.re + r) / h).floor() as i64).clamp(0, resolution as i64 - 1) as usize;
        let j = (((p.at.im + r) / h).floor() as i64).clamp(0, resolution as i64 - 1) as usize;
        buckets[j * resolution + i].push(k);
    }
    let rows: Vec<f64> = (0..resolution)
        .into_par_iter()
        .map(|j| {
            let mut row = CompensatedSum::new();
            for i in 0..resolution {
                let mut local: Vec<&Pole> = Vec::new();
                for dj in -1i64..=1 {
                    for di in -1i64..=1 {
                        let (a, b) = (i as i64 + di, j as i64 + dj);
                        if a >= 0 && b >= 0 && (a as usize) < resolution && (b as usize) < resolution {
                            local.extend(buckets[b as usize * resolution + a as usize].iter().map(|&k| &poles[k]));
                        }
                    }
                }
                let rect = (
                    -r + i as f64 * h,
                    -r + (i + 1) as f64 * h,
                    -r + j as f64 * h,
                    -r + (j + 1) as f64 * h,
                );
                row.add(tightness_cell(roots, &local, rect, r, 0));
            }
            row.value()
        })
        .collect();
    let total = rows.into_iter().collect::<CompensatedSum>().value();
    let n = roots.n() as f64;
    Ok(total / (n * n))
}

/// Exact `T_n` for `n` roots at the origin and `r = 1`:
/// `pi (a^2 + a + 1/2) / n^2` with `a = ln n`.
pub fn tightness_point_mass_unit(n: usize) -> f64 {
    let a = (n as f64).ln();
    PI * (a * a + a + 0.5) / (n * n) as f64
}
