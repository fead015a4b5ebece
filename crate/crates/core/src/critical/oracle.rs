use nalgebra::DMatrix;

use super::solver::distinct_reduce;
use crate::poly_field::RootSample;
use crate::{Complex64, ComplexPoint, Error, Result};

/// Largest degree accepted by [`coefficient_oracle`].
pub const ORACLE_MAX_DEGREE: usize = 64;

/// Coefficients of `prod (z - x_i)` in ascending powers.
pub fn monic_coefficients(roots: &[Complex64]) -> Vec<Complex64> {
    let mut c = vec![Complex64::new(1.0, 0.0)];
    for &x in roots {
        let mut next = vec![Complex64::new(0.0, 0.0); c.len() + 1];
        for (k, &ck) in c.iter().enumerate() {
            next[k + 1] += ck;
            next[k] -= x * ck;
        }
        c = next;
    }
    c
}

/// Zeros of a polynomial (ascending coefficients, nonzero leading term)
/// as eigenvalues of its companion matrix.
pub fn companion_roots(coeffs: &[Complex64]) -> Vec<Complex64> {
    let m = coeffs.len() - 1;
    if m == 0 {
        return Vec::new();
    }
    let lead = coeffs[m];
    if m == 1 {
        return vec![-coeffs[0] / lead];
    }
    let mut a = DMatrix::<Complex64>::zeros(m, m);
    for i in 1..m {
        a[(i, i - 1)] = Complex64::new(1.0, 0.0);
    }
    for i in 0..m {
        a[(i, m - 1)] = -coeffs[i] / lead;
    }
    a.schur()
        .eigenvalues()
        .map(|v| v.iter().copied().collect())
        .unwrap_or_default()
}

fn eval_l(z: Complex64, roots: &[Complex64]) -> (Complex64, Complex64) {
    let mut l = Complex64::new(0.0, 0.0);
    let mut dl = Complex64::new(0.0, 0.0);
    for &x in roots {
        let t = 1.0 / (z - x);
        l += t;
        dl -= t * t;
    }
    (l, dl)
}

fn residual(z: Complex64, roots: &[Complex64]) -> f64 {
    let dmin = roots.iter().map(|x| (z - x).norm()).fold(f64::INFINITY, f64::min);
    if dmin == 0.0 {
        return f64::INFINITY;
    }
    eval_l(z, roots).0.norm() * dmin
}

/// Independent reference for the critical points when `n <= 64`, built
/// from polynomial coefficients and a companion matrix.
///
/// With distinct roots `w_j` of multiplicity `m_j`,
/// `P' = prod (z - w_j)^(m_j - 1) * Q` where `Q = sum_j m_j prod_{l != j} (z - w_l)`.
/// The repeated factors are emitted directly; the zeros of `Q` come from its
/// expanded coefficients and are polished by Newton steps on `L_n = P'/P`
/// while `|L_n(z)| * min_i |z - x_i|` keeps decreasing.
pub fn coefficient_oracle(roots: &RootSample) -> Result<Vec<ComplexPoint>> {
    let n = roots.n();
    if n > ORACLE_MAX_DEGREE {
        return Err(Error::OracleDegree(n));
    }
    if n < 2 {
        return Err(Error::InvalidArgument("critical points need n >= 2".into()));
    }
    let xs = roots.points();
    let dr = distinct_reduce(roots, 0.0)?;
    let mut out = Vec::with_capacity(n - 1);
    for (w, &m) in dr.centers.iter().zip(&dr.multiplicities) {
        out.extend(std::iter::repeat(*w).take(m - 1));
    }
    let k = dr.k();
    if k == 1 {
        return Ok(out);
    }
    let mut q = vec![Complex64::new(0.0, 0.0); k];
    for (j, &m) in dr.multiplicities.iter().enumerate() {
        let others: Vec<Complex64> = dr
            .centers
            .iter()
            .enumerate()
            .filter(|(l, _)| *l != j)
            .map(|(_, w)| *w)
            .collect();
        for (qi, ci) in q.iter_mut().zip(monic_coefficients(&others)) {
            *qi += ci * m as f64;
        }
    }
    let eig = companion_roots(&q);
    if eig.len() != k - 1 {
        return Err(Error::Degenerate("companion eigenvalue iteration failed".into()));
    }
    for mut z in eig {
        let mut best = residual(z, xs);
        for _ in 0..50 {
            let (l, dl) = eval_l(z, xs);
            let step = l / dl;
            if !(step.re.is_finite() && step.im.is_finite()) {
                break;
            }
            let cand = z - step;
            let r = residual(cand, xs);
            if !(r < best) {
                break;
            }
            z = cand;
            best = r;
            if best == 0.0 {
                break;
            }
        }
        out.push(z);
    }
    Ok(out)
}
