use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::{Complex64, ComplexPoint, Error, Result};

/// Compactly supported radial test functions with closed-form Laplacians.
///
/// Both kinds equal `1` at the center and vanish outside the disk of the
/// given radius.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TestFunction {
    /// `exp(1 - 1/(1 - r^2/radius^2))`, smooth.
    SmoothBump { center: ComplexPoint, radius: f64 },
    /// `((1 + cos(pi r/radius))/2)^2`, three times continuously differentiable.
    CosineCap { center: ComplexPoint, radius: f64 },
}

impl TestFunction {
    pub fn smooth_bump(center: ComplexPoint, radius: f64) -> Self {
        TestFunction::SmoothBump { center, radius }
    }

    pub fn cosine_cap(center: ComplexPoint, radius: f64) -> Self {
        TestFunction::CosineCap { center, radius }
    }

    pub fn center(&self) -> ComplexPoint {
        match *self {
            TestFunction::SmoothBump { center, .. } | TestFunction::CosineCap { center, .. } => center,
        }
    }

    pub fn radius(&self) -> f64 {
        match *self {
            TestFunction::SmoothBump { radius, .. } | TestFunction::CosineCap { radius, .. } => radius,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (c, r) = (self.center(), self.radius());
        if !(c.re.is_finite() && c.im.is_finite() && r.is_finite() && r > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "test function needs a finite center and positive radius, got {c} and {r}"
            )));
        }
        Ok(())
    }

    pub fn value(&self, z: Complex64) -> f64 {
        let (c, rho) = (self.center(), self.radius());
        let r = (z - c).norm();
        if r >= rho {
            return 0.0;
        }
        match self {
            TestFunction::SmoothBump { .. } => {
                let s = (r / rho) * (r / rho);
                (1.0 - 1.0 / (1.0 - s)).exp()
            }
            TestFunction::CosineCap { .. } => {
                let u = 0.5 * (1.0 + (PI * r / rho).cos());
                u * u
            }
        }
    }

    pub fn laplacian(&self, z: Complex64) -> f64 {
        let (c, rho) = (self.center(), self.radius());
        let r = (z - c).norm();
        if r >= rho {
            return 0.0;
        }
        match self {
            TestFunction::SmoothBump { .. } => {
                // phi = e^g(s), s = r^2/rho^2: Laplacian = (4/rho^2) e^g (s (g'' + g'^2) + g').
                let s = (r / rho) * (r / rho);
                let t = 1.0 - s;
                let g = 1.0 - 1.0 / t;
                let g1 = -1.0 / (t * t);
                let g2 = -2.0 / (t * t * t);
                4.0 / (rho * rho) * g.exp() * (s * (g2 + g1 * g1) + g1)
            }
            TestFunction::CosineCap { .. } => {
                // F = u^2, u = (1 + cos(a r))/2; Laplacian = F'' + F'/r.
                let a = PI / rho;
                let (sn, cs) = (a * r).sin_cos();
                let u = 0.5 * (1.0 + cs);
                let u1 = -0.5 * a * sn;
                let u2 = -0.5 * a * a * cs;
                let sinc = if a * r < 1e-8 { 1.0 } else { sn / (a * r) };
                // F'/r = 2 u u'/r = -a^2 u sinc
                2.0 * u1 * u1 + 2.0 * u * u2 - a * a * u * sinc
            }
        }
    }
}
