use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::critical::CriticalSet;
use crate::poly_field::{scaled_log_abs_L, RootSample};
use crate::{Complex64, ComplexPoint, Error, Result};

/// A rectangle split into `nx * ny` equal cells.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    pub nx: usize,
    pub ny: usize,
}

impl GridSpec {
    /// Square `[c - half, c + half]^2` with `n` cells per axis.
    pub fn square(center: ComplexPoint, half_width: f64, n: usize) -> Self {
        Self {
            x_range: (center.re - half_width, center.re + half_width),
            y_range: (center.im - half_width, center.im + half_width),
            nx: n,
            ny: n,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |(a, b): (f64, f64)| a.is_finite() && b.is_finite() && a < b;
        if !(ok(self.x_range) && ok(self.y_range)) || self.nx == 0 || self.ny == 0 {
            return Err(Error::InvalidArgument(format!("invalid grid {self:?}")));
        }
        Ok(())
    }

    pub fn hx(&self) -> f64 {
        (self.x_range.1 - self.x_range.0) / self.nx as f64
    }

    pub fn hy(&self) -> f64 {
        (self.y_range.1 - self.y_range.0) / self.ny as f64
    }

    pub fn cell_area(&self) -> f64 {
        self.hx() * self.hy()
    }

    pub fn cell_center(&self, i: usize, j: usize) -> ComplexPoint {
        Complex64::new(
            self.x_range.0 + (i as f64 + 0.5) * self.hx(),
            self.y_range.0 + (j as f64 + 0.5) * self.hy(),
        )
    }

    /// `(x0, x1, y0, y1)` of cell `(i, j)`.
    pub fn cell_bounds(&self, i: usize, j: usize) -> (f64, f64, f64, f64) {
        let (hx, hy) = (self.hx(), self.hy());
        let x0 = self.x_range.0 + i as f64 * hx;
        let y0 = self.y_range.0 + j as f64 * hy;
        (x0, x0 + hx, y0, y0 + hy)
    }

    /// Cell containing `z`, if any (right and top edges belong to the last cell).
    pub fn locate(&self, z: ComplexPoint) -> Option<(usize, usize)> {
        let fx = (z.re - self.x_range.0) / self.hx();
        let fy = (z.im - self.y_range.0) / self.hy();
        if !(fx >= 0.0 && fy >= 0.0 && fx <= self.nx as f64 && fy <= self.ny as f64) {
            return None;
        }
        Some(((fx as usize).min(self.nx - 1), (fy as usize).min(self.ny - 1)))
    }

    pub fn contains_disk(&self, center: ComplexPoint, radius: f64) -> bool {
        center.re - radius >= self.x_range.0
            && center.re + radius <= self.x_range.1
            && center.im - radius >= self.y_range.0
            && center.im + radius <= self.y_range.1
    }
}

/// Why a cell carries no finite value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellMask {
    Clear,
    /// Contains a root, where `log|L_n|` tends to `+inf`.
    Pole,
    /// Contains a critical point that is a zero of `L_n`.
    Zero,
}

/// Cell-centred samples of a scalar field; row `j` holds `values[j * nx ..][.. nx]`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridField {
    pub grid: GridSpec,
    pub quantity: String,
    pub values: Vec<f64>,
    pub mask: Vec<CellMask>,
}

#[derive(Serialize)]
struct Sidecar<'a> {
    quantity: &'a str,
    x_range: (f64, f64),
    y_range: (f64, f64),
    nx: usize,
    ny: usize,
    layout: &'a str,
    masked_poles: usize,
    masked_zeros: usize,
}

impl GridField {
    /// `(1/n) log|L_n|` at cell centres; cells holding a root or a simple
    /// critical point are masked. Pass `None` to mask poles only.
    pub fn scaled_log_field(roots: &RootSample, crits: Option<&CriticalSet>, grid: GridSpec) -> Result<Self> {
        grid.validate()?;
        let mut mask = vec![CellMask::Clear; grid.nx * grid.ny];
        if let Some(cs) = crits {
            let pts = roots.points();
            for z in &cs.points {
                if pts.contains(z) {
                    continue;
                }
                if let Some((i, j)) = grid.locate(*z) {
                    mask[j * grid.nx + i] = CellMask::Zero;
                }
            }
        }
        for z in roots.points() {
            if let Some((i, j)) = grid.locate(*z) {
                mask[j * grid.nx + i] = CellMask::Pole;
            }
        }
        let mut values = Vec::with_capacity(mask.len());
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                values.push(if mask[j * grid.nx + i] == CellMask::Clear {
                    scaled_log_abs_L(roots, grid.cell_center(i, j))
                } else {
                    f64::NAN
                });
            }
        }
        Ok(Self {
            grid,
            quantity: "scaled_log_abs_L".into(),
            values,
            mask,
        })
    }

    pub fn value(&self, i: usize, j: usize) -> Option<f64> {
        let k = j * self.grid.nx + i;
        (self.mask[k] == CellMask::Clear).then_some(self.values[k])
    }

    /// Writes the matrix as CSV (one grid row per line, bottom row first,
    /// masked cells empty) and a JSON header next to it at `<path>.json`.
    /// Returns the sidecar path.
    pub fn write_csv(&self, path: &Path) -> Result<PathBuf> {
        let mut out = BufWriter::new(File::create(path)?);
        for j in 0..self.grid.ny {
            let row: Vec<String> = (0..self.grid.nx)
                .map(|i| self.value(i, j).map(|v| format!("{v:?}")).unwrap_or_default())
                .collect();
            writeln!(out, "{}", row.join(","))?;
        }
        out.flush()?;
        let mut sidecar = path.as_os_str().to_owned();
        sidecar.push(".json");
        let sidecar = PathBuf::from(sidecar);
        let header = Sidecar {
            quantity: &self.quantity,
            x_range: self.grid.x_range,
            y_range: self.grid.y_range,
            nx: self.grid.nx,
            ny: self.grid.ny,
            layout: "row j = y cell index from y_range.0 upward; column i = x cell index",
            masked_poles: self.mask.iter().filter(|m| **m == CellMask::Pole).count(),
            masked_zeros: self.mask.iter().filter(|m| **m == CellMask::Zero).count(),
        };
        std::fs::write(&sidecar, serde_json::to_string_pretty(&header)?)?;
        Ok(sidecar)
    }
}
