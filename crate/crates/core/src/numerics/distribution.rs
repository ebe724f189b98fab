use std::f64::consts::PI;

use super::grid::{edge_cells, Grid1D};
use super::interp;
use crate::error::{Error, Result};

/// Round-off negativity below this magnitude is clamped to zero.
pub const NEGATIVE_SLACK: f64 = 1e-12;

/// Normalized probability density on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution1D {
    grid: Grid1D,
    density: Vec<f64>,
}

fn sanitize(density: &mut [f64]) -> Result<()> {
    for (index, v) in density.iter_mut().enumerate() {
        if !v.is_finite() {
            return Err(Error::invalid("density", format!("non-finite value at {index}")));
        }
        if *v < 0.0 {
            if *v < -NEGATIVE_SLACK {
                return Err(Error::NegativeDensity { index, value: *v });
            }
            *v = 0.0;
        }
    }
    Ok(())
}

impl Distribution1D {
    /// Builds a density from raw non-negative samples, rescaling them to unit mass.
    pub fn new(grid: Grid1D, mut density: Vec<f64>) -> Result<Self> {
        if density.len() != grid.n() {
            return Err(Error::GridMismatch(format!(
                "{} density samples on a {}-point grid",
                density.len(),
                grid.n()
            )));
        }
        sanitize(&mut density)?;
        let mass: f64 = density.iter().sum::<f64>() * grid.dx();
        if !(mass > 0.0) {
            return Err(Error::invalid("density", "total mass is zero"));
        }
        for v in &mut density {
            *v /= mass;
        }
        Ok(Self { grid, density })
    }

    /// Like [`new`](Self::new) but refuses inputs whose mass is off by more than `tol`.
    pub fn with_mass_check(grid: Grid1D, density: Vec<f64>, tol: f64, what: &str) -> Result<Self> {
        let mass: f64 = density.iter().sum::<f64>() * grid.dx();
        if (mass - 1.0).abs() > tol {
            return Err(Error::truncation(
                what,
                (mass - 1.0).abs(),
                tol,
                format!(
                    "mass {mass:.6} on [{:.3}, {:.3}); widen or refine the grid",
                    grid.x_min(),
                    grid.x_max()
                ),
            ));
        }
        Self::new(grid, density)
    }

    pub fn from_fn(grid: Grid1D, f: impl Fn(f64) -> f64) -> Result<Self> {
        let density = grid.points().map(f).collect();
        Self::new(grid, density)
    }

    pub fn gaussian(grid: Grid1D, mean: f64, variance: f64) -> Result<Self> {
        if !(variance > 0.0) {
            return Err(Error::invalid("gaussian", format!("variance {variance} must be > 0")));
        }
        let norm = 1.0 / (2.0 * PI * variance).sqrt();
        Self::from_fn(grid, |x| norm * (-(x - mean).powi(2) / (2.0 * variance)).exp())
    }

    /// All mass in the single cell nearest to `x`.
    pub fn spike(grid: Grid1D, x: f64) -> Result<Self> {
        let i = grid.nearest_index(x).ok_or_else(|| {
            Error::invalid("spike", format!("{x} lies outside [{}, {})", grid.x_min(), grid.x_max()))
        })?;
        let mut density = vec![0.0; grid.n()];
        density[i] = 1.0 / grid.dx();
        Ok(Self { grid, density })
    }

    /// Point mass at `x` realized as one cell of width `dx`.
    pub fn point_mass(x: f64, dx: f64) -> Result<Self> {
        let grid = Grid1D::with_spacing(2, x, dx)?;
        Self::spike(grid, x)
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn density(&self) -> &[f64] {
        &self.density
    }

    /// Probability carried by each cell, summing to one.
    pub fn weights(&self) -> Vec<f64> {
        let dx = self.grid.dx();
        self.density.iter().map(|d| d * dx).collect()
    }

    pub fn mass(&self) -> f64 {
        self.density.iter().sum::<f64>() * self.grid.dx()
    }

    /// `Σ x^k ρ(x) dx`.
    pub fn moment(&self, k: u32) -> f64 {
        let dx = self.grid.dx();
        self.grid
            .points()
            .zip(&self.density)
            .map(|(x, d)| x.powi(k as i32) * d)
            .sum::<f64>()
            * dx
    }

    pub fn mean(&self) -> f64 {
        self.moment(1)
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        let dx = self.grid.dx();
        // Centered sum avoids cancellation between m[2] and m[1]^2.
        self.grid
            .points()
            .zip(&self.density)
            .map(|(x, d)| (x - m).powi(2) * d)
            .sum::<f64>()
            * dx
    }

    pub fn edge_mass(&self) -> f64 {
        let n = self.grid.n();
        let k = edge_cells(n);
        (self.density[..k].iter().sum::<f64>() + self.density[n - k..].iter().sum::<f64>())
            * self.grid.dx()
    }

    pub fn value_at(&self, x: f64) -> f64 {
        interp::linear(&self.grid, &self.density, x)
    }

    /// Samples this density onto another grid by linear interpolation, without
    /// renormalizing.
    pub fn sample_on(&self, grid: &Grid1D) -> Vec<f64> {
        grid.points().map(|x| self.value_at(x)).collect()
    }

    /// `ρ(-x)` on the same grid.
    pub fn reflected(&self) -> Result<Self> {
        let density = self.grid.points().map(|x| self.value_at(-x)).collect();
        Self::new(self.grid, density)
    }

    /// `ρ(-x)` on the mirror-image grid. Exact: the samples are only reordered.
    pub fn mirrored(&self) -> Self {
        let n = self.grid.n();
        let dx = self.grid.dx();
        let x_min = -self.grid.point(n - 1);
        let grid = Grid1D::new(n, x_min, x_min + n as f64 * dx)
            .expect("mirror of a valid grid is valid");
        let density = self.density.iter().rev().copied().collect();
        Self { grid, density }
    }

    /// Drops leading and trailing cells whose probability is at most `cutoff`.
    pub fn trimmed(&self, cutoff: f64) -> Result<Self> {
        let dx = self.grid.dx();
        let keep = |d: &f64| d * dx > cutoff;
        let first = self.density.iter().position(keep).unwrap_or(0);
        let last = self.density.iter().rposition(keep).unwrap_or(self.density.len() - 1);
        let n = (last + 1 - first).max(2);
        let last = (first + n).min(self.density.len());
        let first = last - n;
        let grid = Grid1D::with_spacing(n, self.grid.point(first), dx)?;
        Self::new(grid, self.density[first..last].to_vec())
    }

    /// Density of `c·X` for `c > 0`.
    pub fn dilated(&self, c: f64) -> Result<Self> {
        let grid = self.grid.scaled(c)?;
        Self::new(grid, self.density.iter().map(|d| d / c).collect())
    }

    /// Linear convolution `(self * other)(x) = ∫ self(x - y) other(y) dy`.
    ///
    /// The output grid spans the full support of the result, so nothing is
    /// truncated; both inputs must share the same spacing.
    pub fn convolve(&self, other: &Distribution1D) -> Result<Distribution1D> {
        if !self.grid.same_spacing(&other.grid) {
            return Err(Error::GridMismatch(format!(
                "convolution needs equal spacing, got {} and {}",
                self.grid.dx(),
                other.grid.dx()
            )));
        }
        let dx = self.grid.dx();
        let (na, nb) = (self.density.len(), other.density.len());
        let mut out = vec![0.0; na + nb - 1];
        for (i, a) in self.density.iter().enumerate() {
            if *a == 0.0 {
                continue;
            }
            for (j, b) in other.density.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        for v in &mut out {
            *v *= dx;
        }
        let grid = Grid1D::with_spacing(
            na + nb - 1,
            self.grid.x_min() + other.grid.x_min(),
            dx,
        )?;
        Distribution1D::new(grid, out)
    }
}
