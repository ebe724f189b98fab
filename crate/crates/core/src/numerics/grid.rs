use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Uniform discretization of an interval of the real line.
///
/// Point `i` sits at `x_min + i * dx` with `dx = (x_max - x_min) / n`, so `x_max`
/// itself is the first point past the end. This is the periodic layout the
/// FFT expects.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    n: usize,
    x_min: f64,
    x_max: f64,
}

impl Grid1D {
    pub fn new(n: usize, x_min: f64, x_max: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid("grid", format!("n = {n}, need n >= 2")));
        }
        if !x_min.is_finite() || !x_max.is_finite() || x_max <= x_min {
            return Err(Error::invalid(
                "grid",
                format!("bounds [{x_min}, {x_max}) are not an increasing finite interval"),
            ));
        }
        Ok(Self { n, x_min, x_max })
    }

    /// `n` points with spacing `dx` starting at `x_min`.
    pub fn with_spacing(n: usize, x_min: f64, dx: f64) -> Result<Self> {
        Self::new(n, x_min, x_min + n as f64 * dx)
    }

    /// `n` points on `[center - half_width, center + half_width)`.
    pub fn centered(n: usize, center: f64, half_width: f64) -> Result<Self> {
        Self::new(n, center - half_width, center + half_width)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / self.n as f64
    }

    pub fn point(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx()
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        let dx = self.dx();
        (0..self.n).map(move |i| self.x_min + i as f64 * dx)
    }

    /// Position of `x` in units of grid cells, relative to point 0.
    pub fn fractional_index(&self, x: f64) -> f64 {
        (x - self.x_min) / self.dx()
    }

    /// Index of the grid point closest to `x`, if `x` lies within half a cell of the grid.
    pub fn nearest_index(&self, x: f64) -> Option<usize> {
        let f = self.fractional_index(x).round();
        if f < 0.0 || f >= self.n as f64 {
            None
        } else {
            Some(f as usize)
        }
    }

    /// Reciprocal-space grid with `dp = 2π / (n dx)` whose point `n/2` sits at `center`.
    pub fn conjugate_centered(&self, center: f64) -> Grid1D {
        let dp = 2.0 * PI / (self.n as f64 * self.dx());
        let p_min = center - (self.n / 2) as f64 * dp;
        Grid1D {
            n: self.n,
            x_min: p_min,
            x_max: p_min + self.n as f64 * dp,
        }
    }

    /// Reciprocal-space grid symmetric about zero.
    pub fn conjugate(&self) -> Grid1D {
        self.conjugate_centered(0.0)
    }

    pub fn translated(&self, offset: f64) -> Grid1D {
        Grid1D {
            n: self.n,
            x_min: self.x_min + offset,
            x_max: self.x_max + offset,
        }
    }

    /// Grid whose points are those of `self` multiplied by `factor > 0`.
    pub fn scaled(&self, factor: f64) -> Result<Grid1D> {
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(Error::invalid("grid scale", format!("factor {factor} must be > 0")));
        }
        Grid1D::new(self.n, self.x_min * factor, self.x_max * factor)
    }

    /// Same interval sampled `factor` times more densely, sharing point 0.
    pub fn refined(&self, factor: usize) -> Result<Grid1D> {
        Grid1D::new(self.n * factor, self.x_min, self.x_max)
    }

    /// Midpoint of the grid's index range, i.e. `point(n/2)`.
    pub fn center(&self) -> f64 {
        self.point(self.n / 2)
    }

    pub(crate) fn same_spacing(&self, other: &Grid1D) -> bool {
        let (a, b) = (self.dx(), other.dx());
        (a - b).abs() <= 1e-9 * a.abs().max(b.abs())
    }
}

/// Number of outermost cells on each side inspected by edge-mass checks.
pub fn edge_cells(n: usize) -> usize {
    (n / 32).max(1)
}
