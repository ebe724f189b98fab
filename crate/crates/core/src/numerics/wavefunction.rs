use std::f64::consts::PI;

use num_complex::Complex64;

use super::distribution::Distribution1D;
use super::fourier::FourierPair;
use super::grid::{edge_cells, Grid1D};
use super::interp;
use crate::error::{Error, Result};

/// Edge mass above which a transform is reported as truncated.
pub const FOURIER_EDGE_LIMIT: f64 = 1e-6;

/// Complex amplitudes sampled on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveFunction {
    grid: Grid1D,
    amplitudes: Vec<Complex64>,
}

impl WaveFunction {
    pub fn new(grid: Grid1D, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != grid.n() {
            return Err(Error::GridMismatch(format!(
                "{} amplitudes on a {}-point grid",
                amplitudes.len(),
                grid.n()
            )));
        }
        if amplitudes.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::invalid("wavefunction", "non-finite amplitude"));
        }
        Ok(Self { grid, amplitudes })
    }

    pub fn from_fn(grid: Grid1D, f: impl Fn(f64) -> Complex64) -> Self {
        let amplitudes = grid.points().map(f).collect();
        Self { grid, amplitudes }
    }

    /// Gaussian wave packet with position mean `mean`, position variance `variance`
    /// and momentum mean `momentum`.
    pub fn gaussian(grid: Grid1D, mean: f64, variance: f64, momentum: f64) -> Result<Self> {
        if !(variance > 0.0 && variance.is_finite()) {
            return Err(Error::invalid(
                "gaussian state",
                format!("variance {variance} must be > 0"),
            ));
        }
        let norm = (2.0 * PI * variance).powf(-0.25);
        Ok(Self::from_fn(grid, |x| {
            let d = x - mean;
            Complex64::from_polar(norm * (-d * d / (4.0 * variance)).exp(), momentum * x)
        }))
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>() * self.grid.dx()
    }

    pub fn normalize(&mut self) -> Result<()> {
        let n2 = self.norm_sqr();
        if !(n2 > 0.0 && n2.is_finite()) {
            return Err(Error::invalid("wavefunction", "cannot normalize a zero vector"));
        }
        let s = 1.0 / n2.sqrt();
        for a in &mut self.amplitudes {
            *a *= s;
        }
        Ok(())
    }

    pub fn normalized(mut self) -> Result<Self> {
        self.normalize()?;
        Ok(self)
    }

    /// Probability mass in the outermost cells on both ends.
    pub fn edge_mass(&self) -> f64 {
        let n = self.grid.n();
        let k = edge_cells(n);
        let head: f64 = self.amplitudes[..k].iter().map(|a| a.norm_sqr()).sum();
        let tail: f64 = self.amplitudes[n - k..].iter().map(|a| a.norm_sqr()).sum();
        (head + tail) * self.grid.dx()
    }

    pub(crate) fn check_edges(&self, axis: &str, limit: f64) -> Result<()> {
        let m = self.edge_mass();
        if m > limit {
            return Err(Error::truncation(
                axis,
                m,
                limit,
                format!(
                    "widen the grid beyond [{:.3}, {:.3})",
                    self.grid.x_min(),
                    self.grid.x_max()
                ),
            ));
        }
        Ok(())
    }

    /// Position density `|ψ|²`.
    pub fn density(&self) -> Result<Distribution1D> {
        Distribution1D::new(
            self.grid,
            self.amplitudes.iter().map(|a| a.norm_sqr()).collect(),
        )
    }

    pub fn value_at(&self, x: f64) -> Complex64 {
        interp::linear(&self.grid, &self.amplitudes, x)
    }

    pub fn mean_position(&self) -> f64 {
        let dx = self.grid.dx();
        self.grid
            .points()
            .zip(&self.amplitudes)
            .map(|(x, a)| x * a.norm_sqr())
            .sum::<f64>()
            * dx
            / self.norm_sqr()
    }

    /// Same samples embedded in a grid `factor` times longer with equal spacing and
    /// the same center point. Transforming the result gives a `factor` times finer
    /// momentum grid.
    pub fn zero_padded(&self, factor: usize) -> Result<WaveFunction> {
        if factor == 0 {
            return Err(Error::invalid("padding", "factor must be >= 1"));
        }
        let n = self.grid.n();
        let m = n * factor;
        let offset = m / 2 - n / 2;
        let dx = self.grid.dx();
        let grid = Grid1D::with_spacing(m, self.grid.x_min() - offset as f64 * dx, dx)?;
        let mut amplitudes = vec![Complex64::default(); m];
        amplitudes[offset..offset + n].copy_from_slice(&self.amplitudes);
        Ok(WaveFunction { grid, amplitudes })
    }

    /// Momentum-space amplitudes on the symmetric conjugate grid.
    ///
    /// Fails with a truncation error when either the input or the output carries
    /// more than [`FOURIER_EDGE_LIMIT`] of probability at its grid edges: the
    /// discrete transform is exactly unitary, so a support that does not fit shows
    /// up as mass wrapped onto the edges rather than as a norm change.
    pub fn fourier_transform(&self) -> Result<WaveFunction> {
        self.check_edges("position", FOURIER_EDGE_LIMIT)?;
        let out = self.fourier_transform_unchecked();
        out.check_edges("momentum", FOURIER_EDGE_LIMIT).map_err(|e| match e {
            Error::Truncation { mass, limit, .. } => Error::truncation(
                "momentum",
                mass,
                limit,
                format!("refine the position grid (dx = {:.4})", self.grid.dx()),
            ),
            other => other,
        })?;
        Ok(out)
    }

    pub fn fourier_transform_unchecked(&self) -> WaveFunction {
        let pair = FourierPair::centered(self.grid);
        let mut data = self.amplitudes.clone();
        pair.forward_in_place(&mut data);
        WaveFunction {
            grid: *pair.p_grid(),
            amplitudes: data,
        }
    }

    /// Inverse of [`fourier_transform`](Self::fourier_transform), mapping momentum
    /// amplitudes back onto `position_grid`.
    pub fn inverse_fourier_transform(&self, position_grid: Grid1D) -> Result<WaveFunction> {
        let pair = FourierPair::new(position_grid, self.grid)?;
        let mut data = self.amplitudes.clone();
        pair.inverse_in_place(&mut data);
        Ok(WaveFunction {
            grid: position_grid,
            amplitudes: data,
        })
    }

    /// Momentum of the plane-wave carrier, from the phase advance between
    /// neighbouring samples, `arg Σ ψ̄ⱼ ψⱼ₊₁ / dx`. Lies in `(−π/dx, π/dx]`.
    pub fn carrier_momentum(&self) -> f64 {
        let acc: Complex64 = self.amplitudes.windows(2).map(|w| w[0].conj() * w[1]).sum();
        if acc == Complex64::default() {
            return 0.0;
        }
        acc.arg() / self.grid.dx()
    }

    /// Applies the Weyl translation `exp[-i(qP - pQ)]`, shifting the packet by `q`
    /// in position and `p` in momentum.
    ///
    /// The result lives on the translated grid, so no resampling happens:
    /// `(Wψ)(x + q) = e^{-iqp/2} e^{ip(x+q)} ψ(x)`.
    pub fn weyl_translated(&self, q: f64, p: f64) -> WaveFunction {
        let grid = self.grid.translated(q);
        let amplitudes = grid
            .points()
            .zip(&self.amplitudes)
            .map(|(x, a)| a * Complex64::from_polar(1.0, p * x - 0.5 * q * p))
            .collect();
        WaveFunction { grid, amplitudes }
    }
}
