use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::akmodel::CouplingParams;
use crate::error::{Error, Result};
use crate::numerics::Grid1D;
use crate::probes::{ProbeEnsemble, ProbeWavefunction};

/// Kernel `K₀₀(x, x′)` of one pure probe component on a square grid.
///
/// `K₀₀(x, x′) = √(λ/(2πμ)) φ(−(λ/2)((1−κ)x + (1+κ)x′), (x′ − x)/μ)`. The
/// prefactor makes `2π K†K` a unit-trace operator.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelMatrix {
    grid: Grid1D,
    entries: DMatrix<Complex64>,
}

impl KernelMatrix {
    pub fn new(phi: &ProbeWavefunction, c: &CouplingParams, grid: &Grid1D) -> Self {
        let (l, u, k) = (c.lambda(), c.mu(), c.kappa());
        let pref = (l / (2.0 * PI * u)).sqrt();
        let xs: Vec<f64> = grid.points().collect();
        let n = grid.n();
        let entries = DMatrix::from_fn(n, n, |i, j| {
            let (x, xp) = (xs[i], xs[j]);
            let a1 = -0.5 * l * ((1.0 - k) * x + (1.0 + k) * xp);
            let a2 = (xp - x) / u;
            phi.value_at(a1, a2) * pref
        });
        Self { grid: *grid, entries }
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }
}

/// The operator `τ = Σᵢ pᵢ 2π Kᵢ†Kᵢ` as a kernel `T(x, x′)` on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TauMatrix {
    grid: Grid1D,
    kernel: DMatrix<Complex64>,
}

impl TauMatrix {
    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    /// `T(x, x′)` samples.
    pub fn kernel(&self) -> &DMatrix<Complex64> {
        &self.kernel
    }

    /// `∫ T(x, x) dx`.
    pub fn trace(&self) -> f64 {
        self.kernel.diagonal().iter().map(|v| v.re).sum::<f64>() * self.grid.dx()
    }

    /// `max |T − T†| / max |T|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.kernel.nrows();
        let mut defect = 0.0f64;
        let mut scale = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let a = self.kernel[(i, j)];
                defect = defect.max((a - self.kernel[(j, i)].conj()).norm());
                scale = scale.max(a.norm());
            }
        }
        defect / scale
    }

    /// Eigenvalues of the discrete density matrix `T·dx`, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let dx = self.grid.dx();
        let m = (&self.kernel + self.kernel.adjoint()) * Complex64::new(0.5 * dx, 0.0);
        let mut ev: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
        ev.sort_by(|a, b| a.total_cmp(b));
        ev
    }

    /// `T(x, x)`, the position density of `τ`.
    pub fn position_diagonal(&self) -> Vec<f64> {
        self.kernel.diagonal().iter().map(|v| v.re).collect()
    }

    /// `⟨p|τ|p⟩` on `p_grid`, the momentum density of `τ`.
    pub fn momentum_diagonal(&self, p_grid: &Grid1D) -> Vec<f64> {
        let dx = self.grid.dx();
        let xs: Vec<f64> = self.grid.points().collect();
        let norm = dx / (2.0 * PI).sqrt();
        let v = DMatrix::from_fn(xs.len(), p_grid.n(), |i, m| {
            Complex64::from_polar(norm, p_grid.point(m) * xs[i])
        });
        let tv = &self.kernel * &v;
        (0..p_grid.n())
            .map(|m| {
                v.column(m)
                    .iter()
                    .zip(tv.column(m).iter())
                    .map(|(a, b)| (a.conj() * b).re)
                    .sum()
            })
            .collect()
    }
}

/// Kernels of every pure component and the resulting `τ` on `grid`.
pub fn kernel_and_tau(
    probe: &ProbeEnsemble,
    c: &CouplingParams,
    grid: &Grid1D,
) -> Result<(Vec<KernelMatrix>, TauMatrix)> {
    let n = grid.n();
    let dx = grid.dx();
    let mut kernels = Vec::with_capacity(probe.components().len());
    let mut tau = DMatrix::<Complex64>::zeros(n, n);
    for (w, phi) in probe.components() {
        let k = KernelMatrix::new(phi, c, grid);
        if !k.is_finite() {
            return Err(Error::Numerical {
                check: "kernel",
                detail: "non-finite kernel entry".into(),
            });
        }
        tau += k.entries.adjoint() * &k.entries * Complex64::new(2.0 * PI * dx * w, 0.0);
        kernels.push(k);
    }
    Ok((kernels, TauMatrix { grid: *grid, kernel: tau }))
}
