//! Uniform grids, sampled wavefunctions and densities, Fourier transforms and
//! convolutions. Everything else in the crate is built on these.

mod distribution;
mod fourier;
mod grid;
pub mod interp;
mod joint;
mod wavefunction;

pub use distribution::{Distribution1D, NEGATIVE_SLACK};
pub use fourier::FourierPair;
pub use grid::{edge_cells, Grid1D};
pub use joint::{JointDistribution2D, JOINT_MASS_TOL};
pub use wavefunction::{WaveFunction, FOURIER_EDGE_LIMIT};

/// `ψ̃ = F ψ` on the symmetric conjugate grid.
pub fn fourier_transform(psi: &WaveFunction) -> crate::Result<WaveFunction> {
    psi.fourier_transform()
}

pub fn convolve(rho: &Distribution1D, m: &Distribution1D) -> crate::Result<Distribution1D> {
    rho.convolve(m)
}

pub fn moment(d: &Distribution1D, k: u32) -> f64 {
    d.moment(k)
}

pub fn variance(d: &Distribution1D) -> f64 {
    d.variance()
}
