use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::grid::Grid1D;
use crate::error::{Error, Result};

/// Unitary continuous Fourier transform sampled on a pair of conjugate grids.
///
/// Forward: `f̃(p) = (2π)^{-1/2} ∫ dx e^{-ipx} f(x)`; inverse carries `e^{+ipx}`.
/// The grids may sit anywhere on the line as long as `dp · dx · n = 2π`; the
/// offsets are absorbed into pre/post phase factors around a plain FFT.
#[derive(Clone)]
pub struct FourierPair {
    x: Grid1D,
    p: Grid1D,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    pre_forward: Vec<Complex64>,
    post_forward: Vec<Complex64>,
    pre_inverse: Vec<Complex64>,
    post_inverse: Vec<Complex64>,
}

impl std::fmt::Debug for FourierPair {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FourierPair")
            .field("x", &self.x)
            .field("p", &self.p)
            .finish()
    }
}

impl FourierPair {
    pub fn new(x: Grid1D, p: Grid1D) -> Result<Self> {
        let n = x.n();
        if p.n() != n {
            return Err(Error::GridMismatch(format!(
                "conjugate grids need equal sizes, got {} and {}",
                n,
                p.n()
            )));
        }
        let product = x.dx() * p.dx() * n as f64;
        if (product - 2.0 * PI).abs() > 1e-9 * 2.0 * PI {
            return Err(Error::GridMismatch(format!(
                "dx·dp·n = {product}, expected 2π"
            )));
        }
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);

        let (dx, dp) = (x.dx(), p.dx());
        let (x_min, p_min) = (x.x_min(), p.x_min());
        let norm_f = dx / (2.0 * PI).sqrt();
        let norm_i = dp / (2.0 * PI).sqrt();
        let pre_forward = (0..n)
            .map(|j| Complex64::from_polar(1.0, -p_min * j as f64 * dx))
            .collect();
        let post_forward = (0..n)
            .map(|k| Complex64::from_polar(norm_f, -p.point(k) * x_min))
            .collect();
        let pre_inverse = (0..n)
            .map(|k| Complex64::from_polar(1.0, k as f64 * dp * x_min))
            .collect();
        let post_inverse = (0..n)
            .map(|j| Complex64::from_polar(norm_i, p_min * x.point(j)))
            .collect();
        Ok(Self {
            x,
            p,
            forward,
            inverse,
            pre_forward,
            post_forward,
            pre_inverse,
            post_inverse,
        })
    }

    /// Pair whose momentum grid is the symmetric conjugate of `x`.
    pub fn centered(x: Grid1D) -> Self {
        Self::new(x, x.conjugate()).expect("conjugate grid is consistent by construction")
    }

    pub fn x_grid(&self) -> &Grid1D {
        &self.x
    }

    pub fn p_grid(&self) -> &Grid1D {
        &self.p
    }

    /// Transforms position samples into momentum samples in place.
    pub fn forward_in_place(&self, data: &mut [Complex64]) {
        debug_assert_eq!(data.len(), self.x.n());
        for (v, w) in data.iter_mut().zip(&self.pre_forward) {
            *v *= w;
        }
        self.forward.process(data);
        for (v, w) in data.iter_mut().zip(&self.post_forward) {
            *v *= w;
        }
    }

    pub fn inverse_in_place(&self, data: &mut [Complex64]) {
        debug_assert_eq!(data.len(), self.p.n());
        for (v, w) in data.iter_mut().zip(&self.pre_inverse) {
            *v *= w;
        }
        self.inverse.process(data);
        for (v, w) in data.iter_mut().zip(&self.post_inverse) {
            *v *= w;
        }
    }

    /// Applies the forward transform to every contiguous length-`n` lane of `data`.
    pub fn forward_lanes(&self, data: &mut [Complex64]) {
        let n = self.x.n();
        for v in data.iter_mut().enumerate() {
            let j = v.0 % n;
            *v.1 *= self.pre_forward[j];
        }
        self.forward.process(data);
        for v in data.iter_mut().enumerate() {
            let k = v.0 % n;
            *v.1 *= self.post_forward[k];
        }
    }
}
