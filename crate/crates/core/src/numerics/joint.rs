use super::distribution::{Distribution1D, NEGATIVE_SLACK};
use super::grid::{edge_cells, Grid1D};
use crate::error::{Error, Result};

/// Mass tolerance for a joint outcome density.
pub const JOINT_MASS_TOL: f64 = 1e-6;

/// Probability density over phase-space outcomes `(x, y)`, stored row-major with
/// `x` as the slow index.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution2D {
    grid_q: Grid1D,
    grid_p: Grid1D,
    density: Vec<f64>,
}

impl JointDistribution2D {
    /// Validates non-negativity and that the mass is one within [`JOINT_MASS_TOL`].
    pub fn new(grid_q: Grid1D, grid_p: Grid1D, mut density: Vec<f64>) -> Result<Self> {
        if density.len() != grid_q.n() * grid_p.n() {
            return Err(Error::GridMismatch(format!(
                "{} samples for a {}x{} grid",
                density.len(),
                grid_q.n(),
                grid_p.n()
            )));
        }
        for (index, v) in density.iter_mut().enumerate() {
            if !v.is_finite() {
                return Err(Error::invalid("joint density", "non-finite sample"));
            }
            if *v < 0.0 {
                if *v < -NEGATIVE_SLACK {
                    return Err(Error::NegativeDensity { index, value: *v });
                }
                *v = 0.0;
            }
        }
        let out = Self {
            grid_q,
            grid_p,
            density,
        };
        let mass = out.mass();
        if (mass - 1.0).abs() > JOINT_MASS_TOL {
            return Err(Error::truncation(
                "joint outcome",
                (mass - 1.0).abs(),
                JOINT_MASS_TOL,
                format!("outcome mass is {mass:.8}; widen the oracle grids"),
            ));
        }
        Ok(out)
    }

    pub fn grid_q(&self) -> &Grid1D {
        &self.grid_q
    }

    pub fn grid_p(&self) -> &Grid1D {
        &self.grid_p
    }

    pub fn density(&self) -> &[f64] {
        &self.density
    }

    pub fn at(&self, iq: usize, ip: usize) -> f64 {
        self.density[iq * self.grid_p.n() + ip]
    }

    pub fn mass(&self) -> f64 {
        self.density.iter().sum::<f64>() * self.grid_q.dx() * self.grid_p.dx()
    }

    pub fn marginal_q(&self) -> Result<Distribution1D> {
        let np = self.grid_p.n();
        let dp = self.grid_p.dx();
        let m = self
            .density
            .chunks(np)
            .map(|row| row.iter().sum::<f64>() * dp)
            .collect();
        Distribution1D::new(self.grid_q, m)
    }

    pub fn marginal_p(&self) -> Result<Distribution1D> {
        let np = self.grid_p.n();
        let dq = self.grid_q.dx();
        let mut m = vec![0.0; np];
        for row in self.density.chunks(np) {
            for (acc, v) in m.iter_mut().zip(row) {
                *acc += v;
            }
        }
        for v in &mut m {
            *v *= dq;
        }
        Distribution1D::new(self.grid_p, m)
    }

    /// Mass in the outer cells along the `q` axis and the `p` axis, respectively.
    pub fn edge_masses(&self) -> (f64, f64) {
        let (nq, np) = (self.grid_q.n(), self.grid_p.n());
        let (kq, kp) = (edge_cells(nq), edge_cells(np));
        let cell = self.grid_q.dx() * self.grid_p.dx();
        let mut q_edge = 0.0;
        let mut p_edge = 0.0;
        for iq in 0..nq {
            for ip in 0..np {
                let v = self.at(iq, ip);
                if iq < kq || iq >= nq - kq {
                    q_edge += v;
                }
                if ip < kp || ip >= np - kp {
                    p_edge += v;
                }
            }
        }
        (q_edge * cell, p_edge * cell)
    }

    /// Largest absolute pointwise difference against a density on identically sized grids.
    pub fn max_abs_difference(&self, other: &JointDistribution2D) -> Result<f64> {
        if self.density.len() != other.density.len() {
            return Err(Error::GridMismatch("joint densities differ in shape".into()));
        }
        Ok(self
            .density
            .iter()
            .zip(&other.density)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn product_gaussian_marginals() {
        let gq = Grid1D::centered(64, 0.0, 8.0).unwrap();
        let gp = Grid1D::centered(48, 1.0, 8.0).unwrap();
        let mut d = Vec::new();
        for x in gq.points() {
            for y in gp.points() {
                d.push((-(x * x) / 2.0 - (y - 1.0).powi(2) / 2.0).exp() / (2.0 * PI));
            }
        }
        let j = JointDistribution2D::new(gq, gp, d).unwrap();
        assert!((j.marginal_p().unwrap().mean() - 1.0).abs() < 1e-9);
        assert!((j.marginal_q().unwrap().variance() - 1.0).abs() < 1e-9);
        let (eq, ep) = j.edge_masses();
        assert!(eq < 1e-9 && ep < 1e-9);
    }

    #[test]
    fn missing_mass_is_truncation() {
        let g = Grid1D::centered(16, 0.0, 1.0).unwrap();
        let d = vec![0.5; 256];
        assert!(matches!(
            JointDistribution2D::new(g, g, d),
            Err(Error::Truncation { .. })
        ));
    }
}
