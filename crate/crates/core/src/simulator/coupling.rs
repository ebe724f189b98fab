use num_complex::Complex64;

use crate::akmodel::CouplingParams;
use crate::error::{Error, Result};
use crate::numerics::{edge_cells, interp, FourierPair, Grid1D, JointDistribution2D, WaveFunction};
use crate::probes::ProbeWavefunction;

/// Edge mass tolerated on any axis of the coupled state or the outcome density.
pub const COUPLED_EDGE_LIMIT: f64 = 1e-6;

/// Largest departure of the raw coupled norm from one before renormalizing.
/// Interpolated lookups move the norm by `O(dx²)`, far below this.
pub const COUPLED_NORM_TOL: f64 = 1e-3;

/// Inputs are expected to be normalized to this accuracy.
const INPUT_NORM_TOL: f64 = 1e-6;

/// Post-coupling wavefunction `Ψ(q, q₁, q₂)`, row-major with `q₂` fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct CoupledState3D {
    grid_q: Grid1D,
    grid_q1: Grid1D,
    grid_q2: Grid1D,
    amplitudes: Vec<Complex64>,
}

impl CoupledState3D {
    pub fn grid_q(&self) -> &Grid1D {
        &self.grid_q
    }

    pub fn grid_q1(&self) -> &Grid1D {
        &self.grid_q1
    }

    pub fn grid_q2(&self) -> &Grid1D {
        &self.grid_q2
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    fn cell(&self) -> f64 {
        self.grid_q.dx() * self.grid_q1.dx() * self.grid_q2.dx()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>() * self.cell()
    }

    /// Edge mass along the `q`, `q₁` and `q₂` axes.
    pub fn edge_masses(&self) -> [f64; 3] {
        let dims = [self.grid_q.n(), self.grid_q1.n(), self.grid_q2.n()];
        let ks = dims.map(edge_cells);
        let mut out = [0.0; 3];
        let mut idx = 0;
        for i in 0..dims[0] {
            for j in 0..dims[1] {
                for l in 0..dims[2] {
                    let w = self.amplitudes[idx].norm_sqr();
                    idx += 1;
                    for (axis, &i_axis) in [i, j, l].iter().enumerate() {
                        if i_axis < ks[axis] || i_axis >= dims[axis] - ks[axis] {
                            out[axis] += w;
                        }
                    }
                }
            }
        }
        out.map(|m| m * self.cell())
    }

    /// Means and covariance matrix of `(q, q₁, q₂)` under `|Ψ|²`.
    pub fn position_moments(&self) -> ([f64; 3], [[f64; 3]; 3]) {
        let grids = [self.grid_q, self.grid_q1, self.grid_q2];
        let mut w = 0.0;
        let mut s = [0.0; 3];
        let mut ss = [[0.0; 3]; 3];
        let mut idx = 0;
        for x0 in grids[0].points() {
            for x1 in grids[1].points() {
                for x2 in grids[2].points() {
                    let p = self.amplitudes[idx].norm_sqr();
                    idx += 1;
                    let x = [x0, x1, x2];
                    w += p;
                    for a in 0..3 {
                        s[a] += p * x[a];
                        for b in 0..3 {
                            ss[a][b] += p * x[a] * x[b];
                        }
                    }
                }
            }
        }
        let mean = s.map(|v| v / w);
        let mut cov = [[0.0; 3]; 3];
        for a in 0..3 {
            for b in 0..3 {
                cov[a][b] = ss[a][b] / w - mean[a] * mean[b];
            }
        }
        (mean, cov)
    }

    /// Density of the first pointer, `∫|Ψ|² dq dq₂`.
    pub fn probe1_marginal(&self) -> Vec<f64> {
        let (n1, n2) = (self.grid_q1.n(), self.grid_q2.n());
        let mut out = vec![0.0; n1];
        for block in self.amplitudes.chunks(n1 * n2) {
            for (j, row) in block.chunks(n2).enumerate() {
                out[j] += row.iter().map(|a| a.norm_sqr()).sum::<f64>();
            }
        }
        let w = self.grid_q.dx() * self.grid_q2.dx();
        out.iter().map(|v| v * w).collect()
    }
}

/// `Ψ(q, q₁, q₂) = ψ(q + μq₂) φ(q₁ − λq − (λμ/2)(κ+1)q₂, q₂)`, the state after
/// the impulsive coupling, sampled on the given grids by linear interpolation of
/// `ψ` and bilinear interpolation of `φ`.
///
/// The raw norm is checked against one before the result is renormalized.
pub fn couple(
    psi: &WaveFunction,
    phi: &ProbeWavefunction,
    c: &CouplingParams,
    grid_q: &Grid1D,
    grid_q1: &Grid1D,
    grid_q2: &Grid1D,
) -> Result<CoupledState3D> {
    for (what, n2) in [("system", psi.norm_sqr()), ("probe", phi.norm_sqr())] {
        if (n2 - 1.0).abs() > INPUT_NORM_TOL {
            return Err(Error::invalid(
                "coupling input",
                format!("{what} state has norm² {n2:.8}, expected 1"),
            ));
        }
    }
    let (l, u) = (c.lambda(), c.mu());
    let shear = c.shear();
    let (nq, n1, n2) = (grid_q.n(), grid_q1.n(), grid_q2.n());
    let q1_points: Vec<f64> = grid_q1.points().collect();
    let q2_points: Vec<f64> = grid_q2.points().collect();
    let mut amplitudes = vec![Complex64::default(); nq * n1 * n2];

    // ψ is interpolated as carrier times envelope, so that a momentum boost
    // costs no resolution.
    let k = psi.carrier_momentum();
    let envelope: Vec<Complex64> = psi
        .grid()
        .points()
        .zip(psi.amplitudes())
        .map(|(x, a)| a * Complex64::from_polar(1.0, -k * x))
        .collect();
    let psi_at = |x: f64| interp::linear(psi.grid(), &envelope, x) * Complex64::from_polar(1.0, k * x);

    for (iq, q) in grid_q.points().enumerate() {
        let psi_row: Vec<Complex64> = q2_points.iter().map(|&q2| psi_at(q + u * q2)).collect();
        let block = &mut amplitudes[iq * n1 * n2..(iq + 1) * n1 * n2];
        for (i1, &q1) in q1_points.iter().enumerate() {
            let row = &mut block[i1 * n2..(i1 + 1) * n2];
            for (i2, &q2) in q2_points.iter().enumerate() {
                let s = psi_row[i2];
                if s == Complex64::default() {
                    continue;
                }
                let arg = q1 - l * q - shear * q2;
                row[i2] = s * phi.value_at(arg, q2);
            }
        }
    }

    let mut state = CoupledState3D {
        grid_q: *grid_q,
        grid_q1: *grid_q1,
        grid_q2: *grid_q2,
        amplitudes,
    };
    let edges = state.edge_masses();
    for (axis, (&mass, grid)) in ["q", "q1", "q2"]
        .iter()
        .zip(edges.iter().zip([grid_q, grid_q1, grid_q2]))
    {
        if mass > COUPLED_EDGE_LIMIT {
            return Err(Error::truncation(
                format!("coupled {axis}"),
                mass,
                COUPLED_EDGE_LIMIT,
                format!(
                    "the {axis} axis [{:.3}, {:.3}) is too narrow; raise grid.sigmas",
                    grid.x_min(),
                    grid.x_max()
                ),
            ));
        }
    }
    let raw = state.norm_sqr();
    if (raw - 1.0).abs() > COUPLED_NORM_TOL {
        return Err(Error::Numerical {
            check: "coupled norm",
            detail: format!(
                "norm² {raw:.6} after coupling; the grids under-resolve ψ or φ, increase grid.n or grid.fine_factor"
            ),
        });
    }
    let s = 1.0 / raw.sqrt();
    for a in &mut state.amplitudes {
        *a *= s;
    }
    Ok(state)
}

/// Outcome density over `(x, y) = (q₁/λ, p₂/μ)` for a weighted set of coupled
/// states, one per pure probe component.
///
/// Each state is Fourier transformed along `q₂` onto the momentum grid whose
/// center point is `p2_center`; `|Ψ̃|²` is summed over `q` and the result is
/// rescaled with Jacobian `λμ`.
pub fn joint_distribution(
    states: &[(f64, CoupledState3D)],
    c: &CouplingParams,
    p2_center: f64,
) -> Result<JointDistribution2D> {
    let (l, u) = (c.lambda(), c.mu());
    if !(l > 0.0 && u > 0.0) {
        return Err(Error::invalid(
            "coupling",
            "outcome rescaling needs lambda > 0 and mu > 0",
        ));
    }
    let Some((_, first)) = states.first() else {
        return Err(Error::invalid("joint distribution", "no coupled states"));
    };
    let (gq, g1, g2) = (first.grid_q, first.grid_q1, first.grid_q2);
    if states
        .iter()
        .any(|(_, s)| s.grid_q != gq || s.grid_q1 != g1 || s.grid_q2 != g2)
    {
        return Err(Error::GridMismatch("coupled states must share grids".into()));
    }
    let p2 = g2.conjugate_centered(p2_center);
    let pair = FourierPair::new(g2, p2)?;
    let (n1, n2) = (g1.n(), g2.n());
    let mut density = vec![0.0; n1 * n2];
    let mut lane = Vec::new();
    for (w, state) in states {
        let scale = w * l * u * gq.dx();
        for block in state.amplitudes.chunks(n1 * n2) {
            lane.clear();
            lane.extend_from_slice(block);
            pair.forward_lanes(&mut lane);
            for (d, a) in density.iter_mut().zip(&lane) {
                *d += scale * a.norm_sqr();
            }
        }
    }
    let grid_x = g1.scaled(1.0 / l)?;
    let grid_y = p2.scaled(1.0 / u)?;

    let total: f64 = density.iter().sum::<f64>() * grid_x.dx() * grid_y.dx();
    let (kx, ky) = (edge_cells(n1), edge_cells(n2));
    let mut edge_x = 0.0;
    let mut edge_y = 0.0;
    for i in 0..n1 {
        for j in 0..n2 {
            let v = density[i * n2 + j];
            if i < kx || i >= n1 - kx {
                edge_x += v;
            }
            if j < ky || j >= n2 - ky {
                edge_y += v;
            }
        }
    }
    let cell = grid_x.dx() * grid_y.dx() / total;
    if edge_x * cell > COUPLED_EDGE_LIMIT {
        return Err(Error::truncation(
            "outcome x",
            edge_x * cell,
            COUPLED_EDGE_LIMIT,
            "position outcomes reach the grid edge; raise grid.sigmas",
        ));
    }
    if edge_y * cell > COUPLED_EDGE_LIMIT {
        return Err(Error::truncation(
            "outcome y",
            edge_y * cell,
            COUPLED_EDGE_LIMIT,
            "momentum outcomes alias across ±π/dq₂; increase grid.n",
        ));
    }
    JointDistribution2D::new(grid_x, grid_y, density)
}
