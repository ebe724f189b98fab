use crate::akmodel::{noise_moments, CouplingParams, NoiseMoments};
use crate::error::{Error, Result};
use crate::numerics::{interp, Distribution1D, Grid1D, JointDistribution2D, WaveFunction};
use crate::probes::{MomentSet, ProbeEnsemble, ProbeState, RCoercion};

use super::coupling::{couple, joint_distribution, CoupledState3D};
use super::kernel::{kernel_and_tau, TauMatrix};
use super::noise::{noise_distribution_p, noise_distribution_q, single_probe_noise_p, single_probe_noise_q};
use super::plan::{plan, realize_system, GridSpec, OracleGrids, ProbeSpec, StateStats, SystemSpec};

/// Deliberate defects for exercising the verification suite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Fault {
    #[default]
    None,
    /// The coupling step uses `−κ` while everything else uses `κ`.
    KappaSign,
}

/// Deviations between the oracle's outcome marginals and the convolution forms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarginalReport {
    /// `max |marginal_x − ρ_ψ * ě|` with `ě(y) = e(−y)`.
    pub position: f64,
    /// `max |marginal_y − ρ̃_ψ * f̌|`.
    pub momentum: f64,
    /// Same comparison against `ρ_ψ * e`, the other sign convention.
    pub position_unreflected: f64,
    pub momentum_unreflected: f64,
}

impl MarginalReport {
    pub fn max(&self) -> f64 {
        self.position.max(self.momentum)
    }
}

/// Predicted outcome marginals from the convolution forms.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvolutionForms {
    pub position: Distribution1D,
    pub momentum: Distribution1D,
    pub position_unreflected: Distribution1D,
    pub momentum_unreflected: Distribution1D,
}

/// Structure checks on `τ`.
#[derive(Debug, Clone, PartialEq)]
pub struct TauReport {
    pub trace: f64,
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
    pub hermiticity_defect: f64,
    /// `max |T(x, x) − e(x)|`.
    pub position_deviation: f64,
    /// `max |T(−x, −x) − e(x)|`; equals the above when `e` is symmetric.
    pub inverted_position_deviation: f64,
    /// `max |⟨p|τ|p⟩ − f(p)|`.
    pub momentum_deviation: f64,
    pub tau: TauMatrix,
}

/// Brute-force simulation of one system state measured with one probe preparation.
#[derive(Debug, Clone)]
pub struct Oracle {
    coupling: CouplingParams,
    spec: GridSpec,
    grids: OracleGrids,
    system: StateStats,
    psi: WaveFunction,
    probe: ProbeEnsemble,
    probe_moments: MomentSet,
    coercion: Option<RCoercion>,
    analytic: Option<ProbeState>,
    fault: Fault,
}

/// `q₂` oversampling of the probe used for kernel matrices, whose entries
/// interpolate the probe bilinearly.
const KERNEL_Q2_REFINEMENT: usize = 4;

impl Oracle {
    pub fn new(system: &SystemSpec, probe: &ProbeSpec, coupling: CouplingParams, spec: GridSpec) -> Result<Self> {
        let stats = system.stats()?;
        let (footprint, coercion) = probe.footprint()?;
        let mut grids = plan(&stats, &footprint, &coupling, &spec)?;
        if let SystemSpec::Sampled(psi) = system {
            grids.psi = *psi.grid();
        }
        let psi = realize_system(system, &grids)?;
        let probe_ensemble = match probe {
            ProbeSpec::Analytic(state) => ProbeEnsemble::sample(state, &grids.probe_q1, &grids.probe_q2)?.0,
            ProbeSpec::Sampled(phi) => {
                grids.probe_q1 = *phi.grid_q1();
                grids.probe_q2 = *phi.grid_q2();
                ProbeEnsemble::pure(phi.clone().normalized()?)
            }
        };
        Ok(Self {
            coupling,
            spec,
            grids,
            system: stats,
            psi,
            probe: probe_ensemble,
            probe_moments: footprint.moments,
            coercion,
            analytic: match probe {
                ProbeSpec::Analytic(state) => Some(state.clone()),
                ProbeSpec::Sampled(_) => None,
            },
            fault: Fault::None,
        })
    }

    pub fn with_fault(mut self, fault: Fault) -> Self {
        self.fault = fault;
        self
    }

    pub fn coupling(&self) -> &CouplingParams {
        &self.coupling
    }

    pub fn grid_spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn grids(&self) -> &OracleGrids {
        &self.grids
    }

    pub fn system_stats(&self) -> &StateStats {
        &self.system
    }

    pub fn psi(&self) -> &WaveFunction {
        &self.psi
    }

    pub fn probe(&self) -> &ProbeEnsemble {
        &self.probe
    }

    /// Moments the grids were planned from; for mixtures these use the coerced `R`.
    pub fn probe_moments(&self) -> &MomentSet {
        &self.probe_moments
    }

    pub fn coercion(&self) -> Option<RCoercion> {
        self.coercion
    }

    pub fn noise_moments(&self) -> NoiseMoments {
        noise_moments(&self.probe_moments, &self.coupling)
    }

    fn simulated_coupling(&self) -> CouplingParams {
        match self.fault {
            Fault::None => self.coupling,
            Fault::KappaSign => self.coupling.with_flipped_kappa(),
        }
    }

    fn coupled_on(&self, psi: &WaveFunction, grids: &OracleGrids) -> Result<Vec<(f64, CoupledState3D)>> {
        let c = self.simulated_coupling();
        self.probe
            .components()
            .iter()
            .map(|(w, phi)| Ok((*w, couple(psi, phi, &c, &grids.q, &grids.q1, &grids.q2)?)))
            .collect()
    }

    pub fn coupled_states(&self) -> Result<Vec<(f64, CoupledState3D)>> {
        self.coupled_on(&self.psi, &self.grids)
    }

    pub fn joint_distribution(&self) -> Result<JointDistribution2D> {
        let states = self.coupled_states()?;
        joint_distribution(&states, &self.coupling, self.grids.p2_center)
    }

    /// Outcome density for the system state `W_{q₀p₀}ψ`, on grids translated by `(q₀, p₀)`.
    pub fn shifted_joint_distribution(&self, q0: f64, p0: f64) -> Result<JointDistribution2D> {
        let psi = self.psi.weyl_translated(q0, p0);
        let grids = self.grids.shifted(q0, p0, &self.coupling);
        let states = self.coupled_on(&psi, &grids)?;
        joint_distribution(&states, &self.coupling, grids.p2_center)
    }

    /// `max |G_{W ψ}(x + q₀, y + p₀) − G_ψ(x, y)|` over the outcome grid.
    pub fn covariance_test(&self, q0: f64, p0: f64) -> Result<f64> {
        let base = self.joint_distribution()?;
        if q0 == 0.0 && p0 == 0.0 {
            return base.max_abs_difference(&self.joint_distribution()?);
        }
        base.max_abs_difference(&self.shifted_joint_distribution(q0, p0)?)
    }

    /// Covariance with the system quadrature held fixed. Only the outcome axes
    /// follow the shift; the `q` nodes stay put, extended on the side the state
    /// moves to, so the shifted packet meets the nodes at different offsets and
    /// the deviation carries the discretization error of the `q` integral. It
    /// shrinks under refinement, whereas [`Oracle::covariance_test`] is exact to
    /// round-off by construction.
    pub fn covariance_test_fixed_quadrature(&self, q0: f64, p0: f64) -> Result<f64> {
        let q = self.grids.q;
        let extra = (q0.abs() / q.dx()).ceil() as usize + 1;
        let x_min = if q0 < 0.0 { q.x_min() - extra as f64 * q.dx() } else { q.x_min() };
        let q = Grid1D::with_spacing(q.n() + extra, x_min, q.dx())?;
        let base_grids = OracleGrids { q, ..self.grids };
        let shifted_grids = OracleGrids {
            q,
            ..self.grids.shifted(q0, p0, &self.coupling)
        };
        let base = joint_distribution(&self.coupled_on(&self.psi, &base_grids)?, &self.coupling, base_grids.p2_center)?;
        let psi = self.psi.weyl_translated(q0, p0);
        let shifted = joint_distribution(
            &self.coupled_on(&psi, &shifted_grids)?,
            &self.coupling,
            shifted_grids.p2_center,
        )?;
        base.max_abs_difference(&shifted)
    }

    /// Grid with spacing `dx` covering `mean ± sigmas·sd`.
    fn support_grid(&self, mean: f64, sd: f64, dx: f64) -> Result<Grid1D> {
        let half = self.spec.sigmas * sd;
        let n = ((2.0 * half / dx).ceil() as usize + 2).max(16);
        Grid1D::with_spacing(n, mean - (n / 2) as f64 * dx, dx)
    }

    fn default_noise_grid(&self, mean: f64, var: f64) -> Result<Grid1D> {
        let half = self.spec.sigmas * var.sqrt();
        Grid1D::centered(self.spec.fine_n(), mean, half)
    }

    pub fn noise_distribution_q(&self) -> Result<Distribution1D> {
        let n = self.noise_moments();
        noise_distribution_q(&self.probe, &self.coupling, &self.default_noise_grid(n.e1, n.var_e)?)
    }

    pub fn noise_distribution_p(&self) -> Result<Distribution1D> {
        let n = self.noise_moments();
        noise_distribution_p(&self.probe, &self.coupling, &self.default_noise_grid(n.f1, n.var_f)?)
    }

    pub fn single_probe_noise_q(&self) -> Result<Distribution1D> {
        let m = &self.probe_moments;
        let grid = self.default_noise_grid(-m.m_q1 / self.coupling.lambda(), m.v_q1 / self.coupling.lambda().powi(2))?;
        single_probe_noise_q(&self.probe, self.coupling.lambda(), &grid)
    }

    pub fn single_probe_noise_p(&self) -> Result<Distribution1D> {
        let m = &self.probe_moments;
        let grid = self.default_noise_grid(-m.m_p2 / self.coupling.mu(), m.v_p2 / self.coupling.mu().powi(2))?;
        single_probe_noise_p(&self.probe, self.coupling.mu(), &grid)
    }

    /// Compares the oracle's outcome marginals with `ρ_ψ * ě` and `ρ̃_ψ * f̌`.
    pub fn marginal_check(&self) -> Result<MarginalReport> {
        let joint = self.joint_distribution()?;
        self.marginal_check_against(&joint)
    }

    pub fn marginal_check_against(&self, joint: &JointDistribution2D) -> Result<MarginalReport> {
        let forms = self.convolution_forms()?;
        let mx = joint.marginal_q()?;
        let my = joint.marginal_p()?;
        Ok(MarginalReport {
            position: deviation(&forms.position, &mx),
            momentum: deviation(&forms.momentum, &my),
            position_unreflected: deviation(&forms.position_unreflected, &mx),
            momentum_unreflected: deviation(&forms.momentum_unreflected, &my),
        })
    }

    /// `ρ_ψ * ě`, `ρ̃_ψ * f̌` and the unreflected counterparts, each on its own
    /// full-support grid.
    pub fn convolution_forms(&self) -> Result<ConvolutionForms> {
        let n = self.noise_moments();
        let rho = self.psi.density()?;
        let dx = rho.grid().dx();
        let e = noise_distribution_q(&self.probe, &self.coupling, &self.support_grid(n.e1, n.var_e.sqrt(), dx)?)?;

        // Pad ψ until its momentum spacing resolves the momentum density finely.
        let sigma_p = self.system.var_p.sqrt();
        let coarse_dp = 2.0 * std::f64::consts::PI / (self.psi.grid().n() as f64 * dx);
        let mut pad = 1;
        while coarse_dp / pad as f64 > sigma_p / 16.0 && pad < 64 {
            pad *= 2;
        }
        let rho_p = self
            .psi
            .zero_padded(pad)?
            .fourier_transform()?
            .density()?
            .trimmed(1e-18)?;
        let dp = rho_p.grid().dx();
        let f = noise_distribution_p(&self.probe, &self.coupling, &self.support_grid(n.f1, n.var_f.sqrt(), dp)?)?;

        Ok(ConvolutionForms {
            position: rho.convolve(&e.mirrored())?,
            momentum: rho_p.convolve(&f.mirrored())?,
            position_unreflected: rho.convolve(&e)?,
            momentum_unreflected: rho_p.convolve(&f)?,
        })
    }

    /// Square grid for `τ`: covers the position noise support and, for every
    /// column in it, the rows reached through `x = x′ − μq₂`.
    pub fn tau_grid(&self, n: usize) -> Result<Grid1D> {
        let nm = self.noise_moments();
        let m = &self.probe_moments;
        let k = self.spec.sigmas;
        let u = self.coupling.mu();
        let se = k * nm.var_e.sqrt();
        let sq2 = k * m.v_q2.sqrt();
        let lo = (nm.e1 - se).min(nm.e1 - se - u * (m.m_q2 + sq2));
        let hi = (nm.e1 + se).max(nm.e1 + se - u * (m.m_q2 - sq2));
        Grid1D::centered(n, 0.5 * (lo + hi), 0.5 * (hi - lo))
    }

    pub fn kernel_and_tau(&self, n: usize) -> Result<TauReport> {
        let grid = self.tau_grid(n)?;
        let refined;
        let probe = match &self.analytic {
            Some(state) => {
                let q2 = self.grids.probe_q2.refined(KERNEL_Q2_REFINEMENT)?;
                refined = ProbeEnsemble::sample(state, &self.grids.probe_q1, &q2)?.0;
                &refined
            }
            None => &self.probe,
        };
        let (_, tau) = kernel_and_tau(probe, &self.coupling, &grid)?;
        let nm = self.noise_moments();

        let e = noise_distribution_q(&self.probe, &self.coupling, &grid)?;
        let diag = tau.position_diagonal();
        let position_deviation = max_abs_diff(&diag, e.density());
        let inverted: Vec<f64> = grid.points().map(|x| interp::linear(&grid, &diag, -x)).collect();
        let inverted_position_deviation = max_abs_diff(&inverted, e.density());

        let half = self.spec.sigmas * nm.var_f.sqrt();
        let p_grid = Grid1D::centered(n, nm.f1, half)?;
        let nyquist = std::f64::consts::PI / grid.dx();
        if nm.f1.abs() + half > nyquist {
            return Err(Error::Numerical {
                check: "tau momentum diagonal",
                detail: format!(
                    "momentum noise reaches {:.3} beyond ±π/dx = {nyquist:.3}; increase the kernel size",
                    nm.f1.abs() + half
                ),
            });
        }
        let f = noise_distribution_p(&self.probe, &self.coupling, &p_grid)?;
        let momentum_deviation = max_abs_diff(&tau.momentum_diagonal(&p_grid), f.density());

        let ev = tau.eigenvalues();
        Ok(TauReport {
            trace: tau.trace(),
            min_eigenvalue: ev[0],
            max_eigenvalue: ev[ev.len() - 1],
            hermiticity_defect: tau.hermiticity_defect(),
            position_deviation,
            inverted_position_deviation,
            momentum_deviation,
            tau,
        })
    }
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// `max |conv(x) − target(x)|` over the target's grid points.
fn deviation(conv: &Distribution1D, target: &Distribution1D) -> f64 {
    target
        .grid()
        .points()
        .zip(target.density())
        .map(|(x, t)| (conv.value_at(x) - t).abs())
        .fold(0.0, f64::max)
}
