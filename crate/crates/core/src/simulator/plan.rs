use std::f64::consts::PI;

use crate::akmodel::{noise_moments, CouplingParams};
use crate::error::{Error, Result};
use crate::numerics::{Grid1D, WaveFunction};
use crate::probes::{MomentSet, ProbeState, ProbeWavefunction, RCoercion};

/// Target spacing of the fine 1-D/2-D arrays, in units of the narrowest feature.
const FINE_PER_WIDTH: f64 = 16.0;

/// Upper bound on `|k|·dx` for sampled plane-wave factors.
const MAX_PHASE_STEP: f64 = 0.03;

/// Discretization controls for the three-mode oracle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    /// Points per axis of the three-mode array.
    pub n: usize,
    /// Fine 1-D and 2-D arrays get at least `fine_factor · n` points per axis.
    pub fine_factor: usize,
    /// Half-width of every axis in standard deviations of what lives on it.
    pub sigmas: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            n: 64,
            fine_factor: 4,
            sigmas: 6.5,
        }
    }
}

impl GridSpec {
    pub fn new(n: usize, fine_factor: usize, sigmas: f64) -> Result<Self> {
        let s = Self {
            n,
            fine_factor,
            sigmas,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 8 || self.n % 2 != 0 {
            return Err(Error::invalid("grid spec", format!("n = {} must be even and >= 8", self.n)));
        }
        if self.fine_factor == 0 {
            return Err(Error::invalid("grid spec", "fine_factor must be >= 1"));
        }
        if !(self.sigmas >= 1.0 && self.sigmas.is_finite()) {
            return Err(Error::invalid("grid spec", format!("sigmas = {} must be >= 1", self.sigmas)));
        }
        Ok(())
    }

    pub fn with_n(&self, n: usize) -> Self {
        Self { n, ..*self }
    }

    pub fn fine_n(&self) -> usize {
        self.n * self.fine_factor
    }
}

/// Position and momentum mean and variance of a one-mode state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateStats {
    pub mean_q: f64,
    pub var_q: f64,
    pub mean_p: f64,
    pub var_p: f64,
}

/// The measured system's state.
#[derive(Debug, Clone, PartialEq)]
pub enum SystemSpec {
    /// Minimum-uncertainty packet; momentum variance is `1/(4·variance)`.
    Gaussian {
        mean: f64,
        variance: f64,
        momentum: f64,
    },
    Sampled(WaveFunction),
}

impl SystemSpec {
    pub fn stats(&self) -> Result<StateStats> {
        match self {
            SystemSpec::Gaussian {
                mean,
                variance,
                momentum,
            } => {
                if !(*variance > 0.0) || !mean.is_finite() || !momentum.is_finite() {
                    return Err(Error::invalid(
                        "system state",
                        format!("gaussian needs finite mean/momentum and variance > 0, got {variance}"),
                    ));
                }
                Ok(StateStats {
                    mean_q: *mean,
                    var_q: *variance,
                    mean_p: *momentum,
                    var_p: 0.25 / variance,
                })
            }
            SystemSpec::Sampled(psi) => {
                let rho = psi.density()?;
                let rho_p = psi.fourier_transform()?.density()?;
                Ok(StateStats {
                    mean_q: rho.mean(),
                    var_q: rho.variance(),
                    mean_p: rho_p.mean(),
                    var_p: rho_p.variance(),
                })
            }
        }
    }

    /// Samples the state on `grid`, or returns the stored samples.
    fn realize(&self, grid: &Grid1D) -> Result<WaveFunction> {
        match self {
            SystemSpec::Gaussian {
                mean,
                variance,
                momentum,
            } => WaveFunction::gaussian(*grid, *mean, *variance, *momentum)?.normalized(),
            SystemSpec::Sampled(psi) => Ok(psi.clone()),
        }
    }
}

/// The probe preparation handed to the oracle.
#[derive(Debug, Clone, PartialEq)]
pub enum ProbeSpec {
    Analytic(ProbeState),
    Sampled(ProbeWavefunction),
}

/// What the planner needs to know about a probe.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct ProbeFootprint {
    pub moments: MomentSet,
    /// Smallest standard deviation of `Q₁` given `Q₂` within any pure component.
    pub conditional_width_q1: f64,
    /// Largest momentum mean of any pure component.
    pub max_momentum: f64,
}

impl ProbeSpec {
    pub(crate) fn footprint(&self) -> Result<(ProbeFootprint, Option<RCoercion>)> {
        match self {
            ProbeSpec::Analytic(ProbeState::Gaussian(g)) => Ok((
                ProbeFootprint {
                    moments: g.moments(),
                    conditional_width_q1: 0.5 / g.a().sqrt(),
                    max_momentum: 0.0,
                },
                None,
            )),
            ProbeSpec::Analytic(ProbeState::Mixture(m)) => {
                let (m, coercion) = m.grid_realizable();
                let max_momentum = m.components().iter().map(|c| c.k.abs()).fold(0.0, f64::max);
                Ok((
                    ProbeFootprint {
                        moments: m.moments(),
                        conditional_width_q1: m.s().sqrt(),
                        max_momentum,
                    },
                    coercion,
                ))
            }
            ProbeSpec::Sampled(phi) => {
                let moments = phi.moments();
                moments.validate()?;
                let cond = (moments.v_q1 - moments.c_q * moments.c_q / moments.v_q2).max(0.0).sqrt();
                Ok((
                    ProbeFootprint {
                        moments,
                        conditional_width_q1: cond,
                        max_momentum: moments.m_p1.abs().max(moments.m_p2.abs()),
                    },
                    None,
                ))
            }
        }
    }
}

/// All grids used by one oracle run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleGrids {
    /// Final system coordinate.
    pub q: Grid1D,
    /// Pointer coordinate of the first probe, i.e. `λx`.
    pub q1: Grid1D,
    pub q2: Grid1D,
    /// Center point of the pointer momentum grid conjugate to `q2`, i.e. of `μy`.
    pub p2_center: f64,
    /// Fine grid of the system wavefunction.
    pub psi: Grid1D,
    /// Fine grids of the probe wavefunction.
    pub probe_q1: Grid1D,
    pub probe_q2: Grid1D,
}

impl OracleGrids {
    pub fn p2(&self) -> Grid1D {
        self.q2.conjugate_centered(self.p2_center)
    }

    /// Grids for the system state translated by `(q₀, p₀)` in phase space. Every
    /// axis that the translation moves is moved by exactly the expected amount,
    /// so outcome cell `(i, j)` of the shifted run corresponds to cell `(i, j)` of
    /// the unshifted one.
    pub fn shifted(&self, q0: f64, p0: f64, c: &CouplingParams) -> Self {
        Self {
            q: self.q.translated(q0),
            q1: self.q1.translated(c.lambda() * q0),
            p2_center: self.p2_center + c.mu() * p0,
            psi: self.psi.translated(q0),
            ..*self
        }
    }
}

fn even_at_least(x: f64, floor: usize) -> usize {
    let n = (x.ceil() as usize).max(floor);
    n + n % 2
}

/// Chooses grids from the system and probe moments. Every axis is centered on
/// the mean of what lives there and spans `±sigmas` standard deviations.
pub(crate) fn plan(
    system: &StateStats,
    probe: &ProbeFootprint,
    c: &CouplingParams,
    spec: &GridSpec,
) -> Result<OracleGrids> {
    spec.validate()?;
    let k = spec.sigmas;
    let (l, u) = (c.lambda(), c.mu());
    let m = &probe.moments;
    let noise = noise_moments(m, c);
    let n3 = spec.n;

    let sigma_psi = system.var_q.sqrt();
    let q = Grid1D::centered(
        n3,
        system.mean_q - u * m.m_q2,
        k * (system.var_q + u * u * m.v_q2).sqrt(),
    )?;
    let q1 = Grid1D::centered(
        n3,
        l * (system.mean_q - noise.e1),
        k * l * (system.var_q + noise.var_e).sqrt(),
    )?;

    // The q₂ spacing must leave the probe's Q₂ support inside n·dq₂ and the
    // pointer momentum inside ±π/dq₂.
    let half_q2 = k * m.v_q2.sqrt();
    let half_p2 = k * u * (system.var_p + noise.var_f).sqrt();
    let lo = 2.0 * half_q2 / n3 as f64;
    let hi = PI / half_p2;
    if lo > hi {
        let needed = (2.0 * half_q2 * half_p2 / PI).ceil() as usize;
        return Err(Error::Numerical {
            check: "grid plan",
            detail: format!(
                "q₂ axis cannot hold both the probe support (±{half_q2:.3}) and the pointer momentum (±{half_p2:.3}); increase grid.n to at least {}",
                needed + needed % 2
            ),
        });
    }
    let dq2 = lo * (hi / lo).sqrt().min(1.2);
    let q2 = Grid1D::centered(n3, m.m_q2, 0.5 * n3 as f64 * dq2)?;
    let p2_center = u * (system.mean_p - noise.f1);

    // The q-sum in the outcome density is a Riemann sum over a product of ψ and φ
    // factors; it needs at least one point per width of either.
    let width_q = sigma_psi.min(probe.conditional_width_q1 / l);
    if q.dx() > width_q {
        let needed = even_at_least(q.n() as f64 * q.dx() / width_q, n3);
        return Err(Error::Numerical {
            check: "grid plan",
            detail: format!(
                "system axis spacing {:.4} exceeds the narrowest integrand width {width_q:.4}; increase grid.n to at least {needed}",
                q.dx()
            ),
        });
    }

    let fine = spec.fine_n();
    let psi_step = (sigma_psi / FINE_PER_WIDTH)
        .min(MAX_PHASE_STEP / system.mean_p.abs().max(1e-300));
    let psi_half = k * sigma_psi;
    let psi = Grid1D::centered(even_at_least(2.0 * psi_half / psi_step, fine), system.mean_q, psi_half)?;

    let probe_half_q1 = k * m.v_q1.sqrt();
    let probe_step = (probe.conditional_width_q1 / FINE_PER_WIDTH)
        .min(MAX_PHASE_STEP / probe.max_momentum.max(1e-300));
    let probe_q1 = Grid1D::centered(
        even_at_least(2.0 * probe_half_q1 / probe_step, fine),
        m.m_q1,
        probe_half_q1,
    )?;
    // Same extent as q2 so that every q2 point is also a probe grid point.
    let probe_q2 = Grid1D::centered(fine, m.m_q2, 0.5 * n3 as f64 * dq2)?;

    Ok(OracleGrids {
        q,
        q1,
        q2,
        p2_center,
        psi,
        probe_q1,
        probe_q2,
    })
}

pub(crate) fn realize_system(system: &SystemSpec, grids: &OracleGrids) -> Result<WaveFunction> {
    let psi = system.realize(&grids.psi)?;
    psi.check_edges("system", crate::numerics::FOURIER_EDGE_LIMIT)?;
    Ok(psi)
}
