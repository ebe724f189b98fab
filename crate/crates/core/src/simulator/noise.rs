use num_complex::Complex64;

use crate::akmodel::CouplingParams;
use crate::error::{Error, Result};
use crate::numerics::{Distribution1D, FourierPair, Grid1D};
use crate::probes::{ProbeEnsemble, ProbeWavefunction};

/// Mass a noise density may miss on its output grid before it counts as truncated.
pub const NOISE_MASS_TOL: f64 = 1e-5;

/// Line integrals are Riemann sums over one array axis. The integrand along the
/// line must span at least this many grid steps of that axis (one standard
/// deviation), else the sum is not trusted.
const MIN_STEPS_PER_WIDTH: f64 = 1.5;

/// Coefficients below this fraction of the largest one are skipped.
const SPECTRAL_CUTOFF: f64 = 1e-13;

/// Lanes whose weight is below this fraction of the heaviest lane are skipped.
const LANE_CUTOFF: f64 = 1e-12;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum SumAxis {
    First,
    Second,
}

/// Standard deviation, in steps of the summed axis, of a Gaussian with the
/// array's second moments restricted to the line `αx₁ + βx₂ = w`.
fn steps_per_width(stats: (f64, f64, f64, f64, f64), alpha: f64, beta: f64, axis: SumAxis, step: f64) -> f64 {
    let (_, _, v1, v2, c) = stats;
    let det = (v1 * v2 - c * c).max(1e-300);
    // Direction of the line per unit of the summed coordinate.
    let (d1, d2) = match axis {
        SumAxis::Second => (-beta / alpha, 1.0),
        SumAxis::First => (1.0, -alpha / beta),
    };
    let quad = (v2 * d1 * d1 - 2.0 * c * d1 * d2 + v1 * d2 * d2) / det;
    1.0 / quad.sqrt() / step
}

/// Density of `W = αX₁ + βX₂` under `|A|²`, where `X₁`, `X₂` are the array's two
/// coordinates, evaluated on `out`.
///
/// One coordinate is summed on its grid; the other is solved from the line
/// equation and evaluated by band-limited (trigonometric) interpolation of the
/// sampled amplitudes, which is exact for the sampled data. Points that fall off
/// the solved axis count as zero.
pub(crate) fn linear_combination_density(
    a: &ProbeWavefunction,
    alpha: f64,
    beta: f64,
    out: &Grid1D,
) -> Result<Vec<f64>> {
    if alpha == 0.0 && beta == 0.0 {
        return Err(Error::invalid("noise density", "both coefficients vanish"));
    }
    let stats = a.density_stats();
    let (g1, g2) = (*a.grid_q1(), *a.grid_q2());
    let axis = if beta == 0.0 {
        SumAxis::Second
    } else if alpha == 0.0 {
        SumAxis::First
    } else {
        let r2 = steps_per_width(stats, alpha, beta, SumAxis::Second, g2.dx());
        let r1 = steps_per_width(stats, alpha, beta, SumAxis::First, g1.dx());
        if r2 >= r1 {
            SumAxis::Second
        } else {
            SumAxis::First
        }
    };
    let (summed, solved, coef_solved, coef_summed) = match axis {
        SumAxis::Second => (g2, g1, alpha, beta),
        SumAxis::First => (g1, g2, beta, alpha),
    };
    if alpha != 0.0 && beta != 0.0 {
        let r = steps_per_width(stats, alpha, beta, axis, summed.dx());
        if r < MIN_STEPS_PER_WIDTH {
            return Err(Error::Numerical {
                check: "noise line integral",
                detail: format!(
                    "integrand spans only {r:.2} grid steps; refine the probe grid"
                ),
            });
        }
    }

    // Lanes along the solved axis, one per summed-axis point.
    let (n1, n2) = (g1.n(), g2.n());
    let amps = a.amplitudes();
    let lanes: Vec<Vec<Complex64>> = match axis {
        SumAxis::Second => (0..n2).map(|j| (0..n1).map(|i| amps[i * n2 + j]).collect()).collect(),
        SumAxis::First => amps.chunks(n2).map(|r| r.to_vec()).collect(),
    };
    let pair = FourierPair::centered(solved);
    let ks: Vec<f64> = pair.p_grid().points().collect();
    let norm = pair.p_grid().dx() / (2.0 * std::f64::consts::PI).sqrt();
    let n_out = out.n();
    let step = out.dx() / coef_solved;
    // Solved coordinates must lie within half a cell of the sampled range.
    let (lo, hi) = (solved.x_min() - 0.5 * solved.dx(), solved.point(solved.n() - 1) + 0.5 * solved.dx());

    let weights: Vec<f64> = lanes.iter().map(|l| l.iter().map(|v| v.norm_sqr()).sum()).collect();
    let heaviest = weights.iter().copied().fold(0.0, f64::max);

    let mut density = vec![0.0; n_out];
    let mut acc = vec![Complex64::default(); n_out];
    for ((lane, s), weight) in lanes.into_iter().zip(summed.points()).zip(weights) {
        if weight <= LANE_CUTOFF * heaviest {
            continue;
        }
        let mut coeffs = lane;
        pair.forward_in_place(&mut coeffs);
        let peak = coeffs.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if peak == 0.0 {
            continue;
        }
        let keep = |v: &Complex64| v.norm() > SPECTRAL_CUTOFF * peak;
        let m_lo = coeffs.iter().position(keep).unwrap_or(0);
        let m_hi = coeffs.iter().rposition(keep).unwrap_or(0);

        // Output index range whose solved coordinate stays on the grid.
        let start = (out.x_min() - coef_summed * s) / coef_solved;
        let (mut k_lo, mut k_hi) = (n_out, 0usize);
        for k in 0..n_out {
            let x = start + k as f64 * step;
            if x >= lo && x <= hi {
                k_lo = k_lo.min(k);
                k_hi = k_hi.max(k + 1);
            }
        }
        if k_lo >= k_hi {
            continue;
        }
        acc[k_lo..k_hi].iter_mut().for_each(|v| *v = Complex64::default());
        let x0 = start + k_lo as f64 * step;
        for m in m_lo..=m_hi {
            let c = coeffs[m] * norm;
            let mut cur = c * Complex64::from_polar(1.0, ks[m] * x0);
            let rot = Complex64::from_polar(1.0, ks[m] * step);
            for v in &mut acc[k_lo..k_hi] {
                *v += cur;
                cur *= rot;
            }
        }
        for k in k_lo..k_hi {
            density[k] += acc[k].norm_sqr();
        }
    }
    let scale = summed.dx() / coef_solved.abs();
    for d in &mut density {
        *d *= scale;
    }
    Ok(density)
}

fn weighted_density(
    arrays: &[(f64, ProbeWavefunction)],
    alpha: f64,
    beta: f64,
    grid: &Grid1D,
    what: &str,
) -> Result<Distribution1D> {
    let mut total = vec![0.0; grid.n()];
    for (w, arr) in arrays {
        let d = linear_combination_density(arr, alpha, beta, grid)?;
        for (t, v) in total.iter_mut().zip(d) {
            *t += w * v;
        }
    }
    Distribution1D::with_mass_check(*grid, total, NOISE_MASS_TOL, what)
}

fn position_arrays(probe: &ProbeEnsemble) -> Vec<(f64, ProbeWavefunction)> {
    probe.components().to_vec()
}

/// Momentum arrays of every component. The axis the line integral runs over is
/// zero-padded in position space until its momentum steps resolve the integrand.
fn momentum_arrays(probe: &ProbeEnsemble, alpha: f64, beta: f64) -> Result<Vec<(f64, ProbeWavefunction)>> {
    const MAX_PAD: usize = 16;
    let mut out = Vec::with_capacity(probe.components().len());
    for (w, phi) in probe.components() {
        let ft = phi.momentum_representation(1)?;
        if alpha == 0.0 || beta == 0.0 {
            out.push((*w, ft));
            continue;
        }
        let stats = ft.density_stats();
        let r2 = steps_per_width(stats, alpha, beta, SumAxis::Second, ft.grid_q2().dx());
        let r1 = steps_per_width(stats, alpha, beta, SumAxis::First, ft.grid_q1().dx());
        let target = 2.0 * MIN_STEPS_PER_WIDTH;
        let r = r1.max(r2);
        let mut pad = 1;
        while r * (pad as f64) < target && pad < MAX_PAD {
            pad *= 2;
        }
        let ft = match (pad, r2 >= r1) {
            (1, _) => ft,
            (_, true) => phi.momentum_representation_axes(1, pad)?,
            (_, false) => phi.momentum_representation_axes(pad, 1)?,
        };
        out.push((*w, ft));
    }
    Ok(out)
}

/// Position noise density: the law of `(μ/2)(1−κ)Q₂ − Q₁/λ` in the probe state.
pub fn noise_distribution_q(probe: &ProbeEnsemble, c: &CouplingParams, grid: &Grid1D) -> Result<Distribution1D> {
    let alpha = -1.0 / c.lambda();
    let beta = 0.5 * c.mu() * (1.0 - c.kappa());
    weighted_density(&position_arrays(probe), alpha, beta, grid, "position noise")
}

/// Momentum noise density: the law of `(λ/2)(1+κ)P₁ − P₂/μ` in the probe state.
pub fn noise_distribution_p(probe: &ProbeEnsemble, c: &CouplingParams, grid: &Grid1D) -> Result<Distribution1D> {
    let alpha = 0.5 * c.lambda() * (1.0 + c.kappa());
    let beta = -1.0 / c.mu();
    weighted_density(&momentum_arrays(probe, alpha, beta)?, alpha, beta, grid, "momentum noise")
}

/// Position noise of the first probe coupled alone (`μ = 0`): the law of `−Q₁/λ`.
pub fn single_probe_noise_q(probe: &ProbeEnsemble, lambda: f64, grid: &Grid1D) -> Result<Distribution1D> {
    weighted_density(&position_arrays(probe), -1.0 / lambda, 0.0, grid, "single-probe position noise")
}

/// Momentum noise of the second probe coupled alone (`λ = 0`): the law of `−P₂/μ`.
pub fn single_probe_noise_p(probe: &ProbeEnsemble, mu: f64, grid: &Grid1D) -> Result<Distribution1D> {
    let beta = -1.0 / mu;
    weighted_density(&momentum_arrays(probe, 0.0, beta)?, 0.0, beta, grid, "single-probe momentum noise")
}
