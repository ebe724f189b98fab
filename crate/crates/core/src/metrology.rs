//! Error measures on noise densities: the 1-D Wasserstein-2 distance, the
//! moment-form error, and the noise uncertainty products.

use crate::akmodel::NoiseMoments;
use crate::error::{Error, Result};
use crate::numerics::Distribution1D;

/// Inputs whose mass differs from one by more than this are rejected.
pub const MASS_TOL: f64 = 1e-9;

/// Default number of probability levels for [`QuantileFunction`].
pub const DEFAULT_LEVELS: usize = 4096;

/// Allowed disagreement between the transport and moment routes to `D₂(m, δ₀)`.
pub const SHARP_DISTANCE_TOL: f64 = 1e-3;

/// Products below `1/4` by more than this count as violations.
pub const UNCERTAINTY_SLACK: f64 = 1e-9;

fn check_mass(d: &Distribution1D, what: &'static str) -> Result<()> {
    let mass = d.mass();
    if (mass - 1.0).abs() > MASS_TOL {
        return Err(Error::invalid(what, format!("mass {mass} is not 1")));
    }
    Ok(())
}

/// Optimal quadratic transport cost between the cell masses of `alpha` and
/// `beta`, treating each cell as a point mass at its grid point.
///
/// In one dimension the monotone coupling is optimal, so the cost is found by
/// walking both cumulative distributions in step and pairing mass in order.
pub fn wasserstein2(alpha: &Distribution1D, beta: &Distribution1D) -> Result<f64> {
    check_mass(alpha, "wasserstein2 first argument")?;
    check_mass(beta, "wasserstein2 second argument")?;
    let atoms = |d: &Distribution1D| -> Vec<(f64, f64)> {
        d.grid()
            .points()
            .zip(d.weights())
            .filter(|(_, w)| *w > 0.0)
            .collect()
    };
    let (a, b) = (atoms(alpha), atoms(beta));
    let (mut i, mut j) = (0, 0);
    let (mut ra, mut rb) = (a[0].1, b[0].1);
    let mut cost = 0.0;
    while i < a.len() && j < b.len() {
        let m = ra.min(rb);
        cost += m * (a[i].0 - b[j].0).powi(2);
        ra -= m;
        rb -= m;
        // Whichever side is exhausted advances; round-off leftovers are dropped
        // at the final atom.
        if ra <= rb {
            i += 1;
            ra = a.get(i).map_or(0.0, |x| x.1);
        } else {
            j += 1;
            rb = b.get(j).map_or(0.0, |x| x.1);
        }
    }
    Ok(cost.max(0.0).sqrt())
}

/// Inverse CDF sampled at the midpoints `t = (k + ½)/N`. Each cell's mass is
/// spread uniformly over the cell, so the CDF is piecewise linear.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantileFunction {
    levels: Vec<f64>,
    values: Vec<f64>,
}

impl QuantileFunction {
    pub fn new(d: &Distribution1D, levels: usize) -> Result<Self> {
        check_mass(d, "quantile function")?;
        if levels < 2 {
            return Err(Error::invalid("quantile levels", "need at least 2"));
        }
        let dx = d.grid().dx();
        let weights = d.weights();
        let total: f64 = weights.iter().sum();
        let mut cdf = Vec::with_capacity(weights.len() + 1);
        let mut acc = 0.0;
        cdf.push(0.0);
        for w in &weights {
            acc += w / total;
            cdf.push(acc);
        }
        let ts: Vec<f64> = (0..levels).map(|k| (k as f64 + 0.5) / levels as f64).collect();
        let mut values = Vec::with_capacity(levels);
        let mut cell = 0;
        for &t in &ts {
            while cell + 1 < weights.len() && cdf[cell + 1] <= t {
                cell += 1;
            }
            let w = cdf[cell + 1] - cdf[cell];
            let frac = if w > 0.0 { ((t - cdf[cell]) / w).clamp(0.0, 1.0) } else { 0.5 };
            values.push(d.grid().point(cell) - 0.5 * dx + frac * dx);
        }
        Ok(Self { levels: ts, values })
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// `D₂` from sampled quantile functions: `(∫₀¹ |F_α⁻¹ − F_β⁻¹|² dt)^½` by the
/// midpoint rule on `levels` probability levels.
pub fn wasserstein2_sampled(alpha: &Distribution1D, beta: &Distribution1D, levels: usize) -> Result<f64> {
    let qa = QuantileFunction::new(alpha, levels)?;
    let qb = QuantileFunction::new(beta, levels)?;
    let sum: f64 = qa.values.iter().zip(&qb.values).map(|(a, b)| (a - b).powi(2)).sum();
    Ok((sum / levels as f64).sqrt())
}

/// Distance of the smeared position observable from the sharp one, `√m[2]`.
///
/// The transport distance between `m` and a one-cell point mass at zero is
/// computed as well and must agree within [`SHARP_DISTANCE_TOL`].
pub fn observable_distance_to_sharp(m: &Distribution1D) -> Result<f64> {
    check_mass(m, "smearing density")?;
    let closed = m.moment(2).max(0.0).sqrt();
    let delta = Distribution1D::point_mass(0.0, m.grid().dx())?;
    let transported = wasserstein2(m, &delta)?;
    if (transported - closed).abs() > SHARP_DISTANCE_TOL {
        return Err(Error::Numerical {
            check: "distance to sharp observable",
            detail: format!("transport gives {transported}, second moment gives {closed}"),
        });
    }
    Ok(closed)
}

/// Moment-form error `√(m[1]² + Var m)`.
pub fn ozawa_error(m: &Distribution1D) -> Result<f64> {
    check_mass(m, "smearing density")?;
    Ok((m.mean().powi(2) + m.variance()).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UncertaintyProducts {
    /// `Var(e)·Var(f)`.
    pub var_product: f64,
    /// `e[2]·f[2]`.
    pub m2_product: f64,
    /// Either product falls below `1/4 − UNCERTAINTY_SLACK`.
    pub violation: bool,
}

pub fn uncertainty_products(nm: &NoiseMoments) -> UncertaintyProducts {
    let var_product = nm.var_e * nm.var_f;
    let m2_product = nm.e2 * nm.f2;
    let bound = 0.25 - UNCERTAINTY_SLACK;
    UncertaintyProducts {
        var_product,
        m2_product,
        violation: var_product < bound || m2_product < bound,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Grid1D;
    use statrs::distribution::{ContinuousCDF, Normal};

    fn grid() -> Grid1D {
        Grid1D::centered(2000, 0.0, 12.0).unwrap()
    }

    /// `D₂` between two normals by midpoint quadrature of the exact quantiles.
    fn normal_quantile_distance(m1: f64, s1: f64, m2: f64, s2: f64, levels: usize) -> f64 {
        let (a, b) = (Normal::new(m1, s1).unwrap(), Normal::new(m2, s2).unwrap());
        let sum: f64 = (0..levels)
            .map(|k| {
                let t = (k as f64 + 0.5) / levels as f64;
                (a.inverse_cdf(t) - b.inverse_cdf(t)).powi(2)
            })
            .sum();
        (sum / levels as f64).sqrt()
    }

    #[test]
    fn spikes_are_transported_rigidly() {
        let g = Grid1D::with_spacing(2400, -12.0, 0.01).unwrap();
        let a = Distribution1D::spike(g, -1.5).unwrap();
        let b = Distribution1D::spike(g, 2.25).unwrap();
        let d = wasserstein2(&a, &b).unwrap();
        let expect = g.point(g.nearest_index(2.25).unwrap()) - g.point(g.nearest_index(-1.5).unwrap());
        assert!((d - expect).abs() < 1e-12);
        assert!((d - 3.75).abs() < 1e-3);
        assert!((wasserstein2_sampled(&a, &b, DEFAULT_LEVELS).unwrap() - 3.75).abs() < 1e-2);
    }

    #[test]
    fn identical_inputs_have_zero_distance() {
        let a = Distribution1D::gaussian(grid(), 0.4, 0.7).unwrap();
        assert!(wasserstein2(&a, &a).unwrap() < 1e-6);
        assert!(wasserstein2_sampled(&a, &a, DEFAULT_LEVELS).unwrap() < 1e-12);
    }

    #[test]
    fn gaussians_match_closed_form_and_quantile_oracle() {
        let (m1, s1, m2, s2) = (0.5, 0.8, -1.0, 1.3);
        let a = Distribution1D::gaussian(grid(), m1, s1 * s1).unwrap();
        let b = Distribution1D::gaussian(grid(), m2, s2 * s2).unwrap();
        let closed = ((m1 - m2).powi(2) + (s1 - s2).powi(2)).sqrt();
        let oracle = normal_quantile_distance(m1, s1, m2, s2, 10 * DEFAULT_LEVELS);
        assert!((oracle - closed).abs() < 1e-3);
        let d = wasserstein2(&a, &b).unwrap();
        assert!((d - closed).abs() < 1e-3, "{d} vs {closed}");
        let ds = wasserstein2_sampled(&a, &b, DEFAULT_LEVELS).unwrap();
        assert!((ds - oracle).abs() < 1e-3, "{ds} vs {oracle}");
    }

    #[test]
    fn quantiles_are_non_decreasing() {
        let a = Distribution1D::from_fn(grid(), |x| (-(x - 1.0).powi(2)).exp() + 0.5 * (-(x + 2.0).powi(2) * 4.0).exp())
            .unwrap();
        let q = QuantileFunction::new(&a, DEFAULT_LEVELS).unwrap();
        assert!(q.values().windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(q.levels().len(), DEFAULT_LEVELS);
    }

    #[test]
    fn sharp_distance_and_moment_error() {
        let g = grid();
        let spike = Distribution1D::point_mass(0.0, g.dx()).unwrap();
        assert_eq!(observable_distance_to_sharp(&spike).unwrap(), 0.0);
        assert_eq!(ozawa_error(&spike).unwrap(), 0.0);

        let centered = Distribution1D::gaussian(g, 0.0, 0.49).unwrap();
        assert!((observable_distance_to_sharp(&centered).unwrap() - 0.7).abs() < 1e-3);

        let (m0, s) = (0.6, 0.9);
        let shifted = Distribution1D::gaussian(g, m0, s * s).unwrap();
        let expect = (m0 * m0 + s * s).sqrt();
        let a = observable_distance_to_sharp(&shifted).unwrap();
        let b = ozawa_error(&shifted).unwrap();
        assert!((a - expect).abs() < 1e-3);
        assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn products_of_standard_configuration() {
        let nm = NoiseMoments {
            e1: 0.0,
            e2: 0.625,
            var_e: 0.625,
            f1: 0.0,
            f2: 0.625,
            var_f: 0.625,
            var_e_single: 0.5,
            var_f_single: 0.5,
        };
        let p = uncertainty_products(&nm);
        assert!((p.var_product - 25.0 / 64.0).abs() < 1e-15);
        assert_eq!(p.var_product, p.m2_product);
        assert!(!p.violation);
    }
}
