//! Closed forms: noise-distribution moments, single-probe reference variances,
//! the two focusing measures and the focusing predicates for both probe families.

use crate::error::{Error, Result};
use crate::probes::{GaussianTwoMode, MomentSet, ProbeState, ProductGaussianMixture};

/// Coupling constants of `H = λQP₁ − μPQ₂ + (λμ/2)κP₁Q₂`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingParams {
    lambda: f64,
    mu: f64,
    kappa: f64,
}

impl CouplingParams {
    pub fn new(lambda: f64, mu: f64, kappa: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::invalid("coupling", format!("lambda = {lambda} violates lambda > 0")));
        }
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::invalid("coupling", format!("mu = {mu} violates mu > 0")));
        }
        if !kappa.is_finite() {
            return Err(Error::invalid("coupling", format!("kappa = {kappa} is not finite")));
        }
        Ok(Self { lambda, mu, kappa })
    }

    /// Admits `lambda = 0` or `mu = 0`. Only the grid oracle accepts such a
    /// coupling; every closed form divides by both constants.
    pub fn degenerate(lambda: f64, mu: f64, kappa: f64) -> Result<Self> {
        if !(lambda >= 0.0 && mu >= 0.0 && lambda.is_finite() && mu.is_finite() && kappa.is_finite()) {
            return Err(Error::invalid(
                "coupling",
                format!("({lambda}, {mu}, {kappa}) needs finite lambda, mu >= 0"),
            ));
        }
        Ok(Self { lambda, mu, kappa })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// Shear coefficient `(λμ/2)(κ + 1)` of the probe-1 argument after coupling.
    pub fn shear(&self) -> f64 {
        0.5 * self.lambda * self.mu * (self.kappa + 1.0)
    }

    /// Same coupling with the sign of `κ` flipped.
    pub fn with_flipped_kappa(&self) -> Self {
        Self {
            kappa: -self.kappa,
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseMoments {
    pub e1: f64,
    pub e2: f64,
    pub var_e: f64,
    pub f1: f64,
    pub f2: f64,
    pub var_f: f64,
    /// Position noise variance of the first probe coupled alone.
    pub var_e_single: f64,
    /// Momentum noise variance of the second probe coupled alone.
    pub var_f_single: f64,
}

pub fn noise_moments(m: &MomentSet, c: &CouplingParams) -> NoiseMoments {
    let (l, u, k) = (c.lambda, c.mu, c.kappa);
    let qa = 0.5 * u * (1.0 - k);
    let pa = 0.5 * l * (1.0 + k);

    // e is the law of (μ/2)(1−κ)Q₂ − Q₁/λ, f the law of (λ/2)(1+κ)P₁ − P₂/μ.
    let e1 = qa * m.m_q2 - m.m_q1 / l;
    let var_e = m.v_q1 / (l * l) + qa * qa * m.v_q2 - 2.0 * qa / l * m.c_q;
    let f1 = pa * m.m_p1 - m.m_p2 / u;
    let var_f = pa * pa * m.v_p1 + m.v_p2 / (u * u) - 2.0 * pa / u * m.c_p;

    NoiseMoments {
        e1,
        e2: e1 * e1 + var_e,
        var_e,
        f1,
        f2: f1 * f1 + var_f,
        var_f,
        var_e_single: m.v_q1 / (l * l),
        var_f_single: m.v_p2 / (u * u),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FocusingReport {
    pub fq: f64,
    pub fp: f64,
    pub jointly_focused: bool,
}

pub fn focusing_measures(m: &MomentSet, c: &CouplingParams) -> FocusingReport {
    let (l, u, k) = (c.lambda, c.mu, c.kappa);
    let fq = 0.25 * (1.0 - k).powi(2) * u * u * m.v_q2 - (1.0 - k) * u / l * m.c_q;
    let fp = 0.25 * (1.0 + k).powi(2) * l * l * m.v_p1 - (1.0 + k) * l / u * m.c_p;
    FocusingReport {
        fq,
        fp,
        jointly_focused: fq < 0.0 && fp < 0.0,
    }
}

/// Joint focusing for the two-mode Gaussian, from the parameters of `D` alone.
///
/// Position focusing needs `b` on one side and momentum focusing on the other
/// unless `|κ| > 1`; beyond that, `b` must share the sign of `κ` and `|b|/a`
/// must exceed `λμ(1 + |κ|)/4`.
pub fn gaussian_focusing_predicate(g: &GaussianTwoMode, c: &CouplingParams) -> bool {
    let k = c.kappa;
    k.abs() > 1.0
        && g.b() * k > 0.0
        && 0.25 * c.lambda * c.mu * (1.0 + k.abs()) < g.b().abs() / g.a()
}

/// Joint focusing for a product-Gaussian mixture.
///
/// Both covariances are ensemble spreads and hence non-negative, so `|κ| < 1` is
/// necessary. Solving each measure for its covariance gives the two thresholds.
pub fn mixed_focusing_predicate(mx: &ProductGaussianMixture, c: &CouplingParams) -> bool {
    let k = c.kappa;
    let lm = c.lambda * c.mu;
    if !(k.abs() < 1.0 && 0.25 * lm * (1.0 + k.abs()) < 1.0) {
        return false;
    }
    let m = mx.moments();
    let threshold_q = (1.0 - k) * lm * mx.s() / (4.0 - (1.0 - k) * lm);
    let threshold_p = (1.0 + k) * lm * mx.r() / (4.0 - (1.0 + k) * lm);
    m.c_q > threshold_q && m.c_p > threshold_p
}

pub fn focusing_predicate(state: &ProbeState, c: &CouplingParams) -> bool {
    match state {
        ProbeState::Gaussian(g) => gaussian_focusing_predicate(g, c),
        ProbeState::Mixture(m) => mixed_focusing_predicate(m, c),
    }
}

/// `points` evenly spaced values from `from` to `to` inclusive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamRange {
    pub from: f64,
    pub to: f64,
    pub points: usize,
}

impl ParamRange {
    pub fn new(from: f64, to: f64, points: usize) -> Result<Self> {
        let r = Self { from, to, points };
        r.validate()?;
        Ok(r)
    }

    pub fn single(value: f64) -> Self {
        Self {
            from: value,
            to: value,
            points: 1,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.points == 0 {
            return Err(Error::invalid("scan range", "range has no points"));
        }
        if !self.from.is_finite() || !self.to.is_finite() {
            return Err(Error::invalid("scan range", "endpoints must be finite"));
        }
        if self.points == 1 && self.from != self.to {
            return Err(Error::invalid(
                "scan range",
                format!("a single point cannot span [{}, {}]", self.from, self.to),
            ));
        }
        if self.points > 1 && !(self.to > self.from) {
            return Err(Error::invalid(
                "scan range",
                format!("to = {} must exceed from = {}", self.to, self.from),
            ));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.from];
        }
        let step = (self.to - self.from) / (self.points - 1) as f64;
        (0..self.points)
            .map(|i| {
                if i + 1 == self.points {
                    self.to
                } else {
                    self.from + i as f64 * step
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanRow {
    pub lambda: f64,
    pub mu: f64,
    pub kappa: f64,
    pub fq: f64,
    pub fp: f64,
    pub jointly_focused: bool,
}

/// Focusing measures over the product of three ranges, `λ` outermost and `κ` innermost.
pub fn scan_focusing(
    state: &ProbeState,
    lambda: &ParamRange,
    mu: &ParamRange,
    kappa: &ParamRange,
) -> Result<Vec<ScanRow>> {
    for r in [lambda, mu, kappa] {
        r.validate()?;
    }
    let m = state.moments();
    let (ls, us, ks) = (lambda.values(), mu.values(), kappa.values());
    let mut rows = Vec::with_capacity(ls.len() * us.len() * ks.len());
    for &l in &ls {
        for &u in &us {
            for &k in &ks {
                let c = CouplingParams::new(l, u, k)?;
                let f = focusing_measures(&m, &c);
                rows.push(ScanRow {
                    lambda: l,
                    mu: u,
                    kappa: k,
                    fq: f.fq,
                    fp: f.fp,
                    jointly_focused: f.jointly_focused,
                });
            }
        }
    }
    Ok(rows)
}
