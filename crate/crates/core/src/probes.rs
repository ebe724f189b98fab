//! Probe preparations: the unbiased two-mode Gaussian and finite mixtures of
//! product Gaussians, their first and second moments, and their sampled
//! position-representation wavefunctions.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::{edge_cells, interp, FourierPair, Grid1D};

/// Edge mass allowed when sampling a probe onto a grid.
pub const PROBE_EDGE_LIMIT: f64 = 1e-8;

/// Determinants below this are rejected; the position moments scale as `1/det D`.
pub const MIN_DET: f64 = 1e-12;

/// Pure two-mode Gaussian `φ(q) ∝ exp(-qᵀ D q)` with `D = [[a, b], [b, d]]`.
///
/// `a`, `b`, `d` are the momentum second moments `⟨P₁²⟩`, `⟨P₁P₂⟩`, `⟨P₂²⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianTwoMode {
    a: f64,
    b: f64,
    d: f64,
}

impl GaussianTwoMode {
    pub fn new(a: f64, b: f64, d: f64) -> Result<Self> {
        if ![a, b, d].iter().all(|v| v.is_finite()) {
            return Err(Error::invalid("gaussian probe", "non-finite entry in D"));
        }
        if !(a > 0.0) {
            return Err(Error::invalid("gaussian probe", format!("a = {a} violates a > 0")));
        }
        if !(d > 0.0) {
            return Err(Error::invalid("gaussian probe", format!("d = {d} violates d > 0")));
        }
        let det = a * d - b * b;
        if !(det > MIN_DET) {
            return Err(Error::invalid(
                "gaussian probe",
                format!("a·d - b² = {det:.3e} violates det D > {MIN_DET:e}"),
            ));
        }
        Ok(Self { a, b, d })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.b
    }

    pub fn moments(&self) -> MomentSet {
        let four_det = 4.0 * self.det();
        MomentSet {
            m_q1: 0.0,
            m_q2: 0.0,
            m_p1: 0.0,
            m_p2: 0.0,
            v_q1: self.d / four_det,
            v_q2: self.a / four_det,
            v_p1: self.a,
            v_p2: self.d,
            c_q: -self.b / four_det,
            c_p: self.b,
        }
    }

    pub fn amplitude(&self, q1: f64, q2: f64) -> f64 {
        let norm = (4.0 * self.det() / (PI * PI)).powf(0.25);
        norm * (-(self.a * q1 * q1 + 2.0 * self.b * q1 * q2 + self.d * q2 * q2)).exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixtureComponent {
    /// Classical weight of this component.
    pub weight: f64,
    /// Position mean shared by both probe modes.
    pub x: f64,
    /// Momentum mean shared by both probe modes.
    pub k: f64,
}

/// Classical mixture `Σ pᵢ σᵢ` of product Gaussians. Every component has
/// position variance `S` and momentum variance `R` in each mode.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductGaussianMixture {
    components: Vec<MixtureComponent>,
    s: f64,
    r: f64,
}

impl ProductGaussianMixture {
    pub fn new(components: Vec<MixtureComponent>, s: f64, r: f64) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::invalid("mixture probe", "no components"));
        }
        for (i, c) in components.iter().enumerate() {
            if !(c.weight > 0.0 && c.weight <= 1.0) {
                return Err(Error::invalid(
                    "mixture probe",
                    format!("weight p_{i} = {} violates 0 < p <= 1", c.weight),
                ));
            }
            if !c.x.is_finite() || !c.k.is_finite() {
                return Err(Error::invalid("mixture probe", format!("component {i} has a non-finite center")));
            }
        }
        let total: f64 = components.iter().map(|c| c.weight).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(
                "mixture probe",
                format!("weights sum to {total}, violating Σp = 1"),
            ));
        }
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::invalid("mixture probe", format!("S = {s} violates S > 0")));
        }
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::invalid("mixture probe", format!("R = {r} violates R > 0")));
        }
        if s * r < 0.25 - 1e-12 {
            return Err(Error::invalid(
                "mixture probe",
                format!("S·R = {} violates S·R >= 1/4", s * r),
            ));
        }
        Ok(Self { components, s, r })
    }

    /// Equal-weight two-component mixture centered at `(x1, k1)` and `(x2, k2)`.
    pub fn two_point(p: f64, (x1, k1): (f64, f64), (x2, k2): (f64, f64), s: f64, r: f64) -> Result<Self> {
        Self::new(
            vec![
                MixtureComponent { weight: p, x: x1, k: k1 },
                MixtureComponent { weight: 1.0 - p, x: x2, k: k2 },
            ],
            s,
            r,
        )
    }

    pub fn components(&self) -> &[MixtureComponent] {
        &self.components
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    /// Moments of component `i` alone.
    pub fn component_moments(&self, i: usize) -> MomentSet {
        let c = self.components[i];
        MomentSet {
            m_q1: c.x,
            m_q2: c.x,
            m_p1: c.k,
            m_p2: c.k,
            v_q1: self.s,
            v_q2: self.s,
            v_p1: self.r,
            v_p2: self.r,
            c_q: 0.0,
            c_p: 0.0,
        }
    }

    pub fn moments(&self) -> MomentSet {
        let w: f64 = 1.0;
        let mean_x: f64 = self.components.iter().map(|c| c.weight * c.x).sum::<f64>() / w;
        let mean_k: f64 = self.components.iter().map(|c| c.weight * c.k).sum::<f64>() / w;
        let spread_x: f64 = self
            .components
            .iter()
            .map(|c| c.weight * (c.x - mean_x).powi(2))
            .sum();
        let spread_k: f64 = self
            .components
            .iter()
            .map(|c| c.weight * (c.k - mean_k).powi(2))
            .sum();
        MomentSet {
            m_q1: mean_x,
            m_q2: mean_x,
            m_p1: mean_k,
            m_p2: mean_k,
            v_q1: self.s + spread_x,
            v_q2: self.s + spread_x,
            v_p1: self.r + spread_k,
            v_p2: self.r + spread_k,
            c_q: spread_x,
            c_p: spread_k,
        }
    }

    /// The same mixture with `R` replaced by `1/(4S)`, the only momentum variance a
    /// chirp-free Gaussian of position variance `S` can have. Returns the original
    /// `R` when a replacement happened.
    pub fn grid_realizable(&self) -> (Self, Option<RCoercion>) {
        let target = 0.25 / self.s;
        if (self.r - target).abs() <= 1e-12 * target {
            return (self.clone(), None);
        }
        let coerced = Self {
            components: self.components.clone(),
            s: self.s,
            r: target,
        };
        (
            coerced,
            Some(RCoercion {
                requested: self.r,
                used: target,
            }),
        )
    }
}

/// Record of `R` being forced to `1/(4S)` for the grid oracle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RCoercion {
    pub requested: f64,
    pub used: f64,
}

/// Means, variances and intra-probe covariances of the probe observables.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MomentSet {
    pub m_q1: f64,
    pub m_q2: f64,
    pub m_p1: f64,
    pub m_p2: f64,
    pub v_q1: f64,
    pub v_q2: f64,
    pub v_p1: f64,
    pub v_p2: f64,
    /// `Cov(Q₁, Q₂)`.
    pub c_q: f64,
    /// `Cov(P₁, P₂)`.
    pub c_p: f64,
}

impl MomentSet {
    /// Checks non-negative variances and the Cauchy–Schwarz bounds on both covariances.
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.m_q1, self.m_q2, self.m_p1, self.m_p2, self.v_q1, self.v_q2, self.v_p1,
            self.v_p2, self.c_q, self.c_p,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("moment set", "non-finite entry"));
        }
        for (name, v) in [
            ("Var(Q1)", self.v_q1),
            ("Var(Q2)", self.v_q2),
            ("Var(P1)", self.v_p1),
            ("Var(P2)", self.v_p2),
        ] {
            if v < 0.0 {
                return Err(Error::invalid("moment set", format!("{name} = {v} < 0")));
            }
        }
        let slack = |bound: f64| bound * (1.0 + 1e-12) + 1e-15;
        if self.c_q.abs() > slack((self.v_q1 * self.v_q2).sqrt()) {
            return Err(Error::invalid(
                "moment set",
                format!("|Cov(Q1,Q2)| = {} exceeds sqrt(Var Q1 Var Q2)", self.c_q.abs()),
            ));
        }
        if self.c_p.abs() > slack((self.v_p1 * self.v_p2).sqrt()) {
            return Err(Error::invalid(
                "moment set",
                format!("|Cov(P1,P2)| = {} exceeds sqrt(Var P1 Var P2)", self.c_p.abs()),
            ));
        }
        Ok(())
    }

    /// Law of total (co)variance for a classical mixture of states with the given moments.
    pub fn mixture(parts: &[(f64, MomentSet)]) -> MomentSet {
        let w: f64 = parts.iter().map(|(p, _)| p).sum();
        let avg = |f: &dyn Fn(&MomentSet) -> f64| parts.iter().map(|(p, m)| p * f(m)).sum::<f64>() / w;
        let m_q1 = avg(&|m| m.m_q1);
        let m_q2 = avg(&|m| m.m_q2);
        let m_p1 = avg(&|m| m.m_p1);
        let m_p2 = avg(&|m| m.m_p2);
        MomentSet {
            m_q1,
            m_q2,
            m_p1,
            m_p2,
            v_q1: avg(&|m| m.v_q1 + (m.m_q1 - m_q1).powi(2)),
            v_q2: avg(&|m| m.v_q2 + (m.m_q2 - m_q2).powi(2)),
            v_p1: avg(&|m| m.v_p1 + (m.m_p1 - m_p1).powi(2)),
            v_p2: avg(&|m| m.v_p2 + (m.m_p2 - m_p2).powi(2)),
            c_q: avg(&|m| m.c_q + (m.m_q1 - m_q1) * (m.m_q2 - m_q2)),
            c_p: avg(&|m| m.c_p + (m.m_p1 - m_p1) * (m.m_p2 - m_p2)),
        }
    }
}

/// Either analytic probe family.
#[derive(Debug, Clone, PartialEq)]
pub enum ProbeState {
    Gaussian(GaussianTwoMode),
    Mixture(ProductGaussianMixture),
}

impl From<GaussianTwoMode> for ProbeState {
    fn from(g: GaussianTwoMode) -> Self {
        ProbeState::Gaussian(g)
    }
}

impl From<ProductGaussianMixture> for ProbeState {
    fn from(m: ProductGaussianMixture) -> Self {
        ProbeState::Mixture(m)
    }
}

impl ProbeState {
    pub fn moments(&self) -> MomentSet {
        match self {
            ProbeState::Gaussian(g) => g.moments(),
            ProbeState::Mixture(m) => m.moments(),
        }
    }
}

pub fn probe_moments(state: &ProbeState) -> MomentSet {
    state.moments()
}

/// Two-mode amplitudes `φ(q₁, q₂)` on a product grid, row-major with `q₁` slow.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeWavefunction {
    grid_q1: Grid1D,
    grid_q2: Grid1D,
    amplitudes: Vec<Complex64>,
}

impl ProbeWavefunction {
    pub fn new(grid_q1: Grid1D, grid_q2: Grid1D, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != grid_q1.n() * grid_q2.n() {
            return Err(Error::GridMismatch(format!(
                "{} amplitudes for a {}x{} probe grid",
                amplitudes.len(),
                grid_q1.n(),
                grid_q2.n()
            )));
        }
        if amplitudes.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::invalid("probe wavefunction", "non-finite amplitude"));
        }
        Ok(Self {
            grid_q1,
            grid_q2,
            amplitudes,
        })
    }

    pub fn from_fn(grid_q1: Grid1D, grid_q2: Grid1D, f: impl Fn(f64, f64) -> Complex64) -> Self {
        let mut amplitudes = Vec::with_capacity(grid_q1.n() * grid_q2.n());
        for q1 in grid_q1.points() {
            for q2 in grid_q2.points() {
                amplitudes.push(f(q1, q2));
            }
        }
        Self {
            grid_q1,
            grid_q2,
            amplitudes,
        }
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

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>()
            * self.grid_q1.dx()
            * self.grid_q2.dx()
    }

    pub fn normalized(mut self) -> Result<Self> {
        let n2 = self.norm_sqr();
        if !(n2 > 0.0) {
            return Err(Error::invalid("probe wavefunction", "zero norm"));
        }
        let s = 1.0 / n2.sqrt();
        for a in &mut self.amplitudes {
            *a *= s;
        }
        Ok(self)
    }

    /// `|φ(q₁, q₂)|²` samples, row-major.
    pub fn position_density(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn value_at(&self, q1: f64, q2: f64) -> Complex64 {
        interp::bilinear(&self.grid_q1, &self.grid_q2, &self.amplitudes, q1, q2)
    }

    /// Probability in the outermost rows and columns.
    pub fn edge_mass(&self) -> f64 {
        let (n1, n2) = (self.grid_q1.n(), self.grid_q2.n());
        let (k1, k2) = (edge_cells(n1), edge_cells(n2));
        let mut m = 0.0;
        for i in 0..n1 {
            for j in 0..n2 {
                if i < k1 || i >= n1 - k1 || j < k2 || j >= n2 - k2 {
                    m += self.amplitudes[i * n2 + j].norm_sqr();
                }
            }
        }
        m * self.grid_q1.dx() * self.grid_q2.dx()
    }

    pub(crate) fn check_edges(&self, what: &str, limit: f64, hint: String) -> Result<()> {
        let m = self.edge_mass();
        if m > limit {
            return Err(Error::truncation(what, m, limit, hint));
        }
        Ok(())
    }

    /// Momentum amplitudes `φ̃(p₁, p₂)` on the symmetric conjugate grids.
    pub fn fourier_transform(&self) -> ProbeWavefunction {
        let (n1, n2) = (self.grid_q1.n(), self.grid_q2.n());
        let f1 = FourierPair::centered(self.grid_q1);
        let f2 = FourierPair::centered(self.grid_q2);
        let mut data = self.amplitudes.clone();
        f2.forward_lanes(&mut data);
        let mut t = transpose(&data, n1, n2);
        f1.forward_lanes(&mut t);
        let data = transpose(&t, n2, n1);
        ProbeWavefunction {
            grid_q1: *f1.p_grid(),
            grid_q2: *f2.p_grid(),
            amplitudes: data,
        }
    }

    /// Means, variances and covariance `(m₁, m₂, v₁, v₂, c)` of `|φ|²` over this
    /// array's own coordinates.
    pub(crate) fn density_stats(&self) -> (f64, f64, f64, f64, f64) {
        second_moments(&self.grid_q1, &self.grid_q2, &self.amplitudes)
    }

    /// Same samples embedded in a `factor` times longer grid on both axes.
    pub fn zero_padded(&self, factor: usize) -> Result<Self> {
        self.zero_padded_axes(factor, factor)
    }

    /// Zero padding with separate factors for the `q₁` and `q₂` axes.
    pub fn zero_padded_axes(&self, factor1: usize, factor2: usize) -> Result<Self> {
        if factor1 == 0 || factor2 == 0 {
            return Err(Error::invalid("padding", "factor must be >= 1"));
        }
        let pad = |g: &Grid1D, factor: usize| -> Result<(Grid1D, usize)> {
            let (n, dx) = (g.n(), g.dx());
            let m = n * factor;
            let offset = m / 2 - n / 2;
            Ok((Grid1D::with_spacing(m, g.x_min() - offset as f64 * dx, dx)?, offset))
        };
        let (g1, o1) = pad(&self.grid_q1, factor1)?;
        let (g2, o2) = pad(&self.grid_q2, factor2)?;
        let (n2, m2) = (self.grid_q2.n(), g2.n());
        let mut amplitudes = vec![Complex64::default(); g1.n() * m2];
        for (i, row) in self.amplitudes.chunks(n2).enumerate() {
            let start = (i + o1) * m2 + o2;
            amplitudes[start..start + n2].copy_from_slice(row);
        }
        Ok(Self {
            grid_q1: g1,
            grid_q2: g2,
            amplitudes,
        })
    }

    /// `φ̃(p₁, p₂)` from a zero-padded transform, so the momentum spacing is
    /// `pad` times finer than the plain conjugate grid. Fails when momentum
    /// content reaches the edges of the conjugate grid.
    pub fn momentum_representation(&self, pad: usize) -> Result<Self> {
        self.momentum_representation_axes(pad, pad)
    }

    /// [`Self::momentum_representation`] with separate padding per axis.
    pub fn momentum_representation_axes(&self, pad1: usize, pad2: usize) -> Result<Self> {
        let ft = self.zero_padded_axes(pad1, pad2)?.fourier_transform();
        let hint = format!(
            "momentum content exceeds ±π/dq; refine the probe grid (dq₁ = {:.4}, dq₂ = {:.4})",
            self.grid_q1.dx(),
            self.grid_q2.dx()
        );
        ft.check_edges("probe momentum", crate::numerics::FOURIER_EDGE_LIMIT, hint)?;
        Ok(ft)
    }

    /// Position moments by quadrature of `|φ|²`, momentum moments by quadrature
    /// of `|φ̃|²`. Serves as the grid oracle for [`probe_moments`].
    pub fn moments(&self) -> MomentSet {
        let (q1m, q2m, v1, v2, c) = second_moments(&self.grid_q1, &self.grid_q2, &self.amplitudes);
        let ft = self.fourier_transform();
        let (p1m, p2m, w1, w2, cp) = second_moments(&ft.grid_q1, &ft.grid_q2, &ft.amplitudes);
        MomentSet {
            m_q1: q1m,
            m_q2: q2m,
            m_p1: p1m,
            m_p2: p2m,
            v_q1: v1,
            v_q2: v2,
            v_p1: w1,
            v_p2: w2,
            c_q: c,
            c_p: cp,
        }
    }
}

fn transpose(data: &[Complex64], rows: usize, cols: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::default(); data.len()];
    for i in 0..rows {
        for j in 0..cols {
            out[j * rows + i] = data[i * cols + j];
        }
    }
    out
}

fn second_moments(g1: &Grid1D, g2: &Grid1D, amps: &[Complex64]) -> (f64, f64, f64, f64, f64) {
    let n2 = g2.n();
    let mut w = 0.0;
    let (mut s1, mut s2) = (0.0, 0.0);
    for (i, x1) in g1.points().enumerate() {
        for (j, x2) in g2.points().enumerate() {
            let p = amps[i * n2 + j].norm_sqr();
            w += p;
            s1 += p * x1;
            s2 += p * x2;
        }
    }
    let (m1, m2) = (s1 / w, s2 / w);
    let (mut v1, mut v2, mut c) = (0.0, 0.0, 0.0);
    for (i, x1) in g1.points().enumerate() {
        for (j, x2) in g2.points().enumerate() {
            let p = amps[i * n2 + j].norm_sqr();
            v1 += p * (x1 - m1).powi(2);
            v2 += p * (x2 - m2).powi(2);
            c += p * (x1 - m1) * (x2 - m2);
        }
    }
    (m1, m2, v1 / w, v2 / w, c / w)
}

fn required_extent_hint(m: &MomentSet) -> String {
    let w = 7.0 * m.v_q1.max(m.v_q2).sqrt();
    format!(
        "grid must reach at least ±{w:.3} around ({:.3}, {:.3})",
        m.m_q1, m.m_q2
    )
}

/// Samples the two-mode Gaussian on the product `grid × grid`.
pub fn sample_wavefunction(state: &GaussianTwoMode, grid: &Grid1D) -> Result<ProbeWavefunction> {
    sample_wavefunction_on(state, grid, grid)
}

pub fn sample_wavefunction_on(
    state: &GaussianTwoMode,
    grid_q1: &Grid1D,
    grid_q2: &Grid1D,
) -> Result<ProbeWavefunction> {
    let phi = ProbeWavefunction::from_fn(*grid_q1, *grid_q2, |q1, q2| {
        Complex64::new(state.amplitude(q1, q2), 0.0)
    });
    phi.check_edges("probe", PROBE_EDGE_LIMIT, required_extent_hint(&state.moments()))?;
    Ok(phi)
}

/// Samples component `i` of the mixture as a chirp-free product Gaussian with
/// position variance `S` per mode, so its momentum variance is `1/(4S)`.
pub fn sample_component_wavefunction(
    state: &ProductGaussianMixture,
    i: usize,
    grid_q1: &Grid1D,
    grid_q2: &Grid1D,
) -> Result<ProbeWavefunction> {
    let c = *state.components.get(i).ok_or_else(|| {
        Error::invalid(
            "mixture component",
            format!("index {i} out of range for {} components", state.components.len()),
        )
    })?;
    let s = state.s;
    let norm = (2.0 * PI * s).powf(-0.25);
    let mode = |q: f64| Complex64::from_polar(norm * (-(q - c.x).powi(2) / (4.0 * s)).exp(), c.k * q);
    let phi = ProbeWavefunction::from_fn(*grid_q1, *grid_q2, |q1, q2| mode(q1) * mode(q2));
    phi.check_edges(
        "probe component",
        PROBE_EDGE_LIMIT,
        required_extent_hint(&state.component_moments(i)),
    )?;
    Ok(phi)
}

/// Weighted list of pure probe wavefunctions describing `σ₁₂ = Σ pᵢ |φᵢ⟩⟨φᵢ|`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeEnsemble {
    components: Vec<(f64, ProbeWavefunction)>,
}

impl ProbeEnsemble {
    pub fn new(components: Vec<(f64, ProbeWavefunction)>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::invalid("probe ensemble", "no components"));
        }
        let total: f64 = components.iter().map(|(w, _)| w).sum();
        if (total - 1.0).abs() > 1e-9 || components.iter().any(|(w, _)| !(*w > 0.0)) {
            return Err(Error::invalid(
                "probe ensemble",
                format!("weights must be positive and sum to 1, got {total}"),
            ));
        }
        let g1 = *components[0].1.grid_q1();
        let g2 = *components[0].1.grid_q2();
        if components.iter().any(|(_, c)| *c.grid_q1() != g1 || *c.grid_q2() != g2) {
            return Err(Error::GridMismatch("ensemble components must share grids".into()));
        }
        Ok(Self { components })
    }

    pub fn pure(phi: ProbeWavefunction) -> Self {
        Self {
            components: vec![(1.0, phi)],
        }
    }

    /// Samples an analytic probe state onto `grid_q1 × grid_q2`. Mixtures whose `R`
    /// differs from `1/(4S)` are sampled with the coerced value, which is reported.
    pub fn sample(
        state: &ProbeState,
        grid_q1: &Grid1D,
        grid_q2: &Grid1D,
    ) -> Result<(Self, Option<RCoercion>)> {
        match state {
            ProbeState::Gaussian(g) => Ok((Self::pure(sample_wavefunction_on(g, grid_q1, grid_q2)?), None)),
            ProbeState::Mixture(m) => {
                let (m, coercion) = m.grid_realizable();
                let components = (0..m.components().len())
                    .map(|i| {
                        Ok((
                            m.components()[i].weight,
                            sample_component_wavefunction(&m, i, grid_q1, grid_q2)?,
                        ))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok((Self { components }, coercion))
            }
        }
    }

    pub fn components(&self) -> &[(f64, ProbeWavefunction)] {
        &self.components
    }

    pub fn grid_q1(&self) -> &Grid1D {
        self.components[0].1.grid_q1()
    }

    pub fn grid_q2(&self) -> &Grid1D {
        self.components[0].1.grid_q2()
    }

    /// Grid-quadrature moments of the ensemble.
    pub fn moments(&self) -> MomentSet {
        let parts: Vec<(f64, MomentSet)> = self
            .components
            .iter()
            .map(|(w, phi)| (*w, phi.moments()))
            .collect();
        MomentSet::mixture(&parts)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Grid1D {
        Grid1D::centered(256, 0.0, 9.0).unwrap()
    }

    #[test]
    fn symmetric_vacuum_like_state() {
        let m = GaussianTwoMode::new(0.5, 0.0, 0.5).unwrap().moments();
        for v in [m.v_q1, m.v_q2, m.v_p1, m.v_p2] {
            assert!((v - 0.5).abs() < 1e-15);
        }
        assert_eq!((m.c_q, m.c_p), (0.0, 0.0));
    }

    #[test]
    fn correlated_gaussian_identities() {
        // det D = 0.19, 4 det D = 0.76.
        let m = GaussianTwoMode::new(1.0, 0.9, 1.0).unwrap().moments();
        assert!((m.c_p - 0.9).abs() < 1e-15);
        assert!((m.c_q + 0.9 / 0.76).abs() < 1e-12);
        assert!((m.v_q2 - 1.0 / 0.76).abs() < 1e-12);
        assert!((m.c_q + 1.18421).abs() < 1e-5);
        assert!((m.v_q2 - 1.31579).abs() < 1e-5);
    }

    #[test]
    fn rejects_invalid_states() {
        assert!(GaussianTwoMode::new(1.0, 1.0, 1.0).is_err());
        assert!(GaussianTwoMode::new(-1.0, 0.0, 1.0).is_err());
        let e = GaussianTwoMode::new(1.0, 0.0, 0.0).unwrap_err().to_string();
        assert!(e.contains("d > 0"), "{e}");
        let c = |w: f64| MixtureComponent { weight: w, x: 0.0, k: 0.0 };
        assert!(ProductGaussianMixture::new(vec![c(0.5), c(0.4)], 0.5, 0.5).is_err());
        let e = ProductGaussianMixture::new(vec![c(1.0)], 0.5, 0.1).unwrap_err().to_string();
        assert!(e.contains("S·R"), "{e}");
    }

    #[test]
    fn two_component_mixture_covariances() {
        let m = ProductGaussianMixture::two_point(0.5, (1.0, 1.0), (-1.0, -1.0), 0.5, 0.5).unwrap();
        let ms = m.moments();
        assert!((ms.c_q - 1.0).abs() < 1e-15);
        assert!((ms.c_p - 1.0).abs() < 1e-15);
        assert!((ms.v_q1 - 1.5).abs() < 1e-15);
        // (p - p²)(x₁ - x₂)² for an unequal split
        let m = ProductGaussianMixture::two_point(0.3, (2.0, 0.5), (-0.5, 1.5), 0.7, 0.4).unwrap();
        let ms = m.moments();
        assert!((ms.c_q - 0.21 * 6.25).abs() < 1e-12);
        assert!((ms.c_p - 0.21 * 1.0).abs() < 1e-12);
    }

    #[test]
    fn mixture_grid_oracle_matches() {
        // Ensemble second moments summed from component grid moments.
        let m = ProductGaussianMixture::two_point(0.5, (1.0, 1.0), (-1.0, -1.0), 0.5, 0.5).unwrap();
        let g = grid();
        let (ens, coercion) = ProbeEnsemble::sample(&ProbeState::Mixture(m), &g, &g).unwrap();
        assert!(coercion.is_none());
        let ms = ens.moments();
        assert!((ms.c_q - 1.0).abs() < 1e-6);
        assert!((ms.c_p - 1.0).abs() < 1e-6);
        assert!((ms.v_q1 - 1.5).abs() < 1e-6);
    }

    #[test]
    fn sampled_gaussian_matches_identities() {
        let g = GaussianTwoMode::new(1.0, 0.9, 1.0).unwrap();
        let phi = sample_wavefunction(&g, &grid()).unwrap();
        assert!((phi.norm_sqr() - 1.0).abs() < 1e-8);
        let grid_m = phi.moments();
        let exact = g.moments();
        assert!((grid_m.c_q - exact.c_q).abs() < 1e-3);
        for (a, b) in [
            (grid_m.v_q1, exact.v_q1),
            (grid_m.v_q2, exact.v_q2),
            (grid_m.c_q, exact.c_q),
            (grid_m.v_p1, exact.v_p1),
            (grid_m.v_p2, exact.v_p2),
            (grid_m.c_p, exact.c_p),
        ] {
            assert!(((a - b) / b).abs() < 1e-4, "{a} vs {b}");
        }
    }

    #[test]
    fn product_state_has_no_position_correlation() {
        let g = GaussianTwoMode::new(0.5, 0.0, 0.5).unwrap();
        let phi = sample_wavefunction(&g, &grid()).unwrap();
        assert!(phi.moments().c_q.abs() < 1e-6);
    }

    #[test]
    fn narrow_grid_is_truncation() {
        let g = GaussianTwoMode::new(1.0, 0.9, 1.0).unwrap();
        let narrow = Grid1D::centered(64, 0.0, 2.0).unwrap();
        let err = sample_wavefunction(&g, &narrow).unwrap_err();
        assert!(matches!(err, Error::Truncation { .. }));
        assert!(err.to_string().contains("at least"));
    }

    #[test]
    fn component_sampling_translates() {
        let m = ProductGaussianMixture::two_point(0.5, (1.0, 0.0), (0.0, 1.0), 0.5, 0.5).unwrap();
        let g = grid();
        let phi0 = sample_component_wavefunction(&m, 0, &g, &g).unwrap();
        let mom0 = phi0.moments();
        assert!((mom0.m_q1 - 1.0).abs() < 1e-6);
        let phi1 = sample_component_wavefunction(&m, 1, &g, &g).unwrap();
        let mom1 = phi1.moments();
        assert!((mom1.m_p1 - 1.0).abs() < 1e-4);
        assert!((mom1.v_p1 - 0.5).abs() < 1e-4);
        assert!(sample_component_wavefunction(&m, 2, &g, &g).is_err());
    }

    #[test]
    fn padded_transform_keeps_moments() {
        let g = GaussianTwoMode::new(1.0, 0.9, 1.0).unwrap();
        let phi = sample_wavefunction(&g, &grid()).unwrap();
        let coarse = phi.momentum_representation(1).unwrap();
        let fine = phi.momentum_representation(2).unwrap();
        assert!((fine.grid_q1().dx() * 2.0 - coarse.grid_q1().dx()).abs() < 1e-12);
        assert!((fine.norm_sqr() - 1.0).abs() < 1e-9);
        let (_, _, v1, v2, c) = fine.density_stats();
        assert!((v1 - 1.0).abs() < 1e-6 && (v2 - 1.0).abs() < 1e-6 && (c - 0.9).abs() < 1e-6);
    }

    #[test]
    fn coercion_is_reported() {
        let m = ProductGaussianMixture::two_point(0.5, (1.0, 1.0), (-1.0, -1.0), 0.5, 2.0).unwrap();
        let (c, report) = m.grid_realizable();
        assert_eq!(c.r(), 0.5);
        assert_eq!(report, Some(RCoercion { requested: 2.0, used: 0.5 }));
    }
}
