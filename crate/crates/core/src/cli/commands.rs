use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};

use crate::akmodel::{focusing_measures, focusing_predicate, noise_moments, scan_focusing, FocusingReport, NoiseMoments};
use crate::error::{Error, Result};
use crate::metrology::{
    observable_distance_to_sharp, ozawa_error, uncertainty_products, wasserstein2, UncertaintyProducts,
};
use crate::numerics::{Distribution1D, Grid1D, JointDistribution2D};
use crate::probes::{MomentSet, RCoercion};
use crate::simulator::{Oracle, ProbeSpec};

use super::config::RunConfig;
use super::format::{g12, Csv};

/// Text files produced by a command, keyed by file name.
pub type Files = Vec<(String, String)>;

/// Outcome of one command: the JSON or CSV printed on stdout, files for the
/// output directory, and whether every check passed.
#[derive(Debug)]
pub struct CommandOutput {
    pub stdout: String,
    pub files: Files,
    pub passed: bool,
}

/// One named comparison of a measured value against a tolerance.
#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    /// Passes when `value <= tolerance`.
    fn at_most(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            value,
            tolerance,
            passed: value <= tolerance,
        }
    }

    /// Passes when `value >= bound`.
    fn at_least(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self {
            name: name.into(),
            value,
            tolerance: bound,
            passed: value >= bound,
        }
    }

    fn flag(name: impl Into<String>, ok: bool) -> Self {
        Self {
            name: name.into(),
            value: if ok { 1.0 } else { 0.0 },
            tolerance: 1.0,
            passed: ok,
        }
    }

    fn to_json(&self) -> Value {
        json!({
            "name": self.name,
            "value": self.value,
            "tolerance": self.tolerance,
            "verdict": if self.passed { "pass" } else { "fail" },
        })
    }
}

/// Rewrites `-0.0` as `0.0` so signed zeros do not leak into reports.
fn unsign_zeros(v: &mut Value) {
    match v {
        Value::Number(n) if n.as_f64() == Some(0.0) => *v = json!(0.0),
        Value::Array(items) => items.iter_mut().for_each(unsign_zeros),
        Value::Object(map) => map.values_mut().for_each(unsign_zeros),
        _ => {}
    }
}

fn pretty(v: &Value) -> String {
    let mut v = v.clone();
    unsign_zeros(&mut v);
    let mut s = serde_json::to_string_pretty(&v).expect("JSON values always serialize");
    s.push('\n');
    s
}

fn coercion_json(c: Option<RCoercion>) -> Value {
    match c {
        Some(c) => json!({"requested_R": c.requested, "used_R": c.used}),
        None => Value::Null,
    }
}

/// Probe moments: closed form for analytic probes, grid quadrature for raw arrays.
fn config_moments(cfg: &RunConfig) -> Result<MomentSet> {
    match cfg.probe_spec()? {
        ProbeSpec::Analytic(state) => Ok(state.moments()),
        ProbeSpec::Sampled(phi) => Ok(phi.moments()),
    }
}

fn moments_json(m: &MomentSet, nm: &NoiseMoments, f: &FocusingReport, u: &UncertaintyProducts) -> Value {
    json!({
        "mQ1": m.m_q1, "mQ2": m.m_q2, "mP1": m.m_p1, "mP2": m.m_p2,
        "vQ1": m.v_q1, "vQ2": m.v_q2, "vP1": m.v_p1, "vP2": m.v_p2,
        "cQ": m.c_q, "cP": m.c_p,
        "e1": nm.e1, "e2": nm.e2, "varE": nm.var_e,
        "f1": nm.f1, "f2": nm.f2, "varF": nm.var_f,
        "varE_single": nm.var_e_single, "varF_single": nm.var_f_single,
        "FQ": f.fq, "FP": f.fp, "jointly_focused": f.jointly_focused,
        "varProduct": u.var_product, "m2Product": u.m2_product,
    })
}

pub fn moments(cfg: &RunConfig) -> Result<CommandOutput> {
    let c = cfg.coupling()?;
    let m = config_moments(cfg)?;
    let nm = noise_moments(&m, &c);
    let f = focusing_measures(&m, &c);
    let u = uncertainty_products(&nm);
    let text = pretty(&moments_json(&m, &nm, &f, &u));
    Ok(CommandOutput {
        files: vec![("moments.json".into(), text.clone())],
        stdout: text,
        passed: true,
    })
}

pub fn scan(cfg: &RunConfig) -> Result<CommandOutput> {
    let [l, u, k] = cfg.scan_ranges()?;
    let state = cfg.probe_state()?.ok_or_else(|| Error::Config {
        location: "probe".into(),
        reason: "scan needs an analytic probe (gaussian2 or mixture)".into(),
    })?;
    let rows = scan_focusing(&state, &l, &u, &k)?;
    let mut csv = Csv::new(&["lambda", "mu", "kappa", "FQ", "FP", "jointly_focused"]);
    for r in rows {
        csv.row(&[
            g12(r.lambda),
            g12(r.mu),
            g12(r.kappa),
            g12(r.fq),
            g12(r.fp),
            r.jointly_focused.to_string(),
        ]);
    }
    let text = csv.into_string();
    Ok(CommandOutput {
        files: vec![("scan.csv".into(), text.clone())],
        stdout: text,
        passed: true,
    })
}

fn oracle(cfg: &RunConfig) -> Result<Oracle> {
    Ok(Oracle::new(&cfg.system_spec()?, &cfg.probe_spec()?, cfg.coupling()?, cfg.grid_spec()?)?.with_fault(cfg.fault()))
}

fn density_csv(d: &Distribution1D, column: &str) -> String {
    let mut csv = Csv::new(&[column, "density"]);
    for (x, v) in d.grid().points().zip(d.density()) {
        csv.row_floats(&[x, *v]);
    }
    csv.into_string()
}

fn joint_csv(j: &JointDistribution2D) -> String {
    let mut csv = Csv::new(&["x", "y", "density"]);
    let ny = j.grid_p().n();
    for (i, x) in j.grid_q().points().enumerate() {
        for (k, y) in j.grid_p().points().enumerate() {
            csv.row_floats(&[x, y, j.density()[i * ny + k]]);
        }
    }
    csv.into_string()
}

fn marginal_csv(m: &Distribution1D, predicted: &Distribution1D, column: &str) -> String {
    let mut csv = Csv::new(&[column, "oracle", "convolution"]);
    for (x, v) in m.grid().points().zip(m.density()) {
        csv.row_floats(&[x, *v, predicted.value_at(x)]);
    }
    csv.into_string()
}

fn relative(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// Oracle marginals and noise densities against the closed-form moments.
fn moment_checks(o: &Oracle, joint: &JointDistribution2D, tol: f64) -> Result<(Vec<Check>, Distribution1D, Distribution1D)> {
    let nm = o.noise_moments();
    let st = o.system_stats();
    let (mx, my) = (joint.marginal_q()?, joint.marginal_p()?);
    let e = o.noise_distribution_q()?;
    let f = o.noise_distribution_p()?;
    let checks = vec![
        Check::at_most("outcome_mean_x", (mx.mean() - (st.mean_q - nm.e1)).abs(), tol),
        Check::at_most("outcome_mean_y", (my.mean() - (st.mean_p - nm.f1)).abs(), tol),
        Check::at_most("outcome_variance_x", relative(mx.variance(), st.var_q + nm.var_e), tol),
        Check::at_most("outcome_variance_y", relative(my.variance(), st.var_p + nm.var_f), tol),
        Check::at_most("noise_mean_q", (e.mean() - nm.e1).abs(), tol),
        Check::at_most("noise_mean_p", (f.mean() - nm.f1).abs(), tol),
        Check::at_most("noise_variance_q", relative(e.variance(), nm.var_e), tol),
        Check::at_most("noise_variance_p", relative(f.variance(), nm.var_f), tol),
    ];
    Ok((checks, e, f))
}

fn report(checks: &[Check], extra: Map<String, Value>) -> (String, bool) {
    let passed = checks.iter().all(|c| c.passed);
    let mut obj = extra;
    obj.insert("checks".into(), Value::Array(checks.iter().map(Check::to_json).collect()));
    obj.insert("pass".into(), Value::Bool(passed));
    (pretty(&Value::Object(obj)), passed)
}

pub fn simulate(cfg: &RunConfig, shift: Option<(f64, f64)>) -> Result<CommandOutput> {
    let tol = &cfg.tolerances;
    let o = oracle(cfg)?;
    let joint = o.joint_distribution()?;
    let forms = o.convolution_forms()?;
    let marg = o.marginal_check_against(&joint)?;
    let (mut checks, e, f) = moment_checks(&o, &joint, tol.moments)?;
    checks.insert(0, Check::at_most("marginal_position", marg.position, tol.marginal));
    checks.insert(1, Check::at_most("marginal_momentum", marg.momentum, tol.marginal));
    if let Some((q0, p0)) = shift {
        checks.push(Check::at_most(
            format!("covariance_shift_{}_{}", g12(q0), g12(p0)),
            o.covariance_test(q0, p0)?,
            tol.covariance,
        ));
    }

    let mut extra = Map::new();
    extra.insert("convention".into(), json!("marginal_x = rho_psi * e(-x), marginal_y = rho_psi_tilde * f(-y)"));
    extra.insert(
        "unreflected".into(),
        json!({"position": marg.position_unreflected, "momentum": marg.momentum_unreflected}),
    );
    extra.insert("R_coercion".into(), coercion_json(o.coercion()));
    let (summary, passed) = report(&checks, extra);

    let files = vec![
        ("joint.csv".into(), joint_csv(&joint)),
        ("marginal_x.csv".into(), marginal_csv(&joint.marginal_q()?, &forms.position, "x")),
        ("marginal_y.csv".into(), marginal_csv(&joint.marginal_p()?, &forms.momentum, "y")),
        ("noise_q.csv".into(), density_csv(&e, "x")),
        ("noise_p.csv".into(), density_csv(&f, "p")),
        ("summary.json".into(), summary.clone()),
    ];
    Ok(CommandOutput {
        stdout: summary,
        files,
        passed,
    })
}

/// Random smearing densities: mixtures of two or three normals.
fn random_smearings(seed: u64, count: usize) -> Result<Vec<Distribution1D>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let grid = Grid1D::centered(2048, 0.0, 16.0)?;
    (0..count)
        .map(|_| {
            let parts: Vec<(f64, f64, f64)> = (0..rng.random_range(2..=3))
                .map(|_| {
                    (
                        rng.random_range(0.2..1.0),
                        rng.random_range(-2.0..2.0),
                        rng.random_range(0.2..1.2f64),
                    )
                })
                .collect();
            Distribution1D::from_fn(grid, |x| {
                parts
                    .iter()
                    .map(|(w, m, s)| w / s * (-(x - m).powi(2) / (2.0 * s * s)).exp())
                    .sum()
            })
        })
        .collect()
}

fn metrology_checks(samples: &[Distribution1D], tol: &super::config::Tolerances) -> Result<Vec<Check>> {
    let mut equivalence = 0.0f64;
    let mut transport = 0.0f64;
    for m in samples {
        let a = ozawa_error(m)?;
        let b = observable_distance_to_sharp(m)?;
        equivalence = equivalence.max((a - b).abs());
        let delta = Distribution1D::point_mass(0.0, m.grid().dx())?;
        transport = transport.max((wasserstein2(m, &delta)? - m.moment(2).sqrt()).abs());
    }
    let grid = Grid1D::centered(2048, 0.0, 16.0)?;
    let (m1, s1, m2, s2) = (0.5, 0.8, -1.0, 1.3);
    let a = Distribution1D::gaussian(grid, m1, s1 * s1)?;
    let b = Distribution1D::gaussian(grid, m2, s2 * s2)?;
    let closed = ((m1 - m2).powi(2) + (s1 - s2).powi(2)).sqrt();
    Ok(vec![
        Check::at_most("error_measure_equivalence", equivalence, tol.equivalence),
        Check::at_most("sharp_distance_transport", transport, tol.wasserstein),
        Check::at_most("gaussian_wasserstein_closed_form", (wasserstein2(&a, &b)? - closed).abs(), tol.wasserstein),
    ])
}

/// Sign agreement between a grid variance difference and its closed form.
/// Differences smaller than `tol` relative to the single-probe variance count as ties.
fn sign_check(name: &str, grid_diff: f64, closed: f64, scale: f64, tol: f64) -> Check {
    let tie = closed.abs() <= tol * scale;
    let ok = tie || (grid_diff < 0.0) == (closed < 0.0);
    Check {
        name: name.into(),
        value: grid_diff,
        tolerance: closed,
        passed: ok,
    }
}

pub fn verify(cfg: &RunConfig, shifts: &[(f64, f64)], seed: u64) -> Result<CommandOutput> {
    let tol = &cfg.tolerances;
    let c = cfg.coupling()?;
    let o = oracle(cfg)?;
    let nm = o.noise_moments();
    let focus = focusing_measures(o.probe_moments(), &c);
    let products = uncertainty_products(&nm);

    let mut checks = vec![
        Check::at_least("uncertainty_variance_product", products.var_product, 0.25 - crate::metrology::UNCERTAINTY_SLACK),
        Check::at_least("uncertainty_second_moment_product", products.m2_product, 0.25 - crate::metrology::UNCERTAINTY_SLACK),
    ];

    let joint = o.joint_distribution()?;
    for &(q0, p0) in shifts {
        let shifted = o.shifted_joint_distribution(q0, p0)?;
        checks.push(Check::at_most(
            format!("covariance_shift_{}_{}", g12(q0), g12(p0)),
            joint.max_abs_difference(&shifted)?,
            tol.covariance,
        ));
        checks.push(Check::at_most(
            format!("covariance_fixed_quadrature_shift_{}_{}", g12(q0), g12(p0)),
            o.covariance_test_fixed_quadrature(q0, p0)?,
            tol.covariance,
        ));
    }
    let marg = o.marginal_check_against(&joint)?;
    checks.push(Check::at_most("marginal_position", marg.position, tol.marginal));
    checks.push(Check::at_most("marginal_momentum", marg.momentum, tol.marginal));
    let (moment_checks, e, f) = moment_checks(&o, &joint, tol.moments)?;
    checks.extend(moment_checks);

    let e_single = o.single_probe_noise_q()?;
    let f_single = o.single_probe_noise_p()?;
    checks.push(sign_check(
        "focusing_sign_q",
        e.variance() - e_single.variance(),
        focus.fq,
        nm.var_e_single,
        tol.moments,
    ));
    checks.push(sign_check(
        "focusing_sign_p",
        f.variance() - f_single.variance(),
        focus.fp,
        nm.var_f_single,
        tol.moments,
    ));

    let tau = o.kernel_and_tau(cfg.grid.kernel_n)?;
    checks.push(Check::at_most("tau_trace", (tau.trace - 1.0).abs(), tol.tau_trace));
    checks.push(Check::at_least(
        "tau_positivity",
        tau.min_eigenvalue / tau.max_eigenvalue,
        -tol.tau_positivity,
    ));
    checks.push(Check::at_most("tau_position_diagonal", tau.position_deviation, tol.tau_diagonal));
    checks.push(Check::at_most("tau_momentum_diagonal", tau.momentum_deviation, tol.tau_diagonal));

    let mut smearings = vec![e.clone(), f.clone()];
    smearings.extend(random_smearings(seed, cfg.verify.smearing_samples)?);
    checks.extend(metrology_checks(&smearings, tol)?);

    let predicted = match cfg.probe_state()? {
        Some(state) => focusing_predicate(&state, &c),
        None => focus.jointly_focused,
    };
    if let Some(expect) = cfg.verify.expect_joint_focusing {
        checks.push(Check::flag("joint_focusing_assertion", predicted == expect));
    }

    let mut extra = Map::new();
    extra.insert("FQ".into(), json!(focus.fq));
    extra.insert("FP".into(), json!(focus.fp));
    extra.insert("focusing_predicate".into(), json!(predicted));
    extra.insert("R_coercion".into(), coercion_json(o.coercion()));
    extra.insert(
        "info".into(),
        json!({
            "marginal_position_unreflected": marg.position_unreflected,
            "marginal_momentum_unreflected": marg.momentum_unreflected,
            "tau_inverted_position_diagonal": tau.inverted_position_deviation,
            "tau_max_eigenvalue": tau.max_eigenvalue,
            "tau_min_eigenvalue": tau.min_eigenvalue,
            "tau_hermiticity_defect": tau.hermiticity_defect,
        }),
    );
    let (text, passed) = report(&checks, extra);
    Ok(CommandOutput {
        files: vec![("verify.json".into(), text.clone())],
        stdout: text,
        passed,
    })
}

pub fn write_files(dir: &Path, files: &Files) -> Result<()> {
    let io = |source| Error::Io {
        path: dir.display().to_string(),
        source,
    };
    std::fs::create_dir_all(dir).map_err(io)?;
    for (name, text) in files {
        let path = dir.join(name);
        std::fs::write(&path, text).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
    }
    Ok(())
}
