mod common;

use akfocus::akmodel::{focusing_measures, CouplingParams};
use akfocus::probes::GaussianTwoMode;
use akfocus::simulator::{Fault, SystemSpec};
use common::{entangled, mixed, random_configs, standard, Config};

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-12)
}

#[test]
fn joint_distribution_is_normalized() {
    for cfg in [standard(), entangled(), mixed()] {
        let joint = cfg.oracle(64).joint_distribution().unwrap();
        assert!((joint.mass() - 1.0).abs() < 1e-6, "{}: {}", cfg.label, joint.mass());
    }
}

#[test]
fn standard_outcome_variances_add() {
    let joint = standard().oracle(64).joint_distribution().unwrap();
    let (x, y) = (joint.marginal_q().unwrap(), joint.marginal_p().unwrap());
    assert!((x.variance() - 1.125).abs() < 1e-3, "{}", x.variance());
    assert!((y.variance() - 1.125).abs() < 1e-3, "{}", y.variance());
    assert!(x.mean().abs() < 1e-6 && y.mean().abs() < 1e-6);
}

#[test]
fn outcome_moments_compose_state_and_noise() {
    // Outcome marginals are ρψ * ě and ρ̃ψ * f̌: means subtract the noise means.
    for cfg in random_configs(11, 10, 10) {
        let oracle = cfg.oracle(64);
        let s = *oracle.system_stats();
        let nm = oracle.noise_moments();
        let joint = oracle.joint_distribution().unwrap();
        let (x, y) = (joint.marginal_q().unwrap(), joint.marginal_p().unwrap());
        assert!((x.mean() - (s.mean_q - nm.e1)).abs() < 1e-3, "{}: x mean {}", cfg.label, x.mean());
        assert!((y.mean() - (s.mean_p - nm.f1)).abs() < 1e-3, "{}: y mean {}", cfg.label, y.mean());
        assert!(rel(x.variance(), s.var_q + nm.var_e) < 1e-3, "{}: x var", cfg.label);
        assert!(rel(y.variance(), s.var_p + nm.var_f) < 1e-3, "{}: y var", cfg.label);
    }
}

#[test]
fn narrow_system_state_reproduces_reflected_noise() {
    let cfg = Config {
        system: SystemSpec::Gaussian {
            mean: 0.7,
            variance: 0.01,
            momentum: 0.0,
        },
        ..entangled()
    };
    let oracle = cfg.oracle(96);
    let nm = oracle.noise_moments();
    let x = oracle.joint_distribution().unwrap().marginal_q().unwrap();
    assert!((x.mean() - (0.7 - nm.e1)).abs() < 1e-3);
    assert!(rel(x.variance(), nm.var_e + 0.01) < 1e-3);
    let report = oracle.marginal_check().unwrap();
    assert!(report.position < 1e-3, "{report:?}");
}

#[test]
fn kappa_one_reduces_position_noise_to_single_probe() {
    let cfg = Config {
        probe: GaussianTwoMode::new(1.0, 0.6, 0.8).unwrap().into(),
        coupling: CouplingParams::new(0.8, 1.2, 1.0).unwrap(),
        ..standard()
    };
    let oracle = cfg.oracle(64);
    let e = oracle.noise_distribution_q().unwrap();
    let single = oracle.single_probe_noise_q().unwrap();
    let want = oracle.probe_moments().v_q1 / 0.64;
    assert!(rel(e.variance(), want) < 1e-3, "{} vs {want}", e.variance());
    assert!(rel(single.variance(), want) < 1e-3);
}

#[test]
fn zero_shift_is_exact() {
    for cfg in [standard(), mixed()] {
        assert!(cfg.oracle(64).covariance_test(0.0, 0.0).unwrap() < 1e-12);
    }
}

#[test]
fn covariance_deviation_shrinks_under_refinement() {
    for cfg in [standard(), entangled()] {
        let coarse = cfg.oracle(48).covariance_test_fixed_quadrature(1.0, 0.5).unwrap();
        let fine = cfg.oracle(96).covariance_test_fixed_quadrature(1.0, 0.5).unwrap();
        assert!(fine * 2.0 <= coarse, "{}: {coarse:e} -> {fine:e}", cfg.label);
        // Co-translated grids make the discrete map exactly covariant.
        assert!(cfg.oracle(48).covariance_test(1.0, 0.5).unwrap() < 1e-12);
    }
}

#[test]
fn oracle_noise_variances_agree_in_sign_with_measures() {
    for cfg in [entangled(), mixed()] {
        let oracle = cfg.oracle(64);
        let f = focusing_measures(oracle.probe_moments(), oracle.coupling());
        let dq = oracle.noise_distribution_q().unwrap().variance() - oracle.single_probe_noise_q().unwrap().variance();
        let dp = oracle.noise_distribution_p().unwrap().variance() - oracle.single_probe_noise_p().unwrap().variance();
        assert_eq!(dq < 0.0, f.fq < 0.0, "{}: {dq} vs {}", cfg.label, f.fq);
        assert_eq!(dp < 0.0, f.fp < 0.0, "{}: {dp} vs {}", cfg.label, f.fp);
        assert!((dq - f.fq).abs() < 1e-3 && (dp - f.fp).abs() < 1e-3, "{}", cfg.label);
    }
}

#[test]
fn tau_is_a_unit_trace_positive_operator() {
    for cfg in [standard(), entangled(), mixed()] {
        let t = cfg.oracle(64).kernel_and_tau(256).unwrap();
        assert!((t.trace - 1.0).abs() < 1e-3, "{}: {}", cfg.label, t.trace);
        assert!(t.min_eigenvalue >= -1e-6 * t.max_eigenvalue);
        assert!(t.hermiticity_defect < 1e-9);
        assert!(t.position_deviation < 1e-3 && t.momentum_deviation < 1e-3, "{}: {t:?}", cfg.label);
    }
}

#[test]
fn kappa_sign_fault_breaks_the_marginals() {
    let cfg = Config {
        system: SystemSpec::Gaussian {
            mean: 0.3,
            variance: 0.6,
            momentum: -0.2,
        },
        probe: GaussianTwoMode::new(1.0, 0.4, 0.8).unwrap().into(),
        coupling: CouplingParams::new(1.0, 0.8, 0.6).unwrap(),
        ..standard()
    };
    let honest = cfg.oracle(64).marginal_check().unwrap();
    let broken = cfg.oracle(64).with_fault(Fault::KappaSign).marginal_check().unwrap();
    assert!(honest.max() < 1e-3, "{honest:?}");
    assert!(broken.max() > 1e-2, "{broken:?}");
}

#[test]
fn unreflected_convention_is_rejected_on_asymmetric_noise() {
    let cfg = random_configs(5, 0, 1).remove(0);
    let r = cfg.oracle(64).marginal_check().unwrap();
    assert!(r.position < 1e-3 && r.momentum < 1e-3, "{r:?}");
    assert!(r.position_unreflected.max(r.momentum_unreflected) > 1e-2, "{r:?}");
}
