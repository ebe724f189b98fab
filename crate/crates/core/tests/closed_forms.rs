use akfocus::akmodel::{
    focusing_measures, gaussian_focusing_predicate, mixed_focusing_predicate, noise_moments, scan_focusing,
    CouplingParams, ParamRange,
};
use akfocus::metrology::uncertainty_products;
use akfocus::probes::{
    sample_wavefunction, GaussianTwoMode, MixtureComponent, MomentSet, ProbeState, ProductGaussianMixture,
};
use akfocus::numerics::Grid1D;
use proptest::prelude::*;

fn gaussian_probe() -> impl Strategy<Value = GaussianTwoMode> {
    (0.1f64..3.0, 0.1f64..3.0, -0.99f64..0.99).prop_map(|(a, d, r)| {
        GaussianTwoMode::new(a, r * (a * d).sqrt(), d).unwrap()
    })
}

fn mixture_probe() -> impl Strategy<Value = ProductGaussianMixture> {
    (
        prop::collection::vec((0.05f64..1.0, -3.0f64..3.0, -3.0f64..3.0), 1..5),
        0.1f64..2.0,
        1.0f64..3.0,
    )
        .prop_map(|(raw, s, slack)| {
            let total: f64 = raw.iter().map(|c| c.0).sum();
            let components = raw
                .iter()
                .map(|&(w, x, k)| MixtureComponent { weight: w / total, x, k })
                .collect();
            ProductGaussianMixture::new(components, s, slack / (4.0 * s)).unwrap()
        })
}

fn probe_state() -> impl Strategy<Value = ProbeState> {
    prop_oneof![gaussian_probe().prop_map(ProbeState::from), mixture_probe().prop_map(ProbeState::from)]
}

fn coupling() -> impl Strategy<Value = CouplingParams> {
    (0.1f64..3.0, 0.1f64..3.0, -4.0f64..4.0).prop_map(|(l, u, k)| CouplingParams::new(l, u, k).unwrap())
}

/// Ensemble moments of a mixture summed by hand over components.
fn ensemble_oracle(mx: &ProductGaussianMixture) -> MomentSet {
    let cs = mx.components();
    let mean = |f: &dyn Fn(&MixtureComponent) -> f64| cs.iter().map(|c| c.weight * f(c)).sum::<f64>();
    let mx_ = mean(&|c| c.x);
    let mk = mean(&|c| c.k);
    let var_x = mean(&|c| (c.x - mx_).powi(2));
    let var_k = mean(&|c| (c.k - mk).powi(2));
    MomentSet {
        m_q1: mx_,
        m_q2: mx_,
        m_p1: mk,
        m_p2: mk,
        v_q1: mx.s() + var_x,
        v_q2: mx.s() + var_x,
        v_p1: mx.r() + var_k,
        v_p2: mx.r() + var_k,
        c_q: var_x,
        c_p: var_k,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn each_gaussian_mode_obeys_preparation_uncertainty(g in gaussian_probe()) {
        let m = g.moments();
        prop_assert!(m.v_q1 * m.v_p1 >= 0.25 - 1e-12);
        prop_assert!(m.v_q2 * m.v_p2 >= 0.25 - 1e-12);
    }

    #[test]
    fn covariances_obey_cauchy_schwarz(state in probe_state()) {
        let m = state.moments();
        prop_assert!(m.c_q.abs() <= (m.v_q1 * m.v_q2).sqrt() * (1.0 + 1e-12));
        prop_assert!(m.c_p.abs() <= (m.v_p1 * m.v_p2).sqrt() * (1.0 + 1e-12));
    }

    #[test]
    fn mixture_moments_match_ensemble_sum(mx in mixture_probe()) {
        let got = mx.moments();
        let want = ensemble_oracle(&mx);
        for (a, b) in [
            (got.m_q1, want.m_q1), (got.m_p2, want.m_p2),
            (got.v_q1, want.v_q1), (got.v_q2, want.v_q2),
            (got.v_p1, want.v_p1), (got.v_p2, want.v_p2),
            (got.c_q, want.c_q), (got.c_p, want.c_p),
        ] {
            prop_assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn measures_equal_variance_differences(state in probe_state(), c in coupling()) {
        let m = state.moments();
        let nm = noise_moments(&m, &c);
        let f = focusing_measures(&m, &c);
        let scale = 1.0 + nm.var_e.abs() + nm.var_e_single.abs();
        prop_assert!((f.fq - (nm.var_e - nm.var_e_single)).abs() < 1e-12 * scale);
        let scale = 1.0 + nm.var_f.abs() + nm.var_f_single.abs();
        prop_assert!((f.fp - (nm.var_f - nm.var_f_single)).abs() < 1e-12 * scale);
        prop_assert!((nm.e2 - (nm.e1 * nm.e1 + nm.var_e)).abs() < 1e-12 * (1.0 + nm.e2));
        prop_assert!((nm.f2 - (nm.f1 * nm.f1 + nm.var_f)).abs() < 1e-12 * (1.0 + nm.f2));
    }

    #[test]
    fn measures_are_affine_in_position_covariance(g in gaussian_probe(), c in coupling(), h in 0.01f64..0.5) {
        let base = g.moments();
        let shifted = MomentSet { c_q: base.c_q + h, ..base };
        let slope = (focusing_measures(&shifted, &c).fq - focusing_measures(&base, &c).fq) / h;
        let want = -(1.0 - c.kappa()) * c.mu() / c.lambda();
        prop_assert!((slope - want).abs() < 1e-8 * (1.0 + want.abs()), "{slope} vs {want}");
    }

    #[test]
    fn uncorrelated_probes_never_focus(v in (0.1f64..3.0, 0.1f64..3.0, 0.1f64..3.0, 0.1f64..3.0), c in coupling()) {
        let m = MomentSet {
            m_q1: 0.0, m_q2: 0.0, m_p1: 0.0, m_p2: 0.0,
            v_q1: v.0, v_q2: v.1, v_p1: v.2, v_p2: v.3, c_q: 0.0, c_p: 0.0,
        };
        let f = focusing_measures(&m, &c);
        prop_assert!(f.fq >= 0.0 && f.fp >= 0.0);
    }

    #[test]
    fn gaussian_predicate_implies_both_measures_negative(g in gaussian_probe(), c in coupling()) {
        let f = focusing_measures(&g.moments(), &c);
        if gaussian_focusing_predicate(&g, &c) {
            prop_assert!(f.fq < 0.0 && f.fp < 0.0);
        }
        // The predicate is exact for this family: joint focusing forces it.
        if f.jointly_focused {
            prop_assert!(gaussian_focusing_predicate(&g, &c));
        }
        if c.kappa().abs() <= 1.0 {
            prop_assert!(!gaussian_focusing_predicate(&g, &c));
        }
    }

    #[test]
    fn mixture_predicate_matches_measures(mx in mixture_probe(), c in coupling()) {
        let f = focusing_measures(&mx.moments(), &c);
        prop_assert_eq!(mixed_focusing_predicate(&mx, &c), f.jointly_focused);
    }

    #[test]
    fn mixture_measures_match_bracketed_form(mx in mixture_probe(), c in coupling()) {
        let m = mx.moments();
        let (l, u, k) = (c.lambda(), c.mu(), c.kappa());
        let fq = (1.0 - k).powi(2) * u * u * mx.s() / 4.0
            + (1.0 - k) / l * u * m.c_q * ((1.0 - k) * l * u / 4.0 - 1.0);
        let fp = (1.0 + k).powi(2) * l * l * mx.r() / 4.0
            + (1.0 + k) / u * l * m.c_p * ((1.0 + k) * l * u / 4.0 - 1.0);
        let f = focusing_measures(&m, &c);
        prop_assert!((f.fq - fq).abs() < 1e-10 * (1.0 + fq.abs()));
        prop_assert!((f.fp - fp).abs() < 1e-10 * (1.0 + fp.abs()));
    }

    #[test]
    fn uncertainty_products_never_violated(state in probe_state(), c in coupling()) {
        let u = uncertainty_products(&noise_moments(&state.moments(), &c));
        prop_assert!(!u.violation, "{u:?}");
    }

    #[test]
    fn sampled_gaussian_is_normalized(g in (0.3f64..2.0, 0.3f64..2.0, -0.8f64..0.8)) {
        let state = GaussianTwoMode::new(g.0, g.2 * (g.0 * g.1).sqrt(), g.1).unwrap();
        let m = state.moments();
        let half = 7.0 * m.v_q1.max(m.v_q2).sqrt();
        let grid = Grid1D::centered(200, 0.0, half).unwrap();
        let phi = sample_wavefunction(&state, &grid).unwrap();
        prop_assert!((phi.norm_sqr() - 1.0).abs() < 1e-8);
    }
}

#[test]
fn sampled_correlated_gaussian_moments_match_closed_form() {
    let g = GaussianTwoMode::new(1.0, 0.9, 1.0).unwrap();
    let grid = Grid1D::centered(256, 0.0, 8.0).unwrap();
    let m = sample_wavefunction(&g, &grid).unwrap().moments();
    let det = 1.0 - 0.81;
    assert!((m.c_q + 0.9 / (4.0 * det)).abs() < 1e-3, "{}", m.c_q);
    assert!((m.v_q2 - 1.0 / (4.0 * det)).abs() < 1e-3 * m.v_q2);
    assert!((m.c_p - 0.9).abs() < 1e-3);
}

#[test]
fn entangled_example_closed_forms() {
    let g = GaussianTwoMode::new(1.0, 0.9, 1.0).unwrap();
    let c = CouplingParams::new(0.5, 0.5, 2.0).unwrap();
    let f = focusing_measures(&g.moments(), &c);
    // (1-κ)²μ²/4 · a/(4 det) and (1-κ)(μ/λ)·b/(4 det) with det = 0.19.
    let fq = 0.0625 / 0.76 - 0.9 / 0.76;
    let fp = 0.5625 - 2.7;
    assert!((f.fq - fq).abs() < 1e-12, "{}", f.fq);
    assert!((f.fp - fp).abs() < 1e-12, "{}", f.fp);
    assert!(f.jointly_focused);
    assert!(gaussian_focusing_predicate(&g, &c));
    let weak = GaussianTwoMode::new(1.0, 0.1, 1.0).unwrap();
    assert!(!gaussian_focusing_predicate(&weak, &CouplingParams::new(1.0, 1.0, 2.0).unwrap()));
}

#[test]
fn mixture_example_and_its_limits() {
    let mx = ProductGaussianMixture::two_point(0.5, (1.0, 1.0), (-1.0, -1.0), 0.5, 0.5).unwrap();
    let c = CouplingParams::new(1.0, 1.0, 0.0).unwrap();
    let f = focusing_measures(&mx.moments(), &c);
    assert!((f.fq + 0.625).abs() < 1e-12 && (f.fp + 0.625).abs() < 1e-12);
    assert!(mixed_focusing_predicate(&mx, &c));
    assert!(!mixed_focusing_predicate(&mx, &CouplingParams::new(1.0, 1.0, 3.0).unwrap()));
    let flat = ProductGaussianMixture::two_point(0.5, (0.0, 0.0), (0.0, 0.0), 0.5, 0.5).unwrap();
    assert!(!mixed_focusing_predicate(&flat, &c));
}

#[test]
fn scan_orders_rows_and_finds_the_focused_point() {
    let state = ProbeState::from(GaussianTwoMode::new(1.0, 0.9, 1.0).unwrap());
    let rows = scan_focusing(
        &state,
        &ParamRange::new(0.25, 0.75, 3).unwrap(),
        &ParamRange::new(0.5, 1.0, 2).unwrap(),
        &ParamRange::new(1.0, 3.0, 3).unwrap(),
    )
    .unwrap();
    assert_eq!(rows.len(), 18);
    assert_eq!((rows[0].lambda, rows[0].mu, rows[0].kappa), (0.25, 0.5, 1.0));
    assert_eq!((rows[1].lambda, rows[1].mu, rows[1].kappa), (0.25, 0.5, 2.0));
    assert_eq!((rows[3].mu, rows[6].lambda), (1.0, 0.5));
    let hit = rows.iter().find(|r| (r.lambda, r.mu, r.kappa) == (0.5, 0.5, 2.0)).unwrap();
    assert!(hit.jointly_focused);

    let inside = scan_focusing(
        &state,
        &ParamRange::new(0.1, 2.0, 8).unwrap(),
        &ParamRange::new(0.1, 2.0, 8).unwrap(),
        &ParamRange::new(-0.99, 0.99, 9).unwrap(),
    )
    .unwrap();
    assert!(inside.iter().all(|r| !r.jointly_focused));
    assert!(ParamRange::new(1.0, 1.0, 0).is_err());
}
