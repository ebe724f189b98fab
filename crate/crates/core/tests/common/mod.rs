#![allow(dead_code)]

use akfocus::akmodel::CouplingParams;
use akfocus::probes::{GaussianTwoMode, ProbeState, ProductGaussianMixture};
use akfocus::simulator::{GridSpec, Oracle, ProbeSpec, SystemSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
pub struct Config {
    pub label: String,
    pub system: SystemSpec,
    pub probe: ProbeState,
    pub coupling: CouplingParams,
}

impl Config {
    pub fn oracle(&self, n: usize) -> Oracle {
        Oracle::new(
            &self.system,
            &ProbeSpec::Analytic(self.probe.clone()),
            self.coupling,
            GridSpec::default().with_n(n),
        )
        .unwrap_or_else(|e| panic!("{}: {e}", self.label))
    }

    /// Whether the oracle can plan grids for this configuration at `n` points per axis.
    pub fn fits(&self, n: usize) -> bool {
        Oracle::new(
            &self.system,
            &ProbeSpec::Analytic(self.probe.clone()),
            self.coupling,
            GridSpec::default().with_n(n),
        )
        .is_ok()
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn system(r: &mut ChaCha8Rng) -> SystemSpec {
    SystemSpec::Gaussian {
        mean: r.random_range(-0.5..0.5),
        variance: r.random_range(0.3..1.0),
        momentum: r.random_range(-0.5..0.5),
    }
}

fn coupling(r: &mut ChaCha8Rng) -> CouplingParams {
    CouplingParams::new(r.random_range(0.5..1.5), r.random_range(0.5..1.5), r.random_range(-2.5..2.5)).unwrap()
}

pub fn random_gaussian(r: &mut ChaCha8Rng, i: usize) -> Config {
    let a = r.random_range(0.5..1.5);
    let d = r.random_range(0.5..1.5);
    let b = r.random_range(-0.8..0.8) * f64::sqrt(a * d);
    Config {
        label: format!("gaussian#{i} a={a:.3} b={b:.3} d={d:.3}"),
        system: system(r),
        probe: GaussianTwoMode::new(a, b, d).unwrap().into(),
        coupling: coupling(r),
    }
}

pub fn random_mixture(r: &mut ChaCha8Rng, i: usize) -> Config {
    let p = r.random_range(0.3..0.7);
    let c1 = (r.random_range(-1.0..1.0), r.random_range(-1.0..1.0));
    let c2 = (r.random_range(-1.0..1.0), r.random_range(-1.0..1.0));
    let s = r.random_range(0.3..0.8);
    Config {
        label: format!("mixture#{i} p={p:.3} {c1:.3?} {c2:.3?} S={s:.3}"),
        system: system(r),
        probe: ProductGaussianMixture::two_point(p, c1, c2, s, 0.25 / s).unwrap().into(),
        coupling: coupling(r),
    }
}

/// Random configurations that the oracle can represent at `n` points per axis,
/// with the number of rejected draws. Draws whose probe support and pointer
/// momentum cannot share one q₂ axis of `n` points are redrawn.
pub fn random_configs_fitting(seed: u64, gaussians: usize, mixtures: usize, n: usize) -> (Vec<Config>, usize) {
    let mut r = rng(seed);
    let mut out = Vec::new();
    let mut rejected = 0;
    for (count, draw) in [
        (gaussians, random_gaussian as fn(&mut ChaCha8Rng, usize) -> Config),
        (mixtures, random_mixture),
    ] {
        let mut i = 0;
        while i < count {
            let cfg = draw(&mut r, i);
            if cfg.fits(n) {
                out.push(cfg);
                i += 1;
            } else {
                rejected += 1;
            }
        }
    }
    (out, rejected)
}

/// `gaussians` pure-Gaussian configurations followed by `mixtures` two-component
/// ones, all representable on 64-point axes.
pub fn random_configs(seed: u64, gaussians: usize, mixtures: usize) -> Vec<Config> {
    random_configs_fitting(seed, gaussians, mixtures, 64).0
}

pub fn standard() -> Config {
    Config {
        label: "standard".into(),
        system: SystemSpec::Gaussian {
            mean: 0.0,
            variance: 0.5,
            momentum: 0.0,
        },
        probe: GaussianTwoMode::new(0.5, 0.0, 0.5).unwrap().into(),
        coupling: CouplingParams::new(1.0, 1.0, 0.0).unwrap(),
    }
}

pub fn entangled() -> Config {
    Config {
        label: "entangled".into(),
        probe: GaussianTwoMode::new(1.0, 0.9, 1.0).unwrap().into(),
        coupling: CouplingParams::new(0.5, 0.5, 2.0).unwrap(),
        ..standard()
    }
}

pub fn mixed() -> Config {
    Config {
        label: "mixture".into(),
        probe: ProductGaussianMixture::two_point(0.5, (1.0, 1.0), (-1.0, -1.0), 0.5, 0.5)
            .unwrap()
            .into(),
        coupling: CouplingParams::new(1.0, 1.0, 0.0).unwrap(),
        ..standard()
    }
}
