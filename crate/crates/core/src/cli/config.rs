//! Run configuration: a TOML file with strict keys.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::akmodel::{CouplingParams, ParamRange};
use crate::error::{Error, Result};
use crate::probes::{GaussianTwoMode, MixtureComponent, ProbeState, ProductGaussianMixture};
use crate::simulator::{Fault, GridSpec, ProbeSpec, SystemSpec};

use super::rawio;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub probe: ProbeConfig,
    pub coupling: CouplingConfig,
    #[serde(default)]
    pub system: SystemConfig,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub verify: VerifyConfig,
    pub scan: Option<ScanConfig>,
    #[serde(default)]
    pub output: OutputConfig,
    /// Directory that relative paths are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ProbeConfig {
    Gaussian2 {
        a: f64,
        b: f64,
        d: f64,
    },
    Mixture {
        #[serde(rename = "S")]
        s: f64,
        #[serde(rename = "R")]
        r: f64,
        components: Vec<ComponentConfig>,
    },
    Raw {
        path: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentConfig {
    pub weight: f64,
    pub x: f64,
    pub k: f64,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingConfig {
    pub lambda: f64,
    pub mu: f64,
    pub kappa: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum SystemConfig {
    Gaussian {
        #[serde(default)]
        mean: f64,
        #[serde(default = "half")]
        variance: f64,
        #[serde(default)]
        momentum: f64,
    },
    Raw {
        path: PathBuf,
    },
}

fn half() -> f64 {
    0.5
}

impl Default for SystemConfig {
    fn default() -> Self {
        SystemConfig::Gaussian {
            mean: 0.0,
            variance: 0.5,
            momentum: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    /// Points per axis of the three-mode oracle.
    pub n: usize,
    /// Oversampling of the fine one- and two-mode grids relative to `n`.
    pub fine_factor: usize,
    /// Half-width of every grid in standard deviations of what it holds.
    pub sigmas: f64,
    /// Side of the square kernel matrix.
    pub kernel_n: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        let g = GridSpec::default();
        Self {
            n: g.n,
            fine_factor: g.fine_factor,
            sigmas: g.sigmas,
            kernel_n: 256,
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub covariance: f64,
    pub marginal: f64,
    /// Relative for variances, absolute for means.
    pub moments: f64,
    pub tau_trace: f64,
    /// Allowed `−λ_min/λ_max` of `τ`.
    pub tau_positivity: f64,
    pub tau_diagonal: f64,
    pub wasserstein: f64,
    pub equivalence: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            covariance: 1e-3,
            marginal: 1e-3,
            moments: 1e-3,
            tau_trace: 1e-3,
            tau_positivity: 1e-6,
            tau_diagonal: 1e-3,
            wasserstein: 1e-3,
            equivalence: 1e-9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FaultConfig {
    None,
    KappaSign,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyConfig {
    pub shifts: Vec<[f64; 2]>,
    /// When set, the run also checks that joint focusing is (or is not) predicted.
    pub expect_joint_focusing: Option<bool>,
    /// Random smearing densities for the error-measure equivalence check.
    pub smearing_samples: usize,
    pub inject_fault: FaultConfig,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            shifts: vec![[1.0, 0.0], [0.0, 1.0], [1.0, 0.5]],
            expect_joint_focusing: None,
            smearing_samples: 10,
            inject_fault: FaultConfig::None,
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RangeConfig {
    pub from: f64,
    pub to: f64,
    pub points: usize,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    pub lambda: RangeConfig,
    pub mu: RangeConfig,
    pub kappa: RangeConfig,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: Option<PathBuf>,
}

fn config_error(location: &str, e: Error) -> Error {
    match e {
        Error::Invalid { reason, .. } => Error::Config {
            location: location.to_string(),
            reason,
        },
        other => other,
    }
}

impl RunConfig {
    pub fn from_str(text: &str, base_dir: &Path) -> Result<Self> {
        let mut cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config {
            location: match e.span() {
                Some(span) => {
                    let line = text[..span.start.min(text.len())].lines().count().max(1);
                    format!("line {line}")
                }
                None => "document".into(),
            },
            reason: e.message().to_string(),
        })?;
        cfg.base_dir = base_dir.to_path_buf();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_str(&text, &base).map_err(|e| match e {
            Error::Config { location, reason } => Error::Config {
                location: format!("{}, {location}", path.display()),
                reason,
            },
            other => other,
        })
    }

    /// Checks every invariant that does not need file contents.
    fn validate(&self) -> Result<()> {
        self.coupling()?;
        if let ProbeConfig::Gaussian2 { .. } | ProbeConfig::Mixture { .. } = self.probe {
            self.probe_state()?;
        }
        if let SystemConfig::Gaussian { .. } = self.system {
            self.system_spec()?.stats().map_err(|e| config_error("system", e))?;
        }
        self.grid_spec()?;
        if self.grid.kernel_n < 16 {
            return Err(Error::Config {
                location: "grid.kernel_n".into(),
                reason: format!("{} is below the minimum of 16", self.grid.kernel_n),
            });
        }
        let t = &self.tolerances;
        for (name, v) in [
            ("covariance", t.covariance),
            ("marginal", t.marginal),
            ("moments", t.moments),
            ("tau_trace", t.tau_trace),
            ("tau_positivity", t.tau_positivity),
            ("tau_diagonal", t.tau_diagonal),
            ("wasserstein", t.wasserstein),
            ("equivalence", t.equivalence),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Config {
                    location: format!("tolerances.{name}"),
                    reason: format!("{v} must be a positive number"),
                });
            }
        }
        for s in &self.verify.shifts {
            if !s.iter().all(|v| v.is_finite()) {
                return Err(Error::Config {
                    location: "verify.shifts".into(),
                    reason: "shifts must be finite".into(),
                });
            }
        }
        if self.scan.is_some() {
            self.scan_ranges()?;
        }
        Ok(())
    }

    pub fn coupling(&self) -> Result<CouplingParams> {
        let c = &self.coupling;
        CouplingParams::new(c.lambda, c.mu, c.kappa).map_err(|e| config_error("coupling", e))
    }

    /// The analytic probe state, or `None` for a raw probe.
    pub fn probe_state(&self) -> Result<Option<ProbeState>> {
        let state = match &self.probe {
            ProbeConfig::Gaussian2 { a, b, d } => GaussianTwoMode::new(*a, *b, *d)
                .map_err(|e| config_error("probe", e))?
                .into(),
            ProbeConfig::Mixture { s, r, components } => {
                let parts = components
                    .iter()
                    .map(|c| MixtureComponent {
                        weight: c.weight,
                        x: c.x,
                        k: c.k,
                    })
                    .collect();
                ProductGaussianMixture::new(parts, *s, *r)
                    .map_err(|e| config_error("probe", e))?
                    .into()
            }
            ProbeConfig::Raw { .. } => return Ok(None),
        };
        Ok(Some(state))
    }

    fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base_dir.join(path)
        }
    }

    pub fn probe_spec(&self) -> Result<ProbeSpec> {
        match &self.probe {
            ProbeConfig::Raw { path } => Ok(ProbeSpec::Sampled(rawio::read_probe(&self.resolve(path))?)),
            _ => Ok(ProbeSpec::Analytic(self.probe_state()?.expect("analytic probe"))),
        }
    }

    pub fn system_spec(&self) -> Result<SystemSpec> {
        match &self.system {
            SystemConfig::Gaussian {
                mean,
                variance,
                momentum,
            } => Ok(SystemSpec::Gaussian {
                mean: *mean,
                variance: *variance,
                momentum: *momentum,
            }),
            SystemConfig::Raw { path } => Ok(SystemSpec::Sampled(rawio::read_system(&self.resolve(path))?)),
        }
    }

    pub fn grid_spec(&self) -> Result<GridSpec> {
        GridSpec::new(self.grid.n, self.grid.fine_factor, self.grid.sigmas).map_err(|e| config_error("grid", e))
    }

    pub fn fault(&self) -> Fault {
        match self.verify.inject_fault {
            FaultConfig::None => Fault::None,
            FaultConfig::KappaSign => Fault::KappaSign,
        }
    }

    pub fn scan_ranges(&self) -> Result<[ParamRange; 3]> {
        let scan = self.scan.as_ref().ok_or_else(|| Error::Config {
            location: "scan".into(),
            reason: "the scan command needs a [scan] table".into(),
        })?;
        let mk = |name: &str, r: &RangeConfig| {
            ParamRange::new(r.from, r.to, r.points).map_err(|e| config_error(&format!("scan.{name}"), e))
        };
        Ok([mk("lambda", &scan.lambda)?, mk("mu", &scan.mu)?, mk("kappa", &scan.kappa)?])
    }

    pub fn output_dir(&self) -> Option<PathBuf> {
        self.output.dir.as_ref().map(|d| self.resolve(d))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
[probe]
kind = "gaussian2"
a = 1.0
b = 0.9
d = 1.0

[coupling]
lambda = 0.5
mu = 0.5
kappa = 2.0
"#;

    #[test]
    fn minimal_config_uses_defaults() {
        let cfg = RunConfig::from_str(BASE, Path::new(".")).unwrap();
        assert_eq!(cfg.grid.n, 64);
        assert_eq!(cfg.verify.shifts.len(), 3);
        assert!(matches!(cfg.system, SystemConfig::Gaussian { variance, .. } if variance == 0.5));
    }

    #[test]
    fn unknown_keys_are_rejected_with_location() {
        let text = format!("{BASE}\n[grid]\nn = 64\nextent = 3\n");
        let err = RunConfig::from_str(&text, Path::new(".")).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("extent"), "{msg}");
        assert!(msg.contains("line"), "{msg}");
    }

    #[test]
    fn invalid_probe_names_the_inequality() {
        let text = BASE.replace("b = 0.9", "b = 1.5");
        let msg = RunConfig::from_str(&text, Path::new(".")).unwrap_err().to_string();
        assert!(msg.contains("probe"), "{msg}");
        assert!(msg.contains("det"), "{msg}");
    }

    #[test]
    fn mixture_config_parses() {
        let text = r#"
[probe]
kind = "mixture"
S = 0.5
R = 0.5
components = [
  { weight = 0.5, x = 1.0, k = 1.0 },
  { weight = 0.5, x = -1.0, k = -1.0 },
]

[coupling]
lambda = 1.0
mu = 1.0
kappa = 0.0
"#;
        let cfg = RunConfig::from_str(text, Path::new(".")).unwrap();
        assert!(matches!(cfg.probe_state().unwrap(), Some(ProbeState::Mixture(_))));
    }
}
