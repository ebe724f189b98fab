//! Brute-force simulation of the three-mode measurement and the checks built on it.

pub mod coupling;
pub mod kernel;
pub mod noise;
pub mod oracle;
pub mod plan;

pub use coupling::{couple, joint_distribution, CoupledState3D};
pub use kernel::{kernel_and_tau, KernelMatrix, TauMatrix};
pub use noise::{noise_distribution_p, noise_distribution_q, single_probe_noise_p, single_probe_noise_q};
pub use oracle::{ConvolutionForms, Fault, MarginalReport, Oracle, TauReport};
pub use plan::{GridSpec, OracleGrids, ProbeSpec, StateStats, SystemSpec};
