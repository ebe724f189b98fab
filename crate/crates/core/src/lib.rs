//! Joint position–momentum measurement in the Arthurs–Kelly scheme with
//! correlated probes: closed-form noise moments and focusing criteria, a grid
//! oracle for the full three-mode unitary, and error metrics on the outcome
//! distributions.

pub mod error;
pub mod numerics;
pub mod akmodel;
pub mod probes;
pub mod simulator;
pub mod metrology;
pub mod cli;

pub use error::{Error, Result};
