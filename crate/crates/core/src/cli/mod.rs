//! Command-line front end: `akfocus moments|simulate|scan|verify`.
//!
//! Exit codes: 0 success, 2 invalid input or config, 3 a verification check
//! failed, 4 a numerical or truncation error.

pub mod commands;
pub mod config;
pub mod format;
pub mod rawio;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::error::Error;
pub use config::RunConfig;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_VERIFICATION: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "akfocus", version, about = "Joint position-momentum measurement with correlated probes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, clap::Args)]
struct Common {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Directory for output files; overrides `output.dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Phase-space shift `q,p` for the covariance check.
    #[arg(long, value_parser = parse_shift, allow_hyphen_values = true)]
    shift: Option<(f64, f64)>,
    /// Seed for randomized checks.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Closed-form probe and noise moments, focusing measures and uncertainty products.
    Moments(Common),
    /// Run the grid oracle and write outcome and noise densities.
    Simulate(Common),
    /// Focusing measures over a grid of coupling parameters.
    Scan(Common),
    /// Run every consistency check and report pass or fail.
    Verify(Common),
}

fn parse_shift(s: &str) -> Result<(f64, f64), String> {
    let (q, p) = s.split_once(',').ok_or("expected q,p")?;
    let parse = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("'{v}': {e}"));
    let (q, p) = (parse(q)?, parse(p)?);
    if !q.is_finite() || !p.is_finite() {
        return Err("shift must be finite".into());
    }
    Ok((q, p))
}

pub fn exit_code(e: &Error) -> i32 {
    if e.is_numerical() {
        EXIT_NUMERICAL
    } else {
        EXIT_INVALID
    }
}

/// Runs the CLI on `args` (including the program name), writing to the given
/// streams, and returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let _ = if e.use_stderr() {
                write!(stderr, "{e}")
            } else {
                write!(stdout, "{e}")
            };
            return code;
        }
    };
    let (common, which) = match &cli.command {
        Command::Moments(c) => (c, "moments"),
        Command::Simulate(c) => (c, "simulate"),
        Command::Scan(c) => (c, "scan"),
        Command::Verify(c) => (c, "verify"),
    };
    let result = RunConfig::load(&common.config).and_then(|cfg| {
        let out = match which {
            "moments" => commands::moments(&cfg),
            "simulate" => commands::simulate(&cfg, common.shift),
            "scan" => commands::scan(&cfg),
            _ => {
                let shifts: Vec<(f64, f64)> = match common.shift {
                    Some(s) => vec![s],
                    None => cfg.verify.shifts.iter().map(|s| (s[0], s[1])).collect(),
                };
                commands::verify(&cfg, &shifts, common.seed)
            }
        }?;
        if let Some(dir) = common.out.clone().or_else(|| cfg.output_dir()) {
            commands::write_files(&dir, &out.files)?;
        }
        Ok(out)
    });
    match result {
        Ok(out) => {
            let _ = stdout.write_all(out.stdout.as_bytes());
            if out.passed {
                EXIT_OK
            } else {
                let _ = writeln!(stderr, "akfocus {which}: one or more checks failed");
                EXIT_VERIFICATION
            }
        }
        Err(e) => {
            let _ = writeln!(stderr, "akfocus {which}: {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shift_parsing() {
        assert_eq!(parse_shift("1,0.5"), Ok((1.0, 0.5)));
        assert_eq!(parse_shift("-1, -2"), Ok((-1.0, -2.0)));
        assert!(parse_shift("1").is_err());
        assert!(parse_shift("nan,1").is_err());
    }

    #[test]
    fn missing_config_is_invalid_input() {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run(["akfocus", "moments", "--config", "/nonexistent/x.toml"], &mut out, &mut err);
        assert_eq!(code, EXIT_INVALID);
        assert!(String::from_utf8(err).unwrap().contains("nonexistent"));
    }
}
