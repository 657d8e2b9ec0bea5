//! `nliso`: nonlocal isoperimetry and charged-drop stability computations.

mod commands;
mod output;
mod verify;

use clap::{Parser, Subcommand};
use output::Format;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug, Parser)]
#[command(name = "nliso", version, about = "Fractional perimeters, Riesz energies and spherical stability thresholds")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Ambient dimension.
    #[arg(long, global = true, default_value_t = 2)]
    pub n: usize,
    /// Fractional order in (0, 1]; 1 selects the classical perimeter.
    #[arg(long, global = true, default_value_t = 0.5, allow_negative_numbers = true)]
    pub s: f64,
    /// Riesz exponent in (0, n).
    #[arg(long, global = true, default_value_t = 0.5, allow_negative_numbers = true)]
    pub alpha: f64,
    /// Charge β of the unit-volume problem.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub beta: Option<f64>,
    /// Mass m, converted to β = (m/|B|)^{(α+s)/n}.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub m: Option<f64>,
    /// Largest spherical-harmonic degree for spectral tables.
    #[arg(long, global = true, default_value_t = 512)]
    pub kmax: usize,
    /// Sphere grid size: nodes on the circle (default 2048) or Gauss–Legendre rows on S² (default 32).
    #[arg(long, global = true)]
    pub resolution: Option<usize>,
    /// Monte Carlo samples per term.
    #[arg(long, global = true, default_value_t = 1_000_000)]
    pub samples: u64,
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    /// Tolerance for exact identities in `verify`.
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub tolerance: f64,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Write the report to FILE instead of stdout.
    #[arg(long, global = true, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true, env = "NLISO_THREADS")]
    pub threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Eigenvalue tables λ_k^s, λ_k^1 and μ_k^α.
    Spectrum,
    /// Ball quantities: ω_n, P(B), P_s(B), V_α(B), Per_s(B) and the nonlocal curvature.
    Ball,
    /// β⋆ in both modes, the minimizing degree and m⋆.
    Thresholds,
    /// Stability verdict and per-mode coefficients of the second-variation form.
    Stability {
        /// Harmonic profile (JSON) on which to evaluate the form.
        #[arg(long)]
        profile: Option<PathBuf>,
    },
    /// Deficit scan of nearly spherical sets along t.
    Fuglede {
        /// Harmonic profile (JSON); defaults to the unit degree-2 mode.
        #[arg(long)]
        profile: Option<PathBuf>,
        /// Comma-separated amplitudes.
        #[arg(long = "t", value_delimiter = ',', default_values_t = vec![0.02, 0.01, 0.005, 0.0025])]
        t: Vec<f64>,
    },
    /// Isoperimetric gap and Fraenkel asymmetry of ball unions.
    Isoperimetric {
        /// Shape file (JSON list of {center, radius}); without it two unit balls are swept.
        #[arg(long)]
        shape: Option<PathBuf>,
        /// Comma-separated center distances for the two-ball sweep.
        #[arg(long, value_delimiter = ',', default_values_t = vec![2.05, 2.2, 2.5, 3.0, 4.0, 6.0, 10.0, 20.0, 50.0])]
        separations: Vec<f64>,
        /// Random simplex starts for the asymmetry search.
        #[arg(long, default_value_t = 8)]
        starts: usize,
    },
    /// Explicit lemma constants and their uniformity over s.
    Constants {
        /// Left end of the s-grid for the uniformity bounds.
        #[arg(long, default_value_t = 0.2)]
        s0: f64,
        /// Covering constant ξ(n) (default 5^n).
        #[arg(long)]
        besicovitch: Option<f64>,
        /// Quantitative isoperimetric constant C(n,s) (default 1).
        #[arg(long)]
        iso_constant: Option<f64>,
    },
    /// Identity and property suite; exit 0 iff every check passes.
    Verify {
        /// Smaller grids and sample counts.
        #[arg(long)]
        quick: bool,
    },
}

/// Rejected input: exit status 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

/// Failed verification: exit status 1.
#[derive(Debug)]
pub struct VerificationFailed(pub usize);

impl std::fmt::Display for VerificationFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} verification check(s) failed", self.0)
    }
}

impl std::error::Error for VerificationFailed {}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<UsageError>().is_some() {
        return 2;
    }
    if err.downcast_ref::<VerificationFailed>().is_some() {
        return 1;
    }
    match err.downcast_ref::<nliso_core::Error>() {
        Some(nliso_core::Error::Domain(_) | nliso_core::Error::Input(_) | nliso_core::Error::Pole(_)) => 2,
        _ => 1,
    }
}

fn broken_pipe(err: &anyhow::Error) -> bool {
    let is_pipe = |e: &std::io::Error| e.kind() == std::io::ErrorKind::BrokenPipe;
    err.chain().any(|c| {
        c.downcast_ref::<std::io::Error>().is_some_and(is_pipe)
            || c.downcast_ref::<csv::Error>().is_some_and(|e| matches!(e.kind(), csv::ErrorKind::Io(io) if is_pipe(io)))
            || c.downcast_ref::<serde_json::Error>().is_some_and(|e| e.io_error_kind() == Some(std::io::ErrorKind::BrokenPipe))
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if t == 0 || rayon::ThreadPoolBuilder::new().num_threads(t).build_global().is_err() {
            eprintln!("error: invalid thread count {t}");
            return ExitCode::from(2);
        }
    }
    let result = (|| -> anyhow::Result<()> {
        let mut sink: Box<dyn Write> = match &cli.out {
            Some(p) => Box::new(std::io::BufWriter::new(
                std::fs::File::create(p).map_err(|e| UsageError(format!("cannot create {}: {e}", p.display())))?,
            )),
            None => Box::new(std::io::stdout().lock()),
        };
        commands::run(&cli, &mut sink)?;
        sink.flush()?;
        Ok(())
    })();
    match result {
        Ok(()) => ExitCode::SUCCESS,
        // a closed downstream pipe is not a failure of the computation
        Err(err) if broken_pipe(&err) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
