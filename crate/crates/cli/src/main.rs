mod commands;
mod config;

use std::io::Write;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sphsum::Error;

/// Spherical transforms and sums of unitarily invariant Hermitian random matrices.
///
/// CONFIG is inline JSON (starting with `{`) or a path to a JSON file.
#[derive(Parser)]
#[command(name = "sphsum", version)]
struct Cli {
    /// Seed for every random stream.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads; falls back to SPHSUM_THREADS, then all cores.
    #[arg(long, global = true, env = "SPHSUM_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Spherical function φ_s(x).
    Phi {
        config: String,
        /// Add a Haar Monte Carlo estimate with this many samples.
        #[arg(long)]
        mc: Option<usize>,
    },
    /// Spherical transform of an ensemble on an s-grid.
    Transform {
        config: String,
        /// Evaluate by quadrature and report the gap to the structured form.
        #[arg(long)]
        numeric: bool,
    },
    /// Eigenvalue density of the sum of two ensembles.
    Sum {
        config: String,
        /// Matrix density instead of the joint eigenvalue density.
        #[arg(long)]
        matrix: bool,
    },
    /// Correlation kernel diagonal of a polynomial ensemble.
    Kernel {
        config: String,
        /// Kernel of the ensemble plus an LUE(α).
        #[arg(long)]
        transformed: bool,
        #[arg(long)]
        alpha: Option<f64>,
    },
    /// Kolmogorov–Smirnov check of sampled sums against the analytic marginal.
    Validate {
        config: String,
        #[arg(long)]
        count: Option<usize>,
        #[arg(long)]
        gate: Option<f64>,
    },
    /// Draw spectra of a sum of samplable summands.
    Sample {
        config: String,
        /// Emit a Freedman–Diaconis histogram of the pooled eigenvalues.
        #[arg(long)]
        histogram: bool,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::InvalidInput(_) | Error::DegenerateEnsemble(_) => 2,
        Error::DimensionMismatch { .. } => 3,
        Error::DimensionTooLarge { .. } | Error::Unsupported(_) | Error::Unsamplable(_) | Error::MissingDerivative { .. } => 4,
        Error::ImaginaryResidue { .. } | Error::QuadratureNonConvergence { .. } | Error::NonIntegrable(_) => 5,
    }
}

fn run(cli: Cli) -> sphsum::Result<commands::Report> {
    use config::load;
    match cli.command {
        Command::Phi { config, mc } => commands::phi(load(&config)?, mc, cli.seed),
        Command::Transform { config, numeric } => commands::transform(load(&config)?, numeric),
        Command::Sum { config, matrix } => commands::sum(load(&config)?, matrix),
        Command::Kernel { config, transformed, alpha } => commands::kernel(load(&config)?, transformed, alpha),
        Command::Validate { config, count, gate } => commands::validate(load(&config)?, cli.seed, count, gate),
        Command::Sample { config, histogram } => commands::sample(load(&config)?, cli.seed, histogram),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli) {
        Ok(report) => {
            let mut out = std::io::stdout().lock();
            let _ = out.write_all(report.csv.as_bytes());
            for n in &report.notes {
                eprintln!("{n}");
            }
            if report.gate_failed {
                eprintln!("quality gate failed");
                ExitCode::from(5)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
