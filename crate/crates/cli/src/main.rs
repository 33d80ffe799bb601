//! `renormlab`: find cycles, solve operator fixed points, sweep the
//! critical exponent, run the brute-force cascade oracle, and verify the
//! acceptance criteria. Exit codes: 0 success, 1 domain-negative (no
//! cycle, failed criteria), 2 numeric failure, 64 usage.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use renormlab_cli::config::default_out_dir;
use renormlab_cli::{
    cmd_find_cycle, cmd_fixed_point, cmd_oracle, cmd_sweep_alpha, cmd_verify, RunConfig,
    SigmaSpec, Tolerances,
};

#[derive(Parser)]
#[command(
    name = "renormlab",
    version,
    about = "Numerical laboratory for decomposed period-doubling renormalization"
)]
struct Cli {
    /// Critical exponent of the fold (must exceed 1)
    #[arg(long, global = true, default_value_t = 2.0)]
    alpha: f64,
    /// Combinatorics name
    #[arg(long, global = true, default_value = "doubling")]
    sigma: String,
    /// Chebyshev truncation degree (at least 16)
    #[arg(long, global = true, default_value_t = 60)]
    degree: usize,
    /// Operator residual the Newton solve must reach
    #[arg(long, global = true, default_value_t = 1e-10)]
    newton_tol: f64,
    /// Orbit-return miss allowed when certifying a cycle
    #[arg(long, global = true, default_value_t = 1e-12)]
    cycle_tol: f64,
    /// Finite-difference step for the linearization cross-check
    #[arg(long, global = true, default_value_t = 1e-6)]
    fd_step: f64,
    /// Output directory for documents (default: $RENORMLAB_OUT or .)
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Locate a periodic interval cycle of the bare family at parameter t
    FindCycle {
        /// Fold parameter in (0, 1)
        #[arg(long)]
        t: f64,
        /// Cycle period (at least 2)
        #[arg(long, default_value_t = 2)]
        period: usize,
    },
    /// Solve the operator fixed point and write its document
    FixedPoint,
    /// CSV of fixed-point data over an exponent range
    SweepAlpha {
        #[arg(long)]
        alpha_min: f64,
        #[arg(long)]
        alpha_max: f64,
        #[arg(long, default_value_t = 0.05)]
        step: f64,
    },
    /// CSV of the superstable cascade and its extrapolated rate
    Oracle {
        /// Cascade depth (at least 6)
        #[arg(long, default_value_t = 9)]
        levels: usize,
    },
    /// Run the acceptance criteria and print PASS/FAIL lines
    Verify {
        /// Comma-separated criterion names (default: all)
        #[arg(long, value_delimiter = ',')]
        criteria: Option<Vec<String>>,
    },
}

fn config_of(cli: &Cli) -> RunConfig {
    RunConfig {
        alpha: cli.alpha,
        sigma: SigmaSpec {
            name: cli.sigma.clone(),
            period: 2,
        },
        degree: cli.degree,
        tolerances: Tolerances {
            newton: cli.newton_tol,
            cycle: cli.cycle_tol,
            fd_step: cli.fd_step,
        },
        out_dir: cli.out_dir.clone().unwrap_or_else(default_out_dir),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 64,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let config = config_of(&cli);
    if let Err(msg) = config.validate() {
        eprintln!("usage: {msg}");
        return ExitCode::from(64);
    }
    let mut stdout = std::io::stdout().lock();
    let result = match cli.cmd {
        Cmd::FindCycle { t, period } => cmd_find_cycle(&config, t, period, &mut stdout),
        Cmd::FixedPoint => cmd_fixed_point(&config, &mut stdout),
        Cmd::SweepAlpha {
            alpha_min,
            alpha_max,
            step,
        } => cmd_sweep_alpha(&config, alpha_min, alpha_max, step, &mut stdout),
        Cmd::Oracle { levels } => cmd_oracle(&config, levels, &mut stdout),
        Cmd::Verify { criteria } => cmd_verify(&config, criteria.as_deref(), &mut stdout),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
