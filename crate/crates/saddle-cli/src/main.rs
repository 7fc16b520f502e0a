//! `saddle` — batch front end for the saddle-solution laboratory.
//!
//! Exit codes: 0 success, 2 solver diverged, 3 collapsed to the trivial
//! solution, 4 bad flags, 5 a selected check failed.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use saddle_cli::commands::{
    self, cmd_profile, cmd_solve, cmd_spectrum, cmd_sweep, cmd_verify, default_s_max, parse_checks,
    parse_init, parse_mode, ProfileOptions, SolveOptions, SpectrumOptions, SweepOptions,
    VerifyOptions, EXIT_BAD_FLAGS,
};
use saddle_cli::config::{resolve_nonlinearity, FileConfig, NonlinearitySpec};

#[derive(Parser)]
#[command(
    name = "saddle",
    about = "Saddle-shaped solutions of bistable diffusion equations in the (s,t) plane",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the truncated problem and write a solution archive.
    Solve(SolveArgs),
    /// Run named checks against a solution archive.
    Verify(VerifyArgs),
    /// Smallest eigenvalue of the linearized operator in the (s,t) class.
    Spectrum(SpectrumArgs),
    /// Solve + verify + spectrum over a list of dimensions, one CSV row each.
    Sweep(SweepArgs),
    /// Dump the 1D profile table (tau,u0,u0_prime) as CSV.
    Profile(ProfileArgs),
}

#[derive(Args)]
struct CommonConfig {
    /// Optional JSON config file carrying the same keys as the flags.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    common: CommonConfig,
    /// Full ambient dimension 2m (even, >= 2).
    #[arg(long)]
    dim: Option<usize>,
    /// Truncation radius in (s,t); default 12·sqrt(2).
    #[arg(long = "S")]
    s_max: Option<f64>,
    /// Grid spacing target (adjusted so S/h is an integer).
    #[arg(long)]
    h: Option<f64>,
    /// monotone | newton | hybrid.
    #[arg(long)]
    mode: Option<String>,
    /// Residual sup-norm target.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
    /// Seed for randomized starts; echoed into the archive.
    #[arg(long)]
    seed: Option<u64>,
    /// from-u | bump | zero | random.
    #[arg(long, default_value = "from-u")]
    init: String,
    /// Solution archive output path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Whitespace `s t u` plot file.
    #[arg(long)]
    plot_out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Solution archive to check.
    #[arg(long)]
    sol: PathBuf,
    /// Comma list: signs,asymptotics,uniqueness,supersolutionU,certificate.
    #[arg(long, default_value = "signs,asymptotics,supersolutionU")]
    checks: String,
    /// Certificate exponent; "auto" picks the midpoint of the admissible range.
    #[arg(long, default_value = "auto")]
    b: String,
    /// Verdict bundle JSON output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Whitespace decay table (radius, first-order, second-order sups).
    #[arg(long)]
    decay_out: Option<PathBuf>,
    #[arg(long, default_value_t = 0x5add1e)]
    seed: u64,
}

#[derive(Args)]
struct SpectrumArgs {
    #[arg(long)]
    sol: PathBuf,
    /// Number of eigenvalues (smallest first, deflated), 1..=3.
    #[arg(long, default_value_t = 1)]
    count: usize,
    #[arg(long, default_value_t = 0x51dec0de)]
    seed: u64,
    /// Spectrum report JSON output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Whitespace `s t value` plot of the eigenfield.
    #[arg(long)]
    eigenfield_out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonConfig,
    /// Comma list of full dimensions, e.g. 2,4,6.
    #[arg(long)]
    dims: String,
    #[arg(long = "S")]
    s_max: Option<f64>,
    #[arg(long)]
    h: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// CSV output path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ProfileArgs {
    #[command(flatten)]
    common: CommonConfig,
    #[arg(long, default_value_t = 12.0)]
    t_max: f64,
    #[arg(long, default_value_t = 0.002)]
    step: f64,
    /// Force the tabulated path even for Allen–Cahn.
    #[arg(long, default_value_t = false)]
    tabulated: bool,
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap uses exit code 2 by itself; the laboratory reserves 2 for
            // divergence and reports bad flags as 4 (0 for --help/--version).
            use clap::error::ErrorKind;
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_BAD_FLAGS as u8),
            };
        }
    };

    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<i32> {
    match cli.command {
        Command::Solve(args) => {
            let cfg = load_config(&args.common)?;
            let nl = match resolve_nonlinearity(cfg.nonlinearity.as_ref()) {
                Ok(nl) => nl,
                Err(e) => {
                    eprintln!("error: {e}");
                    return Ok(EXIT_BAD_FLAGS);
                }
            };
            let seed = args.seed.or(cfg.seed).unwrap_or(0x5add1e);
            let mode = match args
                .mode
                .as_deref()
                .or(cfg.mode.as_deref())
                .map(parse_mode)
                .transpose()
            {
                Ok(mode) => mode.unwrap_or(saddle_core::solver::SolverMode::Newton),
                Err(e) => {
                    eprintln!("error: {e}");
                    return Ok(EXIT_BAD_FLAGS);
                }
            };
            let init = match parse_init(&args.init, seed) {
                Ok(init) => init,
                Err(e) => {
                    eprintln!("error: {e}");
                    return Ok(EXIT_BAD_FLAGS);
                }
            };
            let dim = match args.dim.or(cfg.dim) {
                Some(d) => d,
                None => {
                    eprintln!("error: --dim is required");
                    return Ok(EXIT_BAD_FLAGS);
                }
            };
            let odd_coefficients = match &cfg.nonlinearity {
                Some(NonlinearitySpec::OddPolynomial {
                    odd_coefficients, ..
                }) => Some(odd_coefficients.clone()),
                _ => None,
            };
            cmd_solve(&SolveOptions {
                dim,
                s_max: args.s_max.or(cfg.s_max).unwrap_or_else(default_s_max),
                h: args.h.or(cfg.h).unwrap_or(0.1),
                mode,
                tol: args.tol.or(cfg.tol).unwrap_or(1e-8),
                max_iters: args.max_iters.or(cfg.max_iters).unwrap_or(20_000),
                seed,
                init,
                nonlinearity: nl,
                odd_coefficients,
                out: args.out,
                plot_out: args.plot_out,
            })
        }
        Command::Verify(args) => {
            let checks = match parse_checks(&args.checks) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("error: {e}");
                    return Ok(EXIT_BAD_FLAGS);
                }
            };
            let b = if args.b == "auto" {
                None
            } else {
                match args.b.parse::<f64>() {
                    Ok(v) => Some(v),
                    Err(_) => {
                        eprintln!("error: --b must be a number or \"auto\"");
                        return Ok(EXIT_BAD_FLAGS);
                    }
                }
            };
            cmd_verify(&VerifyOptions {
                sol: args.sol,
                checks,
                b,
                out: args.out,
                decay_out: args.decay_out,
                seed: args.seed,
            })
        }
        Command::Spectrum(args) => {
            if !(1..=3).contains(&args.count) {
                eprintln!("error: --count must be 1..=3");
                return Ok(EXIT_BAD_FLAGS);
            }
            cmd_spectrum(&SpectrumOptions {
                sol: args.sol,
                count: args.count,
                seed: args.seed,
                out: args.out,
                eigenfield_out: args.eigenfield_out,
            })
        }
        Command::Sweep(args) => {
            let cfg = load_config(&args.common)?;
            let nl = match resolve_nonlinearity(cfg.nonlinearity.as_ref()) {
                Ok(nl) => nl,
                Err(e) => {
                    eprintln!("error: {e}");
                    return Ok(EXIT_BAD_FLAGS);
                }
            };
            let dims: Result<Vec<usize>, _> =
                args.dims.split(',').map(|d| d.trim().parse()).collect();
            let dims = match dims {
                Ok(d) if !d.is_empty() => d,
                _ => {
                    eprintln!("error: --dims must be a comma list of even integers");
                    return Ok(EXIT_BAD_FLAGS);
                }
            };
            cmd_sweep(&SweepOptions {
                dims,
                s_max: args.s_max.or(cfg.s_max).unwrap_or_else(default_s_max),
                h: args.h.or(cfg.h).unwrap_or(0.1),
                tol: args.tol.or(cfg.tol).unwrap_or(1e-8),
                seed: args.seed.or(cfg.seed).unwrap_or(0x5add1e),
                nonlinearity: nl,
                out: args.out,
            })
        }
        Command::Profile(args) => {
            let cfg = load_config(&args.common)?;
            let nl = match resolve_nonlinearity(cfg.nonlinearity.as_ref()) {
                Ok(nl) => nl,
                Err(e) => {
                    eprintln!("error: {e}");
                    return Ok(EXIT_BAD_FLAGS);
                }
            };
            cmd_profile(&ProfileOptions {
                nonlinearity: nl,
                t_max: args.t_max,
                step: args.step,
                tabulated: args.tabulated,
                out: args.out,
            })
        }
    }
}

fn load_config(common: &CommonConfig) -> anyhow::Result<FileConfig> {
    match &common.config {
        Some(path) => FileConfig::load(path),
        None => Ok(FileConfig::default()),
    }
}

// Exit-code constants are re-exported for the integration tests.
#[allow(unused_imports)]
use commands::{EXIT_CHECK_FAILED, EXIT_COLLAPSED, EXIT_DIVERGED, EXIT_OK};
