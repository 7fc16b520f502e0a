//! Batch command implementations: solve, verify, spectrum, sweep, and the
//! profile-table dump. Each returns a process exit code:
//! 0 success, 2 diverged, 3 collapsed to the trivial solution, 4 bad flags,
//! 5 a selected check failed.

use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};

use saddle_core::geometry::{b_range, DimensionParams};
use saddle_core::grid::QuadrantGrid;
use saddle_core::linearized::{
    auto_b, certify_supersolution, min_eigenvalue, EigenOptions, LinearizedOperator, SlackPolicy,
};
use saddle_core::nonlinearity::BistableNonlinearity;
use saddle_core::profile::Profile1D;
use saddle_core::solver::{
    initialize, solve, InitKind, SaddleSolution, SolverConfig, SolverError, SolverMode,
};
use saddle_core::verify::{
    check_approximant_supersolution, check_asymptotics, check_signs, check_uniqueness,
};

use crate::archive::{
    self, mode_name, write_json, CertificateReport, CheckParams, SolutionArchive, SpectrumReport,
    VerdictReport,
};
use crate::config::{resolve_nonlinearity, NonlinearitySpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DIVERGED: i32 = 2;
pub const EXIT_COLLAPSED: i32 = 3;
pub const EXIT_BAD_FLAGS: i32 = 4;
pub const EXIT_CHECK_FAILED: i32 = 5;

/// Default truncation: the cone-normal extent reaches z = 12.
pub fn default_s_max() -> f64 {
    12.0 * 2.0f64.sqrt()
}

const PROFILE_T_MAX: f64 = 12.0;
const PROFILE_STEP: f64 = 0.002;

pub struct SolveOptions {
    pub dim: usize,
    pub s_max: f64,
    pub h: f64,
    pub mode: SolverMode,
    pub tol: f64,
    pub max_iters: usize,
    pub seed: u64,
    pub init: InitKind,
    pub nonlinearity: BistableNonlinearity,
    /// Echoed into the archive for custom odd polynomials.
    pub odd_coefficients: Option<Vec<f64>>,
    pub out: Option<PathBuf>,
    pub plot_out: Option<PathBuf>,
}

pub fn parse_mode(name: &str) -> Result<SolverMode> {
    match name {
        "monotone" => Ok(SolverMode::Monotone),
        "newton" => Ok(SolverMode::Newton),
        "hybrid" => Ok(SolverMode::Hybrid),
        other => bail!("unknown mode {other:?} (monotone|newton|hybrid)"),
    }
}

pub fn parse_init(name: &str, seed: u64) -> Result<InitKind> {
    match name {
        "from-u" => Ok(InitKind::FromApproximant),
        "bump" => Ok(InitKind::ZeroPlusBump),
        "zero" => Ok(InitKind::Zero),
        "random" => Ok(InitKind::RandomizedPositive { seed }),
        other => bail!("unknown init {other:?} (from-u|bump|zero|random)"),
    }
}

fn build_profile(nl: &BistableNonlinearity) -> Result<Profile1D> {
    Profile1D::build(nl, PROFILE_T_MAX, PROFILE_STEP)
        .map_err(|e| anyhow!("profile construction failed: {e}"))
}

pub fn cmd_solve(opts: &SolveOptions) -> Result<i32> {
    let dim = match DimensionParams::from_full_dimension(opts.dim) {
        Ok(d) => d,
        Err(e) => {
            eprintln!("error: {e}");
            return Ok(EXIT_BAD_FLAGS);
        }
    };
    let grid = QuadrantGrid::new(opts.s_max, opts.h, dim);
    let prof = build_profile(&opts.nonlinearity)?;
    let init = initialize(&grid, &prof, opts.init);
    let cfg = SolverConfig {
        mode: opts.mode,
        tol: opts.tol,
        max_iters: opts.max_iters,
        seed: opts.seed,
        ..Default::default()
    };

    let start = Instant::now();
    let mut sol = match solve(&init, &cfg, &opts.nonlinearity) {
        Ok(sol) => sol,
        Err(SolverError::Diverged {
            iterations,
            last_residual,
        }) => {
            eprintln!("diverged after {iterations} iterations (residual {last_residual:.3e})");
            return Ok(EXIT_DIVERGED);
        }
        Err(SolverError::CollapsedToTrivial { sup }) => {
            eprintln!("collapsed to the trivial solution (sup |u| = {sup:.3e})");
            return Ok(EXIT_COLLAPSED);
        }
        Err(e) => return Err(anyhow!("solve failed: {e}")),
    };
    sol.wall_time_ms = Some(start.elapsed().as_secs_f64() * 1e3);

    println!(
        "solved 2m={} on S={:.6} h={:.6} ({} mode, seed {}): {} iterations, residual {:.3e}, {:.1} ms",
        dim.full_dimension(),
        grid.s_max(),
        grid.h(),
        mode_name(opts.mode),
        opts.seed,
        sol.iterations,
        sol.final_residual,
        sol.wall_time_ms.unwrap(),
    );

    if let Some(path) = &opts.out {
        let mut arch = SolutionArchive::from_solution(&sol);
        arch.odd_coefficients = opts.odd_coefficients.clone();
        arch.write(path)?;
        println!("archive written to {}", path.display());
    }
    if let Some(path) = &opts.plot_out {
        archive::write_field_plot(path, &sol.field)?;
    }
    Ok(EXIT_OK)
}

/// Rebuilds the in-memory solution (and its nonlinearity and profile) from an
/// archive.
pub fn load_solution(path: &Path) -> Result<(SaddleSolution, BistableNonlinearity, Profile1D)> {
    let arch = SolutionArchive::read(path)?;
    let spec = arch
        .odd_coefficients
        .as_ref()
        .map(|c| NonlinearitySpec::OddPolynomial {
            name: arch.nonlinearity.clone(),
            odd_coefficients: c.clone(),
        })
        .or_else(|| {
            if arch.nonlinearity == "allen-cahn" {
                None
            } else {
                Some(NonlinearitySpec::Name(arch.nonlinearity.clone()))
            }
        });
    let nl = resolve_nonlinearity(spec.as_ref())?;
    let prof = build_profile(&nl)?;
    let field = arch.field()?;
    let dim = DimensionParams::new(arch.m);
    let cfg = SolverConfig {
        mode: parse_mode(&arch.mode).unwrap_or(SolverMode::Newton),
        tol: arch.tol,
        seed: arch.seed,
        ..Default::default()
    };
    let sol = SaddleSolution {
        field,
        dim,
        nonlinearity: arch.nonlinearity.clone(),
        config: cfg,
        iterations: arch.iterations,
        final_residual: arch.residual,
        wall_time_ms: None,
        report: Default::default(),
    };
    Ok((sol, nl, prof))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckName {
    Signs,
    Asymptotics,
    Uniqueness,
    SupersolutionU,
    Certificate,
}

pub fn parse_checks(list: &str) -> Result<Vec<CheckName>> {
    list.split(',')
        .map(|item| match item.trim() {
            "signs" => Ok(CheckName::Signs),
            "asymptotics" => Ok(CheckName::Asymptotics),
            "uniqueness" => Ok(CheckName::Uniqueness),
            "supersolutionU" => Ok(CheckName::SupersolutionU),
            "certificate" => Ok(CheckName::Certificate),
            other => bail!(
                "unknown check {other:?} (signs,asymptotics,uniqueness,supersolutionU,certificate)"
            ),
        })
        .collect()
}

pub struct VerifyOptions {
    pub sol: PathBuf,
    pub checks: Vec<CheckName>,
    /// None means `--b auto`.
    pub b: Option<f64>,
    pub out: Option<PathBuf>,
    pub decay_out: Option<PathBuf>,
    pub seed: u64,
}

pub fn cmd_verify(opts: &VerifyOptions) -> Result<i32> {
    let (sol, nl, prof) = load_solution(&opts.sol)?;
    let grid = sol.field.grid().clone();
    let params = CheckParams {
        s_max: grid.s_max(),
        h: grid.h(),
    };
    let m = sol.dim.m();
    let mut verdicts: Vec<VerdictReport> = Vec::new();
    let mut certificate: Option<CertificateReport> = None;
    let mut all_pass = true;

    for &check in &opts.checks {
        match check {
            CheckName::Signs => {
                let report = check_signs(&sol, &nl, &prof);
                for (name, sub) in [
                    ("signs.u_y", &report.along_cone),
                    ("signs.minus_u_t", &report.inward),
                    ("signs.u_st", &report.mixed),
                ] {
                    println!(
                        "{name}: {} (worst {}, strict {}, allowance {:.3e})",
                        pass_str(sub.pass),
                        sub.worst,
                        sub.strict_worst,
                        sub.allowance
                    );
                    verdicts.push(VerdictReport {
                        allowance: sub.allowance,
                        check: name.to_string(),
                        m,
                        params: CheckParams { ..params },
                        pass: sub.pass,
                        worst_node: (sub.worst.s, sub.worst.t),
                        worst_value: sub.worst.value,
                    });
                }
                all_pass &= report.pass;
            }
            CheckName::Asymptotics => {
                let report = check_asymptotics(&sol, &prof, 8);
                println!(
                    "asymptotics: {} (a_k tail {:?}, boundary level {:.3e})",
                    pass_str(report.pass),
                    &report.first_order[report.first_order.len() - 3..],
                    report.boundary_estimate
                );
                if let Some(path) = &opts.decay_out {
                    let mut rows = String::from("# radius first_order second_order\n");
                    for k in 0..report.first_order.len() {
                        rows.push_str(&format!(
                            "{} {} {}\n",
                            report.radii[k], report.first_order[k], report.second_order[k]
                        ));
                    }
                    std::fs::write(path, rows)
                        .with_context(|| format!("writing {}", path.display()))?;
                }
                let k = report.first_order.len();
                verdicts.push(VerdictReport {
                    allowance: report.boundary_estimate,
                    check: "asymptotics".to_string(),
                    m,
                    params: CheckParams { ..params },
                    pass: report.pass,
                    worst_node: (report.radii[k - 1], report.radii[k]),
                    worst_value: report.first_order[k - 1],
                });
                all_pass &= report.pass;
            }
            CheckName::Uniqueness => {
                let cfg = SolverConfig {
                    mode: SolverMode::Hybrid,
                    tol: sol.config.tol,
                    seed: opts.seed,
                    ..Default::default()
                };
                let report = check_uniqueness(
                    &grid,
                    &nl,
                    &prof,
                    &cfg,
                    &[
                        InitKind::FromApproximant,
                        InitKind::ZeroPlusBump,
                        InitKind::RandomizedPositive { seed: opts.seed },
                    ],
                )
                .map_err(|e| anyhow!("uniqueness solve failed: {e}"))?;
                let worst = report
                    .pairwise
                    .iter()
                    .map(|&(_, _, d)| d)
                    .fold(0.0f64, f64::max);
                println!(
                    "uniqueness: {} (worst pairwise {:.3e}, tolerance {:.3e}, collapsed {:?})",
                    pass_str(report.pass),
                    worst,
                    report.tolerance,
                    report.collapsed
                );
                verdicts.push(VerdictReport {
                    allowance: report.tolerance,
                    check: "uniqueness".to_string(),
                    m,
                    params: CheckParams { ..params },
                    pass: report.pass,
                    worst_node: (0.0, 0.0),
                    worst_value: worst,
                });
                all_pass &= report.pass;
            }
            CheckName::SupersolutionU => {
                let report = check_approximant_supersolution(&grid, &prof, &nl);
                println!(
                    "supersolutionU: {} (worst {}, slack {:.3e})",
                    pass_str(report.pass),
                    report.worst,
                    report.slack
                );
                verdicts.push(VerdictReport {
                    allowance: report.slack,
                    check: "supersolutionU".to_string(),
                    m,
                    params: CheckParams { ..params },
                    pass: report.pass,
                    worst_node: (report.worst.s, report.worst.t),
                    worst_value: report.worst.value,
                });
                all_pass &= report.pass;
            }
            CheckName::Certificate => {
                let b = match opts.b.or_else(|| auto_b(sol.dim)) {
                    Some(b) => b,
                    None => {
                        eprintln!(
                            "certificate: FAIL — no admissible b (2m = {} < 14, the exponent \
                             inequality has no positive root)",
                            sol.dim.full_dimension()
                        );
                        all_pass = false;
                        continue;
                    }
                };
                let cert = certify_supersolution(&sol, &nl, &prof, b, SlackPolicy::default())
                    .map_err(|e| anyhow!("certificate failed: {e}"))?;
                println!(
                    "certificate (b = {b}): {} (min_phi {:.3e}, max_Lphi {:.3e}, slack {:.3e})",
                    pass_str(cert.verdict),
                    cert.min_phi,
                    cert.max_l_phi,
                    cert.slack
                );
                all_pass &= cert.verdict;
                certificate = Some(CertificateReport::new(m, &cert));
            }
        }
    }

    if let Some(path) = &opts.out {
        #[derive(serde::Serialize)]
        struct Bundle {
            certificate: Option<CertificateReport>,
            checks: Vec<VerdictReport>,
            pass: bool,
        }
        write_json(
            path,
            &Bundle {
                certificate,
                checks: verdicts,
                pass: all_pass,
            },
        )?;
    }

    Ok(if all_pass { EXIT_OK } else { EXIT_CHECK_FAILED })
}

fn pass_str(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

pub struct SpectrumOptions {
    pub sol: PathBuf,
    pub count: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub eigenfield_out: Option<PathBuf>,
}

/// Allowance for calling a nonnegative-looking smallest eigenvalue "stable at
/// this truncation": discretization pushes eigenvalues by O(h²) scale.
pub const SPECTRUM_ALLOWANCE: f64 = 1e-3;

pub fn cmd_spectrum(opts: &SpectrumOptions) -> Result<i32> {
    let (sol, nl, _prof) = load_solution(&opts.sol)?;
    let lin = LinearizedOperator::new(&sol, &nl);
    let eig_opts = EigenOptions {
        count: opts.count,
        seed: opts.seed,
        ..Default::default()
    };
    let est = min_eigenvalue(&lin, &eig_opts).map_err(|e| anyhow!("spectrum failed: {e}"))?;

    let dim = sol.dim.full_dimension();
    let verdict = if dim <= 6 {
        if est.lambda_min < -est.residual {
            "unstable within the (s,t) class".to_string()
        } else {
            "instability not detected at this truncation".to_string()
        }
    } else if dim <= 12 {
        "open per the available theory".to_string()
    } else if est.lambda_min >= -SPECTRUM_ALLOWANCE {
        "stable within allowance".to_string()
    } else {
        "negative beyond allowance (unexpected)".to_string()
    };

    println!(
        "2m={dim}: lambda_min = {:.6e} (residual {:.2e}, class {}) — {verdict}",
        est.lambda_min, est.residual, est.class
    );
    if !est.next.is_empty() {
        println!("next eigenvalues: {:?}", est.next);
    }

    let grid = sol.field.grid();
    let report = SpectrumReport {
        s_max: grid.s_max(),
        class: est.class.to_string(),
        h: grid.h(),
        lambda_min: est.lambda_min,
        m: sol.dim.m(),
        next: est.next.clone(),
        residual: est.residual,
        seed: opts.seed,
        verdict,
    };
    if let Some(path) = &opts.out {
        write_json(path, &report)?;
    }
    if let Some(path) = &opts.eigenfield_out {
        archive::write_square_plot(path, &est.eigenfield)?;
    }
    Ok(EXIT_OK)
}

pub struct SweepOptions {
    pub dims: Vec<usize>,
    pub s_max: f64,
    pub h: f64,
    pub tol: f64,
    pub seed: u64,
    pub nonlinearity: BistableNonlinearity,
    pub out: Option<PathBuf>,
}

/// One CSV row per dimension: solve, sign checks, spectrum, certificate.
pub fn cmd_sweep(opts: &SweepOptions) -> Result<i32> {
    let mut csv = String::from("dim,residual,lambda_min,b_lo,b_hi,signs_pass,cert_pass\n");
    let prof = build_profile(&opts.nonlinearity)?;

    for &dim_full in &opts.dims {
        let dim = match DimensionParams::from_full_dimension(dim_full) {
            Ok(d) => d,
            Err(e) => {
                eprintln!("error: {e}");
                return Ok(EXIT_BAD_FLAGS);
            }
        };
        let grid = QuadrantGrid::new(opts.s_max, opts.h, dim);
        let init = initialize(&grid, &prof, InitKind::FromApproximant);
        let cfg = SolverConfig {
            tol: opts.tol,
            seed: opts.seed,
            ..Default::default()
        };
        let sol = solve(&init, &cfg, &opts.nonlinearity)
            .map_err(|e| anyhow!("2m={dim_full} solve failed: {e}"))?;

        let signs = check_signs(&sol, &opts.nonlinearity, &prof);
        let lin = LinearizedOperator::new(&sol, &opts.nonlinearity);
        let est = min_eigenvalue(
            &lin,
            &EigenOptions {
                seed: opts.seed,
                ..Default::default()
            },
        )
        .map_err(|e| anyhow!("2m={dim_full} spectrum failed: {e}"))?;

        let range = b_range(dim);
        let cert_pass = match auto_b(dim) {
            Some(b) => {
                certify_supersolution(&sol, &opts.nonlinearity, &prof, b, SlackPolicy::default())
                    .map_err(|e| anyhow!("2m={dim_full} certificate failed: {e}"))?
                    .verdict
            }
            None => false,
        };
        let (b_lo, b_hi) = range.map_or((f64::NAN, f64::NAN), |r| r);
        csv.push_str(&format!(
            "{},{:e},{:e},{},{},{},{}\n",
            dim_full, sol.final_residual, est.lambda_min, b_lo, b_hi, signs.pass, cert_pass
        ));
        println!(
            "2m={dim_full}: residual {:.2e}, lambda_min {:.4e}, signs {}, certificate {}",
            sol.final_residual,
            est.lambda_min,
            pass_str(signs.pass),
            pass_str(cert_pass)
        );
    }

    match &opts.out {
        Some(path) => {
            std::fs::write(path, csv).with_context(|| format!("writing {}", path.display()))?
        }
        None => print!("{csv}"),
    }
    Ok(EXIT_OK)
}

pub struct ProfileOptions {
    pub nonlinearity: BistableNonlinearity,
    pub t_max: f64,
    pub step: f64,
    pub tabulated: bool,
    pub out: PathBuf,
}

pub fn cmd_profile(opts: &ProfileOptions) -> Result<i32> {
    let prof = if opts.tabulated {
        Profile1D::build_tabulated(&opts.nonlinearity, opts.t_max, opts.step)
    } else {
        Profile1D::build(&opts.nonlinearity, opts.t_max, opts.step)
    }
    .map_err(|e| anyhow!("profile construction failed: {e}"))?;
    archive::write_profile_csv(&opts.out, &prof)?;
    println!(
        "profile table ({:?} mode) written to {}",
        prof.mode(),
        opts.out.display()
    );
    Ok(EXIT_OK)
}
