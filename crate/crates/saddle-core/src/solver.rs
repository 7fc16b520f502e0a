//! Solvers for the saddle solution on the truncated triangle {0 ≤ t ≤ s ≤ S}:
//! linearly-implicit monotone iteration, damped Newton with conjugate-gradient
//! inner solves, a hybrid of the two, and the weighted energy functional.
//!
//! Dirichlet data is u = 0 on the diagonal (the cone) and frozen far-field
//! data on the rim s = S; both are read from the initial field and never
//! updated, so truncation error is not conflated with iteration error.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::geometry::{eval_approximant, DimensionParams, STPoint};
use crate::grid::{apply_operator_st, apply_weighted_laplacian, QuadrantGrid, ScalarField};
use crate::linalg::{solve_cg, CgError, WeightedOp};
use crate::nonlinearity::BistableNonlinearity;
use crate::profile::Profile1D;
use crate::rng::SplitMix64;
use alloc::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverMode {
    Monotone,
    Newton,
    Hybrid,
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub mode: SolverMode,
    /// Residual sup-norm target.
    pub tol: f64,
    pub max_iters: usize,
    /// Initial Newton damping in (0, 1].
    pub damping: f64,
    /// Relative tolerance of the inner linear solves.
    pub linear_tol: f64,
    /// Seed for randomized starts; echoed into archives.
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            mode: SolverMode::Newton,
            tol: 1e-8,
            max_iters: 20_000,
            damping: 1.0,
            linear_tol: 1e-11,
            seed: 0x5add1e,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct IterationRecord {
    pub residual: f64,
    pub energy: f64,
    pub step_size: f64,
    /// Pointwise extremes of u_next − u over the unknowns; the monotone modes
    /// keep one of them at roundoff scale.
    pub delta_max: f64,
    pub delta_min: f64,
}

#[derive(Debug, Clone, Default)]
pub struct IterationReport {
    pub records: Vec<IterationRecord>,
}

/// A converged saddle solution on the triangle, with solver metadata.
#[derive(Debug, Clone)]
pub struct SaddleSolution {
    pub field: ScalarField,
    pub dim: DimensionParams,
    pub nonlinearity: String,
    pub config: SolverConfig,
    pub iterations: usize,
    pub final_residual: f64,
    /// Filled by the front end; the core has no clock.
    pub wall_time_ms: Option<f64>,
    pub report: IterationReport,
}

#[derive(Debug)]
pub enum SolverError {
    Diverged {
        iterations: usize,
        last_residual: f64,
    },
    /// Converged to sup|u| < 1e−4: the trivial solution, which is not
    /// saddle-shaped and is rejected.
    CollapsedToTrivial {
        sup: f64,
    },
    LinearBreakdown {
        iteration: usize,
        inner: CgError,
    },
    /// Residual reduction below 1e−3 over five consecutive Newton steps.
    Stagnation {
        iteration: usize,
        residual: f64,
    },
    /// The converged field violates 0 < u < 1 on the interior of {s > t}.
    RangeViolation {
        value: f64,
    },
}

impl fmt::Display for SolverError {
    fn fmt(&self, fmt: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolverError::Diverged {
                iterations,
                last_residual,
            } => write!(
                fmt,
                "no convergence after {iterations} iterations (residual {last_residual:.3e})"
            ),
            SolverError::CollapsedToTrivial { sup } => {
                write!(
                    fmt,
                    "collapsed to the trivial solution (sup |u| = {sup:.3e})"
                )
            }
            SolverError::LinearBreakdown { iteration, inner } => {
                write!(
                    fmt,
                    "inner linear solve failed at iteration {iteration}: {inner}"
                )
            }
            SolverError::Stagnation {
                iteration,
                residual,
            } => {
                write!(
                    fmt,
                    "stagnation at iteration {iteration} (residual {residual:.3e})"
                )
            }
            SolverError::RangeViolation { value } => {
                write!(
                    fmt,
                    "converged field leaves (0,1) on the interior of {{s>t}}: {value:.3e}"
                )
            }
        }
    }
}

impl core::error::Error for SolverError {}

/// Initial fields for the solve. All variants carry the Dirichlet data:
/// zero on the diagonal, far-field approximant on the rim s = S.
#[derive(Debug, Clone, Copy)]
pub enum InitKind {
    /// The approximant U clipped to [0, 1−1e−9]; a natural supersolution-like
    /// start for the monotone scheme.
    FromApproximant,
    /// Zero plus the positive interior bump ε·s(s−t)/(1+s²); escapes the
    /// trivial solution without waiting for boundary data to diffuse in.
    ZeroPlusBump,
    /// The exact subsolution 0 in the interior (rim data still frozen).
    Zero,
    /// U scaled nodewise by uniform factors in [0.25, 1); a rough positive
    /// start for uniqueness sweeps. Deterministic in the seed.
    RandomizedPositive { seed: u64 },
}

pub fn initialize(grid: &Arc<QuadrantGrid>, prof: &Profile1D, kind: InitKind) -> ScalarField {
    let n = grid.n();
    let mut rng = match kind {
        InitKind::RandomizedPositive { seed } => Some(SplitMix64::new(seed)),
        _ => None,
    };
    let mut field = ScalarField::zeros(grid);
    for i in 0..n {
        for j in 0..=i {
            let s = grid.coord(i);
            let t = grid.coord(j);
            let u_far = eval_approximant(STPoint::new(s, t), prof).clamp(0.0, 1.0 - 1e-9);
            let v = if j == i {
                0.0
            } else if i == n - 1 {
                u_far
            } else {
                match kind {
                    InitKind::FromApproximant => u_far,
                    InitKind::Zero => 0.0,
                    InitKind::ZeroPlusBump => (0.1 * s * (s - t) / (1.0 + s * s)).min(0.9),
                    InitKind::RandomizedPositive { .. } => {
                        let r = rng.as_mut().expect("rng").range(0.25, 1.0);
                        r * u_far
                    }
                }
            };
            field.set(i, j, v);
        }
    }
    field
}

/// Unknown-node bookkeeping for the triangle problem.
struct TriTopo {
    grid: Arc<QuadrantGrid>,
    active: Vec<(u32, u32)>,
    /// tri index -> packed index, or u32::MAX for Dirichlet nodes.
    active_of: Vec<u32>,
    /// Dual-cell measures μ_i μ_j of the unknowns.
    measures: Vec<f64>,
    /// Uniform Euclidean weights for the row-space CG.
    ones: Vec<f64>,
    /// Σ of flux couplings at each unknown: the diagonal of −L₀.
    neg_lap_diag: Vec<f64>,
}

impl TriTopo {
    fn new(grid: &Arc<QuadrantGrid>) -> Self {
        let n = grid.n();
        let h = grid.h();
        let mut active = Vec::new();
        let mut active_of = vec![u32::MAX; grid.tri_len()];
        let mut measures = Vec::new();
        let mut neg_lap_diag = Vec::new();
        for i in 1..n - 1 {
            for j in 0..i {
                active_of[grid.tri_idx(i, j)] = active.len() as u32;
                active.push((i as u32, j as u32));
                measures.push(grid.node_measure(i, j));
                let s_sum =
                    (grid.face_weight(i) + grid.face_weight(i - 1)) / (h * grid.cell_measure(i));
                let t_sum = if j == 0 {
                    grid.face_weight(0) / (h * grid.cell_measure(0))
                } else {
                    (grid.face_weight(j) + grid.face_weight(j - 1)) / (h * grid.cell_measure(j))
                };
                neg_lap_diag.push(s_sum + t_sum);
            }
        }
        let ones = vec![1.0; active.len()];
        Self {
            grid: grid.clone(),
            active,
            active_of,
            measures,
            ones,
            neg_lap_diag,
        }
    }

    fn len(&self) -> usize {
        self.active.len()
    }

    fn pack(&self, field: &ScalarField) -> Vec<f64> {
        self.active
            .iter()
            .map(|&(i, j)| field.get(i as usize, j as usize))
            .collect()
    }

    fn unpack_into(&self, x: &[f64], field: &mut ScalarField) {
        for (k, &(i, j)) in self.active.iter().enumerate() {
            field.set(i as usize, j as usize, x[k]);
        }
    }

    #[inline]
    fn x_at(&self, x: &[f64], i: usize, j: usize) -> f64 {
        let idx = self.active_of[self.grid.tri_idx(i, j)];
        if idx == u32::MAX {
            0.0
        } else {
            x[idx as usize]
        }
    }
}

/// The row-space form B = (−L₀ − c)·M⁻¹ of the triangle system, with M the
/// diagonal of dual-cell measures. M(−L₀−c) is symmetric, hence B is
/// symmetric in the plain Euclidean product, and CG on B controls the
/// equation residual uniformly across rows — the axis rows carry measures as
/// small as (h/2)^m/m and would otherwise be allowed to float at sup-norm
/// relevant levels. Solutions are recovered as x = M⁻¹y.
struct TriOp<'a> {
    topo: &'a TriTopo,
    /// Potential c per unknown (e.g. f′(u) for the Newton Jacobian, −K for
    /// the monotone sweep).
    c: Vec<f64>,
    diag: Vec<f64>,
}

impl<'a> TriOp<'a> {
    fn new(topo: &'a TriTopo, c: Vec<f64>) -> Self {
        let diag = topo
            .neg_lap_diag
            .iter()
            .zip(&c)
            .zip(&topo.measures)
            .map(|((&d, &ck), &mu)| (d - ck) / mu)
            .collect();
        Self { topo, c, diag }
    }

    /// Solves (−L₀ − c) x = b to relative Euclidean residual `tol`, warm
    /// starting from the current `x`.
    fn solve(
        &self,
        b: &[f64],
        x: &mut [f64],
        tol: f64,
        max_iters: usize,
    ) -> Result<crate::linalg::CgOutcome, CgError> {
        let mut y: Vec<f64> = x
            .iter()
            .zip(&self.topo.measures)
            .map(|(&v, &mu)| v * mu)
            .collect();
        let out = solve_cg(self, b, &mut y, tol, max_iters)?;
        for (k, v) in x.iter_mut().enumerate() {
            *v = y[k] / self.topo.measures[k];
        }
        Ok(out)
    }
}

impl WeightedOp for TriOp<'_> {
    fn len(&self) -> usize {
        self.topo.len()
    }

    fn apply(&self, y: &[f64], out: &mut [f64]) {
        let grid = &self.topo.grid;
        let h = grid.h();
        // x = M⁻¹ y, then out = (−L₀ − c)x.
        let x: Vec<f64> = y
            .iter()
            .zip(&self.topo.measures)
            .map(|(&v, &mu)| v / mu)
            .collect();
        for (k, &(iu, ju)) in self.topo.active.iter().enumerate() {
            let (i, j) = (iu as usize, ju as usize);
            let xk = x[k];
            let flux_hi = grid.face_weight(i) * (self.topo.x_at(&x, i + 1, j) - xk) / h;
            let flux_lo = grid.face_weight(i - 1) * (xk - self.topo.x_at(&x, i - 1, j)) / h;
            let s_part = (flux_hi - flux_lo) / grid.cell_measure(i);
            let t_part = if j == 0 {
                grid.face_weight(0) * (self.topo.x_at(&x, i, 1) - xk) / (h * grid.cell_measure(0))
            } else {
                let flux_hi = grid.face_weight(j) * (self.topo.x_at(&x, i, j + 1) - xk) / h;
                let flux_lo = grid.face_weight(j - 1) * (xk - self.topo.x_at(&x, i, j - 1)) / h;
                (flux_hi - flux_lo) / grid.cell_measure(j)
            };
            out[k] = -(s_part + t_part) - self.c[k] * xk;
        }
    }

    fn weights(&self) -> &[f64] {
        &self.topo.ones
    }

    fn diag(&self) -> &[f64] {
        &self.diag
    }
}

fn sup_residual(field: &ScalarField, nl: &BistableNonlinearity) -> f64 {
    apply_operator_st(field, nl).sup_norm()
}

/// L₀ applied to the Dirichlet data alone, packed; the boundary coupling
/// term of the linear systems (constant through a solve).
fn boundary_coupling(topo: &TriTopo, init: &ScalarField) -> Vec<f64> {
    let mut g = init.clone();
    for &(i, j) in &topo.active {
        g.set(i as usize, j as usize, 0.0);
    }
    let lg = apply_weighted_laplacian(&g);
    topo.pack(&lg)
}

fn cg_budget(topo: &TriTopo) -> usize {
    200 + 60 * topo.grid.n()
}

struct StepOutcome {
    residual: f64,
    delta_max: f64,
    delta_min: f64,
}

fn finish(
    field: ScalarField,
    nl: &BistableNonlinearity,
    cfg: &SolverConfig,
    iterations: usize,
    final_residual: f64,
    report: IterationReport,
) -> Result<SaddleSolution, SolverError> {
    let grid = field.grid().clone();
    let mut sup = 0.0f64;
    let mut min_interior = f64::INFINITY;
    let mut max_interior = f64::NEG_INFINITY;
    for i in 1..grid.n() - 1 {
        for j in 0..i {
            let v = field.get(i, j);
            sup = sup.max(v.abs());
            min_interior = min_interior.min(v);
            max_interior = max_interior.max(v);
        }
    }
    if sup < 1e-4 {
        return Err(SolverError::CollapsedToTrivial { sup });
    }
    if min_interior <= 0.0 {
        return Err(SolverError::RangeViolation {
            value: min_interior,
        });
    }
    if max_interior >= 1.0 {
        return Err(SolverError::RangeViolation {
            value: max_interior,
        });
    }
    Ok(SaddleSolution {
        dim: grid.dim(),
        nonlinearity: String::from(nl.name()),
        config: cfg.clone(),
        iterations,
        final_residual,
        wall_time_ms: None,
        report,
        field,
    })
}

/// One linearly-implicit monotone sweep: solve (K − Δ)u⁺ = f(u) + K u with
/// K ≥ max |f′| on [0,1], so that f(v) + K v is nondecreasing and the system
/// matrix is an M-matrix. Starting from a discrete super- (sub-) solution the
/// iterates decrease (increase) pointwise.
fn monotone_sweep(
    topo: &TriTopo,
    op: &TriOp<'_>,
    k_const: f64,
    nl: &BistableNonlinearity,
    bc: &[f64],
    x: &mut [f64],
    field: &mut ScalarField,
    lin_tol: f64,
) -> Result<StepOutcome, CgError> {
    let rhs: Vec<f64> = x
        .iter()
        .zip(bc)
        .map(|(&u, &b)| nl.f(u) + k_const * u + b)
        .collect();
    let mut x_new = x.to_vec();
    op.solve(&rhs, &mut x_new, lin_tol, cg_budget(topo))?;
    let mut delta_max = f64::NEG_INFINITY;
    let mut delta_min = f64::INFINITY;
    for k in 0..x.len() {
        let d = x_new[k] - x[k];
        delta_max = delta_max.max(d);
        delta_min = delta_min.min(d);
        x[k] = x_new[k];
    }
    topo.unpack_into(x, field);
    Ok(StepOutcome {
        residual: sup_residual(field, nl),
        delta_max,
        delta_min,
    })
}

/// Monotone iteration to the configured tolerance.
///
/// The monotone constant is K = max(f′(0), −f′(1)) = max_{[0,1]} |f′|; with
/// the weaker choice f′(0) the update map is not order-preserving near u = 1.
pub fn monotone_iterate(
    init: &ScalarField,
    cfg: &SolverConfig,
    nl: &BistableNonlinearity,
) -> Result<SaddleSolution, SolverError> {
    let grid = init.grid().clone();
    let topo = TriTopo::new(&grid);
    let k_const = nl.fp_max().max(-nl.fp(1.0));
    let op = TriOp::new(&topo, vec![-k_const; topo.len()]);
    let bc = boundary_coupling(&topo, init);
    // The fixed-point bias of the outer iteration is amplified by the slow
    // contraction near convergence; the inner solves must sit well below tol.
    let lin_tol = (cfg.tol * 1e-5).min(cfg.linear_tol).max(1e-14);

    let mut field = init.clone();
    let mut x = topo.pack(&field);
    let mut report = IterationReport::default();
    let mut residual = sup_residual(&field, nl);
    if residual <= cfg.tol {
        return finish(field, nl, cfg, 0, residual, report);
    }

    for iter in 1..=cfg.max_iters {
        let out = monotone_sweep(&topo, &op, k_const, nl, &bc, &mut x, &mut field, lin_tol)
            .map_err(|inner| SolverError::LinearBreakdown {
                iteration: iter,
                inner,
            })?;
        residual = out.residual;
        report.records.push(IterationRecord {
            residual,
            energy: energy(&field, nl, EnergyRegion::All),
            step_size: 1.0,
            delta_max: out.delta_max,
            delta_min: out.delta_min,
        });
        if residual <= cfg.tol {
            return finish(field, nl, cfg, iter, residual, report);
        }
    }
    Err(SolverError::Diverged {
        iterations: cfg.max_iters,
        last_residual: residual,
    })
}

/// Damped Newton on the discrete residual; the Jacobian Δ + f′(u) is solved
/// with conjugate gradients in the weighted inner product (it is symmetric
/// there). If the Jacobian is indefinite far from the solution, a shifted
/// regularization is used for that step.
pub fn newton_solve(
    init: &ScalarField,
    cfg: &SolverConfig,
    nl: &BistableNonlinearity,
) -> Result<SaddleSolution, SolverError> {
    newton_from(init.clone(), cfg, nl, IterationReport::default(), 0)
}

fn newton_from(
    mut field: ScalarField,
    cfg: &SolverConfig,
    nl: &BistableNonlinearity,
    mut report: IterationReport,
    iters_used: usize,
) -> Result<SaddleSolution, SolverError> {
    let grid = field.grid().clone();
    let topo = TriTopo::new(&grid);
    let mut x = topo.pack(&field);
    let mut residual = sup_residual(&field, nl);
    let mut recent: Vec<f64> = vec![residual];

    for iter in iters_used + 1..=cfg.max_iters {
        if residual <= cfg.tol {
            return finish(field, nl, cfg, iter - 1, residual, report);
        }

        let rhs = topo.pack(&apply_operator_st(&field, nl));
        let lin_tol = cfg.linear_tol.max((residual * 1e-4).min(1e-2));
        let mut delta = vec![0.0; topo.len()];
        let mut shift = 0.0;
        loop {
            let c: Vec<f64> = x.iter().map(|&u| nl.fp(u) - shift).collect();
            let op = TriOp::new(&topo, c);
            delta.fill(0.0);
            match op.solve(&rhs, &mut delta, lin_tol, cg_budget(&topo)) {
                Ok(_) => break,
                Err(CgError::IndefiniteOperator { .. }) if shift < 16.0 => {
                    // −Δ − f′(u) can be indefinite far from the solution;
                    // retreat to a shifted (gradient-flow-like) step.
                    shift = if shift == 0.0 { 0.5 } else { shift * 2.0 };
                }
                Err(inner) => {
                    return Err(SolverError::LinearBreakdown {
                        iteration: iter,
                        inner,
                    })
                }
            }
        }

        // Line search on the residual sup norm.
        let mut alpha = cfg.damping;
        let mut accepted = false;
        let mut candidate = field.clone();
        for _ in 0..12 {
            for (k, &(i, j)) in topo.active.iter().enumerate() {
                candidate.set(i as usize, j as usize, x[k] + alpha * delta[k]);
            }
            let r = sup_residual(&candidate, nl);
            if r < residual * (1.0 - 1e-4 * alpha) {
                for k in 0..x.len() {
                    x[k] += alpha * delta[k];
                }
                core::mem::swap(&mut field, &mut candidate);
                residual = r;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            return Err(SolverError::Stagnation {
                iteration: iter,
                residual,
            });
        }

        report.records.push(IterationRecord {
            residual,
            energy: energy(&field, nl, EnergyRegion::All),
            step_size: alpha,
            delta_max: delta
                .iter()
                .fold(f64::NEG_INFINITY, |a, &d| a.max(alpha * d)),
            delta_min: delta.iter().fold(f64::INFINITY, |a, &d| a.min(alpha * d)),
        });

        recent.push(residual);
        if recent.len() > 5 {
            let old = recent[recent.len() - 6];
            if residual > 1e-3 * old && residual > cfg.tol {
                return Err(SolverError::Stagnation {
                    iteration: iter,
                    residual,
                });
            }
        }
    }

    if residual <= cfg.tol {
        return finish(field, nl, cfg, cfg.max_iters, residual, report);
    }
    Err(SolverError::Diverged {
        iterations: cfg.max_iters,
        last_residual: residual,
    })
}

/// Monotone sweeps down to a loose tolerance, then Newton to the target.
pub fn hybrid_solve(
    init: &ScalarField,
    cfg: &SolverConfig,
    nl: &BistableNonlinearity,
) -> Result<SaddleSolution, SolverError> {
    let grid = init.grid().clone();
    let topo = TriTopo::new(&grid);
    let k_const = nl.fp_max().max(-nl.fp(1.0));
    let op = TriOp::new(&topo, vec![-k_const; topo.len()]);
    let bc = boundary_coupling(&topo, init);

    let mut field = init.clone();
    let mut x = topo.pack(&field);
    let mut report = IterationReport::default();
    let pre_tol = (cfg.tol * 1e4).clamp(1e-6, 1e-2);
    let pre_cap = 400.min(cfg.max_iters);

    let mut used = 0;
    for iter in 1..=pre_cap {
        let out = monotone_sweep(
            &topo,
            &op,
            k_const,
            nl,
            &bc,
            &mut x,
            &mut field,
            cfg.linear_tol,
        )
        .map_err(|inner| SolverError::LinearBreakdown {
            iteration: iter,
            inner,
        })?;
        report.records.push(IterationRecord {
            residual: out.residual,
            energy: energy(&field, nl, EnergyRegion::All),
            step_size: 1.0,
            delta_max: out.delta_max,
            delta_min: out.delta_min,
        });
        used = iter;
        if out.residual <= pre_tol {
            break;
        }
    }
    newton_from(field, cfg, nl, report, used)
}

/// Runs the configured mode.
pub fn solve(
    init: &ScalarField,
    cfg: &SolverConfig,
    nl: &BistableNonlinearity,
) -> Result<SaddleSolution, SolverError> {
    match cfg.mode {
        SolverMode::Monotone => monotone_iterate(init, cfg, nl),
        SolverMode::Newton => newton_solve(init, cfg, nl),
        SolverMode::Hybrid => hybrid_solve(init, cfg, nl),
    }
}

/// Integration region for the energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EnergyRegion {
    All,
    /// R1 ≤ √(s² + t²) ≤ R2.
    Annulus {
        r1: f64,
        r2: f64,
    },
}

impl EnergyRegion {
    fn contains(&self, s: f64, t: f64) -> bool {
        match *self {
            EnergyRegion::All => true,
            EnergyRegion::Annulus { r1, r2 } => {
                let r = libm::sqrt(s * s + t * t);
                (r1..=r2).contains(&r)
            }
        }
    }
}

/// The weighted energy ∫ {½|∇u|² + G(u)} s^{m−1}t^{m−1} ds dt over the full
/// square, with angular constants omitted. The triangle data is extended to
/// the square by mirroring; for zero-diagonal fields this gives byte-identical
/// values to the odd reflection (|∇u|² and G(u) are even across the cone),
/// while constants keep their obvious energy. Gradients are sampled at cell
/// faces and the potential at nodes, which makes the discrete solver residual
/// the exact gradient of this functional: criticality of converged solutions
/// is an identity, not an approximation.
pub fn energy(field: &ScalarField, nl: &BistableNonlinearity, region: EnergyRegion) -> f64 {
    let grid = field.grid().clone();
    let n = grid.n();
    let h = grid.h();
    let val = |i: usize, j: usize| field.get(i.max(j), i.min(j));

    // Kahan-compensated accumulation: finite differences of this functional
    // probe increments ~1e-10 against totals ~1e2, so plain summation drift
    // would dominate gradient checks.
    let mut acc = 0.0f64;
    let mut carry = 0.0f64;
    let mut add = |acc: &mut f64, term: f64| {
        let y = term - carry;
        let t = *acc + y;
        carry = (t - *acc) - y;
        *acc = t;
    };

    for i in 0..n {
        for j in 0..n {
            let (s, t) = (grid.coord(i), grid.coord(j));
            if region.contains(s, t) {
                add(&mut acc, grid.node_measure(i, j) * nl.potential(val(i, j)));
            }
            // Face to the east (s-direction) and to the north (t-direction),
            // assigned by face midpoint.
            if i + 1 < n && region.contains(s + 0.5 * h, t) {
                let du = val(i + 1, j) - val(i, j);
                add(
                    &mut acc,
                    0.5 * grid.face_weight(i) * grid.cell_measure(j) * du * du / h,
                );
            }
            if j + 1 < n && region.contains(s, t + 0.5 * h) {
                let du = val(i, j + 1) - val(i, j);
                add(
                    &mut acc,
                    0.5 * grid.face_weight(j) * grid.cell_measure(i) * du * du / h,
                );
            }
        }
    }
    acc
}
