//! The linearized operator L_u = Δ + f′(u) at a saddle solution, the
//! stability quadratic form Q_u, smallest-eigenvalue estimation by shifted
//! inverse iteration, and the supersolution certificate φ = t^{−b}u_s − s^{−b}u_t.
//!
//! Everything here lives on the full square [0,S]² in the class of functions
//! of (s,t), with the weighted inner product Σ μ_i μ_j a b. That restriction
//! is deliberate: a desk grid cannot see the full 2m-dimensional spectrum,
//! and reports label their results as holding within the O(m)×O(m)-invariant
//! class.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::geometry::{b_range, DimensionParams};
use crate::grid::{d_s, d_t, QuadrantGrid, SquareField};
use crate::linalg::{solve_cg, wdot, wnorm, CgError, WeightedOp};
use crate::nonlinearity::BistableNonlinearity;
use crate::profile::Profile1D;
use crate::rng::SplitMix64;
use crate::solver::SaddleSolution;
use alloc::sync::Arc;

const SQRT2: f64 = core::f64::consts::SQRT_2;
const SQRT2_INV: f64 = core::f64::consts::FRAC_1_SQRT_2;

/// Label attached to every spectrum report: the computation is restricted to
/// perturbations depending on (s,t) only.
pub const SYMMETRY_CLASS: &str = "st-invariant";

/// L_u = Δ + f′(u) on the square, Dirichlet on the outer rim, even-symmetry
/// axis regularization on {s = 0} and {t = 0}.
pub struct LinearizedOperator {
    grid: Arc<QuadrantGrid>,
    /// f′(u) sampled on the square; ≤ f′(0) pointwise for admissible f.
    potential: SquareField,
}

impl LinearizedOperator {
    pub fn new(sol: &SaddleSolution, nl: &BistableNonlinearity) -> Self {
        let sq = sol
            .field
            .odd_reflect()
            .expect("saddle solutions have a zero diagonal");
        Self::from_square(&sq, nl)
    }

    /// Builds the operator from any square field (used to calibrate the
    /// certificate on the approximant U).
    pub fn from_square(u: &SquareField, nl: &BistableNonlinearity) -> Self {
        let grid = u.grid().clone();
        let mut potential = SquareField::zeros(&grid);
        for idx in 0..u.values().len() {
            potential.values_mut()[idx] = nl.fp(u.values()[idx]);
        }
        Self { grid, potential }
    }

    pub fn grid(&self) -> &Arc<QuadrantGrid> {
        &self.grid
    }

    pub fn potential(&self) -> &SquareField {
        &self.potential
    }

    /// L_u ξ at all nodes off the outer rim, reading ξ's own values
    /// everywhere (so fields that do not vanish on the rim, like φ, are
    /// differentiated against their actual boundary values). Rim rows are 0.
    pub fn apply(&self, xi: &SquareField) -> SquareField {
        let grid = &self.grid;
        assert!(
            grid.same_layout(xi.grid()),
            "operator and field live on different grids"
        );
        let n = grid.n();
        let h = grid.h();
        let mut out = SquareField::zeros(grid);
        for i in 0..n - 1 {
            for j in 0..n - 1 {
                let x = xi.get(i, j);
                let up_s = grid.face_weight(i) * (xi.get(i + 1, j) - x) / h;
                let down_s = if i > 0 {
                    grid.face_weight(i - 1) * (x - xi.get(i - 1, j)) / h
                } else {
                    0.0
                };
                let s_part = (up_s - down_s) / grid.cell_measure(i);
                let up_t = grid.face_weight(j) * (xi.get(i, j + 1) - x) / h;
                let down_t = if j > 0 {
                    grid.face_weight(j - 1) * (x - xi.get(i, j - 1)) / h
                } else {
                    0.0
                };
                let t_part = (up_t - down_t) / grid.cell_measure(j);
                out.set(i, j, s_part + t_part + self.potential.get(i, j) * x);
            }
        }
        out
    }

    /// The stability form Q_u(ξ) = ∫ {|∇ξ|² − f′(u)ξ²} s^{m−1}t^{m−1},
    /// with face-midpoint gradient quadrature and nodal potential quadrature.
    /// With those choices Q_u(ξ) = ⟨ξ, −L_u ξ⟩_w exactly for ξ vanishing on
    /// the rim (discrete integration by parts is an identity).
    pub fn quadratic_form(&self, xi: &SquareField) -> f64 {
        let grid = &self.grid;
        assert!(
            grid.same_layout(xi.grid()),
            "operator and field live on different grids"
        );
        let n = grid.n();
        let h = grid.h();
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                let x = xi.get(i, j);
                acc -= grid.node_measure(i, j) * self.potential.get(i, j) * x * x;
                if i + 1 < n {
                    let du = xi.get(i + 1, j) - x;
                    acc += grid.face_weight(i) * grid.cell_measure(j) * du * du / h;
                }
                if j + 1 < n {
                    let du = xi.get(i, j + 1) - x;
                    acc += grid.face_weight(j) * grid.cell_measure(i) * du * du / h;
                }
            }
        }
        acc
    }

    /// Weighted inner product ⟨a,b⟩ = Σ μ_i μ_j a b over the square.
    pub fn inner(&self, a: &SquareField, b: &SquareField) -> f64 {
        let grid = &self.grid;
        let n = grid.n();
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += grid.node_measure(i, j) * a.get(i, j) * b.get(i, j);
            }
        }
        acc
    }

    pub fn norm(&self, a: &SquareField) -> f64 {
        libm::sqrt(self.inner(a, a))
    }
}

/// Packed operator A = −L_u − σ over the non-rim nodes, for eigen-iteration.
struct ShiftedOp<'a> {
    lin: &'a LinearizedOperator,
    active: &'a [(u32, u32)],
    active_of: &'a [u32],
    weights: &'a [f64],
    shift: f64,
    diag: Vec<f64>,
}

impl<'a> ShiftedOp<'a> {
    fn new(
        lin: &'a LinearizedOperator,
        active: &'a [(u32, u32)],
        active_of: &'a [u32],
        weights: &'a [f64],
        shift: f64,
    ) -> Self {
        let grid = &lin.grid;
        let h = grid.h();
        let diag = active
            .iter()
            .map(|&(iu, ju)| {
                let (i, j) = (iu as usize, ju as usize);
                let s_sum = (grid.face_weight(i)
                    + if i > 0 { grid.face_weight(i - 1) } else { 0.0 })
                    / (h * grid.cell_measure(i));
                let t_sum = (grid.face_weight(j)
                    + if j > 0 { grid.face_weight(j - 1) } else { 0.0 })
                    / (h * grid.cell_measure(j));
                s_sum + t_sum - lin.potential.get(i, j) - shift
            })
            .collect();
        Self {
            lin,
            active,
            active_of,
            weights,
            shift,
            diag,
        }
    }

    #[inline]
    fn x_at(&self, x: &[f64], i: usize, j: usize) -> f64 {
        let idx = self.active_of[self.lin.grid.sq_idx(i, j)];
        if idx == u32::MAX {
            0.0
        } else {
            x[idx as usize]
        }
    }
}

impl WeightedOp for ShiftedOp<'_> {
    fn len(&self) -> usize {
        self.active.len()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let grid = &self.lin.grid;
        let h = grid.h();
        for (k, &(iu, ju)) in self.active.iter().enumerate() {
            let (i, j) = (iu as usize, ju as usize);
            let xk = x[k];
            let up_s = grid.face_weight(i) * (self.x_at(x, i + 1, j) - xk) / h;
            let down_s = if i > 0 {
                grid.face_weight(i - 1) * (xk - self.x_at(x, i - 1, j)) / h
            } else {
                0.0
            };
            let s_part = (up_s - down_s) / grid.cell_measure(i);
            let up_t = grid.face_weight(j) * (self.x_at(x, i, j + 1) - xk) / h;
            let down_t = if j > 0 {
                grid.face_weight(j - 1) * (xk - self.x_at(x, i, j - 1)) / h
            } else {
                0.0
            };
            let t_part = (up_t - down_t) / grid.cell_measure(j);
            y[k] = -(s_part + t_part) - (self.lin.potential.get(i, j) + self.shift) * xk;
        }
    }

    fn weights(&self) -> &[f64] {
        self.weights
    }

    fn diag(&self) -> &[f64] {
        &self.diag
    }
}

#[derive(Debug, Clone)]
pub struct EigenOptions {
    /// Residual target ‖(−L_u − λ)ξ‖_w ≤ tol (eigenfields are normalized).
    pub tol: f64,
    pub max_outer: usize,
    pub inner_tol: f64,
    pub seed: u64,
    /// Number of eigenpairs (smallest first, by deflation); 1 to 3.
    pub count: usize,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            max_outer: 400,
            inner_tol: 1e-9,
            seed: 0x51dec0de,
            count: 1,
        }
    }
}

/// Smallest eigenvalue(s) of −L_u in the (s,t) class.
#[derive(Debug, Clone)]
pub struct SpectrumEstimate {
    pub lambda_min: f64,
    /// Deflated higher eigenvalues, when requested.
    pub next: Vec<f64>,
    pub eigenfield: SquareField,
    pub iterations: usize,
    pub residual: f64,
    /// Always [`SYMMETRY_CLASS`]; spelled out so reports cannot overclaim.
    pub class: &'static str,
}

#[derive(Debug)]
pub enum EigenError {
    InnerSolve(CgError),
    NotConverged { residual: f64 },
}

impl fmt::Display for EigenError {
    fn fmt(&self, fmt: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EigenError::InnerSolve(e) => write!(fmt, "inner solve failed: {e}"),
            EigenError::NotConverged { residual } => {
                write!(fmt, "eigen-iteration stalled at residual {residual:.3e}")
            }
        }
    }
}

impl core::error::Error for EigenError {}

/// Shifted inverse iteration with Jacobi-preconditioned CG inner solves.
/// The initial shift is the Gershgorin lower bound −max f′(u) − ½, which
/// keeps the first shifted system positive definite.
pub fn min_eigenvalue(
    lin: &LinearizedOperator,
    opts: &EigenOptions,
) -> Result<SpectrumEstimate, EigenError> {
    let grid = &lin.grid;
    let n = grid.n();
    let mut active = Vec::new();
    let mut active_of = vec![u32::MAX; n * n];
    let mut weights = Vec::new();
    for i in 0..n - 1 {
        for j in 0..n - 1 {
            active_of[grid.sq_idx(i, j)] = active.len() as u32;
            active.push((i as u32, j as u32));
            weights.push(grid.node_measure(i, j));
        }
    }

    let mut max_fp = f64::NEG_INFINITY;
    for &(i, j) in &active {
        max_fp = max_fp.max(lin.potential.get(i as usize, j as usize));
    }
    let floor_shift = -max_fp - 0.5;

    let mut rng = SplitMix64::new(opts.seed);
    let mut converged: Vec<(f64, Vec<f64>)> = Vec::new();
    let mut total_outer = 0;
    let mut last_residual = f64::INFINITY;

    let unshifted = ShiftedOp::new(lin, &active, &active_of, &weights, 0.0);

    while converged.len() < opts.count.clamp(1, 3) {
        let mut x: Vec<f64> = (0..active.len()).map(|_| rng.range(-1.0, 1.0)).collect();
        deflate(&weights, &converged, &mut x);
        normalize(&weights, &mut x);

        let mut sigma = floor_shift;
        let mut lambda = 0.0;
        let mut found = false;

        for _ in 0..opts.max_outer {
            total_outer += 1;
            let op = ShiftedOp::new(lin, &active, &active_of, &weights, sigma);
            let mut y = x.clone();
            match solve_cg(&op, &x, &mut y, opts.inner_tol, cg_budget(n)) {
                Ok(_) => {}
                Err(CgError::IndefiniteOperator { .. }) => {
                    // Shift climbed past the smallest remaining eigenvalue;
                    // retreat halfway toward the safe floor.
                    sigma = 0.5 * (sigma + floor_shift);
                    continue;
                }
                Err(e @ CgError::NotConverged { .. }) => return Err(EigenError::InnerSolve(e)),
            }
            deflate(&weights, &converged, &mut y);
            normalize(&weights, &mut y);

            // Rayleigh quotient and residual of the unshifted operator.
            let mut ay = vec![0.0; y.len()];
            unshifted.apply(&y, &mut ay);
            lambda = wdot(&weights, &y, &ay);
            let mut res_vec = ay;
            for k in 0..y.len() {
                res_vec[k] -= lambda * y[k];
            }
            last_residual = wnorm(&weights, &res_vec);
            x = y;
            if last_residual <= opts.tol {
                found = true;
                break;
            }
            // Move the shift toward the estimate, keeping a residual-scaled
            // safety margin below it.
            let margin = (3.0 * last_residual).max(1e-4);
            sigma = sigma.max(lambda - margin);
        }

        if !found {
            return Err(EigenError::NotConverged {
                residual: last_residual,
            });
        }
        converged.push((lambda, x));
    }

    let (lambda_min, ref best) = converged[0];
    let mut eigenfield = SquareField::zeros(grid);
    for (k, &(i, j)) in active.iter().enumerate() {
        eigenfield.set(i as usize, j as usize, best[k]);
    }
    Ok(SpectrumEstimate {
        lambda_min,
        next: converged.iter().skip(1).map(|(l, _)| *l).collect(),
        eigenfield,
        iterations: total_outer,
        residual: last_residual,
        class: SYMMETRY_CLASS,
    })
}

fn cg_budget(n: usize) -> usize {
    2_000 + 120 * n
}

fn normalize(w: &[f64], x: &mut [f64]) {
    let nrm = wnorm(w, x);
    if nrm > 0.0 {
        for v in x.iter_mut() {
            *v /= nrm;
        }
    }
}

fn deflate(w: &[f64], basis: &[(f64, Vec<f64>)], x: &mut [f64]) {
    for (_, v) in basis {
        let c = wdot(w, x, v);
        for k in 0..x.len() {
            x[k] -= c * v[k];
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub enum PhiError {
    NonpositiveExponent { b: f64 },
}

impl fmt::Display for PhiError {
    fn fmt(&self, fmt: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PhiError::NonpositiveExponent { b } => {
                write!(fmt, "certificate exponent must be positive, got b = {b}")
            }
        }
    }
}

impl core::error::Error for PhiError {}

/// φ = t^{−b} u_s − s^{−b} u_t on {st > 0}, from the centered derivative
/// fields of the odd-reflected solution; zero on {st = 0} where the claim
/// does not reach. Even with respect to the cone by construction.
pub fn build_phi(u_square: &SquareField, b: f64) -> Result<SquareField, PhiError> {
    if b <= 0.0 {
        return Err(PhiError::NonpositiveExponent { b });
    }
    let grid = u_square.grid().clone();
    let n = grid.n();
    let us = d_s(u_square);
    let ut = d_t(u_square);
    let mut phi = SquareField::zeros(&grid);
    for i in 1..n {
        for j in 1..n {
            let s = grid.coord(i);
            let t = grid.coord(j);
            let v = libm::pow(t, -b) * us.get(i, j) - libm::pow(s, -b) * ut.get(i, j);
            phi.set(i, j, v);
        }
    }
    Ok(phi)
}

/// Analytic φ built from the approximant U: (u₀′(z)/√2)(t^{−b} + s^{−b}).
pub fn phi_of_approximant(grid: &Arc<QuadrantGrid>, prof: &Profile1D, b: f64) -> SquareField {
    let mut phi = SquareField::zeros(grid);
    let n = grid.n();
    for i in 1..n {
        for j in 1..n {
            let s = grid.coord(i);
            let t = grid.coord(j);
            let z = (s - t) * SQRT2_INV;
            let g = prof.eval_u0_prime(z) * SQRT2_INV;
            phi.set(i, j, g * (libm::pow(t, -b) + libm::pow(s, -b)));
        }
    }
    phi
}

/// Exact L_U φ_U for the approximant, used to calibrate the certificate
/// slack. With g(z) = u₀′(z)/√2 (so g″ + f′(u₀)g = 0):
///   L φ_U = b(b−m+2)(t^{−b−2}+s^{−b−2}) g
///         + √2 b (t^{−b−1}−s^{−b−1}) g′
///         + (m−1)(1/s − 1/t)(t^{−b}+s^{−b}) g′/√2,
/// where g′(z) = −f(u₀(z))/√2.
pub fn exact_l_phi_of_approximant(
    grid: &Arc<QuadrantGrid>,
    prof: &Profile1D,
    nl: &BistableNonlinearity,
    b: f64,
) -> SquareField {
    let m = grid.dim().m() as f64;
    let mut out = SquareField::zeros(grid);
    let n = grid.n();
    for i in 1..n {
        for j in 1..n {
            let s = grid.coord(i);
            let t = grid.coord(j);
            let z = (s - t) * SQRT2_INV;
            let g = prof.eval_u0_prime(z) * SQRT2_INV;
            let gp = -nl.f(prof.eval_u0(z)) * SQRT2_INV;
            let v = b * (b - m + 2.0) * (libm::pow(t, -b - 2.0) + libm::pow(s, -b - 2.0)) * g
                + SQRT2 * b * (libm::pow(t, -b - 1.0) - libm::pow(s, -b - 1.0)) * gp
                + (m - 1.0)
                    * (1.0 / s - 1.0 / t)
                    * (libm::pow(t, -b) + libm::pow(s, -b))
                    * gp
                    * SQRT2_INV;
            out.set(i, j, v);
        }
    }
    out
}

/// How the certificate turns an exact inequality into a falsifiable discrete
/// test: the allowance at each node is c_slack · h² · (local fourth-derivative
/// scale), with the scale estimated from fourth differences of φ itself.
#[derive(Debug, Clone, Copy)]
pub struct SlackPolicy {
    /// None: calibrate on the U pipeline at this (m,S,h), then multiply by
    /// the safety factor.
    pub c_slack: Option<f64>,
    pub safety: f64,
    pub floor: f64,
    /// Nodes with s or t below band·h are excluded (φ blows up like t^{−b}
    /// on the axes, where the claim does not reach).
    pub band: usize,
}

impl Default for SlackPolicy {
    fn default() -> Self {
        Self {
            c_slack: None,
            safety: 3.0,
            floor: 1e-9,
            band: 5,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SupersolutionCertificate {
    pub b: f64,
    pub min_phi: f64,
    pub max_l_phi: f64,
    /// Largest nodewise allowance; the verdict compares node by node.
    pub slack: f64,
    pub c_slack: f64,
    pub excluded_band_width: f64,
    pub verdict: bool,
    /// Worst node of the L_uφ ≤ slack comparison: (s, t, L_uφ, local slack).
    pub worst: (f64, f64, f64, f64),
    pub phi: SquareField,
    pub l_phi: SquareField,
}

/// Fourth-difference scale (|δ⁴_s φ| + |δ⁴_t φ|)/h²; δ⁴φ ≈ φ⁗h⁴, so this is
/// the h²·φ⁗ scale of the stencil truncation at the node.
fn fourth_difference_scale(phi: &SquareField, i: usize, j: usize, h: f64) -> f64 {
    let d4s = phi.get(i + 2, j) - 4.0 * phi.get(i + 1, j) + 6.0 * phi.get(i, j)
        - 4.0 * phi.get(i - 1, j)
        + phi.get(i - 2, j);
    let d4t = phi.get(i, j + 2) - 4.0 * phi.get(i, j + 1) + 6.0 * phi.get(i, j)
        - 4.0 * phi.get(i, j - 1)
        + phi.get(i, j - 2);
    (d4s.abs() + d4t.abs()) / (h * h)
}

/// Calibrates c_slack on the analytically known U pipeline: the worst ratio
/// of |L_h φ_U − L φ_U| to the fourth-difference scale over the evaluation
/// nodes.
pub fn calibrate_c_slack(
    grid: &Arc<QuadrantGrid>,
    prof: &Profile1D,
    nl: &BistableNonlinearity,
    b: f64,
    band: usize,
) -> f64 {
    let u_square = SquareField::from_fn(grid, |s, t| prof.eval_u0((s - t) * SQRT2_INV));
    let lin = LinearizedOperator::from_square(&u_square, nl);
    let phi_u = phi_of_approximant(grid, prof, b);
    let l_phi_num = lin.apply(&phi_u);
    let l_phi_exact = exact_l_phi_of_approximant(grid, prof, nl, b);
    let n = grid.n();
    let h = grid.h();
    let lo = band.max(2);
    let mut worst = 0.0f64;
    for i in lo..n - 2 {
        for j in lo..n - 2 {
            let err = (l_phi_num.get(i, j) - l_phi_exact.get(i, j)).abs();
            let scale = fourth_difference_scale(&phi_u, i, j, h).max(1e-12);
            worst = worst.max(err / scale);
        }
    }
    worst
}

/// Evaluates the certificate: φ > 0 and L_uφ ≤ slack nodewise on {st > 0}
/// minus the excluded band. A fail verdict is a valid result (and the
/// expected one below 2m = 14 or for b outside the admissible range).
pub fn certify_supersolution(
    sol: &SaddleSolution,
    nl: &BistableNonlinearity,
    prof: &Profile1D,
    b: f64,
    policy: SlackPolicy,
) -> Result<SupersolutionCertificate, PhiError> {
    let u_square = sol
        .field
        .odd_reflect()
        .expect("saddle solutions have a zero diagonal");
    let grid = sol.field.grid().clone();
    let lin = LinearizedOperator::from_square(&u_square, nl);
    let phi = build_phi(&u_square, b)?;
    let l_phi = lin.apply(&phi);

    let c_slack = policy
        .c_slack
        .unwrap_or_else(|| calibrate_c_slack(&grid, prof, nl, b, policy.band))
        * policy.safety;

    let n = grid.n();
    let h = grid.h();
    let lo = policy.band.max(2);
    let mut min_phi = f64::INFINITY;
    let mut max_l_phi = f64::NEG_INFINITY;
    let mut max_slack = 0.0f64;
    let mut ok = true;
    let mut worst = (0.0, 0.0, f64::NEG_INFINITY, 0.0);
    for i in lo..n - 2 {
        for j in lo..n - 2 {
            let p = phi.get(i, j);
            min_phi = min_phi.min(p);
            let lv = l_phi.get(i, j);
            max_l_phi = max_l_phi.max(lv);
            let slack = c_slack * fourth_difference_scale(&phi, i, j, h) + policy.floor;
            max_slack = max_slack.max(slack);
            if lv - slack > worst.2 - worst.3 {
                worst = (grid.coord(i), grid.coord(j), lv, slack);
            }
            if lv > slack || p <= 0.0 {
                ok = false;
            }
        }
    }

    Ok(SupersolutionCertificate {
        b,
        min_phi,
        max_l_phi,
        slack: max_slack,
        c_slack,
        excluded_band_width: lo as f64 * h,
        verdict: ok && min_phi > 0.0,
        worst,
        phi,
        l_phi,
    })
}

/// Midpoint of the admissible exponent range, the CLI's `--b auto` choice.
pub fn auto_b(d: DimensionParams) -> Option<f64> {
    b_range(d).map(|(lo, hi)| 0.5 * (lo + hi))
}

/// The C¹ axis cutoff η_ε(s)·η_ε(t): 0 on [0, ε/2], 1 on [ε, ∞), cubic ramp
/// between.
pub fn cutoff_family(grid: &Arc<QuadrantGrid>, eps: f64) -> SquareField {
    assert!(
        eps > 0.0 && eps < grid.s_max() / 4.0,
        "cutoff width must lie in (0, S/4)"
    );
    SquareField::from_fn(grid, |s, t| ramp(s, eps) * ramp(t, eps))
}

fn ramp(x: f64, eps: f64) -> f64 {
    if x <= 0.5 * eps {
        0.0
    } else if x >= eps {
        1.0
    } else {
        let r = (x - 0.5 * eps) / (0.5 * eps);
        r * r * (3.0 - 2.0 * r)
    }
}

/// ∫_{s ≤ ε, t ≤ r0} |∂_s η_ε(s)|² s^{m−1} t^{m−1} ds dt by fine 1D Simpson
/// quadrature; scales like ε^{m−2} as ε → 0 for m ≥ 3, which is why the
/// cutoff argument closes in those dimensions.
pub fn cutoff_gradient_mass(d: DimensionParams, eps: f64, r0: f64) -> f64 {
    let m = d.m() as f64;
    let panels = 4000;
    let hq = eps / panels as f64;
    let mut acc = 0.0;
    let integrand = |x: f64| {
        let dr = ramp_prime(x, eps);
        dr * dr * libm::pow(x.max(1e-300), m - 1.0)
    };
    for k in 0..panels {
        let a = k as f64 * hq;
        acc += hq / 6.0 * (integrand(a) + 4.0 * integrand(a + 0.5 * hq) + integrand(a + hq));
    }
    acc * libm::pow(r0, m) / m
}

fn ramp_prime(x: f64, eps: f64) -> f64 {
    if x <= 0.5 * eps || x >= eps {
        0.0
    } else {
        let r = (x - 0.5 * eps) / (0.5 * eps);
        6.0 * r * (1.0 - r) / (0.5 * eps)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{initialize, newton_solve, InitKind, SolverConfig};

    fn solved(m: usize, s_max: f64, h: f64) -> (SaddleSolution, BistableNonlinearity, Profile1D) {
        let nl = BistableNonlinearity::allen_cahn();
        let prof = Profile1D::build(&nl, 12.0, 0.01).unwrap();
        let grid = QuadrantGrid::new(s_max, h, DimensionParams::new(m));
        let init = initialize(&grid, &prof, InitKind::FromApproximant);
        let sol = newton_solve(&init, &SolverConfig::default(), &nl).unwrap();
        (sol, nl, prof)
    }

    #[test]
    fn zero_maps_to_zero() {
        let (sol, nl, _) = solved(1, 6.0, 0.2);
        let lin = LinearizedOperator::new(&sol, &nl);
        let zero = SquareField::zeros(lin.grid());
        assert_eq!(lin.apply(&zero).sup_norm(), 0.0);
        assert_eq!(lin.quadratic_form(&zero), 0.0);
    }

    #[test]
    fn solution_is_a_strict_supersolution_of_its_linearization() {
        // L_u u < 0 in the interior of {s>t}: f(u) > f'(u)u for 0 < u < 1.
        let (sol, nl, _) = solved(2, 6.0, 0.1);
        let lin = LinearizedOperator::new(&sol, &nl);
        let sq = sol.field.odd_reflect().unwrap();
        let lu = lin.apply(&sq);
        let grid = sol.field.grid().clone();
        for i in 2..grid.n() - 1 {
            for j in 1..i - 1 {
                assert!(
                    lu.get(i, j) < 1e-7,
                    "L_u u = {} at ({i},{j}) not a supersolution",
                    lu.get(i, j)
                );
            }
        }
    }

    #[test]
    fn derivative_field_identity() {
        // Δu_s + f'(u)u_s − (m−1)s⁻²u_s = 0 away from the axes, to O(h²).
        let (sol, nl, _) = solved(2, 6.0, 0.05);
        let lin = LinearizedOperator::new(&sol, &nl);
        let sq = sol.field.odd_reflect().unwrap();
        let us = d_s(&sq);
        let lus = lin.apply(&us);
        let grid = sol.field.grid().clone();
        let m = 2.0;
        let mut worst = 0.0f64;
        for i in 8..grid.n() - 8 {
            for j in 8..grid.n() - 8 {
                let s = grid.coord(i);
                let defect = lus.get(i, j) - (m - 1.0) / (s * s) * us.get(i, j);
                worst = worst.max(defect.abs());
            }
        }
        assert!(worst < 5e-3, "derivative identity defect {worst}");
    }

    #[test]
    fn integration_by_parts_is_an_identity() {
        let (sol, nl, _) = solved(2, 6.0, 0.1);
        let lin = LinearizedOperator::new(&sol, &nl);
        let grid = sol.field.grid().clone();
        let n = grid.n();
        // Random interior field vanishing on the rim.
        let mut rng = SplitMix64::new(12);
        let mut xi = SquareField::zeros(&grid);
        for i in 0..n - 1 {
            for j in 0..n - 1 {
                xi.set(i, j, rng.range(-1.0, 1.0));
            }
        }
        let q = lin.quadratic_form(&xi);
        let pairing = -lin.inner(&xi, &lin.apply(&xi));
        let scale = lin.norm(&xi) * lin.norm(&xi);
        assert!(
            (q - pairing).abs() <= 1e-8 * scale.max(q.abs()),
            "IBP defect {:.3e} (q = {q}, pairing = {pairing})",
            (q - pairing).abs()
        );
    }

    #[test]
    fn polarization_symmetry_of_the_form() {
        let (sol, nl, _) = solved(1, 5.0, 0.125);
        let lin = LinearizedOperator::new(&sol, &nl);
        let grid = sol.field.grid().clone();
        let n = grid.n();
        let mut rng = SplitMix64::new(5);
        let mut a = SquareField::zeros(&grid);
        let mut b = SquareField::zeros(&grid);
        for i in 0..n - 1 {
            for j in 0..n - 1 {
                a.set(i, j, rng.range(-1.0, 1.0));
                b.set(i, j, rng.range(-1.0, 1.0));
            }
        }
        let mut sum = SquareField::zeros(&grid);
        for idx in 0..sum.values().len() {
            sum.values_mut()[idx] = a.values()[idx] + b.values()[idx];
        }
        // Q(a+b) − Q(a) − Q(b) = 2 B(a,b) with B from the operator pairing.
        let lhs = lin.quadratic_form(&sum) - lin.quadratic_form(&a) - lin.quadratic_form(&b);
        let rhs = -2.0 * lin.inner(&a, &lin.apply(&b));
        let scale = lhs.abs().max(rhs.abs()).max(1.0);
        assert!(
            ((lhs - rhs) / scale).abs() <= 1e-10,
            "polarization defect {:.3e}",
            (lhs - rhs).abs()
        );
    }

    #[test]
    fn planar_saddle_has_a_negative_eigenvalue() {
        let (sol, nl, _) = solved(1, 8.0, 0.1);
        let lin = LinearizedOperator::new(&sol, &nl);
        let est = min_eigenvalue(
            &lin,
            &EigenOptions {
                count: 2,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(
            est.lambda_min < -est.residual,
            "expected instability, lambda_min = {} (residual {})",
            est.lambda_min,
            est.residual
        );
        assert_eq!(est.class, SYMMETRY_CLASS);
        // The planar saddle has exactly one negative eigenvalue.
        assert!(
            est.next[0] > 0.0,
            "second eigenvalue {} not positive",
            est.next[0]
        );
        // The archived unstable direction really has negative form value.
        let q = lin.quadratic_form(&est.eigenfield);
        assert!(q < 0.0, "Q_u at the eigenfield must be negative, got {q}");
        let rayleigh = q / (lin.norm(&est.eigenfield) * lin.norm(&est.eigenfield));
        assert!((rayleigh - est.lambda_min).abs() < 1e-5);
    }

    #[test]
    fn rayleigh_bounds_lambda_min() {
        let (sol, nl, _) = solved(1, 6.0, 0.15);
        let lin = LinearizedOperator::new(&sol, &nl);
        let est = min_eigenvalue(&lin, &EigenOptions::default()).unwrap();
        let grid = sol.field.grid().clone();
        let s_max = grid.s_max();
        let mut rng = SplitMix64::new(2024);
        for _ in 0..50 {
            // Smooth random admissible field: a few sine modes, zero on the rim.
            let (p1, q1) = (1 + rng.below(4), 1 + rng.below(4));
            let (a1, a2) = (rng.range(-1.0, 1.0), rng.range(-1.0, 1.0));
            let xi = SquareField::from_fn(&grid, |s, t| {
                let sx = core::f64::consts::PI * s / s_max;
                let tx = core::f64::consts::PI * t / s_max;
                a1 * (p1 as f64 * sx).sin() * (q1 as f64 * tx).sin() + a2 * sx.sin() * tx.sin()
            });
            let nrm2 = lin.inner(&xi, &xi);
            if nrm2 < 1e-12 {
                continue;
            }
            let rayleigh = lin.quadratic_form(&xi) / nrm2;
            assert!(
                est.lambda_min <= rayleigh + 1e-5,
                "lambda_min {} above Rayleigh {rayleigh}",
                est.lambda_min
            );
        }
    }

    #[test]
    fn phi_positive_and_even_for_the_planar_solution() {
        let (sol, _, _) = solved(1, 6.0, 0.1);
        let sq = sol.field.odd_reflect().unwrap();
        let phi = build_phi(&sq, 1.0).unwrap();
        let grid = sol.field.grid().clone();
        let n = grid.n();
        for i in 1..n {
            for j in 1..n {
                let v = phi.get(i, j);
                let w = phi.get(j, i);
                assert!(
                    (v - w).abs() <= 1e-12 * v.abs().max(1.0),
                    "phi not even across the cone at ({i},{j}): {v} vs {w}"
                );
            }
        }
        // u_s > 0 and -u_t > 0 make phi positive away from the axes.
        for i in 2..n - 1 {
            for j in 2..n - 1 {
                assert!(phi.get(i, j) > 0.0, "phi({i},{j}) = {}", phi.get(i, j));
            }
        }
        assert!(build_phi(&sq, -1.0).is_err());
        assert!(build_phi(&sq, 0.0).is_err());
    }

    #[test]
    fn phi_of_approximant_matches_direct_build() {
        let nl = BistableNonlinearity::allen_cahn();
        let prof = Profile1D::build(&nl, 12.0, 0.01).unwrap();
        let grid = QuadrantGrid::new(6.0, 0.05, DimensionParams::new(7));
        let u_square = SquareField::from_fn(&grid, |s, t| prof.eval_u0((s - t) * SQRT2_INV));
        let direct = build_phi(&u_square, 2.5).unwrap();
        let analytic = phi_of_approximant(&grid, &prof, 2.5);
        let n = grid.n();
        let mut worst = 0.0f64;
        for i in 5..n - 2 {
            for j in 5..n - 2 {
                // Relative to the local phi scale: the t^{-b} factor amplifies
                // the O(h²) derivative-stencil error near the excluded band.
                let scale = analytic.get(i, j).abs().max(1.0);
                worst = worst.max((direct.get(i, j) - analytic.get(i, j)).abs() / scale);
            }
        }
        assert!(worst < 2e-3, "phi relative mismatch {worst}");
    }

    #[test]
    fn cutoff_plateau_and_gradient_mass_scaling() {
        let grid = QuadrantGrid::new(6.0, 0.1, DimensionParams::new(3));
        let eta = cutoff_family(&grid, 0.4);
        // Plateau 1 past eps, 0 below eps/2.
        assert_eq!(eta.get(30, 30), 1.0);
        assert_eq!(eta.get(1, 30), 0.0);
        // Gradient mass scales like eps^{m-2} (m = 3: halving eps halves it).
        let d = DimensionParams::new(3);
        let m1 = cutoff_gradient_mass(d, 0.4, 5.0);
        let m2 = cutoff_gradient_mass(d, 0.2, 5.0);
        let m3 = cutoff_gradient_mass(d, 0.1, 5.0);
        let r1 = m1 / m2;
        let r2 = m2 / m3;
        assert!((r1 - 2.0).abs() < 0.05, "ratio {r1}");
        assert!((r2 - 2.0).abs() < 0.05, "ratio {r2}");
        // m = 5: eps^3 scaling.
        let d5 = DimensionParams::new(5);
        let r5 = cutoff_gradient_mass(d5, 0.4, 5.0) / cutoff_gradient_mass(d5, 0.2, 5.0);
        assert!((r5 - 8.0).abs() < 0.2, "ratio {r5}");
    }

    #[test]
    fn cutoff_stabilizes_the_form_on_supported_fields() {
        let (sol, nl, _) = solved(2, 6.0, 0.1);
        let lin = LinearizedOperator::new(&sol, &nl);
        let grid = sol.field.grid().clone();
        let s_max = grid.s_max();
        // A fixed field supported in {st > 0} (vanishing on the axes and rim).
        let xi = SquareField::from_fn(&grid, |s, t| {
            let sx = core::f64::consts::PI * s / s_max;
            let tx = core::f64::consts::PI * t / s_max;
            sx.sin() * tx.sin()
        });
        let q0 = lin.quadratic_form(&xi);
        let mut prev_gap = f64::INFINITY;
        for eps in [0.4, 0.2, 0.1] {
            let eta = cutoff_family(&grid, eps);
            let mut cut = xi.clone();
            for idx in 0..cut.values().len() {
                cut.values_mut()[idx] *= eta.values()[idx];
            }
            let gap = (lin.quadratic_form(&cut) - q0).abs();
            assert!(
                gap <= prev_gap + 1e-12,
                "gap did not shrink: {gap} vs {prev_gap}"
            );
            prev_gap = gap;
        }
        assert!(
            prev_gap < 0.05 * q0.abs().max(1.0),
            "cutoff limit gap {prev_gap}"
        );
    }
}
