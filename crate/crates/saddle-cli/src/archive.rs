//! On-disk formats: the solution archive, certificate/spectrum/check reports,
//! the profile table CSV, and whitespace plot files.
//!
//! Struct fields are declared in sorted key order so the emitted JSON has
//! sorted keys without post-processing.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use saddle_core::geometry::DimensionParams;
use saddle_core::grid::{QuadrantGrid, ScalarField, SquareField};
use saddle_core::linearized::SupersolutionCertificate;
use saddle_core::profile::Profile1D;
use saddle_core::solver::{SaddleSolution, SolverMode};
use std::sync::Arc;

pub const SCHEMA_VERSION: u32 = 1;
pub const TRIANGLE_ORDERING: &str = "triangle-row-major";

/// A converged solution on the triangle, with enough metadata to rebuild the
/// grid and reproduce the run.
#[derive(Debug, Serialize, Deserialize)]
pub struct SolutionArchive {
    #[serde(rename = "S")]
    pub s_max: f64,
    pub h: f64,
    pub iterations: usize,
    pub m: usize,
    pub mode: String,
    pub nonlinearity: String,
    /// Present only for custom odd-polynomial nonlinearities, so archives
    /// stay self-contained for `verify` and `spectrum`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub odd_coefficients: Option<Vec<f64>>,
    pub ordering: String,
    pub residual: f64,
    pub schema_version: u32,
    pub seed: u64,
    pub tol: f64,
    pub values: Vec<f64>,
}

impl SolutionArchive {
    pub fn from_solution(sol: &SaddleSolution) -> Self {
        let grid = sol.field.grid();
        Self {
            s_max: grid.s_max(),
            h: grid.h(),
            iterations: sol.iterations,
            m: sol.dim.m(),
            mode: mode_name(sol.config.mode).to_string(),
            nonlinearity: sol.nonlinearity.clone(),
            odd_coefficients: None,
            ordering: TRIANGLE_ORDERING.to_string(),
            residual: sol.final_residual,
            schema_version: SCHEMA_VERSION,
            seed: sol.config.seed,
            tol: sol.config.tol,
            values: sol.field.values().to_vec(),
        }
    }

    pub fn grid(&self) -> Result<Arc<QuadrantGrid>> {
        let dim = DimensionParams::new(self.m);
        let grid = QuadrantGrid::new(self.s_max, self.h, dim);
        if grid.tri_len() != self.values.len() {
            bail!(
                "archive has {} values but the ({}, {}) grid needs {}",
                self.values.len(),
                self.s_max,
                self.h,
                grid.tri_len()
            );
        }
        Ok(grid)
    }

    pub fn field(&self) -> Result<ScalarField> {
        if self.ordering != TRIANGLE_ORDERING {
            bail!("unsupported ordering {:?}", self.ordering);
        }
        let grid = self.grid()?;
        ScalarField::from_values(&grid, self.values.clone())
            .map_err(|e| anyhow::anyhow!("bad archive values: {e}"))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_json(path, self)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading solution archive {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }
}

pub fn mode_name(mode: SolverMode) -> &'static str {
    match mode {
        SolverMode::Monotone => "monotone",
        SolverMode::Newton => "newton",
        SolverMode::Hybrid => "hybrid",
    }
}

/// Certificate report {m, b, min_phi, max_Lphi, slack, verdict, ...}.
#[derive(Debug, Serialize, Deserialize)]
pub struct CertificateReport {
    pub b: f64,
    pub c_slack: f64,
    pub excluded_band_width: f64,
    pub m: usize,
    #[serde(rename = "max_Lphi")]
    pub max_l_phi: f64,
    pub min_phi: f64,
    pub slack: f64,
    pub verdict: bool,
}

impl CertificateReport {
    pub fn new(m: usize, cert: &SupersolutionCertificate) -> Self {
        Self {
            b: cert.b,
            c_slack: cert.c_slack,
            excluded_band_width: cert.excluded_band_width,
            m,
            max_l_phi: cert.max_l_phi,
            min_phi: cert.min_phi,
            slack: cert.slack,
            verdict: cert.verdict,
        }
    }
}

/// Spectrum report {m, lambda_min, residual, S, h} plus the symmetry class
/// label and the seed of the start vector.
#[derive(Debug, Serialize, Deserialize)]
pub struct SpectrumReport {
    #[serde(rename = "S")]
    pub s_max: f64,
    pub class: String,
    pub h: f64,
    pub lambda_min: f64,
    pub m: usize,
    pub next: Vec<f64>,
    pub residual: f64,
    pub seed: u64,
    pub verdict: String,
}

/// Verdict record of a named check: {check, m, params, pass, worst_node,
/// worst_value, allowance}.
#[derive(Debug, Serialize, Deserialize)]
pub struct VerdictReport {
    pub allowance: f64,
    pub check: String,
    pub m: usize,
    pub params: CheckParams,
    pub pass: bool,
    pub worst_node: (f64, f64),
    pub worst_value: f64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CheckParams {
    #[serde(rename = "S")]
    pub s_max: f64,
    pub h: f64,
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// Profile table dump: `tau,u0,u0_prime` CSV.
pub fn write_profile_csv(path: &Path, prof: &Profile1D) -> Result<()> {
    let mut out = String::from("tau,u0,u0_prime\n");
    for row in prof.table() {
        out.push_str(&format!("{},{},{}\n", row.tau, row.u0, row.du0));
    }
    fs::write(path, out).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// Three-column whitespace plot file `s t value` for a triangle field.
pub fn write_field_plot(path: &Path, field: &ScalarField) -> Result<()> {
    let grid = field.grid();
    let mut out = String::new();
    for i in 0..grid.n() {
        for j in 0..=i {
            out.push_str(&format!(
                "{} {} {}\n",
                grid.coord(i),
                grid.coord(j),
                field.get(i, j)
            ));
        }
        out.push('\n');
    }
    fs::write(path, out).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// Three-column whitespace plot file for a square field.
pub fn write_square_plot(path: &Path, field: &SquareField) -> Result<()> {
    let grid = field.grid();
    let mut out = String::new();
    for i in 0..grid.n() {
        for j in 0..grid.n() {
            out.push_str(&format!(
                "{} {} {}\n",
                grid.coord(i),
                grid.coord(j),
                field.get(i, j)
            ));
        }
        out.push('\n');
    }
    fs::write(path, out).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// Two-column whitespace decay table `radius value`.
pub fn write_decay_table(path: &Path, radii: &[f64], values: &[f64]) -> Result<()> {
    let mut out = String::new();
    for (r, v) in radii.iter().zip(values) {
        out.push_str(&format!("{r} {v}\n"));
    }
    fs::write(path, out).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}
