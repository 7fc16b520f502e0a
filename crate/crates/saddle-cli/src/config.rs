//! Optional JSON config file carrying the same keys as the CLI flags.
//! Explicit flags win over config values; custom odd-polynomial
//! nonlinearities are supplied here as coefficient lists.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use saddle_core::nonlinearity::BistableNonlinearity;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub dim: Option<usize>,
    #[serde(rename = "S")]
    pub s_max: Option<f64>,
    pub h: Option<f64>,
    pub mode: Option<String>,
    pub tol: Option<f64>,
    pub max_iters: Option<usize>,
    pub seed: Option<u64>,
    pub b: Option<f64>,
    pub checks: Option<String>,
    pub nonlinearity: Option<NonlinearitySpec>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum NonlinearitySpec {
    /// Registered name; `allen-cahn` is the only built-in.
    Name(String),
    /// Odd polynomial f(u) = Σ cₖ u^{2k+1} by its coefficient list.
    OddPolynomial {
        name: String,
        odd_coefficients: Vec<f64>,
    },
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }
}

/// Resolves a nonlinearity spec, validating anything that is not the
/// built-in closed form.
pub fn resolve_nonlinearity(spec: Option<&NonlinearitySpec>) -> Result<BistableNonlinearity> {
    let nl = match spec {
        None => BistableNonlinearity::allen_cahn(),
        Some(NonlinearitySpec::Name(name)) if name == "allen-cahn" => {
            BistableNonlinearity::allen_cahn()
        }
        Some(NonlinearitySpec::Name(name)) => {
            bail!("unknown nonlinearity {name:?}; use \"allen-cahn\" or an odd-polynomial spec")
        }
        Some(NonlinearitySpec::OddPolynomial {
            name,
            odd_coefficients,
        }) => BistableNonlinearity::odd_polynomial(name, odd_coefficients),
    };
    if nl.name() != "allen-cahn" {
        let report = nl
            .validate(201)
            .map_err(|e| anyhow::anyhow!("nonlinearity evaluation failed: {e}"))?;
        if let Some(v) = report.first_violation {
            bail!(
                "nonlinearity {:?} violates the bistability hypotheses: {} at u = {} (value {})",
                nl.name(),
                v.rule.describe(),
                v.u,
                v.value
            );
        }
    }
    Ok(nl)
}
