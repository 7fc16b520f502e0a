//! Bistable nonlinearities f and their double-well potentials G.
//!
//! A nonlinearity is admissible when f is odd, f(0) = f(1) = 0, and f″ < 0 on
//! (0,1). The potential satisfies G′ = −f and is normalized so that G(1) = 0,
//! which makes the first integral u̇₀ = √(2G(u₀)) of the 1D profile hold
//! without offsets.

use alloc::borrow::Cow;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Reaction {
    /// f(u) = u − u³, G(u) = (1 − u²)²/4.
    AllenCahn,
    /// f(u) = Σ cₖ u^{2k+1}; coefficients are for the odd powers u, u³, u⁵, …
    OddPolynomial { coeffs: Vec<f64> },
    /// Arbitrary closures. `validate` is mandatory before use.
    Custom {
        f: ScalarFn,
        fp: ScalarFn,
        fpp: ScalarFn,
        potential: ScalarFn,
    },
}

/// A bistable reaction term together with its derivatives and potential.
///
/// Immutable after construction; shared read-only across solver workers.
#[derive(Clone)]
pub struct BistableNonlinearity {
    name: String,
    kind: Reaction,
}

impl fmt::Debug for BistableNonlinearity {
    fn fmt(&self, fmt: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt.debug_struct("BistableNonlinearity")
            .field("name", &self.name)
            .finish()
    }
}

impl BistableNonlinearity {
    /// The Allen–Cahn nonlinearity f(u) = u − u³.
    pub fn allen_cahn() -> Self {
        Self {
            name: String::from("allen-cahn"),
            kind: Reaction::AllenCahn,
        }
    }

    /// An odd polynomial f(u) = Σ cₖ u^{2k+1} given by its coefficient list
    /// `[c₀, c₁, …]` for the powers u, u³, u⁵, …
    ///
    /// `allen_cahn()` is equivalent to `odd_polynomial("allen-cahn", &[1.0, -1.0])`
    /// up to the closed-form fast path.
    pub fn odd_polynomial(name: &str, coeffs: &[f64]) -> Self {
        Self {
            name: String::from(name),
            kind: Reaction::OddPolynomial {
                coeffs: coeffs.to_vec(),
            },
        }
    }

    /// A nonlinearity given by closures for f, f′, f″, and G.
    ///
    /// The hypotheses are not checkable symbolically here, so `validate`
    /// must be run (and pass) before the result is used in a solve.
    pub fn from_closures(
        name: &str,
        f: ScalarFn,
        fp: ScalarFn,
        fpp: ScalarFn,
        potential: ScalarFn,
    ) -> Self {
        Self {
            name: String::from(name),
            kind: Reaction::Custom {
                f,
                fp,
                fpp,
                potential,
            },
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// f(u)
    pub fn f(&self, u: f64) -> f64 {
        match &self.kind {
            Reaction::AllenCahn => u - u * u * u,
            Reaction::OddPolynomial { coeffs } => {
                let u2 = u * u;
                let mut acc = 0.0;
                for &c in coeffs.iter().rev() {
                    acc = acc * u2 + c;
                }
                acc * u
            }
            Reaction::Custom { f, .. } => f(u),
        }
    }

    /// f′(u)
    pub fn fp(&self, u: f64) -> f64 {
        match &self.kind {
            Reaction::AllenCahn => 1.0 - 3.0 * u * u,
            Reaction::OddPolynomial { coeffs } => {
                let u2 = u * u;
                let mut acc = 0.0;
                for (k, &c) in coeffs.iter().enumerate().rev() {
                    let p = (2 * k + 1) as f64;
                    acc = acc * u2 + p * c;
                }
                acc
            }
            Reaction::Custom { fp, .. } => fp(u),
        }
    }

    /// f″(u)
    pub fn fpp(&self, u: f64) -> f64 {
        match &self.kind {
            Reaction::AllenCahn => -6.0 * u,
            Reaction::OddPolynomial { coeffs } => {
                let u2 = u * u;
                let mut acc = 0.0;
                for (k, &c) in coeffs.iter().enumerate().skip(1).rev() {
                    let p = ((2 * k + 1) * (2 * k)) as f64;
                    acc = acc * u2 + p * c;
                }
                acc * u
            }
            Reaction::Custom { fpp, .. } => fpp(u),
        }
    }

    /// The potential G(u) with G′ = −f and G(1) = 0.
    pub fn potential(&self, u: f64) -> f64 {
        match &self.kind {
            Reaction::AllenCahn => {
                let w = 1.0 - u * u;
                0.25 * w * w
            }
            Reaction::OddPolynomial { coeffs } => {
                // G(u) = Σ cₖ (1 − u^{2k+2})/(2k+2)
                let u2 = u * u;
                let mut upow = u2;
                let mut acc = 0.0;
                for (k, &c) in coeffs.iter().enumerate() {
                    acc += c * (1.0 - upow) / ((2 * k + 2) as f64);
                    upow *= u2;
                }
                acc
            }
            Reaction::Custom { potential, .. } => potential(u),
        }
    }

    /// max f′ over [0,1]. Under the hypotheses f″ < 0 in (0,1) and oddness
    /// this is f′(0); it is the monotone-iteration constant K.
    pub fn fp_max(&self) -> f64 {
        self.fp(0.0)
    }

    /// Checks the admissibility hypotheses on a uniform sample of [−1,1].
    ///
    /// Non-finite evaluations are an error; hypothesis failures are reported
    /// with the first violating point.
    pub fn validate(&self, samples: usize) -> Result<ValidationReport, ValidationError> {
        assert!(samples >= 3, "validate needs at least 3 sample points");
        const EXACT: f64 = 1e-12;

        let check = |rule: Rule,
                     u: f64,
                     value: f64,
                     ok: bool|
         -> Result<Option<Violation>, ValidationError> {
            if !value.is_finite() {
                return Err(ValidationError::NonFinite { u, rule });
            }
            Ok(if ok {
                None
            } else {
                Some(Violation { rule, u, value })
            })
        };

        let mut first: Option<Violation> = None;
        let mut record = |v: Option<Violation>| {
            if first.is_none() {
                first = v;
            }
        };

        record(check(
            Rule::FZeroAtZero,
            0.0,
            self.f(0.0),
            self.f(0.0).abs() <= EXACT,
        )?);
        record(check(
            Rule::FZeroAtOne,
            1.0,
            self.f(1.0),
            self.f(1.0).abs() <= EXACT,
        )?);
        record(check(
            Rule::PotentialZeroAtOne,
            1.0,
            self.potential(1.0),
            self.potential(1.0).abs() <= EXACT,
        )?);
        record(check(
            Rule::PotentialZeroAtMinusOne,
            -1.0,
            self.potential(-1.0),
            self.potential(-1.0).abs() <= EXACT,
        )?);

        for i in 0..samples {
            let u = -1.0 + 2.0 * (i as f64) / ((samples - 1) as f64);
            let odd_defect = self.f(-u) + self.f(u);
            record(check(Rule::Odd, u, odd_defect, odd_defect.abs() <= EXACT)?);
            let g = self.potential(u);
            record(check(Rule::PotentialNonnegative, u, g, g >= -EXACT)?);
            if u > 0.0 && u < 1.0 {
                let c = self.fpp(u);
                record(check(Rule::ConcaveOnUnit, u, c, c < 0.0)?);
            }
        }

        Ok(ValidationReport {
            name: self.name.clone(),
            samples,
            first_violation: first,
        })
    }
}

/// The hypothesis a sample point is tested against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rule {
    Odd,
    FZeroAtZero,
    FZeroAtOne,
    ConcaveOnUnit,
    PotentialNonnegative,
    PotentialZeroAtOne,
    PotentialZeroAtMinusOne,
}

impl Rule {
    pub fn describe(self) -> Cow<'static, str> {
        Cow::Borrowed(match self {
            Rule::Odd => "f(-u) = -f(u)",
            Rule::FZeroAtZero => "f(0) = 0",
            Rule::FZeroAtOne => "f(1) = 0",
            Rule::ConcaveOnUnit => "f'' < 0 on (0,1)",
            Rule::PotentialNonnegative => "G >= 0 on [-1,1]",
            Rule::PotentialZeroAtOne => "G(1) = 0",
            Rule::PotentialZeroAtMinusOne => "G(-1) = 0",
        })
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Violation {
    pub rule: Rule,
    pub u: f64,
    pub value: f64,
}

#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub name: String,
    pub samples: usize,
    pub first_violation: Option<Violation>,
}

impl ValidationReport {
    pub fn pass(&self) -> bool {
        self.first_violation.is_none()
    }
}

#[derive(Debug, Clone, Copy)]
pub enum ValidationError {
    NonFinite { u: f64, rule: Rule },
}

impl fmt::Display for ValidationError {
    fn fmt(&self, fmt: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValidationError::NonFinite { u, rule } => {
                write!(
                    fmt,
                    "non-finite evaluation at u = {u} while checking {}",
                    rule.describe()
                )
            }
        }
    }
}

impl core::error::Error for ValidationError {}
