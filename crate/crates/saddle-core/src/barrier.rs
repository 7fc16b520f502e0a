//! The explicit barrier behind the narrow-domain maximum principle on
//! {t < s < t + ε}: the quadratic φ(z) = (z + ε)(3ε − z) of the distance
//! z to the cone. On the slab 0 < z < ε/√2 it is pinched between 2ε² and
//! 6ε², has φ_z ≥ 0 and φ_zz = −2, so for any zeroth-order coefficient with
//! positive part bounded by K,
//!   φ_zz + K φ ≤ −2 + 6ε²K < 0  whenever  3ε²K < 1
//! (the first-order cone term −2(m−1)z φ_z/(y²−z²) is ≤ 0 and can be
//! dropped). The operator then has a bounded-below positive supersolution on
//! the slab, which is the maximum principle.

use core::fmt;

#[derive(Debug, Clone, Copy)]
pub struct BarrierReport {
    pub epsilon: f64,
    pub k_bound: f64,
    pub samples: usize,
    pub phi_min: f64,
    pub phi_max: f64,
    /// max over samples of φ_zz + K·φ (wants < 0).
    pub operator_max: f64,
    /// 2 − 6ε²K, the guaranteed gap below zero.
    pub margin: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Copy)]
pub enum BarrierError {
    /// 3ε²K ≥ 1: the smallness condition of the narrow-domain principle fails.
    SmallnessViolated {
        product: f64,
    },
    NonpositiveWidth {
        epsilon: f64,
    },
}

impl fmt::Display for BarrierError {
    fn fmt(&self, fmt: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BarrierError::SmallnessViolated { product } => {
                write!(fmt, "smallness condition 3·eps²·K < 1 violated: {product}")
            }
            BarrierError::NonpositiveWidth { epsilon } => {
                write!(fmt, "slab width must be positive, got {epsilon}")
            }
        }
    }
}

impl core::error::Error for BarrierError {}

/// Samples the barrier over the slab and checks the pinching bounds and the
/// strict negativity of φ_zz + Kφ.
pub fn check_narrow_barrier(
    epsilon: f64,
    k_bound: f64,
    samples: usize,
) -> Result<BarrierReport, BarrierError> {
    if epsilon <= 0.0 {
        return Err(BarrierError::NonpositiveWidth { epsilon });
    }
    let product = 3.0 * epsilon * epsilon * k_bound.max(0.0);
    if product >= 1.0 {
        return Err(BarrierError::SmallnessViolated { product });
    }

    let count = samples.max(2);
    let z_hi = epsilon * core::f64::consts::FRAC_1_SQRT_2;
    let mut phi_min = f64::INFINITY;
    let mut phi_max = f64::NEG_INFINITY;
    let mut operator_max = f64::NEG_INFINITY;
    let mut bounds_ok = true;
    for k in 0..count {
        let z = z_hi * k as f64 / (count - 1) as f64;
        let phi = (z + epsilon) * (3.0 * epsilon - z);
        phi_min = phi_min.min(phi);
        phi_max = phi_max.max(phi);
        if !(2.0 * epsilon * epsilon..=6.0 * epsilon * epsilon).contains(&phi) {
            bounds_ok = false;
        }
        // φ_z = 2ε − 2z ≥ 0 on the slab, so dropping the cone term is safe.
        debug_assert!(2.0 * epsilon - 2.0 * z >= 0.0);
        operator_max = operator_max.max(-2.0 + k_bound * phi);
    }

    let margin = 2.0 - 6.0 * epsilon * epsilon * k_bound;
    Ok(BarrierReport {
        epsilon,
        k_bound,
        samples: count,
        phi_min,
        phi_max,
        operator_max,
        margin,
        pass: bounds_ok && operator_max < 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn passes_with_the_stated_margin() {
        let report = check_narrow_barrier(0.1, 1.0, 101).unwrap();
        assert!(report.pass);
        assert!((report.margin - 1.94).abs() < 1e-12);
        assert!(report.operator_max <= -report.margin + 1e-12);
    }

    #[test]
    fn pinching_bounds_hold_on_the_slab() {
        let report = check_narrow_barrier(0.25, 2.0, 501).unwrap();
        let e2 = 0.25 * 0.25;
        assert!(report.phi_min >= 2.0 * e2);
        assert!(report.phi_max <= 6.0 * e2);
        // The barrier actually spans [3ε², ~3.91ε²] on 0 ≤ z ≤ ε/√2.
        assert!((report.phi_min - 3.0 * e2).abs() < 1e-12);
    }

    #[test]
    fn smallness_condition_is_enforced() {
        assert!(matches!(
            check_narrow_barrier(1.0, 1.0, 10),
            Err(BarrierError::SmallnessViolated { .. })
        ));
        assert!(matches!(
            check_narrow_barrier(-0.5, 1.0, 10),
            Err(BarrierError::NonpositiveWidth { .. })
        ));
    }
}
