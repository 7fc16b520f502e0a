//! Coordinate transforms between (s,t) and (y,z), the distance to the Simons
//! cone {s = t}, the cone-layer approximant U = u₀((s−t)/√2), the weighted
//! volume element s^{m−1}t^{m−1}, and the admissible exponent range for the
//! stability certificate.
//!
//! Angular constants of the volume element are dropped throughout: every
//! downstream use (eigenvalue signs, quadratic-form signs, energy comparisons
//! at fixed m) is invariant under positive scaling.

use core::fmt;

use crate::profile::Profile1D;

/// Half-dimension m ≥ 1; the ambient space is ℝ^{2m}.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DimensionParams {
    m: usize,
}

impl DimensionParams {
    pub fn new(m: usize) -> Self {
        assert!(m >= 1, "half-dimension m must be at least 1");
        Self { m }
    }

    /// Builds from the full (even) dimension 2m.
    pub fn from_full_dimension(dim: usize) -> Result<Self, DimensionError> {
        if dim < 2 || dim % 2 != 0 {
            return Err(DimensionError::NotEven { dim });
        }
        Ok(Self { m: dim / 2 })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn full_dimension(&self) -> usize {
        2 * self.m
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DimensionError {
    NotEven { dim: usize },
}

impl fmt::Display for DimensionError {
    fn fmt(&self, fmt: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DimensionError::NotEven { dim } => {
                write!(
                    fmt,
                    "ambient dimension must be an even integer >= 2, got {dim}"
                )
            }
        }
    }
}

impl core::error::Error for DimensionError {}

/// A point in the radial quadrant, s = |(x₁..x_m)| ≥ 0, t = |(x_{m+1}..x_{2m})| ≥ 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct STPoint {
    pub s: f64,
    pub t: f64,
}

impl STPoint {
    pub fn new(s: f64, t: f64) -> Self {
        assert!(s >= 0.0 && t >= 0.0, "(s,t) must be nonnegative");
        Self { s, t }
    }
}

/// Rotated coordinates y = (s+t)/√2 ≥ 0, z = (s−t)/√2 with |z| ≤ y.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct YZPoint {
    pub y: f64,
    pub z: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CoordError {
    OutsideWedge { y: f64, z: f64 },
}

impl fmt::Display for CoordError {
    fn fmt(&self, fmt: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoordError::OutsideWedge { y, z } => {
                write!(fmt, "(y,z) = ({y},{z}) violates |z| <= y")
            }
        }
    }
}

impl core::error::Error for CoordError {}

const SQRT2_INV: f64 = core::f64::consts::FRAC_1_SQRT_2;

pub fn st_to_yz(p: STPoint) -> YZPoint {
    YZPoint {
        y: (p.s + p.t) * SQRT2_INV,
        z: (p.s - p.t) * SQRT2_INV,
    }
}

pub fn yz_to_st(q: YZPoint) -> Result<STPoint, CoordError> {
    if q.z.abs() > q.y {
        return Err(CoordError::OutsideWedge { y: q.y, z: q.z });
    }
    Ok(STPoint {
        s: (q.y + q.z) * SQRT2_INV,
        t: (q.y - q.z) * SQRT2_INV,
    })
}

/// Distance from (s,t) to the Simons cone {s = t}, equal to |z| = |s−t|/√2.
pub fn distance_to_cone(p: STPoint) -> f64 {
    (p.s - p.t).abs() * SQRT2_INV
}

/// The cone-layer approximant U(s,t) = u₀((s−t)/√2); odd across the cone.
pub fn eval_approximant(p: STPoint, prof: &Profile1D) -> f64 {
    prof.eval_u0((p.s - p.t) * SQRT2_INV)
}

/// The weighted volume element s^{m−1} t^{m−1} (angular constants omitted).
pub fn volume_weight(p: STPoint, d: DimensionParams) -> f64 {
    radial_weight(p.s, d) * radial_weight(p.t, d)
}

/// One factor r^{m−1} of the volume element.
pub fn radial_weight(r: f64, d: DimensionParams) -> f64 {
    match d.m() {
        1 => 1.0,
        2 => r,
        m => libm::pow(r, (m - 1) as f64),
    }
}

/// The admissible exponents of the certificate: [b₋, b₊] with
/// b± = (m−2)/2 ± √((m−2)² − 4(m−1))/2, real only when m ≥ 7.
/// Every b in the interval satisfies b(b−m+2) + m−1 ≤ 0 with b > 0.
pub fn b_range(d: DimensionParams) -> Option<(f64, f64)> {
    let m = d.m() as f64;
    let disc = (m - 2.0) * (m - 2.0) - 4.0 * (m - 1.0);
    if disc < 0.0 {
        return None;
    }
    let half = 0.5 * libm::sqrt(disc);
    let mid = 0.5 * (m - 2.0);
    // m = 1 also has real roots, but they are nonpositive; the certificate
    // needs b > 0, which the roots deliver exactly when m ≥ 7.
    if mid - half <= 0.0 {
        return None;
    }
    Some((mid - half, mid + half))
}

/// The certificate quadratic b(b−m+2) + m−1; nonpositive exactly on [b₋, b₊].
pub fn b_inequality(b: f64, d: DimensionParams) -> f64 {
    let m = d.m() as f64;
    b * (b - m + 2.0) + m - 1.0
}
