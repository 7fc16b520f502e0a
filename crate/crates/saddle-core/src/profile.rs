//! The unique increasing 1D heteroclinic u₀ with u₀(0) = 0 and limits ±1.
//!
//! For Allen–Cahn the closed form u₀(τ) = tanh(τ/√2) is used. For other
//! admissible nonlinearities the profile is built from the first-order
//! reduction u̇₀ = √(2G(u₀)), which is exact for the heteroclinic and avoids
//! eigenvalue-sensitive shooting. The reduction is marched as an ODE in τ, so
//! the quadratic vanishing of G at ±1 never appears as a quadrature
//! singularity; past |u₀| = 1 − 1e−4 the speed comes from the analytic
//! expansion of G at the well, which sidesteps catastrophic cancellation.
//! Beyond ±T_max evaluation switches to the linearized tail
//! 1 − u₀ ∝ exp(−κτ) with κ = √(−f′(1)), fitted at the truncation point.

use alloc::vec::Vec;
use core::fmt;

use crate::nonlinearity::BistableNonlinearity;

const TAIL_SWITCH: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileMode {
    ClosedForm,
    Tabulated,
}

/// One row of the tabulated profile.
#[derive(Debug, Clone, Copy)]
pub struct ProfileSample {
    pub tau: f64,
    pub u0: f64,
    pub du0: f64,
}

#[derive(Clone)]
pub struct Profile1D {
    nonlinearity: BistableNonlinearity,
    mode: ProfileMode,
    t_max: f64,
    step: f64,
    /// u₀ at τ = k·step for k = 0..=n (positive half; the negative half is
    /// the odd mirror).
    u0: Vec<f64>,
    /// u̇₀ at the same nodes, from the first integral.
    du0: Vec<f64>,
    /// Interpolation slopes, Fritsch–Carlson-clamped so the interpolant is
    /// monotone on every interval.
    slope: Vec<f64>,
    /// Decay rate κ = √(−f′(1)) of the linearized tail.
    tail_rate: f64,
    /// 1 − u₀(T_max); tail amplitude fitted at the truncation point.
    tail_gap: f64,
}

impl fmt::Debug for Profile1D {
    fn fmt(&self, fmt: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt.debug_struct("Profile1D")
            .field("nonlinearity", &self.nonlinearity.name())
            .field("mode", &self.mode)
            .field("t_max", &self.t_max)
            .field("step", &self.step)
            .finish()
    }
}

#[derive(Debug, Clone, Copy)]
pub enum ProfileError {
    /// G vanished (or went negative) at an interior point of (0,1); the
    /// quadrature 1/√(2G) is then singular away from the endpoints.
    DegeneratePotential { u: f64, g: f64 },
    /// f′(1) ≥ 0: the linearized tail has no decay and the truncation is
    /// meaningless.
    NoTailDecay { fp_at_one: f64 },
}

impl fmt::Display for ProfileError {
    fn fmt(&self, fmt: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProfileError::DegeneratePotential { u, g } => {
                write!(fmt, "potential G({u}) = {g} vanishes inside (0,1)")
            }
            ProfileError::NoTailDecay { fp_at_one } => {
                write!(fmt, "f'(1) = {fp_at_one} >= 0, no exponential tail")
            }
        }
    }
}

impl core::error::Error for ProfileError {}

impl Profile1D {
    /// Builds the profile for `n`, truncated at ±`t_max` with table spacing
    /// `step`. Allen–Cahn gets the closed form; everything else is tabulated.
    pub fn build(n: &BistableNonlinearity, t_max: f64, step: f64) -> Result<Self, ProfileError> {
        assert!(t_max >= 5.0, "t_max must be at least 5");
        assert!(step > 0.0 && step <= 0.01, "step must lie in (0, 0.01]");
        if n.name() == "allen-cahn" {
            return Ok(Self {
                nonlinearity: n.clone(),
                mode: ProfileMode::ClosedForm,
                t_max,
                step,
                u0: Vec::new(),
                du0: Vec::new(),
                slope: Vec::new(),
                tail_rate: libm::sqrt(2.0),
                tail_gap: 1.0 - libm::tanh(t_max / libm::sqrt(2.0)),
            });
        }
        Self::build_tabulated(n, t_max, step)
    }

    /// Builds the tabulated profile unconditionally (also for Allen–Cahn,
    /// where the closed form then serves as an oracle for this path).
    pub fn build_tabulated(
        n: &BistableNonlinearity,
        t_max: f64,
        step: f64,
    ) -> Result<Self, ProfileError> {
        assert!(t_max >= 5.0, "t_max must be at least 5");
        assert!(step > 0.0 && step <= 0.01, "step must lie in (0, 0.01]");

        let fp1 = n.fp(1.0);
        if fp1 >= 0.0 {
            return Err(ProfileError::NoTailDecay { fp_at_one: fp1 });
        }
        let kappa = libm::sqrt(-fp1);

        // u̇ = √(2G(u)); reject interior zeros of G, where the heteroclinic
        // would stall before reaching the well.
        // Near the well, G(u) ~ κ²(1−u)²/2 is a difference of almost equal
        // terms and drowns in cancellation below gap ≈ 1e-4; switch to the
        // Taylor expansion of G at u = 1 there. Elsewhere, admissible
        // nonlinearities keep G above ~κ²·TAIL_SWITCH²/2 ≈ 1e-8, so a drop
        // below 1e-12 means an interior pinch of the potential.
        let fpp1 = n.fpp(1.0);
        let speed = |u: f64| -> Result<f64, ProfileError> {
            let gap = 1.0 - u.abs();
            if gap < TAIL_SWITCH {
                let c1 = fpp1 / (6.0 * kappa * kappa);
                return Ok(kappa * gap * (1.0 + c1 * gap));
            }
            let g = n.potential(u);
            if g < 1e-12 {
                return Err(ProfileError::DegeneratePotential { u, g });
            }
            Ok(libm::sqrt(g * 2.0))
        };

        let count = libm::ceil(t_max / step) as usize;
        let mut u0 = Vec::with_capacity(count + 1);
        u0.push(0.0);

        // RK4 on the first-order reduction. Eight substeps per table interval
        // keep the node-to-node error wiggle below ~1e-8/32, so that second
        // differences of the table stay well under the 1e-6 ODE-residual
        // budget.
        let substeps = 8;
        let h = step / substeps as f64;
        // The march in τ never touches the singular dτ/du form, so it can run
        // smoothly all the way to T_max; the linearized exponential tail is
        // used only beyond the truncation, anchored at the last node.
        let mut u = 0.0f64;
        for _ in 1..=count {
            for _ in 0..substeps {
                let k1 = speed(u)?;
                let k2 = speed(u + 0.5 * h * k1)?;
                let k3 = speed(u + 0.5 * h * k2)?;
                let k4 = speed(u + h * k3)?;
                u += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            }
            u0.push(u);
        }

        let du0: Vec<f64> = u0.iter().map(|&v| speed(v).unwrap_or(0.0)).collect();

        // Fritsch–Carlson sufficient condition: slope ≤ 3·(adjacent secants).
        let mut slope = du0.clone();
        for k in 0..u0.len() {
            let sec_right = if k + 1 < u0.len() {
                (u0[k + 1] - u0[k]) / step
            } else {
                f64::INFINITY
            };
            let sec_left = if k > 0 {
                (u0[k] - u0[k - 1]) / step
            } else {
                f64::INFINITY
            };
            let cap = 3.0 * sec_right.min(sec_left);
            if slope[k] > cap {
                slope[k] = cap;
            }
            if slope[k] < 0.0 {
                slope[k] = 0.0;
            }
        }

        let tail_gap = 1.0 - u0[u0.len() - 1];
        Ok(Self {
            nonlinearity: n.clone(),
            mode: ProfileMode::Tabulated,
            t_max,
            step,
            u0,
            du0,
            slope,
            tail_rate: kappa,
            tail_gap,
        })
    }

    pub fn mode(&self) -> ProfileMode {
        self.mode
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn nonlinearity(&self) -> &BistableNonlinearity {
        &self.nonlinearity
    }

    /// u₀(τ) ∈ (−1, 1). Clamped to the largest double below 1 so the open
    /// range survives even where the tail is beyond f64 resolution.
    pub fn eval_u0(&self, tau: f64) -> f64 {
        const BELOW_ONE: f64 = 1.0 - f64::EPSILON / 2.0;
        let v = match self.mode {
            ProfileMode::ClosedForm => libm::tanh(tau / libm::sqrt(2.0)),
            ProfileMode::Tabulated => {
                let sign = if tau < 0.0 { -1.0 } else { 1.0 };
                let a = tau.abs();
                if a > self.t_max {
                    sign * (1.0 - self.tail_gap * libm::exp(-self.tail_rate * (a - self.t_max)))
                } else {
                    sign * self.interp_value(a)
                }
            }
        };
        v.clamp(-BELOW_ONE, BELOW_ONE)
    }

    /// u̇₀(τ) > 0.
    pub fn eval_u0_prime(&self, tau: f64) -> f64 {
        match self.mode {
            ProfileMode::ClosedForm => {
                let c = libm::cosh(tau / libm::sqrt(2.0));
                1.0 / (libm::sqrt(2.0) * c * c)
            }
            ProfileMode::Tabulated => {
                let a = tau.abs();
                if a > self.t_max {
                    self.tail_rate * self.tail_gap * libm::exp(-self.tail_rate * (a - self.t_max))
                } else {
                    self.interp_prime(a)
                }
            }
        }
    }

    /// Table rows over the full range [−T_max, T_max], for inspection or dump.
    pub fn table(&self) -> Vec<ProfileSample> {
        match self.mode {
            ProfileMode::ClosedForm => {
                let count = libm::ceil(self.t_max / self.step) as i64;
                (-count..=count)
                    .map(|k| {
                        let tau = k as f64 * self.step;
                        ProfileSample {
                            tau,
                            u0: self.eval_u0(tau),
                            du0: self.eval_u0_prime(tau),
                        }
                    })
                    .collect()
            }
            ProfileMode::Tabulated => {
                let n = self.u0.len() as i64 - 1;
                (-n..=n)
                    .map(|k| {
                        let idx = k.unsigned_abs() as usize;
                        let sign = if k < 0 { -1.0 } else { 1.0 };
                        ProfileSample {
                            tau: k as f64 * self.step,
                            u0: sign * self.u0[idx],
                            du0: self.du0[idx],
                        }
                    })
                    .collect()
            }
        }
    }

    /// Cubic Hermite value on the positive half-table, clamped slopes.
    fn interp_value(&self, a: f64) -> f64 {
        debug_assert!(a >= 0.0 && a <= self.t_max + 1e-12);
        let last = self.u0.len() - 1;
        let k = ((a / self.step) as usize).min(last.saturating_sub(1));
        let t = (a - k as f64 * self.step) / self.step;
        let (y0, y1) = (self.u0[k], self.u0[k + 1]);
        let (d0, d1) = (self.slope[k] * self.step, self.slope[k + 1] * self.step);
        let t2 = t * t;
        let t3 = t2 * t;
        y0 * (2.0 * t3 - 3.0 * t2 + 1.0)
            + d0 * (t3 - 2.0 * t2 + t)
            + y1 * (-2.0 * t3 + 3.0 * t2)
            + d1 * (t3 - t2)
    }

    /// Cubic Hermite on the u̇₀ table, with slopes ü₀ = −f(u₀).
    fn interp_prime(&self, a: f64) -> f64 {
        let last = self.du0.len() - 1;
        let k = ((a / self.step) as usize).min(last.saturating_sub(1));
        let t = (a - k as f64 * self.step) / self.step;
        let (y0, y1) = (self.du0[k], self.du0[k + 1]);
        let d0 = -self.nonlinearity.f(self.u0[k]) * self.step;
        let d1 = -self.nonlinearity.f(self.u0[k + 1]) * self.step;
        let t2 = t * t;
        let t3 = t2 * t;
        y0 * (2.0 * t3 - 3.0 * t2 + 1.0)
            + d0 * (t3 - 2.0 * t2 + t)
            + y1 * (-2.0 * t3 + 3.0 * t2)
            + d1 * (t3 - t2)
    }
}
