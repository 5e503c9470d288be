//! Hyperbolic-plane primitives on the disk `B_O(R)`: distances, the
//! critical angle `phi`, and target-ball membership.
//!
//! The target sits at `(R, 0)`. A point `(r, theta)` lies within hyperbolic
//! distance `R` of the target exactly when `|theta| <= phi(r)`, where
//! `cos(phi(r)) = coth(R) tanh(r/2)`.

use crate::kernels::{self, f, FRAC_PI_2};
use crate::{Error, Result};

/// Model parameters. `radius` is `R = 2 log(n / nu)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub alpha: f64,
    pub beta: f64,
    pub nu: f64,
    pub n: f64,
    pub radius: f64,
}

impl ModelParams {
    /// Build from `(alpha, beta, nu, n)`, deriving `R = 2 log(n / nu)`.
    pub fn new(alpha: f64, beta: f64, nu: f64, n: f64) -> Result<Self> {
        let p = ModelParams {
            alpha,
            beta,
            nu,
            n,
            radius: 2.0 * f::ln(n / nu),
        };
        p.validate()?;
        Ok(p)
    }

    /// Build from a target disk radius, deriving `n = nu e^{R/2}`.
    pub fn from_radius(alpha: f64, beta: f64, nu: f64, radius: f64) -> Result<Self> {
        Self::new(alpha, beta, nu, nu * f::exp(0.5 * radius))
    }

    /// Rebuild from stored fields, checking that the stored radius matches
    /// `2 log(n / nu)` to 1e-12 relative.
    pub fn from_parts(alpha: f64, beta: f64, nu: f64, n: f64, radius: f64) -> Result<Self> {
        let p = ModelParams {
            alpha,
            beta,
            nu,
            n,
            radius,
        };
        p.validate()?;
        Ok(p)
    }

    fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.5 && self.alpha <= 1.0) {
            return Err(Error::InvalidParams("alpha must lie in (1/2, 1]"));
        }
        if !(self.beta > 0.0) {
            return Err(Error::InvalidParams("beta must be positive"));
        }
        if !(self.nu > 0.0) {
            return Err(Error::InvalidParams("nu must be positive"));
        }
        if !(self.n > self.nu) {
            return Err(Error::InvalidParams("n must exceed nu (so that R > 0)"));
        }
        let derived = 2.0 * f::ln(self.n / self.nu);
        if !(self.radius > 0.0) || f::abs(derived / self.radius - 1.0) > 1e-12 {
            return Err(Error::InvalidParams("radius does not match 2 log(n/nu)"));
        }
        Ok(())
    }

    /// True when `p` lies in the closed disk `B_O(R)`.
    pub fn contains(&self, p: PolarPoint) -> bool {
        p.r >= 0.0 && p.r <= self.radius
    }
}

/// Position in polar coordinates, `theta` normalized into `(-pi, pi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarPoint {
    pub r: f64,
    pub theta: f64,
}

impl PolarPoint {
    pub fn new(r: f64, theta: f64) -> Self {
        PolarPoint {
            r,
            theta: kernels::wrap_angle(theta),
        }
    }
}

/// Hyperbolic distance between two points of the disk.
///
/// Solves `cosh d = cosh r cosh r' - sinh r sinh r' cos(dtheta)` in the
/// cancellation-free form
/// `cosh d = sin^2(dtheta/2) cosh(r + r') + cos^2(dtheta/2) cosh(r - r')`,
/// evaluated in the log domain so large radii cannot overflow.
pub fn hyperbolic_distance(p: PolarPoint, q: PolarPoint) -> f64 {
    let dtheta = kernels::wrap_angle(p.theta - q.theta);
    let sh = f::sin(0.5 * dtheta);
    let ch = f::cos(0.5 * dtheta);
    let term_sum = if sh == 0.0 {
        f64::NEG_INFINITY
    } else {
        2.0 * f::ln(f::abs(sh)) + kernels::log_cosh(p.r + q.r)
    };
    let term_diff = if ch == 0.0 {
        f64::NEG_INFINITY
    } else {
        2.0 * f::ln(f::abs(ch)) + kernels::log_cosh(p.r - q.r)
    };
    let log_cosh_d = kernels::logsumexp2(term_sum, term_diff);
    if log_cosh_d <= 30.0 {
        kernels::arcosh1p(f::exp(log_cosh_d) - 1.0)
    } else {
        // arcosh(x) = log(2x) - O(x^{-2}); negligible beyond e^30
        log_cosh_d + kernels::LN_2
    }
}

/// Maximal angle at the origin between a point at radius `r` and one at
/// radius `R` that keeps them within hyperbolic distance `R`:
/// `phi(r) = arccos(coth R tanh(r/2))`, strictly decreasing in `r`,
/// `phi(0) = pi/2`.
///
/// Evaluated through `sin^2(phi/2) = (e^{-r} - e^{-2R}) /
/// ((1 + e^{-r})(1 - e^{-2R}))`, which is exact and keeps full precision
/// near `r = R` where the arccos argument approaches 1.
pub fn phi(r: f64, params: &ModelParams) -> Result<f64> {
    if !(0.0..=params.radius).contains(&r) {
        return Err(Error::OutOfDomain("phi requires 0 <= r <= R"));
    }
    Ok(phi_unchecked(r, params.radius))
}

#[inline]
pub(crate) fn phi_unchecked(r: f64, radius: f64) -> f64 {
    let er = f::exp(-r);
    let e2r = f::exp(-2.0 * radius);
    let s = (er - e2r) / ((1.0 + er) * (1.0 - e2r));
    2.0 * f::asin(f::sqrt(s.max(0.0)))
}

/// Inverse of [`phi`], by 60-iteration bisection on the monotone map.
/// Accepts `t` in `[phi(R), pi/2]` and returns `r` with
/// `|phi(r) - t| <= 1e-10`.
pub fn phi_inverse(t: f64, params: &ModelParams) -> Result<f64> {
    let radius = params.radius;
    let at_boundary = phi_unchecked(radius, radius);
    if !(at_boundary..=FRAC_PI_2).contains(&t) {
        return Err(Error::OutOfDomain("phi_inverse requires phi(R) <= t <= pi/2"));
    }
    if t == FRAC_PI_2 {
        return Ok(0.0);
    }
    if t == at_boundary {
        return Ok(radius);
    }
    // phi is decreasing, so phi(r) - t falls from positive to negative.
    kernels::bisect(|r| phi_unchecked(r, radius) - t, 0.0, radius, 60)
}

/// True when the point lies in the closed target ball `B_Q(R)` around
/// `Q = (R, 0)`, i.e. `|theta| <= phi(r)`.
pub fn in_target_ball(p: PolarPoint, params: &ModelParams) -> bool {
    f::abs(kernels::wrap_angle(p.theta)) <= phi_unchecked(p.r, params.radius)
}

/// Boundary-layer asymptote `2 e^{-r/2}` of `phi`; diagnostics only.
pub fn phi_asymptotic(r: f64) -> f64 {
    2.0 * f::exp(-0.5 * r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::PI;

    fn params_r10() -> ModelParams {
        ModelParams::from_radius(0.75, 1.0, 1.0, 10.0).unwrap()
    }

    #[test]
    fn params_invariants() {
        assert!(ModelParams::new(0.75, 1.0, 1.0, 100.0).is_ok());
        assert!(ModelParams::new(0.5, 1.0, 1.0, 100.0).is_err());
        assert!(ModelParams::new(1.01, 1.0, 1.0, 100.0).is_err());
        assert!(ModelParams::new(0.75, 0.0, 1.0, 100.0).is_err());
        assert!(ModelParams::new(0.75, 1.0, 2.0, 1.5).is_err());
        let p = ModelParams::new(0.8, 0.5, 2.0, 50.0).unwrap();
        assert!(ModelParams::from_parts(0.8, 0.5, 2.0, 50.0, p.radius).is_ok());
        assert!(ModelParams::from_parts(0.8, 0.5, 2.0, 50.0, p.radius * (1.0 + 1e-9)).is_err());
    }

    #[test]
    fn distance_identity_and_collinear() {
        let p = PolarPoint::new(3.0, 0.5);
        assert_eq!(hyperbolic_distance(p, p), 0.0);
        let a = PolarPoint::new(2.0, 0.0);
        let b = PolarPoint::new(5.0, 0.0);
        assert!((hyperbolic_distance(a, b) - 3.0).abs() < 1e-12);
        // antipodal radii add
        let c = PolarPoint::new(5.0, PI);
        assert!((hyperbolic_distance(a, c) - 7.0).abs() < 1e-12);
    }

    #[test]
    fn distance_pinned_value() {
        // 200-bit evaluation of the cosh law at r = r' = 4, dtheta = pi/3
        let a = PolarPoint::new(4.0, 0.0);
        let b = PolarPoint::new(4.0, PI / 3.0);
        let d = hyperbolic_distance(a, b);
        assert!((d - 6.61571471069671155).abs() < 1e-12);
    }

    #[test]
    fn distance_survives_large_radii() {
        // cosh(r + r') would overflow f64 well below this
        let a = PolarPoint::new(400.0, 0.1);
        let b = PolarPoint::new(420.0, -0.4);
        let d = hyperbolic_distance(a, b);
        assert!(d.is_finite() && d > 400.0 && d < 900.0);
    }

    #[test]
    fn phi_endpoints_and_pins() {
        let p = params_r10();
        assert!((phi(0.0, &p).unwrap() - FRAC_PI_2).abs() < 1e-15);
        // arccos(coth(10) tanh(5)) at 200 bits
        assert!((phi(10.0, &p).unwrap() - 0.013475384176940817).abs() < 1e-14);
        assert!((phi(3.0, &p).unwrap() - 0.43906797276684330).abs() < 1e-13);
        assert!((phi(7.0, &p).unwrap() - 0.060376351055365407).abs() < 1e-13);
        assert!(phi(3.0, &p).unwrap() > phi(7.0, &p).unwrap());
        assert!(phi(-0.1, &p).is_err());
        assert!(phi(10.1, &p).is_err());
    }

    #[test]
    fn phi_inverse_endpoints_and_roundtrip() {
        let p = params_r10();
        assert_eq!(phi_inverse(FRAC_PI_2, &p).unwrap(), 0.0);
        let at_r = phi(10.0, &p).unwrap();
        assert_eq!(phi_inverse(at_r, &p).unwrap(), 10.0);
        let t = phi(4.2, &p).unwrap();
        assert!((phi_inverse(t, &p).unwrap() - 4.2).abs() < 1e-8);
        assert!(phi_inverse(at_r * 0.5, &p).is_err());
        assert!(phi_inverse(FRAC_PI_2 + 1e-6, &p).is_err());
    }

    #[test]
    fn target_ball_membership() {
        let p = params_r10();
        assert!(in_target_ball(PolarPoint::new(10.0, 0.0), &p));
        assert!(!in_target_ball(PolarPoint::new(0.0, PI), &p));
        let r = 5.0;
        let ph = phi(r, &p).unwrap();
        assert!(in_target_ball(PolarPoint::new(r, ph * (1.0 - 1e-3)), &p));
        assert!(!in_target_ball(PolarPoint::new(r, ph * (1.0 + 1e-3)), &p));
        // membership agrees with the cosh law away from the boundary band
        let q = PolarPoint::new(p.radius, 0.0);
        let mut state = 0x2545f4914f6cdd1du64;
        let mut unif = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..10_000 {
            let r = unif() * p.radius;
            let th = (2.0 * unif() - 1.0) * PI;
            let pt = PolarPoint::new(r, th);
            let d = hyperbolic_distance(pt, q);
            if (d - p.radius).abs() > 1e-9 {
                assert_eq!(in_target_ball(pt, &p), d <= p.radius, "r={r} th={th}");
            }
        }
    }

    #[test]
    fn phi_asymptote() {
        let p = ModelParams::from_radius(0.75, 1.0, 1.0, 30.0).unwrap();
        let exact = phi(20.0, &p).unwrap();
        assert!((exact / phi_asymptotic(20.0) - 1.0).abs() < 0.01);
        assert!((phi_asymptotic(2.0) - 2.0 * (-1.0f64).exp()).abs() < 1e-15);
        assert_eq!(phi_asymptotic(0.0), 2.0);
    }
}
