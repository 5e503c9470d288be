//! Numeric kernels: stable log-domain rearrangements, special functions,
//! root bracketing and adaptive quadrature.
//!
//! Every hyperbolic-ratio formula in this crate is a ratio of nearly equal
//! logarithms near the disk boundary, so the rearrangements live here in one
//! place with tests pinned near both ends of the domain.

use crate::{Error, Result};

/// Math shim: `std` intrinsics when available, `libm` otherwise.
/// `erfc`/`lgamma` always come from `libm` (not in `std`).
pub(crate) mod f {
    #[cfg(feature = "std")]
    macro_rules! fwd {
        ($($name:ident),*) => {
            $( #[inline(always)] pub fn $name(x: f64) -> f64 { f64::$name(x) } )*
        };
    }
    #[cfg(not(feature = "std"))]
    macro_rules! fwd {
        ($($name:ident),*) => {
            $( #[inline(always)] pub fn $name(x: f64) -> f64 { libm::$name(x) } )*
        };
    }

    fwd!(exp, sqrt, sin, cos, asin, sinh, tanh, floor);

    #[cfg(feature = "std")]
    #[inline(always)]
    pub fn ln(x: f64) -> f64 {
        f64::ln(x)
    }
    #[cfg(not(feature = "std"))]
    #[inline(always)]
    pub fn ln(x: f64) -> f64 {
        libm::log(x)
    }

    #[cfg(feature = "std")]
    #[inline(always)]
    pub fn ln_1p(x: f64) -> f64 {
        f64::ln_1p(x)
    }
    #[cfg(not(feature = "std"))]
    #[inline(always)]
    pub fn ln_1p(x: f64) -> f64 {
        libm::log1p(x)
    }

    #[cfg(feature = "std")]
    #[inline(always)]
    pub fn exp_m1(x: f64) -> f64 {
        f64::exp_m1(x)
    }
    #[cfg(not(feature = "std"))]
    #[inline(always)]
    pub fn exp_m1(x: f64) -> f64 {
        libm::expm1(x)
    }

    #[cfg(feature = "std")]
    #[inline(always)]
    pub fn powf(x: f64, y: f64) -> f64 {
        f64::powf(x, y)
    }
    #[cfg(not(feature = "std"))]
    #[inline(always)]
    pub fn powf(x: f64, y: f64) -> f64 {
        libm::pow(x, y)
    }

    #[cfg(feature = "std")]
    #[inline(always)]
    pub fn abs(x: f64) -> f64 {
        f64::abs(x)
    }
    #[cfg(not(feature = "std"))]
    #[inline(always)]
    pub fn abs(x: f64) -> f64 {
        libm::fabs(x)
    }

    #[inline(always)]
    pub fn erfc(x: f64) -> f64 {
        libm::erfc(x)
    }
    #[inline(always)]
    pub fn lgamma(x: f64) -> f64 {
        libm::lgamma_r(x).0
    }
}

pub(crate) const FRAC_PI_2: f64 = core::f64::consts::FRAC_PI_2;
pub(crate) const PI: f64 = core::f64::consts::PI;
pub(crate) const TAU: f64 = core::f64::consts::TAU;
pub(crate) const LN_2: f64 = core::f64::consts::LN_2;

/// Wrap an angle into `(-pi, pi]`.
#[inline]
pub fn wrap_angle(theta: f64) -> f64 {
    if theta > -PI && theta <= PI {
        return theta;
    }
    // Reduce modulo 2*pi, then fix the branch.
    let mut t = theta - TAU * f::floor(theta / TAU);
    if t > PI {
        t -= TAU;
    } else if t <= -PI {
        t += TAU;
    }
    t
}

/// `log(exp(a) + exp(b))` without overflow.
#[inline]
pub fn logsumexp2(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if hi == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    hi + f::ln_1p(f::exp(lo - hi))
}

/// `arcosh(1 + y)` for `y >= 0`, accurate for small `y`.
#[inline]
pub fn arcosh1p(y: f64) -> f64 {
    debug_assert!(y >= 0.0);
    f::ln_1p(y + f::sqrt(y * (y + 2.0)))
}

/// `log(cosh x)` without overflow.
#[inline]
pub fn log_cosh(x: f64) -> f64 {
    let a = f::abs(x);
    a + f::ln_1p(f::exp(-2.0 * a)) - LN_2
}

/// `log(sinh x)` for `x > 0` without overflow.
#[inline]
pub fn log_sinh(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    x + f::ln_1p(-f::exp(-2.0 * x)) - LN_2
}

/// `log(tanh(q) / tanh(p))` for `0 < p <= q`, stable when `p` is close to
/// `q` (both tanh values near 1). Uses the exact rearrangement
/// `tanh(q)/tanh(p) = 1 + 2(e^{-2p} - e^{-2q}) / ((1 + e^{-2q})(1 - e^{-2p}))`.
#[inline]
pub fn log_tanh_ratio(p: f64, q: f64) -> f64 {
    debug_assert!(p > 0.0 && q >= p);
    let ep = f::exp(-2.0 * p);
    let eq = f::exp(-2.0 * q);
    f::ln_1p(2.0 * (ep - eq) / ((1.0 + eq) * (1.0 - ep)))
}

/// `log(coth x)` for `x > 0`.
#[inline]
pub fn log_coth(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    let e = f::exp(-2.0 * x);
    f::ln_1p(2.0 * e / (1.0 - e))
}

/// Standard normal CDF.
#[inline]
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * f::erfc(-x / core::f64::consts::SQRT_2)
}

/// Regularized lower incomplete gamma `P(a, x)` for `a > 0`, `x >= 0`.
///
/// Series expansion for `x < a + 1`, continued fraction (modified Lentz)
/// for the complement otherwise.
pub fn gamma_p(a: f64, x: f64) -> f64 {
    debug_assert!(a > 0.0 && x >= 0.0);
    if x == 0.0 {
        return 0.0;
    }
    let lg = f::lgamma(a);
    if x < a + 1.0 {
        // P(a,x) = x^a e^{-x} / Gamma(a) * sum_{k>=0} x^k / (a(a+1)...(a+k))
        let mut term = 1.0 / a;
        let mut sum = term;
        let mut ap = a;
        for _ in 0..500 {
            ap += 1.0;
            term *= x / ap;
            sum += term;
            if f::abs(term) < f::abs(sum) * 1e-16 {
                break;
            }
        }
        sum * f::exp(a * f::ln(x) - x - lg)
    } else {
        // Q(a,x) via continued fraction.
        let tiny = 1e-300;
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..500 {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if f::abs(d) < tiny {
                d = tiny;
            }
            c = b + an / c;
            if f::abs(c) < tiny {
                c = tiny;
            }
            d = 1.0 / d;
            let delta = d * c;
            h *= delta;
            if f::abs(delta - 1.0) < 1e-16 {
                break;
            }
        }
        let q = f::exp(a * f::ln(x) - x - lg) * h;
        1.0 - q
    }
}

/// Fixed-iteration bisection for a function with a sign change on `[lo, hi]`.
///
/// The function need not be monotone, but every defining equation solved in
/// this crate is, so the bracketed root is unique. Runs `iters` halvings
/// (60 by default from callers: interval shrinks below f64 resolution) and
/// returns the midpoint of the final bracket.
pub fn bisect<F: FnMut(f64) -> f64>(mut func: F, lo: f64, hi: f64, iters: u32) -> Result<f64> {
    let (mut lo, mut hi) = (lo, hi);
    let flo = func(lo);
    let fhi = func(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if !(flo.is_finite() && fhi.is_finite()) {
        return Err(Error::NonFinite("bisection endpoints"));
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::Bracket("no sign change on the interval"));
    }
    let falling = flo > 0.0;
    for _ in 0..iters {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break; // interval at f64 resolution
        }
        let fm = func(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if (fm > 0.0) == falling {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Adaptive Simpson quadrature with an absolute error target.
///
/// Returns `(integral, error_estimate)`; errs with [`Error::Quadrature`]
/// when the budget cannot be met within the depth limit.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(
    func: &F,
    a: f64,
    b: f64,
    tol_abs: f64,
    max_depth: u32,
) -> Result<(f64, f64)> {
    fn simpson(fa: f64, fm: f64, fb: f64, h: f64) -> f64 {
        (fa + 4.0 * fm + fb) * h / 6.0
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse<F: Fn(f64) -> f64>(
        func: &F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> (f64, f64) {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = func(lm);
        let frm = func(rm);
        let left = simpson(fa, flm, fm, m - a);
        let right = simpson(fm, frm, fb, b - m);
        let delta = left + right - whole;
        if depth == 0 || f::abs(delta) <= 15.0 * tol {
            return (left + right + delta / 15.0, f::abs(delta) / 15.0);
        }
        let (vl, el) = recurse(func, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1);
        let (vr, er) = recurse(func, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
        (vl + vr, el + er)
    }

    if !(a.is_finite() && b.is_finite()) || b < a {
        return Err(Error::OutOfDomain("quadrature interval"));
    }
    if a == b {
        return Ok((0.0, 0.0));
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (func(a), func(m), func(b));
    if !(fa.is_finite() && fm.is_finite() && fb.is_finite()) {
        return Err(Error::NonFinite("quadrature integrand"));
    }
    let whole = simpson(fa, fm, fb, b - a);
    let (value, err) = recurse(func, a, b, fa, fm, fb, whole, tol_abs, max_depth);
    if err > tol_abs {
        return Err(Error::Quadrature {
            achieved: err,
            requested: tol_abs,
        });
    }
    Ok((value, err))
}


/// Wilson score interval for a binomial proportion at confidence `z`.
pub fn wilson_ci_z(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * f::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Wilson 95% interval.
pub fn wilson_ci(successes: u64, trials: u64) -> (f64, f64) {
    wilson_ci_z(successes, trials, 1.959963984540054)
}
