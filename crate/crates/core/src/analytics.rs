//! Closed-form and series formulas for the radial diffusion with a
//! reflecting barrier and for one-dimensional Brownian exit times. These
//! are the oracles the Monte Carlo layers are checked against.

use crate::kernels::{self, f};
use crate::{Error, Result};

/// Radial barrier problem: diffusion with drift `(alpha/2) coth(alpha y)`,
/// absorbing level `absorb` (y0), reflecting level `reflect` (Y).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialBarrierSpec {
    pub alpha: f64,
    pub absorb: f64,
    pub reflect: f64,
}

impl RadialBarrierSpec {
    pub fn new(alpha: f64, absorb: f64, reflect: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidParams("alpha must be positive"));
        }
        if !(absorb > 0.0 && absorb < reflect && reflect.is_finite()) {
            return Err(Error::InvalidParams("need 0 < absorb < reflect"));
        }
        Ok(RadialBarrierSpec {
            alpha,
            absorb,
            reflect,
        })
    }

    /// `g(y) = log(tanh(alpha Y / 2) / tanh(alpha y / 2))`, the scale
    /// function used by the hitting probability; positive, decreasing to 0
    /// at the reflector.
    #[inline]
    pub(crate) fn scale(&self, y: f64) -> f64 {
        kernels::log_tanh_ratio(0.5 * self.alpha * y, 0.5 * self.alpha * self.reflect)
    }
}

/// Probability of reaching the absorbing level before the reflecting one:
/// `G_{y0}(y) = g(y) / g(y0)` with `g` the log-tanh scale function.
/// Exactly 1 at `y = y0` and 0 at `y = Y`.
pub fn hitting_prob_g(y: f64, spec: &RadialBarrierSpec) -> Result<f64> {
    if !(spec.absorb..=spec.reflect).contains(&y) {
        return Err(Error::OutOfDomain("hitting_prob_g requires y0 <= y <= Y"));
    }
    Ok(spec.scale(y) / spec.scale(spec.absorb))
}

/// Mean hitting time of the absorber started from the reflector, with the
/// two closed-form upper bounds that dominate it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanHitTime {
    /// `(2/alpha^2) (log(sinh(alpha y0)/sinh(alpha Y)) + cosh(alpha Y) g(y0))`.
    pub exact: f64,
    /// `(e^{alpha Y} / alpha^2) log(coth(alpha y0 / 2))`.
    pub log_coth_bound: f64,
    /// `(4/alpha^2) e^{alpha (Y - y0)}`, valid when `y0 > log(2)/alpha`.
    pub drift_gap_bound: Option<f64>,
}

/// Expected time for the diffusion started at the reflector `Y` to reach
/// `y0`. Starting lower can only be faster: `E_y(T_{y0}) <= E_Y(T_{y0})`.
pub fn mean_hit_time_from_reflector(spec: &RadialBarrierSpec) -> MeanHitTime {
    let a = spec.alpha;
    let (y0, yr) = (spec.absorb, spec.reflect);
    let g0 = spec.scale(y0);
    // cosh(alpha Y) * g(y0) in the log domain; both factors positive
    let product = f::exp(kernels::log_cosh(a * yr) + f::ln(g0));
    let exact = (2.0 / (a * a)) * (kernels::log_sinh(a * y0) - kernels::log_sinh(a * yr) + product);
    let log_coth_bound = f::exp(a * yr) / (a * a) * kernels::log_coth(0.5 * a * y0);
    let drift_gap_bound = if y0 > kernels::LN_2 / a {
        Some(4.0 / (a * a) * f::exp(a * (yr - y0)))
    } else {
        None
    };
    MeanHitTime {
        exact,
        log_coth_bound,
        drift_gap_bound,
    }
}

/// Upper bound on the Laplace transform `E_y(e^{-lambda T_{y0}})`:
/// `(l1 e^{-l2 (Y-y)} + l2 e^{l1 (Y-y)}) / (l1 e^{-l2 (Y-y0)} + l2 e^{l1 (Y-y0)})`
/// with `l1 = sqrt(alpha^2/4 + 2 lambda) + alpha/2` and
/// `l2 = sqrt(alpha^2/4 + 2 lambda) - alpha/2`. Evaluated by log-sum-exp.
pub fn laplace_bound(lambda: f64, y: f64, spec: &RadialBarrierSpec) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::OutOfDomain("laplace_bound requires lambda > 0"));
    }
    if !(spec.absorb..=spec.reflect).contains(&y) {
        return Err(Error::OutOfDomain("laplace_bound requires y0 <= y <= Y"));
    }
    let a = spec.alpha;
    let root = f::sqrt(0.25 * a * a + 2.0 * lambda);
    let l1 = root + 0.5 * a;
    let l2 = root - 0.5 * a;
    let log_mix = |gap: f64| -> f64 {
        kernels::logsumexp2(f::ln(l1) - l2 * gap, f::ln(l2) + l1 * gap)
    };
    Ok(f::exp(
        log_mix(spec.reflect - y) - log_mix(spec.reflect - spec.absorb),
    ))
}

/// Upper bound on the conditional mean `E_y(T_{y0} | T_{y0} < T_Y)`:
/// `(2/alpha)(y - y0) + (2/alpha^2)(1 - G_{y0}(y))`.
pub fn conditional_mean_bound(y: f64, spec: &RadialBarrierSpec) -> Result<f64> {
    if !(y >= spec.absorb && y < spec.reflect) {
        return Err(Error::OutOfDomain(
            "conditional_mean_bound requires y0 <= y < Y",
        ));
    }
    let a = spec.alpha;
    let g = hitting_prob_g(y, spec)?;
    Ok(2.0 / a * (y - spec.absorb) + 2.0 / (a * a) * (1.0 - g))
}

/// Exact probability that a standard Brownian motion started at 0 exits the
/// interval `[-a, b]` by variance-time `v`, via the image-charge series
/// truncated below 1e-14 per term.
///
/// For `a <= b` it satisfies the reflection-principle bracket
/// `Phi(-a/sqrt(v)) <= P <= 4 Phi(-a/sqrt(v))`.
pub fn bm_exit_prob(a: f64, b: f64, v: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
        return Err(Error::OutOfDomain("bm_exit_prob requires a, b > 0"));
    }
    if !(v >= 0.0 && v.is_finite()) {
        return Err(Error::OutOfDomain("bm_exit_prob requires finite v >= 0"));
    }
    if v == 0.0 {
        return Ok(0.0);
    }
    let len = a + b;
    let sv = f::sqrt(v);
    // survival mass of one (source, sink) image pair shifted by 2kL
    let pair = |k: f64| -> f64 {
        let shift = 2.0 * k * len;
        let source =
            kernels::normal_cdf((b + shift) / sv) - kernels::normal_cdf((-a + shift) / sv);
        let sink = kernels::normal_cdf((2.0 * b + a + shift) / sv)
            - kernels::normal_cdf((b + shift) / sv);
        source - sink
    };
    let mut survival = pair(0.0);
    for k in 1..200 {
        let up = pair(k as f64);
        let down = pair(-(k as f64));
        survival += up + down;
        if f::abs(up) < 1e-14 && f::abs(down) < 1e-14 {
            break;
        }
    }
    Ok((1.0 - survival).clamp(0.0, 1.0))
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    kernels::normal_cdf(x)
}

/// Target hitting probability `eps(kappa, s) = (1 + s) / (1 + kappa s^{1/(2 alpha)})^{2 alpha}`
/// used to define the radial detection region: equals 1 at `s = 0` and
/// tends to `kappa^{-2 alpha}` as `s` grows.
pub fn epsilon_kappa_s(kappa: f64, s: f64, alpha: f64) -> Result<f64> {
    if !(kappa >= 1.0 && s >= 0.0) {
        return Err(Error::OutOfDomain("epsilon requires kappa >= 1 and s >= 0"));
    }
    let root = f::powf(s, 1.0 / (2.0 * alpha));
    Ok(f::exp(f::ln_1p(s) - 2.0 * alpha * f::ln_1p(kappa * root)))
}

/// Tail `P(W >= x)` of the exponential Brownian functional
/// `W = int_0^inf e^{-2 beta X_u} du` for `X` a Brownian motion with drift
/// `alpha/2`: time-changing to a unit Brownian motion gives
/// `W = 1 / (2 beta^2 G)` with `G` gamma of shape `alpha/(2 beta)` and
/// unit rate, i.e. `W` is inverse-gamma with shape `alpha/(2 beta)` and
/// scale `1/(2 beta^2)`, so the tail is the regularized lower incomplete
/// gamma at `1/(2 beta^2 x)`. (The moment identity
/// `E W = 1/(beta (alpha - 2 beta))` for `alpha > 2 beta` pins the scale;
/// only the tail exponent `x^{-alpha/(2 beta)}` matters downstream.)
pub fn dufresne_tail(x: f64, alpha: f64, beta: f64) -> Result<f64> {
    if !(x > 0.0 && alpha > 0.0 && beta > 0.0) {
        return Err(Error::OutOfDomain("dufresne_tail requires positive inputs"));
    }
    let shape = alpha / (2.0 * beta);
    let scale = 1.0 / (2.0 * beta * beta);
    Ok(kernels::gamma_p(shape, scale / x))
}
