//! Detection regions for the three movement regimes: membership tests,
//! the derived radii solving their defining equations, and the expected
//! point mass of a region by quadrature.
//!
//! Every region section at fixed radius is an angular interval
//! `|theta| <= theta_bound(r)`, so the measure reduces to a one-dimensional
//! integral of `theta_bound(r)` against the radial density.

use alloc::vec::Vec;

use crate::analytics::{epsilon_kappa_s, RadialBarrierSpec};
use crate::dynamics::MovementMode;
use crate::geometry::{phi_unchecked, ModelParams, PolarPoint};
use crate::kernels::{self, f, FRAC_PI_2, PI};
use crate::{Error, Result};

/// Which large-time branch a mixed-movement region uses. The theory leaves
/// the small/large crossover implicit (`s = Omega(1)`), so callers select
/// the regime explicitly.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MixedRegime {
    SmallS,
    LargeS,
}

/// A detection region `D^(s)(kappa)`.
///
/// `kappa` is the width multiplier (called `kappa_A` in the mixed large-`s`
/// regime, where the radial multiplier `kappa_R` is derived from it).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionSpec {
    pub mode: MovementMode,
    pub s: f64,
    pub kappa: f64,
    pub regime: Option<MixedRegime>,
    pub params: ModelParams,
}

impl RegionSpec {
    pub fn angular(kappa: f64, s: f64, params: ModelParams) -> Result<Self> {
        if !(kappa > 0.0 && s >= 0.0) {
            return Err(Error::InvalidParams("angular region needs kappa > 0, s >= 0"));
        }
        if kappa * f::sqrt(s) > FRAC_PI_2 * f::exp(params.beta * params.radius) {
            return Err(Error::InvalidParams(
                "angular region needs kappa sqrt(s) <= (pi/2) e^{beta R}",
            ));
        }
        Ok(RegionSpec {
            mode: MovementMode::AngularOnly,
            s,
            kappa,
            regime: None,
            params,
        })
    }

    pub fn radial(kappa: f64, s: f64, params: ModelParams) -> Result<Self> {
        if !(kappa >= 1.0 && s >= 0.0) {
            return Err(Error::InvalidParams("radial region needs kappa >= 1, s >= 0"));
        }
        let spec = RegionSpec {
            mode: MovementMode::RadialOnly,
            s,
            kappa,
            regime: None,
            params,
        };
        if spec.sector_half_width()? > FRAC_PI_2 {
            return Err(Error::InvalidParams(
                "radial region needs phi(R) + kappa phi^(s) <= pi/2",
            ));
        }
        Ok(spec)
    }

    pub fn mixed_small(kappa: f64, s: f64, params: ModelParams) -> Result<Self> {
        if !(kappa > 0.0 && s >= 0.0) {
            return Err(Error::InvalidParams("mixed region needs kappa > 0, s >= 0"));
        }
        Ok(RegionSpec {
            mode: MovementMode::Mixed,
            s,
            kappa,
            regime: Some(MixedRegime::SmallS),
            params,
        })
    }

    pub fn mixed_large(kappa_a: f64, s: f64, params: ModelParams) -> Result<Self> {
        if !(kappa_a > 1.0) {
            return Err(Error::InvalidParams("mixed large-s region needs kappa_A > 1"));
        }
        if !(s >= 1.0) {
            return Err(Error::InvalidParams("mixed large-s region needs s >= 1"));
        }
        Ok(RegionSpec {
            mode: MovementMode::Mixed,
            s,
            kappa: kappa_a,
            regime: Some(MixedRegime::LargeS),
            params,
        })
    }

    /// Radial-condition multiplier of the mixed large-`s` region:
    /// `kappa_A` when `alpha < 2 beta`, `e^{kappa_A^2}` otherwise.
    pub fn kappa_r(&self) -> f64 {
        if self.params.alpha < 2.0 * self.params.beta {
            self.kappa
        } else {
            f::exp(self.kappa * self.kappa)
        }
    }

    /// Half-width `phi(R) + kappa phi^(s)` of the boundary sector used by
    /// the radial and mixed large-`s` regions.
    pub fn sector_half_width(&self) -> Result<f64> {
        let ps = phi_s(self.mode, self.regime, self.s, &self.params, None)?;
        Ok(phi_unchecked(self.params.radius, self.params.radius) + self.kappa * ps)
    }
}

/// Angular scale `phi^(s)` of a regime.
///
/// Angular movement: `sqrt(s) e^{-beta r0}` (requires `r0`; the mixed
/// small-`s` region uses the same pointwise scale). Radial movement:
/// `(s^{1/alpha} e^{-R})^{1/2}`. Mixed large-`s`: three-way by the sign of
/// `alpha - 2 beta`, with exponent `beta ∧ 1/2` when `alpha < 2 beta`.
pub fn phi_s(
    mode: MovementMode,
    regime: Option<MixedRegime>,
    s: f64,
    params: &ModelParams,
    r0: Option<f64>,
) -> Result<f64> {
    if !(s >= 0.0 && s.is_finite()) {
        return Err(Error::OutOfDomain("phi_s requires finite s >= 0"));
    }
    let radius = params.radius;
    match (mode, regime) {
        (MovementMode::AngularOnly, _) | (MovementMode::Mixed, Some(MixedRegime::SmallS)) => {
            let r0 = r0.ok_or(Error::OutOfDomain("angular phi_s requires r0"))?;
            Ok(f::sqrt(s) * f::exp(-params.beta * r0))
        }
        (MovementMode::RadialOnly, _) => {
            Ok(f::exp(0.5 * (f::ln(s.max(0.0)).max(f64::NEG_INFINITY) / params.alpha - radius)))
        }
        (MovementMode::Mixed, Some(MixedRegime::LargeS)) => {
            let (a, b) = (params.alpha, params.beta);
            if a < 2.0 * b {
                let e = b.min(0.5);
                Ok(f::exp(e * (f::ln(s) / a - radius)))
            } else if a == 2.0 * b {
                if s < 1.0 {
                    return Err(Error::OutOfDomain("s log s branch requires s >= 1"));
                }
                Ok(f::exp(-b * radius) * f::sqrt(s * f::ln(s)))
            } else {
                Ok(f::exp(-b * radius) * f::sqrt(s))
            }
        }
        (MovementMode::Mixed, None) => Err(Error::OutOfDomain("mixed phi_s requires a regime")),
    }
}

/// Half-perimeter of `B_O(r)` outside the target ball:
/// `C_r / 2 = (pi - phi(r)) sinh(beta r)`, increasing in `r`.
pub fn half_perimeter(r: f64, params: &ModelParams) -> f64 {
    (PI - phi_unchecked(r, params.radius)) * f::sinh(params.beta * r)
}

/// The largest radius `r_hat` with `(pi - phi(r_hat)) sinh(beta r_hat) =
/// kappa sqrt(s)`; `B_O(r_hat)` is the largest origin ball inside the
/// angular region.
pub fn solve_r_hat(kappa: f64, s: f64, params: &ModelParams) -> Result<f64> {
    let target = kappa * f::sqrt(s);
    if !(target >= 0.0 && target.is_finite()) {
        return Err(Error::OutOfDomain("kappa sqrt(s) must be finite and >= 0"));
    }
    if target == 0.0 {
        return Ok(0.0);
    }
    let top = half_perimeter(params.radius, params);
    if target > top {
        return Err(Error::OutOfDomain("kappa sqrt(s) exceeds half the rim perimeter"));
    }
    if target == top {
        return Ok(params.radius);
    }
    kernels::bisect(
        |r| half_perimeter(r, params) - target,
        0.0,
        params.radius,
        60,
    )
}

/// Absorbing radius for a radially moving point at angle `theta0`:
/// `phi^{-1}(|theta0|)`, or `R` when the whole ray lies inside the target
/// ball. Errors for `|theta0| > pi/2` (no absorbing radius exists).
pub fn absorbing_radius(theta0: f64, params: &ModelParams) -> Result<f64> {
    let t = f::abs(kernels::wrap_angle(theta0));
    if t > FRAC_PI_2 {
        return Err(Error::OutOfDomain("no absorbing radius beyond |theta| = pi/2"));
    }
    if t <= phi_unchecked(params.radius, params.radius) {
        return Ok(params.radius);
    }
    crate::geometry::phi_inverse(t, params)
}

/// The unique `r_tilde0 in [r0, R]` at which the hitting probability of the
/// absorbing radius before the boundary equals `eps(kappa, s)`; equals `r0`
/// itself when `s = 0`.
pub fn solve_r_tilde0(theta0: f64, kappa: f64, s: f64, params: &ModelParams) -> Result<f64> {
    let level = absorbing_radius(theta0, params)?;
    let eps = epsilon_kappa_s(kappa, s, params.alpha)?;
    if eps >= 1.0 {
        return Ok(level);
    }
    if level >= params.radius {
        return Ok(params.radius);
    }
    if level <= 1e-12 {
        // the origin is unreachable against the drift
        return Ok(level);
    }
    let spec = RadialBarrierSpec::new(params.alpha, level, params.radius)?;
    let g0 = spec.scale(level);
    // G is decreasing from 1 to 0 on [level, R]
    kernels::bisect(
        |y| spec.scale(y) / g0 - eps,
        level,
        params.radius,
        60,
    )
}

/// Boundary radius `r'` of the mixed large-`s` region: the radius at which
/// the radial-condition width reaches `pi` (0 when it never does).
pub fn solve_r_prime(spec: &RegionSpec) -> Result<f64> {
    let e = spec.params.beta.min(0.5);
    let kr = spec.kappa_r();
    let width = |r: f64| phi_unchecked(r, spec.params.radius) + kr * f::exp(-e * r);
    if width(0.0) <= PI {
        return Ok(0.0);
    }
    if width(spec.params.radius) >= PI {
        return Ok(spec.params.radius);
    }
    kernels::bisect(|r| width(r) - PI, 0.0, spec.params.radius, 60)
}

/// Crossover radius `r''` of the mixed large-`s` region, where the sector
/// width `phi(R) + kappa_A phi^(s)` equals the radial-condition width
/// `phi(r) + kappa_R e^{-(beta ∧ 1/2) r}` (clamped to `[0, R]`).
pub fn solve_r_double_prime(spec: &RegionSpec) -> Result<f64> {
    let e = spec.params.beta.min(0.5);
    let kr = spec.kappa_r();
    let target = spec.sector_half_width()?;
    let width = |r: f64| phi_unchecked(r, spec.params.radius) + kr * f::exp(-e * r);
    if width(0.0) <= target {
        return Ok(0.0);
    }
    if width(spec.params.radius) >= target {
        return Ok(spec.params.radius);
    }
    kernels::bisect(|r| width(r) - target, 0.0, spec.params.radius, 60)
}

/// Region membership, exactly as each regime's predicate is written.
pub fn membership(x0: PolarPoint, spec: &RegionSpec) -> bool {
    let params = &spec.params;
    let t = f::abs(kernels::wrap_angle(x0.theta));
    let r = x0.r;
    match (spec.mode, spec.regime) {
        (MovementMode::AngularOnly, _) | (MovementMode::Mixed, Some(MixedRegime::SmallS)) => {
            t <= phi_unchecked(r, params.radius)
                + spec.kappa * f::sqrt(spec.s) * f::exp(-params.beta * r)
        }
        (MovementMode::RadialOnly, _) => {
            if t > FRAC_PI_2 {
                return false;
            }
            let sector = spec
                .sector_half_width()
                .unwrap_or(f64::NEG_INFINITY);
            if t <= sector {
                return true;
            }
            match solve_r_tilde0(t, spec.kappa, spec.s, params) {
                Ok(rt) => r <= rt,
                Err(_) => false,
            }
        }
        (MovementMode::Mixed, Some(MixedRegime::LargeS)) => {
            let sector = spec
                .sector_half_width()
                .unwrap_or(f64::NEG_INFINITY);
            if t <= sector {
                return true;
            }
            let e = params.beta.min(0.5);
            t <= phi_unchecked(r, params.radius) + spec.kappa_r() * f::exp(-e * r)
        }
        (MovementMode::Mixed, None) => false,
    }
}

/// Angular half-width of the region section at radius `r` (in `[0, pi]`).
pub fn theta_bound(r: f64, spec: &RegionSpec) -> f64 {
    let params = &spec.params;
    match (spec.mode, spec.regime) {
        (MovementMode::AngularOnly, _) | (MovementMode::Mixed, Some(MixedRegime::SmallS)) => {
            (phi_unchecked(r, params.radius)
                + spec.kappa * f::sqrt(spec.s) * f::exp(-params.beta * r))
            .min(PI)
        }
        (MovementMode::Mixed, Some(MixedRegime::LargeS)) => {
            let e = params.beta.min(0.5);
            let sector = spec.sector_half_width().unwrap_or(0.0);
            (phi_unchecked(r, params.radius) + spec.kappa_r() * f::exp(-e * r))
                .max(sector)
                .min(PI)
        }
        (MovementMode::RadialOnly, _) => {
            let sector = spec.sector_half_width().unwrap_or(0.0);
            radial_theta_reach(r, spec).max(sector).min(FRAC_PI_2)
        }
        (MovementMode::Mixed, None) => 0.0,
    }
}

/// Largest angle at which a point of radius `r` still satisfies
/// `r <= r_tilde0(theta)`; uses that `r_tilde0` is decreasing in the angle.
fn radial_theta_reach(r: f64, spec: &RegionSpec) -> f64 {
    let params = &spec.params;
    let phi_r = phi_unchecked(params.radius, params.radius);
    let rt = |theta: f64| solve_r_tilde0(theta, spec.kappa, spec.s, params).unwrap_or(0.0);
    if rt(FRAC_PI_2) >= r {
        return FRAC_PI_2;
    }
    if rt(phi_r) < r {
        // not even the widest section reaches this radius
        return 0.0;
    }
    kernels::bisect(|theta| rt(theta) - r, phi_r, FRAC_PI_2, 60).unwrap_or(0.0)
}

/// Region measure with its quadrature error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionMeasure {
    pub value: f64,
    pub error: f64,
}

/// Expected number of points in the region:
/// `mu(D) = (n/pi) int_0^R theta_bound(r) dens(r) dr` by adaptive
/// quadrature to absolute tolerance `1e-6 n`, exploiting the
/// `theta -> -theta` symmetry.
pub fn measure_mu_d(spec: &RegionSpec) -> Result<RegionMeasure> {
    let breaks = section_breakpoints(spec)?;
    measure_of_bound(&spec.params, |r| theta_bound(r, spec), &breaks)
}

/// Radii where the section formula switches branch (kinks of the
/// integrand); isolating them keeps the adaptive quadrature cheap.
fn section_breakpoints(spec: &RegionSpec) -> Result<Vec<f64>> {
    let params = &spec.params;
    let mut pts = Vec::new();
    match (spec.mode, spec.regime) {
        (MovementMode::AngularOnly, _) | (MovementMode::Mixed, Some(MixedRegime::SmallS)) => {
            // where the raw width crosses pi
            let width =
                |r: f64| phi_unchecked(r, params.radius)
                    + spec.kappa * f::sqrt(spec.s) * f::exp(-params.beta * r);
            if width(0.0) > PI && width(params.radius) < PI {
                pts.push(kernels::bisect(
                    |r| width(r) - PI,
                    0.0,
                    params.radius,
                    60,
                )?);
            }
        }
        (MovementMode::Mixed, Some(MixedRegime::LargeS)) => {
            let rp = solve_r_prime(spec)?;
            if rp > 0.0 && rp < params.radius {
                pts.push(rp);
            }
            let rpp = solve_r_double_prime(spec)?;
            if rpp > 0.0 && rpp < params.radius {
                pts.push(rpp);
            }
        }
        (MovementMode::RadialOnly, _) => {
            // switch between the sector width and the r_tilde0 reach
            let sector = spec.sector_half_width()?;
            if sector > phi_unchecked(params.radius, params.radius) && sector < FRAC_PI_2 {
                let rt = solve_r_tilde0(sector, spec.kappa, spec.s, params)?;
                if rt > 0.0 && rt < params.radius {
                    pts.push(rt);
                }
            }
        }
        (MovementMode::Mixed, None) => {}
    }
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(pts)
}

/// Integrate `(n/pi) bound(r) dens(r)` over `[0, R]` piecewise between the
/// supplied breakpoints.
fn measure_of_bound<F: Fn(f64) -> f64>(
    params: &ModelParams,
    bound: F,
    breaks: &[f64],
) -> Result<RegionMeasure> {
    let radius = params.radius;
    let a = params.alpha;
    // sinh(alpha r) / (cosh(alpha R) - 1), overflow-free
    let denom = -f::exp_m1(-a * radius);
    let dens = |r: f64| {
        a * f::exp(a * (r - radius)) * (-f::exp_m1(-2.0 * a * r)) / (denom * denom)
    };
    let integrand = |r: f64| bound(r) * dens(r);
    let tol_total = 1e-6 * params.n;
    // tolerance on the theta-average integral, split across pieces
    let tol_inner = tol_total * PI / params.n;
    let mut edges = Vec::with_capacity(breaks.len() + 2);
    edges.push(0.0);
    for &b in breaks {
        if b > 0.0 && b < radius {
            edges.push(b);
        }
    }
    edges.push(radius);
    let n_pieces = edges.len() - 1;
    let mut total = 0.0;
    let mut err = 0.0;
    for w in edges.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let (v, e) = kernels::adaptive_simpson(
            &integrand,
            lo,
            hi,
            tol_inner / n_pieces as f64,
            48,
        )?;
        total += v;
        err += e;
    }
    Ok(RegionMeasure {
        value: params.n / PI * total,
        error: params.n / PI * err,
    })
}

/// Sampled boundary profile `(r, theta_bound(r))` for export, on a grid
/// refined toward the disk boundary where the section varies fastest.
pub fn boundary_profile(spec: &RegionSpec, count: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(count);
    let k = count.max(2);
    for i in 0..k {
        // equal mass in the radial law concentrates samples near R
        let u = (i as f64 + 0.5) / k as f64;
        let r = crate::sampling::radial_quantile(u, &spec.params);
        out.push((r, theta_bound(r, spec)));
    }
    out
}
