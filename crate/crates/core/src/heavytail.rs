//! Pareto sampling, Monte Carlo sum-tail estimation, and certified upper
//! bounds for tails of i.i.d. Pareto sums.
//!
//! The bounds have the three-regime form (shape below / at / above 1)
//!
//! * `gamma < 1`:  `P(S_m >= L m^{1/gamma}) <= c L^{-gamma}`
//! * `gamma = 1`:  `P(S_m >= L m log m)    <= (c / (L log m))^{1 - l/L}`
//! * `gamma > 1`:  `P(S_m >= L m)          <= c L^{-gamma} m^{-((gamma-1) ∧ gamma/2)}`
//!
//! valid for `L` above a threshold `l`. The constants `(c, l)` are not
//! universal; [`calibrate`] derives conservative values for an exact Pareto
//! law by running the Chernoff argument behind the bounds with explicit
//! constants: split the moment integral at `M = 2 gamma / lambda`, bound
//! each piece, and pick the rate `lambda` that balances the heavy-tail
//! truncation term. All suprema that the argument takes over the validity
//! range are computed numerically and frozen into the returned constants.

use rand::Rng;

use crate::kernels::{f, wilson_ci, LN_2};
use crate::{Error, Result};

/// Exact Pareto law on `[omega, inf)`: `P(Z >= x) = (omega / x)^gamma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParetoSpec {
    pub omega: f64,
    pub gamma: f64,
}

impl ParetoSpec {
    pub fn new(omega: f64, gamma: f64) -> Result<Self> {
        if !(omega >= 1.0 && omega.is_finite()) {
            return Err(Error::InvalidParams("pareto scale must be >= 1"));
        }
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidParams("pareto shape must be positive"));
        }
        Ok(ParetoSpec { omega, gamma })
    }

    /// Tail constant `V = omega^gamma`, so `P(Z >= x) <= V x^{-gamma}` for
    /// all `x > 0` (equality on the support).
    pub fn tail_constant(&self) -> f64 {
        f::powf(self.omega, self.gamma)
    }

    /// Mean `gamma omega / (gamma - 1)`; infinite for `gamma <= 1`.
    pub fn mean(&self) -> Option<f64> {
        (self.gamma > 1.0).then(|| self.gamma * self.omega / (self.gamma - 1.0))
    }
}

/// Inverse-CDF sample `omega U^{-1/gamma}` with `U` uniform on `(0, 1]`.
#[inline]
pub fn sample_pareto<R: Rng + ?Sized>(spec: &ParetoSpec, rng: &mut R) -> f64 {
    let u = 1.0 - rng.gen::<f64>(); // (0, 1]
    spec.omega * f::powf(u, -1.0 / spec.gamma)
}

/// Calibrated constants for [`sum_tail_bound`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Calibration {
    pub frak_c: f64,
    pub frak_l: f64,
}

/// Smallest `x0 >= lo` (by doubling then bisection-like refinement) such
/// that `h` stays at or below `cap` on `[x0, inf)`, for `h` unimodal with
/// `h -> 0` at infinity.
fn threshold_above(h: impl Fn(f64) -> f64, lo: f64, cap: f64) -> f64 {
    let mut x = lo;
    while h(x) > cap || h(x * 1.5) > h(x) {
        x *= 1.25;
        if x > 1e12 {
            break;
        }
    }
    x
}

/// Derive `(c, l)` for an exact Pareto law. Deterministic in the spec.
pub fn calibrate(spec: &ParetoSpec) -> Calibration {
    let g = spec.gamma;
    let v = spec.tail_constant();
    let e2 = f::exp(2.0); // base validity floor: L > e^2 keeps the Chernoff
                          // rate small and the split point below the threshold
    if g < 1.0 {
        // moment pieces: below M the integral costs 1 + c1 lambda^gamma,
        // above M it costs c2 lambda^gamma plus the truncation term whose
        // coefficient c3 is fixed by the rate choice lambda = gamma log(L)/x.
        let c1 = v * f::exp(2.0 * g) * f::powf(2.0 * g, 1.0 - g) / (1.0 - g);
        let c2 = v * f::exp(2.0 * g) / f::powf(2.0 * g, g);
        let c3 = 2.0 * v;
        // (gamma log L / L)^gamma <= 1 for all L >= e^2 when gamma <= 1
        Calibration {
            frak_c: v + f::exp(c1 + c2 + c3),
            frak_l: e2,
        }
    } else if g == 1.0 {
        let c1 = v * f::exp(2.0);
        let c2 = 0.5 * v * f::exp(2.0);
        let c3 = 2.0 * v;
        // suprema over X = L log m >= e^2 of the rate-cost terms
        let h_max = threshold_sup(|x| f::ln(x) * f::ln(2.0 * x) / x, e2);
        let g_max = threshold_sup(|x| f::ln(x) / x, e2);
        let c0 = v + f::exp(c1 * h_max + c2 * g_max + c3);
        // squaring c absorbs the exponent deficit 1 - l/L for all L > l = 2 c1
        Calibration {
            frak_c: c0 * c0,
            frak_l: (2.0 * c1).max(e2),
        }
    } else {
        let e0 = spec.mean().unwrap();
        let c3 = 2.0 * v;
        // coefficient of the quadratic-in-lambda moment cost
        let c1 = if g < 2.0 {
            v * f::exp(2.0 * g) * f::powf(2.0 * g, 2.0 - g) / ((g - 1.0) * (2.0 - g))
        } else if g == 2.0 {
            v * f::exp(4.0) * (1.0 + 2.0 * LN_2)
        } else {
            v * f::exp(2.0 * g) / ((g - 1.0) * (g - 2.0))
        };
        let c_w = c1 + 1.0 + 2.0 * v / (g - 1.0);
        // rate-cost supremum and the floor making it <= 1
        let (w_sup, floor) = if g < 2.0 {
            // m lambda^gamma = (log Y)^gamma / Y with Y = (L/2)^gamma m^{gamma-1}
            let y0 = threshold_above(|y| f::powf(f::ln(y), g) / y, f::exp(g), 1.0);
            (1.0, 2.0 * f::powf(y0, 1.0 / g))
        } else if g == 2.0 {
            // m lambda^2 log(1/lambda) <= 8 (log u)^3 / u^2, u = L sqrt(m) / 2
            let u0 = threshold_above(|u| 8.0 * f::powf(f::ln(u), 3.0) / (u * u), 3.0, 1.0);
            (1.0, 2.0 * u0)
        } else {
            // m lambda^2 = gamma^2 (log u / u)^2
            let u0 = threshold_above(|u| g * g * f::powf(f::ln(u) / u, 2.0), 3.0, 1.0);
            (1.0, 2.0 * u0)
        };
        Calibration {
            frak_c: f::powf(2.0, g) * (v + f::exp(c_w * w_sup + c3)),
            frak_l: floor.max(2.0 * e0).max(e2),
        }
    }
}

fn threshold_sup(h: impl Fn(f64) -> f64, lo: f64) -> f64 {
    // supremum of a decreasing-tail function over [lo, inf): scan outward
    let mut sup = h(lo);
    let mut x = lo;
    for _ in 0..200 {
        x *= 1.1;
        sup = sup.max(h(x));
    }
    sup
}

/// A certified tail bound: `P(S_m >= threshold) <= bound` for `L` above
/// the calibrated floor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailBound {
    pub threshold: f64,
    pub bound: f64,
    pub calibration: Calibration,
}

/// Branch-appropriate sum-tail bound at level `L`. The threshold is
/// `L m^{1/gamma}` (shape < 1), `L m log m` (shape = 1, `m >= 3`) or `L m`
/// (shape > 1); computed in the log domain.
pub fn sum_tail_bound(m: u64, l: f64, spec: &ParetoSpec) -> Result<TailBound> {
    if m == 0 {
        return Err(Error::OutOfDomain("sum of zero terms"));
    }
    let cal = calibrate(spec);
    if !(l > cal.frak_l) {
        return Err(Error::ThresholdBelowCalibrated {
            l,
            frak_l: cal.frak_l,
        });
    }
    let g = spec.gamma;
    let mf = m as f64;
    let (threshold, bound) = if g < 1.0 {
        let threshold = f::exp(f::ln(l) + f::ln(mf) / g);
        (threshold, cal.frak_c * f::powf(l, -g))
    } else if g == 1.0 {
        if m < 3 {
            return Err(Error::OutOfDomain("shape-1 branch requires m >= 3"));
        }
        let x = l * f::ln(mf);
        let threshold = x * mf;
        (threshold, f::powf(cal.frak_c / x, 1.0 - cal.frak_l / l))
    } else {
        let threshold = l * mf;
        let m_exp = (g - 1.0).min(0.5 * g);
        (
            threshold,
            cal.frak_c * f::exp(-g * f::ln(l) - m_exp * f::ln(mf)),
        )
    };
    Ok(TailBound {
        threshold,
        bound,
        calibration: cal,
    })
}

/// Monte Carlo estimate of `P(S_m >= x)` with a Wilson 95% CI.
pub fn sum_tail_mc<R: Rng + ?Sized>(
    m: u64,
    x: f64,
    spec: &ParetoSpec,
    replicas: u64,
    rng: &mut R,
) -> Result<(f64, (f64, f64))> {
    let estimates = sum_tail_mc_multi(m, &[x], spec, replicas, rng)?;
    Ok(estimates[0])
}

/// As [`sum_tail_mc`] for several thresholds at once, reusing the replica
/// sums. Thresholds at or below the support floor `m omega` report 1.
pub fn sum_tail_mc_multi<R: Rng + ?Sized>(
    m: u64,
    thresholds: &[f64],
    spec: &ParetoSpec,
    replicas: u64,
    rng: &mut R,
) -> Result<alloc::vec::Vec<(f64, (f64, f64))>> {
    if replicas < 1000 {
        return Err(Error::InvalidParams("need at least 1e3 replicas"));
    }
    if m == 0 {
        return Err(Error::OutOfDomain("sum of zero terms"));
    }
    let mut exceed = alloc::vec![0u64; thresholds.len()];
    for _ in 0..replicas {
        let mut sum = 0.0;
        for _ in 0..m {
            sum += sample_pareto(spec, rng);
        }
        for (i, &x) in thresholds.iter().enumerate() {
            if sum >= x {
                exceed[i] += 1;
            }
        }
    }
    Ok(thresholds
        .iter()
        .zip(exceed.iter())
        .map(|(&x, &k)| {
            if x <= spec.omega * m as f64 {
                (1.0, (1.0, 1.0))
            } else {
                (k as f64 / replicas as f64, wilson_ci(k, replicas))
            }
        })
        .collect())
}
