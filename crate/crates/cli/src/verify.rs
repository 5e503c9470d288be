//! Analytic-vs-Monte-Carlo verification suites behind `verify-analytics`.
//! The acceptance tests drive the same functions at their pinned sizes.

use rayon::prelude::*;

use mhg_core::analytics::{
    bm_exit_prob, conditional_mean_bound, dufresne_tail, hitting_prob_g, laplace_bound,
    mean_hit_time_from_reflector, normal_cdf, RadialBarrierSpec,
};
use mhg_core::kernels::bisect;
use mhg_core::rng::{stream_id, stream_rng, Gaussian};

/// One verification line.
#[derive(Debug, Clone)]
pub struct Check {
    pub suite: &'static str,
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(suite: &'static str, name: impl Into<String>, passed: bool, detail: String) -> Self {
        Check {
            suite,
            name: name.into(),
            passed,
            detail,
        }
    }
}

/// Barrier tuple exercised by the hitting suite.
#[derive(Debug, Clone, Copy)]
pub struct HittingTuple {
    pub alpha: f64,
    pub y0: f64,
    pub reflect: f64,
    pub lambda: f64,
    pub y: f64,
}

/// Five pinned tuples; gaps sized so the absorbing runs stay affordable.
pub const HITTING_TUPLES: [HittingTuple; 5] = [
    HittingTuple {
        alpha: 0.75,
        y0: 4.0,
        reflect: 8.0,
        lambda: 0.5,
        y: 6.0,
    },
    HittingTuple {
        alpha: 0.85,
        y0: 5.0,
        reflect: 7.5,
        lambda: 1.0,
        y: 6.0,
    },
    HittingTuple {
        alpha: 0.6,
        y0: 2.0,
        reflect: 4.5,
        lambda: 1.5,
        y: 3.0,
    },
    HittingTuple {
        alpha: 0.9,
        y0: 5.0,
        reflect: 7.0,
        lambda: 0.25,
        y: 6.0,
    },
    HittingTuple {
        alpha: 0.75,
        y0: 1.0,
        reflect: 3.0,
        lambda: 2.0,
        y: 2.0,
    },
];

enum BarrierOutcome {
    Absorbed(f64),
    Reflected,
    Censored,
}

/// Euler path of the barrier diffusion, from `start`, absorbing at `y0`.
/// `stop_at_reflect` ends the path on first contact with the top barrier;
/// otherwise the top folds and the path runs to absorption or `cap`.
fn barrier_path(
    spec: &RadialBarrierSpec,
    start: f64,
    dt: f64,
    cap: f64,
    stop_at_reflect: bool,
    rng: &mut impl rand::Rng,
) -> BarrierOutcome {
    let mut g = Gaussian::new();
    let mut y = start;
    let mut t = 0.0;
    let sqrt_dt = dt.sqrt();
    while t < cap {
        let drift = 0.5 * spec.alpha / (spec.alpha * y).tanh();
        y += drift * dt + sqrt_dt * g.sample(rng);
        t += dt;
        if y <= spec.absorb {
            return BarrierOutcome::Absorbed(t);
        }
        if y >= spec.reflect {
            if stop_at_reflect {
                return BarrierOutcome::Reflected;
            }
            y = 2.0 * spec.reflect - y;
        }
    }
    BarrierOutcome::Censored
}

/// Hitting suite: per tuple, the four analytic facts are compared against
/// Monte Carlo at `paths` trajectories and step `dt`.
pub fn hitting_suite(paths: u64, dt: f64, seed: u64) -> Vec<Check> {
    let mut checks = Vec::new();
    for (ti, tup) in HITTING_TUPLES.iter().enumerate() {
        let spec = RadialBarrierSpec::new(tup.alpha, tup.y0, tup.reflect).unwrap();
        let base = (ti as u32) * 8;

        // G: absorb-before-reflect probability from y
        let exact_g = hitting_prob_g(tup.y, &spec).unwrap();
        let hits: u64 = (0..paths)
            .into_par_iter()
            .map(|i| {
                let mut rng = stream_rng(seed, stream_id(base, i as u32));
                match barrier_path(&spec, tup.y, dt, 1e9, true, &mut rng) {
                    BarrierOutcome::Absorbed(_) => 1,
                    _ => 0,
                }
            })
            .sum();
        let g_hat = hits as f64 / paths as f64;
        let sigma = (exact_g * (1.0 - exact_g) / paths as f64).sqrt();
        checks.push(Check::new(
            "hitting",
            format!("tuple{ti}/hitting_prob"),
            (g_hat - exact_g).abs() <= 3.0 * sigma,
            format!("G_hat {g_hat:.5} vs G {exact_g:.5} (3s {:.5})", 3.0 * sigma),
        ));

        // mean hit time started at the reflector, within 5%
        let exact_mean = mean_hit_time_from_reflector(&spec).exact;
        let cap = 60.0 * exact_mean;
        let times: Vec<f64> = (0..paths)
            .into_par_iter()
            .map(|i| {
                let mut rng = stream_rng(seed, stream_id(base + 1, i as u32));
                match barrier_path(&spec, tup.reflect, dt, cap, false, &mut rng) {
                    BarrierOutcome::Absorbed(t) => t,
                    _ => cap,
                }
            })
            .collect();
        let mean = times.iter().sum::<f64>() / paths as f64;
        checks.push(Check::new(
            "hitting",
            format!("tuple{ti}/mean_hit_time"),
            (mean / exact_mean - 1.0).abs() <= 0.05,
            format!("mean {mean:.3} vs exact {exact_mean:.3}"),
        ));

        // Laplace transform dominated by the closed-form bound
        let bound = laplace_bound(tup.lambda, tup.y, &spec).unwrap();
        let cap = 30.0 / tup.lambda; // censored paths contribute < e^{-30}
        let vals: Vec<f64> = (0..paths)
            .into_par_iter()
            .map(|i| {
                let mut rng = stream_rng(seed, stream_id(base + 2, i as u32));
                match barrier_path(&spec, tup.y, dt, cap, false, &mut rng) {
                    BarrierOutcome::Absorbed(t) => (-tup.lambda * t).exp(),
                    _ => 0.0,
                }
            })
            .collect();
        let mean_l = vals.iter().sum::<f64>() / paths as f64;
        let var_l =
            vals.iter().map(|v| (v - mean_l) * (v - mean_l)).sum::<f64>() / paths as f64;
        let sigma_l = (var_l / paths as f64).sqrt();
        checks.push(Check::new(
            "hitting",
            format!("tuple{ti}/laplace_bound"),
            mean_l <= bound + 3.0 * sigma_l,
            format!("E[e^-lT] {mean_l:.5} vs bound {bound:.5}"),
        ));

        // conditional mean dominated by its bound
        let cbound = conditional_mean_bound(tup.y, &spec).unwrap();
        let cond: Vec<f64> = (0..paths)
            .into_par_iter()
            .filter_map(|i| {
                let mut rng = stream_rng(seed, stream_id(base + 3, i as u32));
                match barrier_path(&spec, tup.y, dt, 1e9, true, &mut rng) {
                    BarrierOutcome::Absorbed(t) => Some(t),
                    _ => None,
                }
            })
            .collect();
        let n = cond.len().max(1) as f64;
        let cmean = cond.iter().sum::<f64>() / n;
        let cvar = cond.iter().map(|t| (t - cmean) * (t - cmean)).sum::<f64>() / n;
        let csig = (cvar / n).sqrt();
        checks.push(Check::new(
            "hitting",
            format!("tuple{ti}/conditional_mean_bound"),
            !cond.is_empty() && cmean <= cbound + 3.0 * csig,
            format!("cond mean {cmean:.4} vs bound {cbound:.4} (n {})", cond.len()),
        ));
    }
    checks
}

/// Brownian interval exit via bridge-corrected Monte Carlo (independent of
/// the image series).
pub fn bm_exit_bridge_mc(a: f64, b: f64, v: f64, paths: u64, dt: f64, seed: u64) -> (f64, f64) {
    let hits: u64 = (0..paths)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(seed, i);
            let mut g = Gaussian::new();
            let mut x = 0.0f64;
            let mut t = 0.0;
            while t < v {
                let h = dt.min(v - t);
                let y = x + h.sqrt() * g.sample(&mut rng);
                if y <= -a || y >= b {
                    return 1;
                }
                let p_lo = (-2.0 * (x + a) * (y + a) / h).exp();
                let p_hi = (-2.0 * (b - x) * (b - y) / h).exp();
                if rand::Rng::gen::<f64>(&mut rng) < (p_lo + p_hi).min(1.0) {
                    return 1;
                }
                x = y;
                t += h;
            }
            0
        })
        .sum();
    let p = hits as f64 / paths as f64;
    (p, (p * (1.0 - p) / paths as f64).sqrt())
}

/// Exit suite: series pins, the reflection bracket, and a bridge-MC
/// cross-check.
pub fn exit_suite(paths: u64, seed: u64) -> Vec<Check> {
    let mut checks = Vec::new();
    let pin = bm_exit_prob(1.0, 1.0, 1.0).unwrap();
    checks.push(Check::new(
        "exit",
        "series_pin",
        (pin - 0.629222570200476095).abs() < 1e-12,
        format!("P(1,1,1) = {pin:.15}"),
    ));
    let mut bracket_ok = true;
    let mut worst = String::new();
    for &(a, b, v) in &[
        (0.4, 0.6, 0.3),
        (1.0, 2.5, 1.7),
        (0.2, 0.2, 0.05),
        (2.0, 2.0, 9.0),
    ] {
        let p = bm_exit_prob(a, b, v).unwrap();
        let lo = normal_cdf(-a / f64::sqrt(v));
        if !(p >= lo - 1e-12 && p <= 4.0 * lo + 1e-12) {
            bracket_ok = false;
            worst = format!("a={a} b={b} v={v}: p={p} lo={lo}");
        }
    }
    checks.push(Check::new(
        "exit",
        "reflection_bracket",
        bracket_ok,
        if bracket_ok { "Phi <= P <= 4 Phi".into() } else { worst },
    ));
    for (i, &(a, b, v)) in [(1.0, 1.0, 1.0), (0.5, 2.0, 0.8)].iter().enumerate() {
        let exact = bm_exit_prob(a, b, v).unwrap();
        let (p, sigma) = bm_exit_bridge_mc(a, b, v, paths, 2e-3, seed + i as u64);
        checks.push(Check::new(
            "exit",
            format!("bridge_mc_{i}"),
            (p - exact).abs() <= 3.0 * sigma,
            format!("mc {p:.5} vs series {exact:.5} (3s {:.5})", 3.0 * sigma),
        ));
    }
    checks
}

/// Result of the exponential-functional Monte Carlo: empirical tail at the
/// target quantiles of the inverse-gamma law.
pub struct DufresneMc {
    pub quantile_checks: Vec<(f64, f64, f64, bool)>, // (q, x_q, empirical, ok)
}

/// Simulate `W = int_0^inf e^{-2 beta X_u} du` (drift `alpha/2` Brownian
/// `X`) with horizon truncation `200/alpha` and an `X`-level early stop at
/// `X = 30/(2 beta)` (residual mass below 1e-8 at the probed quantiles).
pub fn dufresne_mc(
    alpha: f64,
    beta: f64,
    paths: u64,
    dt: f64,
    quantiles: &[f64],
    seed: u64,
) -> DufresneMc {
    let horizon = 200.0 / alpha;
    let x_stop = 30.0 / (2.0 * beta);
    let samples: Vec<f64> = (0..paths)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(seed, i);
            let mut g = Gaussian::new();
            let mut x = 0.0f64;
            let mut integral = 0.0;
            let mut t = 0.0;
            let sqrt_dt = dt.sqrt();
            while t < horizon && x < x_stop {
                integral += (-2.0 * beta * x).exp() * dt;
                x += 0.5 * alpha * dt + sqrt_dt * g.sample(&mut rng);
                t += dt;
            }
            integral
        })
        .collect();
    // truncation slack: horizon-censored paths can only under-count, plus
    // the residual beyond the X stop level
    let slack = 2e-3;
    let quantile_checks = quantiles
        .iter()
        .map(|&q| {
            // invert the analytic tail: x_q with P(W >= x_q) = q
            let x_q = bisect(
                |x| dufresne_tail(x.exp(), alpha, beta).unwrap() - q,
                -20.0,
                40.0,
                80,
            )
            .map(f64::exp)
            .unwrap();
            let emp = samples.iter().filter(|&&w| w >= x_q).count() as f64 / paths as f64;
            let sigma = (q * (1.0 - q) / paths as f64).sqrt();
            let ok = (emp - q).abs() <= 3.0 * sigma + slack;
            (q, x_q, emp, ok)
        })
        .collect();
    DufresneMc { quantile_checks }
}

/// Dufresne suite: inverse-gamma pins, the fitted tail slope, and the
/// functional Monte Carlo at three quantiles.
pub fn dufresne_suite(paths: u64, seed: u64) -> Vec<Check> {
    let mut checks = Vec::new();
    let pin = dufresne_tail(10.0, 0.75, 0.5).unwrap();
    checks.push(Check::new(
        "dufresne",
        "inverse_gamma_pin",
        (pin - 0.299206835531283942).abs() < 1e-12,
        format!("tail(10; 0.75, 0.5) = {pin:.15}"),
    ));
    // log-log slope over x in [10, 1e3] equals -alpha/(2 beta) +- 0.05
    let (alpha, beta) = (0.75, 0.5);
    let xs: Vec<f64> = (0..21).map(|i| 10f64.powf(1.0 + i as f64 * 0.1)).collect();
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = xs
        .iter()
        .map(|&x| dufresne_tail(x, alpha, beta).unwrap().ln())
        .collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let slope = lx
        .iter()
        .zip(ly.iter())
        .map(|(x, y)| (x - mx) * (y - my))
        .sum::<f64>()
        / lx.iter().map(|x| (x - mx) * (x - mx)).sum::<f64>();
    let target = -alpha / (2.0 * beta);
    checks.push(Check::new(
        "dufresne",
        "tail_slope",
        (slope - target).abs() <= 0.05,
        format!("slope {slope:.4} vs {target:.4}"),
    ));
    let mc = dufresne_mc(alpha, beta, paths, 1e-3, &[0.5, 0.1, 0.01], seed);
    for (q, x_q, emp, ok) in mc.quantile_checks {
        checks.push(Check::new(
            "dufresne",
            format!("functional_mc_q{q}"),
            ok,
            format!("P(W >= {x_q:.3}) = {emp:.4} vs {q}"),
        ));
    }
    checks
}

/// Run the requested suite(s). `paths` scales every Monte Carlo piece.
pub fn run(suite: &str, paths: u64, dt: f64, seed: u64) -> Vec<Check> {
    let mut checks = Vec::new();
    if suite == "all" || suite == "hitting" {
        checks.extend(hitting_suite(paths, dt, seed));
    }
    if suite == "all" || suite == "exit" {
        checks.extend(exit_suite(paths, seed + 1000));
    }
    if suite == "all" || suite == "dufresne" {
        checks.extend(dufresne_suite(paths, seed + 2000));
    }
    checks
}

/// Render the pass/fail table.
pub fn render(checks: &[Check]) -> String {
    let mut out = String::new();
    for c in checks {
        out.push_str(&format!(
            "{:<4} {:<10} {:<34} {}\n",
            if c.passed { "PASS" } else { "FAIL" },
            c.suite,
            c.name,
            c.detail
        ));
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    out.push_str(&format!(
        "{} checks, {} failed\n",
        checks.len(),
        failed
    ));
    out
}
