//! Poissonized initial configurations and their expected-measure formulas.
//!
//! The point count is Poisson with mean `n`; angles are uniform on
//! `(-pi, pi]` and radii follow the CDF
//! `F(r) = (cosh(alpha r) - 1) / (cosh(alpha R) - 1)`, sampled by exact
//! inversion.

use alloc::vec::Vec;

use rand::Rng;

use crate::geometry::{ModelParams, PolarPoint};
use crate::kernels::{self, f, PI, TAU};
use crate::rng::{poisson, stream_rng};
use crate::{Error, Result};

/// A sampled initial configuration; regeneration from `(seed, params)` is
/// bit-identical.
#[derive(Debug, Clone)]
pub struct Configuration {
    pub points: Vec<PolarPoint>,
    pub seed: u64,
    pub params: ModelParams,
}

/// Radial CDF `F(r) = (cosh(alpha r) - 1) / (cosh(alpha R) - 1)`, in the
/// overflow-free form `e^{alpha(r - R)} ((1 - e^{-alpha r}) / (1 - e^{-alpha R}))^2`.
pub fn radial_cdf(r: f64, params: &ModelParams) -> f64 {
    let a = params.alpha;
    let rr = params.radius;
    if r <= 0.0 {
        return 0.0;
    }
    if r >= rr {
        return 1.0;
    }
    let q = (-f::exp_m1(-a * r)) / (-f::exp_m1(-a * rr));
    f::exp(a * (r - rr)) * q * q
}

/// Exact inverse of [`radial_cdf`]:
/// `F^{-1}(u) = arcosh(1 + u (cosh(alpha R) - 1)) / alpha`.
/// `u >= 1` maps to `R` exactly.
pub fn radial_quantile(u: f64, params: &ModelParams) -> f64 {
    let a = params.alpha;
    if u >= 1.0 {
        return params.radius;
    }
    if u <= 0.0 {
        return 0.0;
    }
    // cosh(x) - 1 = e^x (1 - e^{-x})^2 / 2
    let x = a * params.radius;
    let em = -f::exp_m1(-x);
    let c = 0.5 * f::exp(x) * em * em;
    (kernels::arcosh1p(u * c) / a).min(params.radius)
}

/// Sample a configuration. The stream is keyed by the seed alone; points
/// are drawn sequentially (count, then per-point angle and radius).
pub fn sample_configuration(params: &ModelParams, seed: u64) -> Configuration {
    let mut rng = stream_rng(seed, 0);
    let count = poisson(params.n, &mut rng);
    let mut points = Vec::with_capacity(count as usize);
    for _ in 0..count {
        let theta = PI - TAU * rng.gen::<f64>(); // uniform on (-pi, pi]
        let r = radial_quantile(rng.gen::<f64>(), params);
        points.push(PolarPoint { r, theta });
    }
    Configuration {
        points,
        seed,
        params: *params,
    }
}

/// Expected number of points in `B_O(r)`: exactly `n F(r)`, asymptotically
/// `n e^{-alpha (R - r)}`.
pub fn expected_mu_ball(r: f64, params: &ModelParams) -> Result<f64> {
    if !(0.0..=params.radius).contains(&r) {
        return Err(Error::OutOfDomain("expected_mu_ball requires 0 <= r <= R"));
    }
    Ok(params.n * radial_cdf(r, params))
}

/// Leading-order expected number of points in the target ball
/// `B_Q(R) \cap B_O(R)` for a target on the boundary:
/// `n C_alpha e^{-R/2}` with `C_alpha = 2 alpha / (pi (alpha - 1/2))`.
/// The relative error is `O(e^{-(alpha - 1/2) R} + e^{-R})`.
pub fn expected_mu_target_cap(params: &ModelParams) -> f64 {
    let c_alpha = 2.0 * params.alpha / (PI * (params.alpha - 0.5));
    params.n * c_alpha * f::exp(-0.5 * params.radius)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> ModelParams {
        ModelParams::new(0.75, 1.0, 1.0, 500.0).unwrap()
    }

    #[test]
    fn cdf_quantile_roundtrip_and_endpoints() {
        let p = params();
        assert_eq!(radial_quantile(1.0, &p), p.radius);
        assert_eq!(radial_quantile(0.0, &p), 0.0);
        assert_eq!(radial_cdf(p.radius, &p), 1.0);
        assert_eq!(radial_cdf(0.0, &p), 0.0);
        for i in 1..40 {
            let u = i as f64 / 40.0;
            let r = radial_quantile(u, &p);
            assert!((radial_cdf(r, &p) - u).abs() < 1e-12, "u={u}");
        }
        // stable against the naive form at moderate radius
        let r = 7.3;
        let naive =
            ((p.alpha * r).cosh() - 1.0) / ((p.alpha * p.radius).cosh() - 1.0);
        assert!((radial_cdf(r, &p) - naive).abs() < 1e-14);
    }

    #[test]
    fn regeneration_is_bit_identical() {
        let p = params();
        let a = sample_configuration(&p, 1234);
        let b = sample_configuration(&p, 1234);
        assert_eq!(a.points.len(), b.points.len());
        for (x, y) in a.points.iter().zip(b.points.iter()) {
            assert_eq!(x.r.to_bits(), y.r.to_bits());
            assert_eq!(x.theta.to_bits(), y.theta.to_bits());
        }
        let c = sample_configuration(&p, 1235);
        assert_ne!(a.points.len(), c.points.len());
    }

    #[test]
    fn points_lie_in_disk_with_normalized_angles() {
        let p = params();
        let cfg = sample_configuration(&p, 5);
        assert!(!cfg.points.is_empty());
        for pt in &cfg.points {
            assert!(pt.r >= 0.0 && pt.r <= p.radius);
            assert!(pt.theta > -PI && pt.theta <= PI);
        }
    }

    #[test]
    fn poisson_count_mean() {
        // mean of |points| over many seeds within 3 sqrt(n/K) of n
        let p = ModelParams::new(0.75, 1.0, 1.0, 100.0).unwrap();
        let k = 10_000;
        let mut total = 0usize;
        for seed in 0..k {
            total += sample_configuration(&p, seed).points.len();
        }
        let mean = total as f64 / k as f64;
        let tol = 3.0 * (p.n / k as f64).sqrt();
        assert!((mean - p.n).abs() < tol, "mean {mean} tol {tol}");
    }

    #[test]
    fn radial_ks_distance() {
        // pooled radii vs the closed-form CDF: KS < 0.01 at 1e5 samples
        let p = params();
        let mut radii = alloc::vec::Vec::with_capacity(100_000);
        let mut seed = 0;
        while radii.len() < 100_000 {
            radii.extend(sample_configuration(&p, seed).points.iter().map(|q| q.r));
            seed += 1;
        }
        radii.truncate(100_000);
        radii.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let n = radii.len() as f64;
        let mut ks: f64 = 0.0;
        for (i, &r) in radii.iter().enumerate() {
            let fr = radial_cdf(r, &p);
            let lo = i as f64 / n;
            let hi = (i + 1) as f64 / n;
            ks = ks.max((fr - lo).abs()).max((fr - hi).abs());
        }
        assert!(ks < 0.01, "KS {ks}");
    }

    #[test]
    fn sector_counts_chi_square() {
        // 5 equal-mass annuli x 4 sectors over 1e6 points; chi^2_19 at p > 0.001
        let p = ModelParams::new(0.75, 1.0, 1.0, 1000.0).unwrap();
        let mut counts = [[0u32; 4]; 5];
        let mut total = 0usize;
        let mut seed = 100;
        while total < 1_000_000 {
            let cfg = sample_configuration(&p, seed);
            for pt in &cfg.points {
                let fi = (radial_cdf(pt.r, &p) * 5.0).min(4.999) as usize;
                let si = ((pt.theta + PI) / TAU * 4.0).min(3.999) as usize;
                counts[fi][si] += 1;
            }
            total += cfg.points.len();
            seed += 1;
        }
        let expect = total as f64 / 20.0;
        let mut chi2 = 0.0;
        for row in &counts {
            for &c in row {
                chi2 += (c as f64 - expect) * (c as f64 - expect) / expect;
            }
        }
        // chi^2 with 19 dof: P(chi2 > 43.8) = 0.001
        assert!(chi2 < 43.8, "chi2 {chi2}");
    }

    #[test]
    fn target_cap_count_matches_asymptote() {
        // pooled count of sampled points inside the target ball vs the
        // leading-order cap measure, within 10%
        let p = ModelParams::new(0.75, 0.5, 200.0, 4.0e5).unwrap();
        let configs = 20u64;
        let mut count = 0usize;
        for seed in 0..configs {
            let cfg = sample_configuration(&p, 7000 + seed);
            count += cfg
                .points
                .iter()
                .filter(|pt| crate::geometry::in_target_ball(**pt, &p))
                .count();
        }
        let expect = configs as f64 * expected_mu_target_cap(&p);
        let ratio = count as f64 / expect;
        assert!((ratio - 1.0).abs() < 0.10, "ratio {ratio}");
    }

    #[test]
    fn expected_measures() {
        let p = params();
        assert!((expected_mu_ball(p.radius, &p).unwrap() - p.n).abs() < 1e-9);
        assert_eq!(expected_mu_ball(0.0, &p).unwrap(), 0.0);
        assert!(expected_mu_ball(-1.0, &p).is_err());
        // exact vs asymptote n e^{-alpha(R-r)} at r = R - 5 for R >= 25
        let big = ModelParams::from_radius(0.75, 1.0, 1.0, 25.0).unwrap();
        let exact = expected_mu_ball(big.radius - 5.0, &big).unwrap();
        let asym = big.n * (-big.alpha * 5.0f64).exp();
        assert!((exact / asym - 1.0).abs() < 0.02);
        // C_alpha at alpha = 0.75 is 6/pi
        let cap = expected_mu_target_cap(&p);
        assert!((cap / (p.n * (-0.5 * p.radius) .exp()) - 6.0 / PI).abs() < 1e-12);
        // and the cap is nu C_alpha (1 + o(1)) since n e^{-R/2} = nu
        assert!((cap - p.nu * 6.0 / PI).abs() < 1e-9);
    }
}
