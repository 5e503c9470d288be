//! Parallel drivers. Every unit of work owns a stream keyed exactly as in
//! the serial core functions, so results are byte-identical to the serial
//! path and independent of the thread count.

use rayon::prelude::*;

use mhg_core::dynamics::{simulate_detection, MovementMode, SimConfig};
use mhg_core::harness::{
    combine_node_probabilities, config_survives, grid_nodes, node_probabilities, radial_cells,
    radial_levels, radial_line_probabilities, theta_cells, validate_s_list, GridSpec, TailCurve,
    STREAM_NODE_BASE, STREAM_POINT,
};
use mhg_core::heavytail::{sample_pareto, ParetoSpec};
use mhg_core::kernels::wilson_ci;
use mhg_core::rng::{stream_id, stream_rng};
use mhg_core::{ModelParams, PolarPoint, Result};

/// Parallel tail curve; node-for-node identical to `harness::tail_curve`.
pub fn par_tail_curve(
    params: &ModelParams,
    mode: MovementMode,
    grid: &GridSpec,
    s_list: &[f64],
    trajectories: u64,
    cfg: &SimConfig,
    seed: u64,
) -> Result<TailCurve> {
    validate_s_list(s_list)?;
    let nodes = grid_nodes(params, grid);
    let probs: Result<Vec<Vec<f64>>> = match mode {
        MovementMode::RadialOnly => {
            let rc = radial_cells(params, grid.n_radial);
            let tc = theta_cells(params, grid.n_theta);
            let thetas: Vec<f64> = tc.iter().map(|c| c.node).collect();
            let levels = radial_levels(params, &thetas);
            let lines: Result<Vec<Vec<Vec<f64>>>> = rc
                .par_iter()
                .enumerate()
                .map(|(j, cell)| {
                    radial_line_probabilities(
                        cell.node,
                        &levels,
                        params,
                        s_list,
                        trajectories,
                        cfg,
                        seed,
                        STREAM_NODE_BASE + j as u32,
                    )
                })
                .collect();
            lines.map(|ls| ls.into_iter().flatten().collect())
        }
        _ => nodes
            .par_iter()
            .map(|node| node_probabilities(node, params, mode, s_list, trajectories, cfg, seed))
            .collect(),
    };
    Ok(combine_node_probabilities(
        params,
        mode,
        grid,
        &nodes,
        &probs?,
        s_list,
        trajectories,
    ))
}

/// Parallel counterpart of `harness::estimate_point_detection`.
pub fn par_estimate_point(
    x0: PolarPoint,
    params: &ModelParams,
    mode: MovementMode,
    s: f64,
    trajectories: u64,
    cfg: &SimConfig,
    seed: u64,
) -> Result<(f64, (f64, f64))> {
    if trajectories < 100 {
        return Err(mhg_core::Error::InvalidParams(
            "need at least 100 trajectories",
        ));
    }
    let mut local = *cfg;
    local.horizon = s;
    let hits: Result<u64> = (0..trajectories)
        .into_par_iter()
        .map(|t| {
            let mut rng = stream_rng(seed, stream_id(STREAM_POINT, t as u32));
            let out = simulate_detection(x0, params, mode, &local, &mut rng)?;
            Ok(u64::from(out.hit_time <= s))
        })
        .try_reduce(|| 0, |a, b| Ok(a + b));
    let hits = hits?;
    Ok((
        hits as f64 / trajectories as f64,
        wilson_ci(hits, trajectories),
    ))
}

/// Parallel full-configuration tail estimate over seeds
/// `seed .. seed + configs`.
pub fn par_direct_config_tail(
    params: &ModelParams,
    mode: MovementMode,
    s: f64,
    configs: u64,
    cfg: &SimConfig,
    seed: u64,
) -> Result<(f64, (f64, f64))> {
    let survived: Result<u64> = (0..configs)
        .into_par_iter()
        .map(|i| Ok(u64::from(config_survives(params, mode, s, cfg, seed + i)?)))
        .try_reduce(|| 0, |a, b| Ok(a + b));
    let survived = survived?;
    Ok((
        survived as f64 / configs as f64,
        wilson_ci(survived, configs),
    ))
}

/// Parallel Pareto sum-tail Monte Carlo: replicas are split into fixed
/// chunks with per-chunk streams, so the counts do not depend on the
/// thread count.
pub fn par_sum_tail_mc(
    m: u64,
    thresholds: &[f64],
    spec: &ParetoSpec,
    replicas: u64,
    seed: u64,
) -> Result<Vec<(f64, (f64, f64))>> {
    if replicas < 1000 {
        return Err(mhg_core::Error::InvalidParams(
            "need at least 1e3 replicas",
        ));
    }
    const CHUNKS: u64 = 256;
    let base = replicas / CHUNKS;
    let extra = replicas % CHUNKS;
    let counts: Vec<u64> = (0..CHUNKS)
        .into_par_iter()
        .map(|c| {
            let todo = base + u64::from(c < extra);
            let mut rng = stream_rng(seed, c);
            let mut exceed = vec![0u64; thresholds.len()];
            for _ in 0..todo {
                let mut sum = 0.0;
                for _ in 0..m {
                    sum += sample_pareto(spec, &mut rng);
                }
                for (i, &x) in thresholds.iter().enumerate() {
                    if sum >= x {
                        exceed[i] += 1;
                    }
                }
            }
            exceed
        })
        .reduce(
            || vec![0u64; thresholds.len()],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b.iter()) {
                    *x += y;
                }
                a
            },
        );
    Ok(thresholds
        .iter()
        .zip(counts.iter())
        .map(|(&x, &k)| {
            if x <= spec.omega * m as f64 {
                (1.0, (1.0, 1.0))
            } else {
                (k as f64 / replicas as f64, wilson_ci(k, replicas))
            }
        })
        .collect())
}

/// Parallel map of independent runs `i -> f(stream (seed, base + i))`,
/// reduced in index order.
pub fn par_runs<T, F>(runs: u64, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    (0..runs).into_par_iter().map(f).collect()
}
