use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use mhg_cli::{experiments, io, verify};
use mhg_core::dynamics::{MovementMode, SimConfig};
use mhg_core::harness::{
    conditional_on_initial_survival, curve_from_rows, fit_exponent, FitModel, GridSpec,
};
use mhg_core::heavytail::{sum_tail_bound, ParetoSpec};
use mhg_core::regions::{boundary_profile, measure_mu_d, RegionSpec};
use mhg_core::ModelParams;

#[derive(Parser)]
#[command(
    name = "mhg",
    version,
    about = "Detection-time simulator for mobile points on a hyperbolic disk"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Serialize, Clone)]
struct ParamArgs {
    /// Radial density exponent, in (1/2, 1]
    #[arg(long, default_value_t = 0.75)]
    alpha: f64,
    /// Angular diffusivity exponent
    #[arg(long, default_value_t = 0.5)]
    beta: f64,
    /// Intensity scale (R = 2 log(n/nu))
    #[arg(long, default_value_t = 1.0)]
    nu: f64,
    /// Expected number of points
    #[arg(long, default_value_t = 2000.0)]
    n: f64,
}

impl ParamArgs {
    fn build(&self) -> anyhow::Result<ModelParams> {
        Ok(ModelParams::new(self.alpha, self.beta, self.nu, self.n)?)
    }
}

fn parse_mode(s: &str) -> Result<MovementMode, String> {
    match s {
        "angular" => Ok(MovementMode::AngularOnly),
        "radial" => Ok(MovementMode::RadialOnly),
        "mixed" => Ok(MovementMode::Mixed),
        _ => Err("mode must be one of: angular, radial, mixed".into()),
    }
}

fn parse_x0(s: &str) -> Result<(f64, f64), String> {
    let (r, t) = s
        .split_once(',')
        .ok_or_else(|| "x0 must be r,theta".to_string())?;
    let r: f64 = r.trim().parse().map_err(|_| "bad radius".to_string())?;
    let t: f64 = t.trim().parse().map_err(|_| "bad angle".to_string())?;
    Ok((r, t))
}

#[derive(Subcommand)]
enum Command {
    /// Estimate the detection probability of one starting point
    Simulate {
        #[command(flatten)]
        params: ParamArgs,
        /// Movement mode: angular, radial or mixed
        #[arg(long, value_parser = parse_mode)]
        mode: MovementMode,
        /// Horizon
        #[arg(long)]
        s: f64,
        /// Starting point as r,theta
        #[arg(long, value_parser = parse_x0)]
        x0: (f64, f64),
        #[arg(long, default_value_t = 1000)]
        trajectories: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        #[arg(long, default_value = "simulate.csv")]
        out: PathBuf,
        /// Also dump the first trajectory's trace (t, r, theta, I)
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Sample one initial configuration and export it as CSV
    Sample {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "config.csv")]
        out: PathBuf,
    },
    /// Aggregate tail curve P(T_det >= s) over a horizon list
    TailCurve {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, value_parser = parse_mode)]
        mode: MovementMode,
        /// Comma-separated ascending horizons
        #[arg(long, value_delimiter = ',', required = true)]
        s_list: Vec<f64>,
        #[arg(long, default_value_t = 48)]
        grid_r: usize,
        #[arg(long, default_value_t = 64)]
        grid_theta: usize,
        #[arg(long, default_value_t = 200)]
        trajectories: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        /// Divide out the time-zero entry (condition on no instant hit)
        #[arg(long)]
        conditional: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Detection-region measure or boundary profile
    Region {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, value_parser = parse_mode)]
        mode: MovementMode,
        #[arg(long)]
        kappa: f64,
        #[arg(long)]
        s: f64,
        /// Mixed-mode regime: small or large (required for mixed)
        #[arg(long)]
        regime: Option<String>,
        /// Compute the region measure by quadrature
        #[arg(long, conflicts_with = "boundary")]
        measure: bool,
        /// Export the boundary profile
        #[arg(long)]
        boundary: bool,
        /// Boundary sample count
        #[arg(long, default_value_t = 256)]
        points: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Analytic-vs-MC verification suites (exit code 2 on failure)
    VerifyAnalytics {
        /// all, hitting, exit or dufresne
        #[arg(long, default_value = "all")]
        suite: String,
        /// Monte Carlo paths per check (the 5% mean-hit gate needs ~1e4)
        #[arg(long, default_value_t = 10_000)]
        paths: u64,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Pareto sum-tail bound vs Monte Carlo
    Pareto {
        #[arg(long)]
        gamma: f64,
        #[arg(long, default_value_t = 1.0)]
        omega: f64,
        #[arg(long)]
        m: u64,
        #[arg(long)]
        l: f64,
        #[arg(long, default_value_t = 100_000)]
        replicas: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "pareto.csv")]
        out: PathBuf,
    },
    /// Fit an exponent model to a tail-curve CSV
    Fit {
        /// Curve CSV produced by tail-curve (sidecar supplies the model
        /// parameters unless overridden)
        #[arg(long)]
        curve: PathBuf,
        /// sqrt_s, s_pow_beta_over_alpha, sqrt_s_log_s or s_pow_1_over_2alpha
        #[arg(long)]
        model: String,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long)]
        nu: Option<f64>,
        #[arg(long)]
        n: Option<f64>,
        /// Condition the curve on its s = 0 entry before fitting
        #[arg(long)]
        conditional: bool,
        #[arg(long, default_value = "fit.csv")]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version are not usage errors
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0u8,
                _ => 1u8,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

#[derive(Serialize)]
struct SimulateConfig {
    params: ParamArgs,
    mode: String,
    s: f64,
    x0: (f64, f64),
    trajectories: u64,
    dt: f64,
}

#[derive(Serialize)]
struct CurveConfig {
    params: ParamArgs,
    mode: String,
    s_list: Vec<f64>,
    grid_r: usize,
    grid_theta: usize,
    trajectories: u64,
    dt: f64,
    conditional: bool,
}

#[derive(Serialize)]
struct RegionConfig {
    params: ParamArgs,
    mode: String,
    kappa: f64,
    s: f64,
    regime: Option<String>,
    output: String,
}

#[derive(Serialize)]
struct ParetoConfig {
    gamma: f64,
    omega: f64,
    m: u64,
    l: f64,
    replicas: u64,
}

#[derive(Serialize)]
struct FitConfig {
    curve: String,
    model: String,
    alpha: f64,
    beta: f64,
    conditional: bool,
}

#[derive(Serialize)]
struct VerifyConfig {
    suite: String,
    paths: u64,
    dt: f64,
}

fn mode_name(mode: MovementMode) -> &'static str {
    match mode {
        MovementMode::AngularOnly => "angular",
        MovementMode::RadialOnly => "radial",
        MovementMode::Mixed => "mixed",
    }
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Sample { params, seed, out } => {
            let model = params.build()?;
            let config = mhg_core::sampling::sample_configuration(&model, seed);
            io::write_configuration_csv(&out, &config)?;
            io::write_sidecar(&out, "sample", &params, seed)?;
            println!("wrote {} points to {}", config.points.len(), out.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Simulate {
            params,
            mode,
            s,
            x0,
            trajectories,
            seed,
            dt,
            out,
            trace,
        } => {
            let model = params.build()?;
            let cfg = SimConfig {
                dt,
                horizon: s,
                ..SimConfig::default()
            };
            let point = mhg_core::PolarPoint::new(x0.0, x0.1);
            let (p_hat, ci) =
                experiments::par_estimate_point(point, &model, mode, s, trajectories, &cfg, seed)?;
            if let Some(trace_path) = &trace {
                use mhg_core::harness::STREAM_POINT;
                use mhg_core::rng::{stream_id, stream_rng};
                let mut rng = stream_rng(seed, stream_id(STREAM_POINT, 0));
                let (_, samples) = mhg_core::dynamics::simulate_detection_traced(
                    point, &model, mode, &cfg, &mut rng,
                )?;
                let rows: Vec<Vec<String>> = samples
                    .iter()
                    .map(|q| {
                        vec![
                            io::format_float(q.t),
                            io::format_float(q.r),
                            io::format_float(q.theta),
                            io::format_float(q.variance_integral),
                        ]
                    })
                    .collect();
                io::write_table_csv(trace_path, &["t", "r", "theta", "variance_integral"], &rows)?;
            }
            io::write_table_csv(
                &out,
                &["s", "p_hat", "ci_lo", "ci_hi", "trajectories"],
                &[vec![
                    io::format_float(s),
                    io::format_float(p_hat),
                    io::format_float(ci.0),
                    io::format_float(ci.1),
                    trajectories.to_string(),
                ]],
            )?;
            io::write_sidecar(
                &out,
                "simulate",
                &SimulateConfig {
                    params,
                    mode: mode_name(mode).into(),
                    s,
                    x0,
                    trajectories,
                    dt,
                },
                seed,
            )?;
            println!(
                "P(T_det <= {s}) = {p_hat:.6} [{:.6}, {:.6}] ({trajectories} trajectories)",
                ci.0, ci.1
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::TailCurve {
            params,
            mode,
            s_list,
            grid_r,
            grid_theta,
            trajectories,
            seed,
            dt,
            conditional,
            out,
        } => {
            let model = params.build()?;
            let grid = GridSpec {
                n_radial: grid_r,
                n_theta: grid_theta,
            };
            let cfg = SimConfig {
                dt,
                horizon: *s_list.last().unwrap_or(&1.0),
                ..SimConfig::default()
            };
            let mut curve =
                experiments::par_tail_curve(&model, mode, &grid, &s_list, trajectories, &cfg, seed)?;
            if conditional {
                curve = conditional_on_initial_survival(&curve)?;
            }
            io::write_curve_csv(&out, &curve)?;
            io::write_sidecar(
                &out,
                "tail-curve",
                &CurveConfig {
                    params,
                    mode: mode_name(mode).into(),
                    s_list,
                    grid_r,
                    grid_theta,
                    trajectories,
                    dt,
                    conditional,
                },
                seed,
            )?;
            for e in &curve.entries {
                println!("s = {:>10.4}  P(T_det >= s) = {:.6e}", e.s, e.p_hat);
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Region {
            params,
            mode,
            kappa,
            s,
            regime,
            measure,
            boundary,
            points,
            out,
        } => {
            let model = params.build()?;
            let spec = match (mode, regime.as_deref()) {
                (MovementMode::AngularOnly, _) => RegionSpec::angular(kappa, s, model)?,
                (MovementMode::RadialOnly, _) => RegionSpec::radial(kappa, s, model)?,
                (MovementMode::Mixed, Some("small")) => RegionSpec::mixed_small(kappa, s, model)?,
                (MovementMode::Mixed, Some("large")) => RegionSpec::mixed_large(kappa, s, model)?,
                (MovementMode::Mixed, _) => anyhow::bail!(
                    "mixed regions need --regime small|large (the theory fixes no crossover)"
                ),
            };
            let output = if boundary { "boundary" } else { "measure" };
            if boundary {
                let profile = boundary_profile(&spec, points);
                io::write_boundary_csv(&out, &profile)?;
                println!("wrote {} boundary samples to {}", profile.len(), out.display());
            } else {
                if !measure {
                    anyhow::bail!("choose --measure or --boundary");
                }
                let m = measure_mu_d(&spec)?;
                io::write_table_csv(
                    &out,
                    &["mode", "kappa", "s", "mu", "quad_error"],
                    &[vec![
                        mode_name(mode).to_string(),
                        io::format_float(kappa),
                        io::format_float(s),
                        io::format_float(m.value),
                        io::format_float(m.error),
                    ]],
                )?;
                println!("mu(D^(s)) = {:.6} (quadrature error {:.2e})", m.value, m.error);
            }
            io::write_sidecar(
                &out,
                "region",
                &RegionConfig {
                    params,
                    mode: mode_name(mode).into(),
                    kappa,
                    s,
                    regime,
                    output: output.into(),
                },
                0,
            )?;
            Ok(ExitCode::SUCCESS)
        }
        Command::VerifyAnalytics {
            suite,
            paths,
            dt,
            seed,
            out,
        } => {
            if !["all", "hitting", "exit", "dufresne"].contains(&suite.as_str()) {
                anyhow::bail!("--suite must be all, hitting, exit or dufresne");
            }
            let checks = verify::run(&suite, paths, dt, seed);
            print!("{}", verify::render(&checks));
            if let Some(out) = out {
                let rows: Vec<Vec<String>> = checks
                    .iter()
                    .map(|c| {
                        vec![
                            c.suite.to_string(),
                            c.name.clone(),
                            if c.passed { "pass" } else { "fail" }.to_string(),
                            c.detail.clone(),
                        ]
                    })
                    .collect();
                io::write_table_csv(&out, &["suite", "check", "status", "detail"], &rows)?;
                io::write_sidecar(&out, "verify-analytics", &VerifyConfig { suite, paths, dt }, seed)?;
            }
            if checks.iter().any(|c| !c.passed) {
                Ok(ExitCode::from(2))
            } else {
                Ok(ExitCode::SUCCESS)
            }
        }
        Command::Pareto {
            gamma,
            omega,
            m,
            l,
            replicas,
            seed,
            out,
        } => {
            let spec = ParetoSpec::new(omega, gamma)?;
            let tb = sum_tail_bound(m, l, &spec)?;
            let est = experiments::par_sum_tail_mc(m, &[tb.threshold], &spec, replicas, seed)?;
            let (p_hat, ci) = est[0];
            io::write_table_csv(
                &out,
                &[
                    "m", "gamma", "L", "threshold", "mc_estimate", "ci_lo", "ci_hi", "bound",
                ],
                &[vec![
                    m.to_string(),
                    io::format_float(gamma),
                    io::format_float(l),
                    io::format_float(tb.threshold),
                    io::format_float(p_hat),
                    io::format_float(ci.0),
                    io::format_float(ci.1),
                    io::format_float(tb.bound),
                ]],
            )?;
            io::write_sidecar(
                &out,
                "pareto",
                &ParetoConfig {
                    gamma,
                    omega,
                    m,
                    l,
                    replicas,
                },
                seed,
            )?;
            println!(
                "P(S_{m} >= {:.6e}) = {p_hat:.6e} [{:.3e}, {:.3e}]  bound {:.6e}",
                tb.threshold, ci.0, ci.1, tb.bound
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Fit {
            curve,
            model,
            alpha,
            beta,
            nu,
            n,
            conditional,
            out,
        } => {
            let fit_model = FitModel::parse(&model)
                .ok_or_else(|| anyhow::anyhow!("unknown model {model}"))?;
            let rows = io::read_curve_csv(&curve)?;
            let params = resolve_fit_params(&curve, alpha, beta, nu, n)?;
            let mut tc = curve_from_rows(params, MovementMode::Mixed, &rows);
            if conditional {
                tc = conditional_on_initial_survival(&tc)?;
            }
            let fit = fit_exponent(&tc, fit_model)?;
            io::write_table_csv(
                &out,
                &["model", "slope", "intercept", "r2", "s_min", "s_max", "n_points"],
                &[vec![
                    fit.model.name().to_string(),
                    io::format_float(fit.slope),
                    io::format_float(fit.intercept),
                    io::format_float(fit.r2),
                    io::format_float(fit.window.0),
                    io::format_float(fit.window.1),
                    fit.n_points.to_string(),
                ]],
            )?;
            io::write_sidecar(
                &out,
                "fit",
                &FitConfig {
                    curve: curve.display().to_string(),
                    model,
                    alpha: params.alpha,
                    beta: params.beta,
                    conditional,
                },
                0,
            )?;
            println!(
                "model {}: slope {:.4}, r2 {:.4} over s in [{}, {}] ({} points)",
                fit.model.name(),
                fit.slope,
                fit.r2,
                fit.window.0,
                fit.window.1,
                fit.n_points
            );
            Ok(ExitCode::SUCCESS)
        }
    }
}

/// Model parameters for a fit: explicit flags win, then the curve's JSON
/// sidecar, else an error.
fn resolve_fit_params(
    curve: &std::path::Path,
    alpha: Option<f64>,
    beta: Option<f64>,
    nu: Option<f64>,
    n: Option<f64>,
) -> anyhow::Result<ModelParams> {
    if let (Some(a), Some(b), Some(v), Some(nn)) = (alpha, beta, nu, n) {
        return Ok(ModelParams::new(a, b, v, nn)?);
    }
    let sidecar = io::sidecar_path(curve);
    let text = std::fs::read_to_string(&sidecar).map_err(|e| {
        anyhow::anyhow!(
            "no full --alpha/--beta/--nu/--n given and sidecar {} unreadable: {e}",
            sidecar.display()
        )
    })?;
    let json: serde_json::Value = serde_json::from_str(&text)?;
    let p = &json["config"]["params"];
    let get = |k: &str, flag: Option<f64>| -> anyhow::Result<f64> {
        if let Some(v) = flag {
            return Ok(v);
        }
        p[k].as_f64()
            .ok_or_else(|| anyhow::anyhow!("sidecar lacks params.{k}"))
    };
    Ok(ModelParams::new(
        get("alpha", alpha)?,
        get("beta", beta)?,
        get("nu", nu)?,
        get("n", n)?,
    )?)
}
