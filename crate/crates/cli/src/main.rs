//! Command-line front end: every subcommand reads a step-distribution spec
//! (`{"atoms": [{"value": v, "prob": p}, ...]}`) and prints a JSON summary
//! to stdout. Optional `--dump` flags write CSV profiles for plotting.

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use kbrw::fronts::GridSpec;
use kbrw::{
    build_sub, build_super, check_sub_inequality, check_super_inequality, critical_params,
    estimate_qn, iterate_to_fixed_point, measure_speed, regime_report, solve_t_star,
    FrontProfile, GridConfig, LinearWave, RightMode, SimConfig, StepDistribution,
};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(
    name = "kbrw",
    about = "Survival probabilities of the binary branching random walk killed below a linear boundary",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Super,
    Sub,
}

#[derive(Clone, Copy, ValueEnum)]
enum RightArg {
    Clamp1,
    Clamplast,
}

impl From<RightArg> for RightMode {
    fn from(r: RightArg) -> Self {
        match r {
            RightArg::Clamp1 => RightMode::ClampOne,
            RightArg::Clamplast => RightMode::ClampLast,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Critical pair (t*, v*), Λ''(t*) and the regime classification.
    Critical {
        #[arg(long)]
        dist: PathBuf,
    },
    /// Complex root φ(ε) of the linearized equation and its wavelength.
    Linwave {
        #[arg(long)]
        dist: PathBuf,
        #[arg(long)]
        eps: f64,
        /// Right-hand side exponent a; defaults to -log 2.
        #[arg(long, allow_negative_numbers = true)]
        a: Option<f64>,
    },
    /// Build a front profile and verify its T-inequality.
    Fronts {
        #[arg(long)]
        dist: PathBuf,
        #[arg(long)]
        eps: f64,
        #[arg(long, value_enum)]
        kind: KindArg,
        /// Write the rendered profile as CSV (columns x, value).
        #[arg(long)]
        dump: Option<PathBuf>,
        /// Upper bound on the rendering step.
        #[arg(long, default_value_t = 0.01)]
        max_step: f64,
    },
    /// Iterate T to the survival profile q∞ and report q∞(0), q∞(1).
    Survive {
        #[arg(long)]
        dist: PathBuf,
        /// Killing slope; alternatively give --eps for v = v* - eps.
        #[arg(long, allow_negative_numbers = true)]
        v: Option<f64>,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        step: Option<f64>,
        #[arg(long)]
        xmax: Option<f64>,
        #[arg(long, value_enum, default_value = "clamp1")]
        right: RightArg,
        /// Write q∞ as CSV (columns x, q_inf(x)).
        #[arg(long)]
        dump: Option<PathBuf>,
    },
    /// Monte Carlo estimate of q_n(x0) by pruned depth-first search.
    Mc {
        #[arg(long)]
        dist: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        v: f64,
        #[arg(long)]
        n: u32,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        x0: f64,
        #[arg(long, default_value_t = 100_000)]
        replicas: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Front speed of the N-particle branching-selection system.
    BdSpeed {
        #[arg(long)]
        dist: PathBuf,
        #[arg(long = "N")]
        n: usize,
        #[arg(long)]
        horizon: u64,
        /// Generations to discard before measuring; defaults to 20% of the
        /// horizon.
        #[arg(long)]
        burn_in: Option<u64>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Regime classification with the applicable closed-form bounds.
    Regime {
        #[arg(long)]
        dist: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        v: Option<f64>,
    },
}

fn load_dist(path: &Path) -> Result<StepDistribution> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read distribution spec {}", path.display()))?;
    let (d, deviation) = StepDistribution::from_spec_json(&text)?;
    if deviation > 1e-9 {
        eprintln!(
            "warning: probabilities in {} summed to 1{:+.3e}; renormalized",
            path.display(),
            deviation
        );
    }
    Ok(d)
}

fn dump_csv(path: &Path, header: &str, grid: &kbrw::GridFunction) -> Result<()> {
    let mut out = fs::File::create(path)
        .with_context(|| format!("cannot create {}", path.display()))?;
    writeln!(out, "{header}")?;
    for (i, value) in grid.values().iter().enumerate() {
        writeln!(out, "{},{}", i as f64 * grid.step(), value)?;
    }
    Ok(())
}

fn build_profile(
    d: &StepDistribution,
    eps: f64,
    kind: KindArg,
    max_step: f64,
) -> Result<FrontProfile> {
    let crit = solve_t_star(d)?;
    let spec = GridSpec::default_for(&crit, d, eps, max_step)?;
    Ok(match kind {
        KindArg::Super => build_super(&crit, d, eps, &spec)?,
        KindArg::Sub => build_sub(&crit, d, eps, &spec)?,
    })
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Critical { dist } => {
            let d = load_dist(&dist)?;
            let p = critical_params(&d);
            print_json(&serde_json::json!({
                "t_star": p.t_star,
                "v_star": p.v_star,
                "lambda2_star": p.lambda2_star,
                "regime": p.regime,
                "residual": p.residual,
            }));
        }
        Command::Linwave { dist, eps, a } => {
            let d = load_dist(&dist)?;
            let crit = solve_t_star(&d)?;
            let a = a.unwrap_or(-std::f64::consts::LN_2);
            let w = LinearWave::solve(&crit, &d, eps, a)?;
            print_json(&serde_json::json!({
                "phi_re": w.alpha,
                "phi_im": w.beta,
                "L": w.wavelength,
                "residual": w.identity_residual,
            }));
        }
        Command::Fronts {
            dist,
            eps,
            kind,
            dump,
            max_step,
        } => {
            let d = load_dist(&dist)?;
            let profile = build_profile(&d, eps, kind, max_step)?;
            if let Some(path) = dump {
                dump_csv(&path, "x,value", &profile.grid)?;
            }
            let report = match kind {
                KindArg::Super => check_super_inequality(&profile, &d),
                KindArg::Sub => check_sub_inequality(&profile, &d),
            };
            print_json(&serde_json::json!({
                "pass": report.pass,
                "max_violation": report.max_violation,
                "tolerance": report.tolerance,
            }));
        }
        Command::Survive {
            dist,
            v,
            eps,
            step,
            xmax,
            right,
            dump,
        } => {
            let d = load_dist(&dist)?;
            let v = match (v, eps) {
                (Some(v), None) => v,
                (None, Some(eps)) => {
                    let crit = solve_t_star(&d)?;
                    crit.v_star - eps
                }
                _ => bail!("give exactly one of --v or --eps"),
            };
            let x_max = xmax.unwrap_or_else(|| kbrw::fixedpoint::default_x_max(&d, v));
            let step = step
                .or_else(|| {
                    kbrw::lattice_step(&d, v, 100_000).map(|mut s| {
                        while s > 0.01 {
                            s *= 0.5;
                        }
                        s
                    })
                })
                .unwrap_or(x_max / 2000.0);
            let right_mode = RightMode::from(right);
            let cfg = GridConfig::new(step, x_max, right_mode);
            let run = iterate_to_fixed_point(&d, v, &cfg)?;
            if run.flagged_supercritical_v {
                eprintln!("warning: v ≥ v*, the true survival probability is 0");
            }
            if let Some(path) = dump {
                dump_csv(&path, "x,q_inf(x)", &run.q)?;
            }
            print_json(&serde_json::json!({
                "q0": run.at_zero.value,
                "q1": run.at_one.value,
                "iters": run.iters,
                "delta": run.final_delta,
                "right_mode": right_mode,
            }));
        }
        Command::Mc {
            dist,
            v,
            n,
            x0,
            replicas,
            seed,
        } => {
            let d = load_dist(&dist)?;
            let est = estimate_qn(&d, &SimConfig::new(v, n, x0, replicas, seed))?;
            print_json(&serde_json::json!({
                "estimate": est.value,
                "ci95": est.err,
                "budget_hits": est.meta["budget_hits"],
            }));
        }
        Command::BdSpeed {
            dist,
            n,
            horizon,
            burn_in,
            seed,
        } => {
            let d = load_dist(&dist)?;
            let burn_in = burn_in.unwrap_or(horizon / 5);
            let m = measure_speed(&d, n, burn_in, horizon, seed);
            let v_star = critical_params(&d).v_star;
            let shift = v_star - m.v_hat;
            let log_n = (n as f64).ln();
            print_json(&serde_json::json!({
                "v_hat": m.v_hat,
                "ci": m.ci,
                "v_star": v_star,
                "shift": shift,
                "shift_times_log2N": shift * log_n * log_n,
            }));
        }
        Command::Regime { dist, v } => {
            let d = load_dist(&dist)?;
            print_json(&serde_json::to_value(regime_report(&d, v))?);
        }
    }
    Ok(())
}

fn print_json(value: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(value).expect("serializable"));
}
