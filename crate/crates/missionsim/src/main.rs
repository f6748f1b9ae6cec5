use std::fs;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use nodal_core::dynamics::{propagate, write_trajectory_csv, PerturbationInput};
use nodal_missionsim::config::ScenarioConfig;
use nodal_missionsim::flyby::{run_filter, RunPlan};
use nodal_missionsim::maneuver::run_maneuver_sweep;
use nodal_missionsim::montecarlo::run_montecarlo;
use nodal_missionsim::output::{
    write_envelopes, write_filter_log, write_json, write_screening, write_sweep, write_validation,
};
use nodal_missionsim::scenario::{truth_trajectory, Scenario};
use nodal_missionsim::screening::screen;
use nodal_missionsim::validation::{run_validation, ValidationCase};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "nodal", version, about = "Nodal-element relative navigation and conjunction tools")]
struct Cli {
    /// Scenario file (JSON); defaults apply to missing fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// 200 runs at a 5 s cadence.
    #[arg(long, global = true)]
    paper_scale: bool,
    /// Gravitational parameter override, km^3/s^2.
    #[arg(long, global = true)]
    mu: Option<f64>,
    /// Relative integration tolerance override.
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Compare the nodal model with inertial propagation under test forcing.
    Validate {
        /// Forcing amplitude, km/s^2.
        #[arg(long, default_value_t = 1e-3)]
        amplitude: f64,
    },
    /// Propagate the nominal encounter and write the nodal trajectory.
    Propagate {
        /// Sample spacing, s.
        #[arg(long, default_value_t = 3600.0)]
        step: f64,
    },
    /// Evaluate the conjunction margins along the nominal encounter.
    Screen {
        #[arg(long, default_value_t = 3600.0)]
        step: f64,
    },
    /// One filter run with its full log.
    Flyby {
        #[arg(long, default_value_t = 0)]
        run: u64,
    },
    /// Monte Carlo filter campaign.
    Montecarlo,
    /// Avoidance impulse sweep and replay of the selected impulse.
    Maneuver,
}

fn load_config(cli: &Cli) -> Result<ScenarioConfig> {
    let mut cfg = match &cli.config {
        Some(p) => ScenarioConfig::load(p).with_context(|| format!("reading {}", p.display()))?,
        None => ScenarioConfig::default(),
    };
    if cli.paper_scale {
        cfg = cfg.paper_scale();
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(mu) = cli.mu {
        cfg.mu = mu;
    }
    if let Some(t) = cli.tol {
        cfg.rel_tol = t;
    }
    cfg.validate()?;
    Ok(cfg)
}

#[derive(Serialize)]
struct FlybySummary {
    run: u64,
    steps: u64,
    detected: bool,
    outliers: u64,
    initial_range_err: f64,
    final_range_err: f64,
    final_range_3sigma: f64,
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let cfg = load_config(&cli)?;
    let out = &cli.out;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;

    match &cli.cmd {
        Cmd::Validate { amplitude } => {
            let mut case = ValidationCase { amplitude: *amplitude, rel_tol: cfg.rel_tol, ..Default::default() };
            if let Some(mu) = cli.mu {
                case.mu = mu;
            }
            let report = run_validation(&case)?;
            write_validation(&out.join("validation.csv"), &report)?;
            write_json(&out.join("validation.json"), &report)?;
            println!("max position difference {:.3e} km in {:.2} s", report.max_error_km, report.elapsed_s);
        }
        Cmd::Propagate { step } => {
            let scn = Scenario::from_config(&cfg)?;
            let (oe, eta) = scn.initial_state()?;
            let n = (scn.t_impact / step).floor() as usize;
            let times: Vec<f64> = (0..=n).map(|k| k as f64 * step).collect();
            let zero = |_: f64, _: &_, _: &_| PerturbationInput::zero();
            let samples = propagate(&oe, &eta, cfg.mu, zero, 0.0, &times, &cfg.integrator())?;
            let mut w = std::io::BufWriter::new(fs::File::create(out.join("trajectory.csv"))?);
            write_trajectory_csv(&mut w, &samples)?;
            println!("{} samples written", samples.len());
        }
        Cmd::Screen { step } => {
            let report = screen(&cfg, *step)?;
            write_screening(&out.join("screening.csv"), &report.rows)?;
            write_json(&out.join("screening.json"), &report)?;
            println!(
                "collision {} at t = {:.1} s, minimum distance {:.3} km",
                if report.collides { "predicted" } else { "not predicted" },
                report.t_min,
                report.d_min_km
            );
        }
        Cmd::Flyby { run } => {
            let scn = Scenario::from_config(&cfg)?;
            let truth = truth_trajectory(&scn, &cfg, &cfg.sample_times())?;
            let plan = RunPlan {
                cfg: &cfg,
                truth: &truth,
                noise: cfg.noise()?,
                log_stride: truth.len(),
                keep_full: true,
                maneuver_steps: &[],
            };
            let r = run_filter(&plan, *run)?;
            write_filter_log(&out.join("filter_log.csv"), r.full.as_deref().unwrap_or_default(), &truth)?;
            let s = FlybySummary {
                run: r.run,
                steps: r.steps,
                detected: r.detected,
                outliers: r.outliers,
                initial_range_err: r.initial_range_err,
                final_range_err: r.final_range_err,
                final_range_3sigma: r.final_range_3sigma,
            };
            write_json(&out.join("flyby.json"), &s)?;
            println!("final range error {:.1} km (3-sigma {:.1} km)", s.final_range_err, s.final_range_3sigma);
        }
        Cmd::Montecarlo => {
            let c = run_montecarlo(&cfg, &[])?;
            write_envelopes(&out.join("envelopes.csv"), &c.envelopes)?;
            if let Some(full) = c.runs[0].full.as_deref() {
                write_filter_log(&out.join("run0_log.csv"), full, &c.truth)?;
            }
            write_json(&out.join("summary.json"), &c.summary)?;
            let s = &c.summary;
            println!(
                "{} runs: detection {:.3}, coverage {:.4}, final range sigma {:.1} km",
                s.runs, s.detection_rate, s.coverage_aggregate, s.final_range_err_sigma
            );
        }
        Cmd::Maneuver => {
            let r = run_maneuver_sweep(&cfg)?;
            write_sweep(&out.join("dv_sweep.csv"), &r.sweep)?;
            write_json(&out.join("maneuver.json"), &r)?;
            println!(
                "impulse {:.4} m/s at t = {:.0} s; closest approach {:.1} km (nominal {:.1} km)",
                r.selected.dv_norm * 1e3,
                r.selected.t,
                r.maneuvered.distance_km,
                r.nominal.distance_km
            );
        }
    }
    Ok(())
}
