use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Parser;

use wavecarve_cli::config::{parse_config, RunConfig, ScenarioName, StateKind};
use wavecarve_cli::scenario::{
    parse_sweep, run_scenario, sweep_csv_header, sweep_csv_row, sweep_subdir, write_outputs,
};

/// Simulates a Gaussian matter-wave packet passing a thin absorbing barrier
/// with time-dependent transparency, and writes the transmitted state's
/// Husimi distribution plus derived observables as plot-ready data.
#[derive(Parser, Debug)]
#[command(name = "wavecarve", version, about)]
struct Args {
    /// Key-value configuration file (flat dotted keys); defaults describe
    /// the reference rubidium-cloud run.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Scenario: free|shift|split|squeeze|exponential|custom.
    #[arg(long)]
    scenario: Option<String>,

    /// Aperture rate gamma in 1/s.
    #[arg(long)]
    gamma: Option<f64>,

    /// Run a rate sweep, e.g. gamma=0:200:5, writing one summary row per
    /// value plus per-value artifact directories.
    #[arg(long)]
    sweep: Option<String>,

    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Grid resolution as nx,nv.
    #[arg(long)]
    grid: Option<String>,

    /// Force a pure (zero-temperature) state.
    #[arg(long, conflicts_with = "thermal")]
    pure: bool,

    /// Force the finite-temperature state (requires packet.dv_mps > 0).
    #[arg(long)]
    thermal: bool,

    /// Quadrature relative tolerance.
    #[arg(long = "rel-tol")]
    rel_tol: Option<f64>,
}

fn load_config(args: &Args) -> Result<RunConfig> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?;
            parse_config(&text).with_context(|| format!("config {}", path.display()))?
        }
        None => RunConfig::default(),
    };
    if let Some(name) = &args.scenario {
        cfg.scenario = match name.as_str() {
            "free" => ScenarioName::Free,
            "shift" => ScenarioName::Shift,
            "split" => ScenarioName::Split,
            "squeeze" => ScenarioName::Squeeze,
            "exponential" => ScenarioName::Exponential,
            "custom" => ScenarioName::Custom,
            other => anyhow::bail!("--scenario: unknown scenario '{other}'"),
        };
    }
    if let Some(gamma) = args.gamma {
        cfg.gamma_per_s = gamma;
    }
    if let Some(out) = &args.out {
        cfg.directory = out.display().to_string();
    }
    if let Some(grid) = &args.grid {
        let (nx, nv) = grid.split_once(',').context("--grid expects nx,nv")?;
        cfg.nx = nx.trim().parse().context("--grid nx")?;
        cfg.nv = nv.trim().parse().context("--grid nv")?;
    }
    if args.pure {
        cfg.state = StateKind::Pure;
    }
    if args.thermal {
        cfg.state = StateKind::Thermal;
    }
    if let Some(rel_tol) = args.rel_tol {
        cfg.rel_tol = rel_tol;
    }
    Ok(cfg)
}

fn run(args: &Args) -> Result<i32> {
    let cfg = load_config(args)?;
    let outdir = PathBuf::from(&cfg.directory);
    match &args.sweep {
        None => {
            let outcome = run_scenario(&cfg)?;
            write_outputs(&cfg, &outcome, &outdir)?;
            for w in outcome.summary["warnings"].as_array().into_iter().flatten() {
                eprintln!("warning: {}", w.as_str().unwrap_or_default());
            }
            println!(
                "{} ({}) -> {} | peak x = {:.4e} m, transmission = {:.4e}",
                cfg.scenario.as_str(),
                cfg.state.as_str(),
                outdir.display(),
                outcome.summary["observables"]["peak_x_m"]
                    .as_f64()
                    .unwrap_or(f64::NAN),
                outcome.summary["observables"]["transmission"]
                    .as_f64()
                    .unwrap_or(f64::NAN),
            );
            Ok(outcome.exit_code)
        }
        Some(sweep) => {
            let gammas = parse_sweep(sweep)?;
            fs::create_dir_all(&outdir)
                .with_context(|| format!("creating {}", outdir.display()))?;
            let mut rows = String::from(sweep_csv_header());
            let mut exit_code = 0;
            for (k, &gamma) in gammas.iter().enumerate() {
                let mut point_cfg = cfg.clone();
                point_cfg.gamma_per_s = gamma;
                let subdir = sweep_subdir(&outdir, k, gamma);
                point_cfg.directory = subdir.display().to_string();
                let outcome = run_scenario(&point_cfg)?;
                write_outputs(&point_cfg, &outcome, &subdir)?;
                rows.push_str(&sweep_csv_row(gamma, &outcome.summary));
                exit_code = exit_code.max(outcome.exit_code);
                println!(
                    "gamma = {gamma:+.4e} 1/s -> {} | uncertainty = {:.4} hbar, transmission = {:.4e}",
                    subdir.display(),
                    outcome.summary["observables"]["uncertainty_hbar"]
                        .as_f64()
                        .unwrap_or(f64::NAN),
                    outcome.summary["observables"]["transmission"]
                        .as_f64()
                        .unwrap_or(f64::NAN),
                );
            }
            let sweep_path = outdir.join("sweep.csv");
            fs::write(&sweep_path, rows)
                .with_context(|| format!("writing {}", sweep_path.display()))?;
            Ok(exit_code)
        }
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(0) => ExitCode::SUCCESS,
        Ok(code) => ExitCode::from(code as u8),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}
