//! Scenario orchestration: protocol construction, field evaluation,
//! observables, regime warnings, and the on-disk artifacts (husimi.csv,
//! aperture.csv, summary.json, predictions.json).

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use serde_json::{json, Value};

use wavecarve::observables::observable_report;
use wavecarve::semiclassics::predicted_shift;
use wavecarve::transmission::husimi_grid;
use wavecarve::{
    regime_report, ApertureProtocol, FieldKind, HusimiField, RegimeReport, ShiftPrediction,
    TabulatedAperture,
};

use crate::config::{serialize_config, RunConfig, ScenarioName, StateKind};

pub struct ScenarioOutcome {
    pub summary: Value,
    pub field: HusimiField,
    pub predictions: Option<ShiftPrediction>,
    /// 0 on success, 2 when only regime warnings were raised.
    pub exit_code: i32,
}

pub fn build_protocol(cfg: &RunConfig, t0: f64) -> Result<ApertureProtocol> {
    Ok(match cfg.scenario {
        ScenarioName::Free => ApertureProtocol::Free,
        ScenarioName::Shift => ApertureProtocol::ShiftClamped {
            gamma: cfg.gamma_per_s,
            t0,
        },
        ScenarioName::Split => ApertureProtocol::SplitCosh {
            gamma: cfg.gamma_per_s,
            t0,
        },
        ScenarioName::Squeeze => ApertureProtocol::SqueezeExp {
            gamma: cfg.gamma_per_s,
            t0,
        },
        ScenarioName::Exponential => ApertureProtocol::Exponential {
            chi0: cfg
                .chi0
                .context("scenario.chi0: required for the exponential scenario")?,
            gamma: cfg.gamma_per_s,
        },
        ScenarioName::Custom => {
            let path = cfg
                .table
                .as_ref()
                .context("scenario.table: required for the custom scenario")?;
            ApertureProtocol::Tabulated(
                TabulatedAperture::from_csv_path(Path::new(path))
                    .with_context(|| format!("scenario.table: {path}"))?,
            )
        }
    })
}

fn regime_json(report: &RegimeReport) -> Value {
    json!({
        "lambdabar_m": report.lambdabar,
        "epsilon": report.epsilon,
        "ratio_localization": report.ratio_localization,
        "ratio_passage": report.ratio_passage,
        "ratio_semiclassical": report.ratio_semiclassical,
        "gamma_bound_per_s": report.gamma_bound,
        "satisfied": {
            "localization": report.satisfied.localization,
            "passage": report.satisfied.passage,
            "semiclassical": report.satisfied.semiclassical,
        },
    })
}

/// Runs one scenario end to end. Artifacts are kept in memory; `write_outputs`
/// persists them.
pub fn run_scenario(cfg: &RunConfig) -> Result<ScenarioOutcome> {
    let started = Instant::now();
    let spec = cfg.spec()?;
    let window = cfg.window(&spec)?;
    let t0 = spec.barrier_crossing_time();
    let protocol = build_protocol(cfg, t0)?;
    let grid = cfg.grid(&spec, &window);
    let mut warnings = grid.validate(&spec).context("grid")?;

    let regime = regime_report(&spec, &window);
    if !regime.satisfied.localization {
        warnings.push("regime: packet not well separated from the barrier (|x0| vs sigma)".into());
    }
    if !regime.satisfied.passage {
        warnings.push("regime: packet may not have fully passed the barrier by t".into());
    }
    if !regime.satisfied.semiclassical {
        warnings.push("regime: frozen-Gaussian (semiclassical) condition violated".into());
    }
    if cfg.gamma_per_s.abs() > regime.gamma_bound / 5.0 {
        warnings.push(format!(
            "aperture rate |gamma| = {} 1/s is not small against the bound {} 1/s",
            cfg.gamma_per_s.abs(),
            regime.gamma_bound
        ));
    }

    let kind = match cfg.state {
        StateKind::Pure => FieldKind::Pure,
        StateKind::Thermal => FieldKind::Thermal,
    };
    let field = husimi_grid(&spec, &protocol, &grid, window.t(), &cfg.quadrature(), kind)
        .context("husimi field evaluation")?;
    let report = observable_report(&field).context("observables")?;
    if report.grid_mass_fraction < 0.999 {
        warnings.push(format!(
            "grid captures an estimated {:.4} of the distribution (physical barrier-side \
             truncation included)",
            report.grid_mass_fraction
        ));
    }

    let predictions = match cfg.scenario {
        ScenarioName::Shift | ScenarioName::Exponential => {
            Some(predicted_shift(&spec, &window, &protocol).context("shift prediction")?)
        }
        _ => None,
    };

    let exit_code = if regime.satisfied.all() { 0 } else { 2 };
    let summary = json!({
        "config": serialize_config(cfg),
        "scenario": cfg.scenario.as_str(),
        "state": cfg.state.as_str(),
        "observables": {
            "peak_x_m": report.peak.x,
            "peak_v_mps": report.peak.v,
            "mean_x_m": report.mean_x,
            "mean_v_mps": report.mean_v,
            "disp_x_m": report.disp_x,
            "disp_v_mps": report.disp_v,
            "uncertainty_J_s": report.uncertainty,
            "uncertainty_hbar": report.uncertainty_hbar,
            "transmission": report.transmission,
            "transmission_raw": report.transmission_raw,
            "n_modes": report.n_modes,
            "grid_mass_fraction": report.grid_mass_fraction,
        },
        "regime": regime_json(&regime),
        "grid": {
            "x_min_m": grid.x_min,
            "x_max_m": grid.x_max,
            "nx": grid.nx,
            "v_min_mps": grid.v_min,
            "v_max_mps": grid.v_max,
            "nv": grid.nv,
        },
        "quadrature": {
            "panels": cfg.panels,
            "nodes_per_panel": cfg.nodes_per_panel,
            "rel_tol": cfg.rel_tol,
            "max_refinements": cfg.max_refinements,
            "time_nodes_per_axis": cfg.panels * cfg.nodes_per_panel,
        },
        "field_max": field.max_value(),
        "warnings": warnings,
        "wall_clock_s": started.elapsed().as_secs_f64(),
        "exit_code": exit_code,
    });

    Ok(ScenarioOutcome {
        summary,
        field,
        predictions,
        exit_code,
    })
}

fn atomic_write(path: &Path, contents: &str) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, contents).with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(&tmp, path).with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

fn husimi_csv(field: &HusimiField) -> String {
    let mut out = String::with_capacity(field.values.len() * 72 + 32);
    out.push_str("x_tilde_m,v_tilde_mps,H\n");
    for (ix, &x) in field.x_grid.iter().enumerate() {
        for (iv, &v) in field.v_grid.iter().enumerate() {
            out.push_str(&format!(
                "{:.16e},{:.16e},{:.16e}\n",
                x,
                v,
                field.value(ix, iv)
            ));
        }
    }
    out
}

fn aperture_csv(protocol: &ApertureProtocol, t: f64) -> Result<String> {
    let mut out = String::with_capacity(1000 * 48 + 16);
    out.push_str("tau_s,chi\n");
    for k in 0..1000 {
        let tau = t * k as f64 / 999.0;
        let chi = protocol
            .evaluate(tau)
            .with_context(|| format!("aperture sample at tau = {tau}"))?;
        out.push_str(&format!("{:.16e},{:.16e}\n", tau, chi));
    }
    Ok(out)
}

/// Persists the artifacts for one finished scenario into `dir`.
pub fn write_outputs(cfg: &RunConfig, outcome: &ScenarioOutcome, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let formats: Vec<&str> = cfg.formats.split(',').map(str::trim).collect();
    let spec = cfg.spec()?;
    let protocol = build_protocol(cfg, spec.barrier_crossing_time())?;
    if formats.contains(&"csv") {
        atomic_write(&dir.join("husimi.csv"), &husimi_csv(&outcome.field))?;
        atomic_write(
            &dir.join("aperture.csv"),
            &aperture_csv(&protocol, cfg.t_s)?,
        )?;
    }
    if formats.contains(&"json") {
        atomic_write(
            &dir.join("summary.json"),
            &format!("{:#}\n", outcome.summary),
        )?;
        if let Some(p) = &outcome.predictions {
            let predictions = json!({
                "delta_x_m": p.delta_x,
                "peak_x_m": p.peak.x,
                "peak_v_mps": p.peak.v,
                "transmission_estimate": p.transmission_estimate,
                "gamma_within_bound": p.gamma_within_bound,
            });
            atomic_write(&dir.join("predictions.json"), &format!("{predictions:#}\n"))?;
        }
    }
    Ok(())
}

/// Parses "gamma=a:b:n" into the n-point sweep values.
pub fn parse_sweep(text: &str) -> Result<Vec<f64>> {
    let (name, range) = text
        .split_once('=')
        .context("--sweep expects gamma=a:b:n")?;
    if name.trim() != "gamma" {
        anyhow::bail!("--sweep supports only the gamma parameter, got '{name}'");
    }
    let parts: Vec<&str> = range.split(':').collect();
    if parts.len() != 3 {
        anyhow::bail!("--sweep expects gamma=a:b:n, got '{text}'");
    }
    let a: f64 = parts[0].trim().parse().context("--sweep start value")?;
    let b: f64 = parts[1].trim().parse().context("--sweep end value")?;
    let n: usize = parts[2].trim().parse().context("--sweep point count")?;
    if n < 1 {
        anyhow::bail!("--sweep needs at least one point");
    }
    if n == 1 {
        return Ok(vec![a]);
    }
    Ok((0..n)
        .map(|k| a + (b - a) * k as f64 / (n - 1) as f64)
        .collect())
}

/// One summary row per sweep value, written as sweep.csv.
pub fn sweep_csv_header() -> &'static str {
    "gamma_per_s,peak_x_m,peak_v_mps,mean_x_m,mean_v_mps,disp_x_m,disp_v_mps,\
     uncertainty_hbar,transmission,transmission_raw,n_modes\n"
}

pub fn sweep_csv_row(gamma: f64, summary: &Value) -> String {
    let obs = &summary["observables"];
    let g = |k: &str| obs[k].as_f64().unwrap_or(f64::NAN);
    format!(
        "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{}\n",
        gamma,
        g("peak_x_m"),
        g("peak_v_mps"),
        g("mean_x_m"),
        g("mean_v_mps"),
        g("disp_x_m"),
        g("disp_v_mps"),
        g("uncertainty_hbar"),
        g("transmission"),
        g("transmission_raw"),
        obs["n_modes"].as_u64().unwrap_or(0),
    )
}

/// Output directory for one sweep point.
pub fn sweep_subdir(base: &Path, index: usize, gamma: f64) -> PathBuf {
    base.join(format!("gamma_{index:03}_{gamma:+.3e}"))
}
