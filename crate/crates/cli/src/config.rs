//! Run configuration: a flat dotted-key/value document with full validation
//! and round-trippable serialization. Omitted keys fall back to the
//! reference rubidium-cloud run (86.909 u, sigma 30 um, x0 -0.15 mm,
//! v0 3 mm/s, dv 0.1 mm/s, t 100 ms).

use anyhow::{anyhow, bail, Context, Result};
use wavecarve::{GridSpec, QuadratureConfig, SimulationWindow, WavePacketSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioName {
    Free,
    Shift,
    Split,
    Squeeze,
    Exponential,
    Custom,
}

impl ScenarioName {
    pub fn as_str(&self) -> &'static str {
        match self {
            ScenarioName::Free => "free",
            ScenarioName::Shift => "shift",
            ScenarioName::Split => "split",
            ScenarioName::Squeeze => "squeeze",
            ScenarioName::Exponential => "exponential",
            ScenarioName::Custom => "custom",
        }
    }

    fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "free" => ScenarioName::Free,
            "shift" => ScenarioName::Shift,
            "split" => ScenarioName::Split,
            "squeeze" => ScenarioName::Squeeze,
            "exponential" => ScenarioName::Exponential,
            "custom" => ScenarioName::Custom,
            other => bail!(
                "scenario.name: unknown scenario '{other}' \
                 (expected free|shift|split|squeeze|exponential|custom)"
            ),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateKind {
    Pure,
    Thermal,
}

impl StateKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            StateKind::Pure => "pure",
            StateKind::Thermal => "thermal",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mass_u: f64,
    pub sigma_m: f64,
    pub x0_m: f64,
    pub v0_mps: f64,
    pub dv_mps: f64,
    pub t_s: f64,
    pub scenario: ScenarioName,
    pub gamma_per_s: f64,
    pub chi0: Option<f64>,
    pub table: Option<String>,
    pub state: StateKind,
    pub nx: usize,
    pub nv: usize,
    pub x_min_m: Option<f64>,
    pub x_max_m: Option<f64>,
    pub v_min_mps: Option<f64>,
    pub v_max_mps: Option<f64>,
    pub rel_tol: f64,
    pub panels: usize,
    pub nodes_per_panel: usize,
    pub max_refinements: u32,
    pub directory: String,
    pub formats: String,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            mass_u: 86.909,
            sigma_m: 30e-6,
            x0_m: -0.15e-3,
            v0_mps: 3e-3,
            dv_mps: 0.1e-3,
            t_s: 0.1,
            scenario: ScenarioName::Free,
            gamma_per_s: 0.0,
            chi0: None,
            table: None,
            state: StateKind::Thermal,
            nx: 161,
            nv: 161,
            x_min_m: None,
            x_max_m: None,
            v_min_mps: None,
            v_max_mps: None,
            rel_tol: 1e-8,
            panels: 64,
            nodes_per_panel: 16,
            max_refinements: 6,
            directory: "out".into(),
            formats: "csv,json".into(),
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse::<T>()
        .map_err(|_| anyhow!("{key}: cannot parse '{value}'"))
}

/// Parses the flat key-value document. Unknown keys, malformed values, and
/// invariant violations are reported with their key path; nothing malformed
/// is silently defaulted.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    let mut state_explicit = false;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("line {}: expected 'key = value', got '{line}'", lineno + 1))?;
        let (key, value) = (key.trim(), value.trim());
        match key {
            "particle.mass_u" => cfg.mass_u = parse_num(key, value)?,
            "packet.sigma_m" => cfg.sigma_m = parse_num(key, value)?,
            "packet.x0_m" => cfg.x0_m = parse_num(key, value)?,
            "packet.v0_mps" => cfg.v0_mps = parse_num(key, value)?,
            "packet.dv_mps" => cfg.dv_mps = parse_num(key, value)?,
            "window.t_s" => cfg.t_s = parse_num(key, value)?,
            "scenario.name" => cfg.scenario = ScenarioName::parse(value)?,
            "scenario.gamma_per_s" => cfg.gamma_per_s = parse_num(key, value)?,
            "scenario.chi0" => cfg.chi0 = Some(parse_num(key, value)?),
            "scenario.table" => cfg.table = Some(value.to_string()),
            "scenario.state" => {
                cfg.state = match value {
                    "pure" => StateKind::Pure,
                    "thermal" => StateKind::Thermal,
                    other => bail!("scenario.state: expected pure|thermal, got '{other}'"),
                };
                state_explicit = true;
            }
            "grid.nx" => cfg.nx = parse_num(key, value)?,
            "grid.nv" => cfg.nv = parse_num(key, value)?,
            "grid.x_min_m" => cfg.x_min_m = Some(parse_num(key, value)?),
            "grid.x_max_m" => cfg.x_max_m = Some(parse_num(key, value)?),
            "grid.v_min_mps" => cfg.v_min_mps = Some(parse_num(key, value)?),
            "grid.v_max_mps" => cfg.v_max_mps = Some(parse_num(key, value)?),
            "quadrature.rel_tol" => cfg.rel_tol = parse_num(key, value)?,
            "quadrature.panels" => cfg.panels = parse_num(key, value)?,
            "quadrature.nodes_per_panel" => cfg.nodes_per_panel = parse_num(key, value)?,
            "quadrature.max_refinements" => cfg.max_refinements = parse_num(key, value)?,
            "outputs.directory" => cfg.directory = value.to_string(),
            "outputs.formats" => cfg.formats = value.to_string(),
            other => bail!("unknown key '{other}' (line {})", lineno + 1),
        }
    }
    if !state_explicit {
        cfg.state = if cfg.dv_mps > 0.0 {
            StateKind::Thermal
        } else {
            StateKind::Pure
        };
    }
    validate(&cfg)?;
    Ok(cfg)
}

fn validate(cfg: &RunConfig) -> Result<()> {
    if !(cfg.mass_u > 0.0) {
        bail!("particle.mass_u: must be positive, got {}", cfg.mass_u);
    }
    if !(cfg.sigma_m > 0.0) {
        bail!("packet.sigma_m: must be positive, got {}", cfg.sigma_m);
    }
    if !(cfg.x0_m < 0.0) {
        bail!(
            "packet.x0_m: packet starts left of the barrier (x0 < 0), got {}",
            cfg.x0_m
        );
    }
    if !(cfg.v0_mps > 0.0) {
        bail!(
            "packet.v0_mps: packet moves towards the barrier (v0 > 0), got {}",
            cfg.v0_mps
        );
    }
    if !(cfg.dv_mps >= 0.0) {
        bail!(
            "packet.dv_mps: thermal spread must be >= 0, got {}",
            cfg.dv_mps
        );
    }
    let spec = WavePacketSpec::new(cfg.mass_u, cfg.sigma_m, cfg.x0_m, cfg.v0_mps, cfg.dv_mps)
        .context("packet.*")?;
    SimulationWindow::new(cfg.t_s, &spec).context("window.t_s")?;
    if cfg.state == StateKind::Thermal && !(cfg.dv_mps > 0.0) {
        bail!("scenario.state: thermal state requires packet.dv_mps > 0");
    }
    if cfg.scenario == ScenarioName::Exponential && cfg.chi0.is_none() {
        bail!("scenario.chi0: required for the exponential scenario");
    }
    if let Some(chi0) = cfg.chi0 {
        if !(chi0 > 0.0 && chi0 <= 1.0) {
            bail!("scenario.chi0: must lie in (0, 1], got {chi0}");
        }
    }
    if cfg.scenario == ScenarioName::Custom && cfg.table.is_none() {
        bail!("scenario.table: required for the custom scenario");
    }
    if cfg.nx < 2 || cfg.nv < 2 {
        bail!(
            "grid.nx/grid.nv: need at least 2 points per axis, got {}x{}",
            cfg.nx,
            cfg.nv
        );
    }
    if !(cfg.rel_tol > 0.0 && cfg.rel_tol < 1.0) {
        bail!(
            "quadrature.rel_tol: must lie in (0, 1), got {}",
            cfg.rel_tol
        );
    }
    if cfg.panels < 1 {
        bail!("quadrature.panels: must be >= 1");
    }
    if cfg.nodes_per_panel < 2 {
        bail!("quadrature.nodes_per_panel: must be >= 2");
    }
    for (key, value) in [("grid.x_min_m", cfg.x_min_m), ("grid.x_max_m", cfg.x_max_m)] {
        if let Some(v) = value {
            if !v.is_finite() {
                bail!("{key}: must be finite");
            }
        }
    }
    Ok(())
}

/// Flat-key serialization; `parse_config` reads it back to an equal config.
pub fn serialize_config(cfg: &RunConfig) -> String {
    let mut out = String::new();
    let mut push = |k: &str, v: String| {
        out.push_str(k);
        out.push_str(" = ");
        out.push_str(&v);
        out.push('\n');
    };
    push("particle.mass_u", format!("{:?}", cfg.mass_u));
    push("packet.sigma_m", format!("{:?}", cfg.sigma_m));
    push("packet.x0_m", format!("{:?}", cfg.x0_m));
    push("packet.v0_mps", format!("{:?}", cfg.v0_mps));
    push("packet.dv_mps", format!("{:?}", cfg.dv_mps));
    push("window.t_s", format!("{:?}", cfg.t_s));
    push("scenario.name", cfg.scenario.as_str().into());
    push("scenario.gamma_per_s", format!("{:?}", cfg.gamma_per_s));
    if let Some(chi0) = cfg.chi0 {
        push("scenario.chi0", format!("{chi0:?}"));
    }
    if let Some(ref table) = cfg.table {
        push("scenario.table", table.clone());
    }
    push("scenario.state", cfg.state.as_str().into());
    push("grid.nx", cfg.nx.to_string());
    push("grid.nv", cfg.nv.to_string());
    if let Some(v) = cfg.x_min_m {
        push("grid.x_min_m", format!("{v:?}"));
    }
    if let Some(v) = cfg.x_max_m {
        push("grid.x_max_m", format!("{v:?}"));
    }
    if let Some(v) = cfg.v_min_mps {
        push("grid.v_min_mps", format!("{v:?}"));
    }
    if let Some(v) = cfg.v_max_mps {
        push("grid.v_max_mps", format!("{v:?}"));
    }
    push("quadrature.rel_tol", format!("{:?}", cfg.rel_tol));
    push("quadrature.panels", cfg.panels.to_string());
    push(
        "quadrature.nodes_per_panel",
        cfg.nodes_per_panel.to_string(),
    );
    push(
        "quadrature.max_refinements",
        cfg.max_refinements.to_string(),
    );
    push("outputs.directory", cfg.directory.clone());
    push("outputs.formats", cfg.formats.clone());
    out
}

impl RunConfig {
    pub fn spec(&self) -> Result<WavePacketSpec> {
        WavePacketSpec::new(
            self.mass_u,
            self.sigma_m,
            self.x0_m,
            self.v0_mps,
            self.dv_mps,
        )
        .context("packet.*")
    }

    pub fn window(&self, spec: &WavePacketSpec) -> Result<SimulationWindow> {
        SimulationWindow::new(self.t_s, spec).context("window.t_s")
    }

    pub fn quadrature(&self) -> QuadratureConfig {
        QuadratureConfig {
            panels: self.panels,
            nodes_per_panel: self.nodes_per_panel,
            rel_tol: self.rel_tol,
            max_refinements: self.max_refinements,
        }
    }

    /// Grid: the built-in default window with explicit overrides applied.
    pub fn grid(&self, spec: &WavePacketSpec, window: &SimulationWindow) -> GridSpec {
        let mut grid = GridSpec::default_for(spec, window);
        grid.nx = self.nx;
        grid.nv = self.nv;
        if let Some(v) = self.x_min_m {
            grid.x_min = v;
        }
        if let Some(v) = self.x_max_m {
            grid.x_max = v;
        }
        if let Some(v) = self.v_min_mps {
            grid.v_min = v;
        }
        if let Some(v) = self.v_max_mps {
            grid.v_max = v;
        }
        grid
    }
}
