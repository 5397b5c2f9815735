use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use infiltration::oracle::FdConfig;
use infiltration::solver::{ContourConfig, PoleStrategy, SolverOptions};
use infiltration::{ColumnScenario, SoilHydraulics};
use serde::{Deserialize, Serialize};

/// Everything a run needs, read from one TOML file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "auto")]
    pub strategy: PoleStrategy,
    pub soil: SoilHydraulics,
    pub scenario: ColumnScenario,
    #[serde(default)]
    pub contour: ContourConfig,
    pub grid: GridConfig,
    #[serde(default)]
    pub tol: TolConfig,
    #[serde(default)]
    pub gate: GateConfig,
    #[serde(default)]
    pub fd: FdSection,
    #[serde(default)]
    pub series: SeriesSection,
    #[serde(default)]
    pub convergence: ConvergenceSection,
    #[serde(default)]
    pub output: OutputConfig,
}

fn auto() -> PoleStrategy {
    PoleStrategy::Auto
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// Evenly spaced positions over `[0, L]`, ends included.
    pub nx: usize,
    pub times_s: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TolConfig {
    pub quad: f64,
    pub tail: f64,
    pub t_min: f64,
}

impl Default for TolConfig {
    fn default() -> Self {
        let o = SolverOptions::default();
        Self {
            quad: o.quad_tol,
            tail: o.tail_tol,
            t_min: o.t_min,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GateConfig {
    pub max_theta_diff: f64,
}

impl Default for GateConfig {
    fn default() -> Self {
        Self {
            max_theta_diff: 1e-4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FdSection {
    pub nx: usize,
    pub dt: f64,
    pub startup_steps: usize,
}

impl Default for FdSection {
    fn default() -> Self {
        let c = FdConfig::default();
        Self {
            nx: c.nx,
            dt: c.dt,
            startup_steps: c.startup_steps,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SeriesSection {
    pub terms: usize,
}

impl Default for SeriesSection {
    fn default() -> Self {
        Self { terms: 2000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConvergenceSection {
    pub t_s: f64,
    pub ns: Vec<usize>,
}

impl Default for ConvergenceSection {
    fn default() -> Self {
        Self {
            t_s: 2400.0,
            ns: vec![10, 50, 250, 1000, 2000],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlotFormat {
    #[default]
    Svg,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plot: Option<PathBuf>,
    pub format: PlotFormat,
}

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        let cfg: Self =
            toml::from_str(&text).with_context(|| format!("invalid config {}", path.display()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        self.soil.validate()?;
        self.scenario.validate()?;
        self.solver_options().validate()?;
        self.fd_config().validate()?;
        if self.grid.nx < 2 {
            bail!("grid.nx must be >= 2, got {}", self.grid.nx);
        }
        if self
            .grid
            .times_s
            .iter()
            .any(|t| !(t.is_finite() && *t >= 0.0))
        {
            bail!("grid.times_s must hold finite times >= 0");
        }
        if self.grid.times_s.windows(2).any(|p| p[1] <= p[0]) {
            bail!("grid.times_s must be sorted ascending without repeats");
        }
        if self.gate.max_theta_diff.is_nan() || self.gate.max_theta_diff <= 0.0 {
            bail!("gate.max_theta_diff must be > 0");
        }
        if self.series.terms == 0 {
            bail!("series.terms must be >= 1");
        }
        Ok(())
    }

    pub fn xs(&self) -> Vec<f64> {
        let n = self.grid.nx - 1;
        (0..=n)
            .map(|i| self.scenario.length * i as f64 / n as f64)
            .collect()
    }

    pub fn solver_options(&self) -> SolverOptions {
        SolverOptions {
            quad_tol: self.tol.quad,
            tail_tol: self.tol.tail,
            t_min: self.tol.t_min,
            ..SolverOptions::default()
        }
    }

    pub fn fd_config(&self) -> FdConfig {
        FdConfig {
            nx: self.fd.nx,
            dt: self.fd.dt,
            startup_steps: self.fd.startup_steps,
        }
    }

    /// The config with every default written out.
    pub fn to_toml(&self) -> anyhow::Result<String> {
        Ok(toml::to_string(self)?)
    }
}
