//! `infiltrate`: grid solves, oracle comparisons and series convergence
//! studies for vertical infiltration into a finite soil column.
//!
//! Exit status: 0 success, 1 usage or config error, 2 numerical failure,
//! 3 comparison gate exceeded.

mod config;
mod plot;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::anyhow;
use clap::{Parser, Subcommand, ValueEnum};
use infiltration::model::theta_from_w;
use infiltration::oracle::{
    build_series, cn_solve, sample_mesh, series_solution, truncation_study,
};
use infiltration::solver::Solver;

use crate::config::RunConfig;

/// Series values below this time are dominated by the Gibbs oscillation of
/// the incompatible initial data and are left out of comparisons.
const SERIES_T_MIN: f64 = 60.0;

#[derive(Debug, Parser)]
#[command(
    name = "infiltrate",
    version,
    about = "Vertical infiltration in a finite soil column"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate θ, w and w_x on the configured grid.
    Solve(Common),
    /// Compare against a reference solver.
    Compare {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = Oracle::Cn)]
        oracle: Oracle,
    },
    /// Series truncation error against the number of modes.
    Convergence(Common),
}

#[derive(Debug, clap::Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// CSV destination; overrides `output.csv`. Standard output when neither is set.
    #[arg(long)]
    output: Option<PathBuf>,
    /// SVG destination; overrides `output.plot`.
    #[arg(long)]
    plot: Option<PathBuf>,
    /// Abort on the first failing grid cell.
    #[arg(long)]
    strict: bool,
    /// Also write the config with all defaults filled in.
    #[arg(long)]
    effective_config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Oracle {
    Cn,
    Series,
}

#[derive(Debug)]
enum Failure {
    Usage(anyhow::Error),
    Numerical(anyhow::Error),
    Gate(String),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Usage(e)
    }
}

impl From<infiltration::Error> for Failure {
    fn from(e: infiltration::Error) -> Self {
        use infiltration::Error::*;
        match e {
            InvalidParameter(_) | StrategyMismatch(_) | Geometry(_) => Failure::Usage(e.into()),
            _ => Failure::Numerical(e.into()),
        }
    }
}

type Outcome = Result<(), Failure>;

fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        String::new()
    }
}

fn emit(path: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match path {
        Some(p) => {
            std::fs::write(p, text).map_err(|e| anyhow!("cannot write {}: {e}", p.display()))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load(common: &Common) -> anyhow::Result<RunConfig> {
    let mut cfg = RunConfig::load(&common.config)?;
    if let Some(p) = &common.output {
        cfg.output.csv = Some(p.clone());
    }
    if let Some(p) = &common.plot {
        cfg.output.plot = Some(p.clone());
    }
    if let Some(p) = &common.effective_config {
        emit(Some(p), &cfg.to_toml()?)?;
    }
    Ok(cfg)
}

fn build_solver(cfg: &RunConfig) -> Result<Solver, Failure> {
    Ok(Solver::new(
        cfg.soil,
        &cfg.scenario,
        &cfg.contour,
        cfg.strategy,
        cfg.solver_options(),
    )?)
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("plot");
    path.with_file_name(format!("{stem}_{suffix}.svg"))
}

fn cmd_solve(common: &Common) -> Outcome {
    let cfg = load(common)?;
    if cfg.grid.times_s.is_empty() {
        return Err(Failure::Usage(anyhow!(
            "no output requested: grid.times_s is empty"
        )));
    }
    let solver = build_solver(&cfg)?;
    let xs = cfg.xs();
    let ts = &cfg.grid.times_s;
    let grid = solver.solve_grid(&xs, ts, common.strict)?;

    let mut csv = String::from("x_m,t_s,theta,w,wx,quad_err\n");
    for (j, &t) in ts.iter().enumerate() {
        for (i, &x) in xs.iter().enumerate() {
            let d = &grid.diagnostics[i][j];
            let _ = writeln!(
                csv,
                "{},{},{},{},{},{}",
                num(x),
                num(t),
                num(grid.theta[i][j]),
                num(grid.w[i][j]),
                num(grid.wx[i][j]),
                num(d.quad_err)
            );
        }
    }
    emit(cfg.output.csv.as_deref(), &csv)?;
    let failed = grid.failed_cells();
    eprintln!(
        "solved {} cells, {failed} failed",
        xs.len() * ts.len() - failed
    );
    if let Some(p) = &cfg.output.plot {
        plot::profiles(p, &xs, ts, &grid.theta)?;
        plot::heatmap(&sibling(p, "heatmap"), &xs, ts, &grid.theta)?;
    }
    Ok(())
}

fn cmd_compare(common: &Common, oracle: Oracle) -> Outcome {
    let cfg = load(common)?;
    let ts: Vec<f64> = match oracle {
        Oracle::Cn => cfg.grid.times_s.clone(),
        Oracle::Series => cfg
            .grid
            .times_s
            .iter()
            .copied()
            .filter(|&t| t >= SERIES_T_MIN)
            .collect(),
    };
    if ts.len() < cfg.grid.times_s.len() {
        log::warn!("times below {SERIES_T_MIN} s are skipped for the series oracle");
    }
    if ts.is_empty() {
        return Err(Failure::Usage(anyhow!(
            "no output requested: no comparable times"
        )));
    }
    let solver = build_solver(&cfg)?;
    let xs = cfg.xs();
    let fokas = solver.solve_grid(&xs, &ts, true)?;

    let mut other = vec![vec![f64::NAN; ts.len()]; xs.len()];
    match oracle {
        Oracle::Cn => {
            let fd = cn_solve(&solver.ctx, &cfg.fd_config(), &ts)?;
            for (row, &x) in other.iter_mut().zip(&xs) {
                for (j, cell) in row.iter_mut().enumerate() {
                    *cell = sample_mesh(&fd, x, j, &solver.ctx)?.2;
                }
            }
        }
        Oracle::Series => {
            let series = build_series(&solver.ctx, cfg.series.terms)?;
            for (i, &x) in xs.iter().enumerate() {
                for (j, &t) in ts.iter().enumerate() {
                    let p = series_solution(&solver.ctx, &series, cfg.series.terms, x, t)?;
                    other[i][j] = theta_from_w(p.w, p.wx, &solver.ctx.soil)?;
                }
            }
        }
    }

    let mut csv = String::from("x_m,t_s,theta_fokas,theta_oracle,abs_diff\n");
    let (mut worst, mut total): (f64, f64) = (0.0, 0.0);
    for (j, &t) in ts.iter().enumerate() {
        for (i, &x) in xs.iter().enumerate() {
            let (a, b) = (fokas.theta[i][j], other[i][j]);
            let diff = (a - b).abs();
            worst = worst.max(diff);
            total += diff;
            let _ = writeln!(
                csv,
                "{},{},{},{},{}",
                num(x),
                num(t),
                num(a),
                num(b),
                num(diff)
            );
        }
    }
    emit(cfg.output.csv.as_deref(), &csv)?;
    let mean = total / (xs.len() * ts.len()) as f64;
    eprintln!("max abs_diff = {worst:.3e}, mean abs_diff = {mean:.3e}");
    if let Some(p) = &cfg.output.plot {
        plot::profiles(p, &xs, &ts, &fokas.theta)?;
    }
    if worst > cfg.gate.max_theta_diff {
        return Err(Failure::Gate(format!(
            "max abs_diff {worst:.3e} exceeds gate {:.3e}",
            cfg.gate.max_theta_diff
        )));
    }
    Ok(())
}

fn cmd_convergence(common: &Common) -> Outcome {
    let cfg = load(common)?;
    let t = cfg.convergence.t_s;
    if t.is_nan() || t < SERIES_T_MIN {
        return Err(Failure::Usage(anyhow!(
            "convergence.t_s must be >= {SERIES_T_MIN} s, got {t}"
        )));
    }
    if cfg.convergence.ns.is_empty() {
        return Err(Failure::Usage(anyhow!(
            "no output requested: convergence.ns is empty"
        )));
    }
    let solver = build_solver(&cfg)?;
    let rows = truncation_study(&solver, t, &cfg.convergence.ns, &cfg.xs())?;
    let mut csv = String::from("N,max_abs_err\n");
    for r in &rows {
        let _ = writeln!(csv, "{},{}", r.n, num(r.max_abs_err));
    }
    emit(cfg.output.csv.as_deref(), &csv)?;
    if let Some(p) = &cfg.output.plot {
        let pts: Vec<(usize, f64)> = rows.iter().map(|r| (r.n, r.max_abs_err)).collect();
        plot::convergence(p, &pts, t)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let outcome = match &cli.command {
        Command::Solve(c) => cmd_solve(c),
        Command::Compare { common, oracle } => cmd_compare(common, *oracle),
        Command::Convergence(c) => cmd_convergence(c),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Numerical(e)) => {
            eprintln!("numerical failure: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Gate(msg)) => {
            eprintln!("comparison gate failed: {msg}");
            ExitCode::from(3)
        }
    }
}
