//! Assembly of `w = w₁ + w₂`, its `x`-derivative and the water content.
//!
//! `w₁` is always a contour integral. `w₂` is picked up from the pole `iγ`
//! of `1/(Dλ² + B)`: by residue when `iγ` lies above a trapezoid, as zero
//! when `q = 0`, and as zero when the exclusion path already routes
//! `w₁` around `iγ`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::contour::{
    exclusion_contour, integrate_many, trapezoid_with_angles, truncate_legs, ContourKind,
    ContourSpec, QuadratureResult, DEFAULT_MAX_PANELS,
};
use crate::error::{Error, Result};
use crate::model::{theta_from_w, ColumnScenario, SoilHydraulics};
use crate::spectral::IntegrandContext;

/// Relative imaginary part above which a cell is flagged.
pub const IMAG_WATCHDOG: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PoleStrategy {
    Residue,
    Exclusion,
    Auto,
}

/// How `w₂` is obtained once parameters and contour are known.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResolvedStrategy {
    /// `w₂` from the closed-form residue at `iγ`.
    Residue,
    /// `q = 0`: the pole sits at the origin, below the contour.
    Zero,
    /// `w₁` runs over the exclusion path; `w₂ = 0`.
    Exclusion,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum ContourConfig {
    Trapezoid {
        ell: f64,
        h: f64,
        #[serde(default = "default_right_angle")]
        right_angle: f64,
        #[serde(default = "default_left_angle")]
        left_angle: f64,
    },
    Exclusion,
}

fn default_right_angle() -> f64 {
    std::f64::consts::PI / 6.0
}

fn default_left_angle() -> f64 {
    5.0 * std::f64::consts::PI / 6.0
}

impl ContourConfig {
    pub fn trapezoid(ell: f64, h: f64) -> Self {
        Self::Trapezoid {
            ell,
            h,
            right_angle: default_right_angle(),
            left_angle: default_left_angle(),
        }
    }
}

impl Default for ContourConfig {
    fn default() -> Self {
        Self::trapezoid(5.0, 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub quad_tol: f64,
    pub tail_tol: f64,
    /// Smallest positive time evaluated by quadrature (s).
    pub t_min: f64,
    pub max_panels: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            quad_tol: 1e-12,
            tail_tol: 1e-16,
            t_min: 1.0,
            max_panels: DEFAULT_MAX_PANELS,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.quad_tol > 0.0 && self.quad_tol < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "quadrature tolerance must lie in (0, 1), got {}",
                self.quad_tol
            )));
        }
        if !(self.tail_tol > 0.0 && self.tail_tol < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "tail tolerance must lie in (0, 1), got {}",
                self.tail_tol
            )));
        }
        if !(self.t_min > 0.0 && self.t_min.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "t_min must be > 0, got {}",
                self.t_min
            )));
        }
        if self.max_panels < 64 {
            return Err(Error::InvalidParameter("max_panels must be >= 64".into()));
        }
        Ok(())
    }
}

/// Builds the contour for `config`, lowering a trapezoid until it keeps
/// `min(0.5, pole/2)` of clearance below `iA` and `iγ`.
pub fn prepare_contour(config: &ContourConfig, ctx: &IntegrandContext) -> Result<ContourSpec> {
    let c = ctx.constants;
    match *config {
        ContourConfig::Exclusion => exclusion_contour(&c),
        ContourConfig::Trapezoid {
            ell,
            h,
            right_angle,
            left_angle,
        } => {
            let mut poles = vec![c.initial_decay];
            if c.gamma > 0.0 {
                poles.push(c.gamma);
            }
            let mut h = h;
            for _ in 0..64 {
                let spec = trapezoid_with_angles(ell, h, right_angle, left_angle)?;
                let ok = poles.iter().all(|&p| {
                    let margin = 0.5f64.min(0.5 * p);
                    h <= p - margin && spec.min_clearance(&[Complex64::new(0.0, p)]) >= margin
                });
                if ok {
                    return Ok(spec);
                }
                log::warn!(
                    "trapezoid height h = {h} is too close to a pole on the imaginary axis; halving"
                );
                h *= 0.5;
            }
            Err(Error::Geometry(
                "could not place the trapezoid below the poles on the imaginary axis".into(),
            ))
        }
    }
}

/// Resolves `strategy` against the contour that is actually used.
pub fn resolve_strategy(
    strategy: PoleStrategy,
    spec: &ContourSpec,
    ctx: &IntegrandContext,
) -> Result<ResolvedStrategy> {
    let gamma = ctx.constants.gamma;
    let on_exclusion = matches!(spec.kind, ContourKind::Exclusion { .. });
    match (strategy, on_exclusion) {
        (PoleStrategy::Exclusion, true) | (PoleStrategy::Auto, true) => {
            if !(gamma > ctx.constants.initial_decay) {
                return Err(Error::StrategyMismatch(format!(
                    "exclusion path needs gamma > A, got gamma = {gamma}"
                )));
            }
            Ok(ResolvedStrategy::Exclusion)
        }
        (PoleStrategy::Exclusion, false) => Err(Error::StrategyMismatch(
            "exclusion strategy requires the exclusion contour".into(),
        )),
        (PoleStrategy::Residue, true) => Err(Error::StrategyMismatch(
            "residue strategy requires a trapezoid contour".into(),
        )),
        (PoleStrategy::Residue, false) if gamma == 0.0 => Err(Error::StrategyMismatch(
            "residue strategy needs q > 0".into(),
        )),
        (PoleStrategy::Auto, false) if gamma == 0.0 => Ok(ResolvedStrategy::Zero),
        (_, false) => {
            if let ContourKind::Trapezoid { h, .. } = spec.kind {
                if !(gamma > h) {
                    return Err(Error::StrategyMismatch(format!(
                        "pole i*gamma = {gamma}i is not above the trapezoid top at h = {h}"
                    )));
                }
            }
            Ok(ResolvedStrategy::Residue)
        }
    }
}

fn quadrature_pair(
    x: f64,
    t: f64,
    spec: &ContourSpec,
    ctx: &IntegrandContext,
    opts: &SolverOptions,
) -> Result<QuadratureResult<[Complex64; 2]>> {
    check_time(t, opts)?;
    let cut = truncate_legs(spec, ctx.soil.d, t, opts.tail_tol)?;
    integrate_many(
        &cut,
        |z| ctx.v1_pair(z, x, t),
        opts.quad_tol,
        opts.max_panels,
    )
}

fn check_time(t: f64, opts: &SolverOptions) -> Result<()> {
    if !(t >= opts.t_min) {
        return Err(Error::EarlyTime {
            t,
            t_min: opts.t_min,
        });
    }
    Ok(())
}

/// `w₁(x, t)` as a contour integral over `spec`.
pub fn w1(
    x: f64,
    t: f64,
    spec: &ContourSpec,
    ctx: &IntegrandContext,
    opts: &SolverOptions,
) -> Result<QuadratureResult> {
    check_time(t, opts)?;
    let cut = truncate_legs(spec, ctx.soil.d, t, opts.tail_tol)?;
    let res = integrate_many(
        &cut,
        |z| Ok([ctx.v1(z, x, t)?]),
        opts.quad_tol,
        opts.max_panels,
    )?;
    Ok(QuadratureResult {
        value: res.value[0],
        abs_error_estimate: res.abs_error_estimate,
        panels_used: res.panels_used,
    })
}

/// Shape factors of the residue term, `(N(x)/N(0), N'(x)/N(0))`, with
/// `N(x) = γ cosh(γ(L−x)) + C sinh(γ(L−x))`, written with decaying exponentials only.
fn residue_profile(x: f64, ctx: &IntegrandContext) -> (f64, f64) {
    let g = ctx.constants.gamma;
    let c = ctx.constants.robin;
    let l = ctx.length;
    let (plus, minus) = (g + c, g - c);
    let tail = (-2.0 * g * (l - x)).exp();
    let den = plus + minus * (-2.0 * g * l).exp();
    let shift = (-g * x).exp();
    (
        shift * (plus + minus * tail) / den,
        -g * shift * (plus - minus * tail) / den,
    )
}

fn require_flux(ctx: &IntegrandContext) -> Result<()> {
    if ctx.constants.gamma > 0.0 {
        Ok(())
    } else {
        Err(Error::StrategyMismatch(
            "the residue term exists only for q > 0".into(),
        ))
    }
}

/// Residue contribution
/// `w₂ = e^{Bt} (√(aq) cosh γ(L−x) + a(θ_L+b) sinh γ(L−x)) / (√(aq) cosh γL + a(θ_L+b) sinh γL)`.
pub fn w2_residue(x: f64, t: f64, ctx: &IntegrandContext) -> Result<f64> {
    require_flux(ctx)?;
    Ok((ctx.constants.surface_growth * t).exp() * residue_profile(x, ctx).0)
}

/// `∂w₂/∂x` of the residue contribution.
pub fn w2_residue_x(x: f64, t: f64, ctx: &IntegrandContext) -> Result<f64> {
    require_flux(ctx)?;
    Ok((ctx.constants.surface_growth * t).exp() * residue_profile(x, ctx).1)
}

/// `w₂` under a resolved strategy. Only the total `w` is strategy invariant.
pub fn w2(x: f64, t: f64, strategy: ResolvedStrategy, ctx: &IntegrandContext) -> Result<f64> {
    match strategy {
        ResolvedStrategy::Residue => w2_residue(x, t, ctx),
        ResolvedStrategy::Zero | ResolvedStrategy::Exclusion => Ok(0.0),
    }
}

/// Solution values at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointSolution {
    pub w: f64,
    pub wx: f64,
    /// Imaginary parts of the assembled `w` and `w_x` (numerical noise).
    pub w_imag: f64,
    pub wx_imag: f64,
    pub quad_err: f64,
    pub panels: usize,
}

impl PointSolution {
    /// Largest imaginary part relative to `1 + |real part|`.
    pub fn imag_ratio(&self) -> f64 {
        (self.w_imag.abs() / (1.0 + self.w.abs())).max(self.wx_imag.abs() / (1.0 + self.wx.abs()))
    }
}

/// `(w, w_x)` at `(x, t)`. At `t = 0` the initial datum is returned exactly.
pub fn w_and_wx(
    x: f64,
    t: f64,
    strategy: ResolvedStrategy,
    spec: &ContourSpec,
    ctx: &IntegrandContext,
    opts: &SolverOptions,
) -> Result<PointSolution> {
    if !(x >= 0.0 && x <= ctx.length) {
        return Err(Error::InvalidParameter(format!(
            "x = {x} lies outside [0, {}]",
            ctx.length
        )));
    }
    if t == 0.0 {
        let a = ctx.constants.initial_decay;
        let w = (-a * x).exp();
        return Ok(PointSolution {
            w,
            wx: -a * w,
            w_imag: 0.0,
            wx_imag: 0.0,
            quad_err: 0.0,
            panels: 0,
        });
    }
    let res = quadrature_pair(x, t, spec, ctx, opts)?;
    let [mut w, mut wx] = res.value;
    if strategy == ResolvedStrategy::Residue {
        w += w2_residue(x, t, ctx)?;
        wx += w2_residue_x(x, t, ctx)?;
    }
    let out = PointSolution {
        w: w.re,
        wx: wx.re,
        w_imag: w.im,
        wx_imag: wx.im,
        quad_err: res.abs_error_estimate,
        panels: res.panels_used,
    };
    if out.imag_ratio() > IMAG_WATCHDOG {
        log::warn!(
            "imaginary part {:e} at x = {x}, t = {t} exceeds the watchdog",
            out.imag_ratio()
        );
    }
    if !(out.w > 0.0) {
        return Err(Error::NonPositiveW { w: out.w, x, t });
    }
    Ok(out)
}

/// Everything needed to evaluate the solution pointwise.
#[derive(Debug, Clone)]
pub struct Solver {
    pub ctx: IntegrandContext,
    pub contour: ContourSpec,
    pub strategy: ResolvedStrategy,
    pub options: SolverOptions,
}

/// Diagnostics for one grid cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellDiagnostics {
    pub quad_err: f64,
    pub panels: usize,
    pub imag_ratio: f64,
    /// Set when the cell failed in non-strict mode; its fields then hold NaN.
    pub error: Option<Error>,
}

/// Fields on `xs × ts`; every matrix is indexed `[ix][it]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionGrid {
    pub xs: Vec<f64>,
    pub ts: Vec<f64>,
    pub w: Vec<Vec<f64>>,
    pub wx: Vec<Vec<f64>>,
    pub theta: Vec<Vec<f64>>,
    pub diagnostics: Vec<Vec<CellDiagnostics>>,
}

impl SolutionGrid {
    pub fn failed_cells(&self) -> usize {
        self.diagnostics
            .iter()
            .flatten()
            .filter(|d| d.error.is_some())
            .count()
    }
}

impl Solver {
    pub fn new(
        soil: SoilHydraulics,
        scen: &ColumnScenario,
        contour: &ContourConfig,
        strategy: PoleStrategy,
        options: SolverOptions,
    ) -> Result<Self> {
        Self::from_context(
            IntegrandContext::new(soil, scen)?,
            contour,
            strategy,
            options,
        )
    }

    pub fn from_context(
        ctx: IntegrandContext,
        contour: &ContourConfig,
        strategy: PoleStrategy,
        options: SolverOptions,
    ) -> Result<Self> {
        options.validate()?;
        let spec = prepare_contour(contour, &ctx)?;
        let strategy = resolve_strategy(strategy, &spec, &ctx)?;
        Ok(Self {
            ctx,
            contour: spec,
            strategy,
            options,
        })
    }

    /// Default trapezoid (`ℓ = 5`, `h = 1`) with the automatic strategy.
    pub fn with_defaults(soil: SoilHydraulics, scen: &ColumnScenario) -> Result<Self> {
        Self::new(
            soil,
            scen,
            &ContourConfig::default(),
            PoleStrategy::Auto,
            SolverOptions::default(),
        )
    }

    pub fn w1(&self, x: f64, t: f64) -> Result<QuadratureResult> {
        w1(x, t, &self.contour, &self.ctx, &self.options)
    }

    pub fn w2(&self, x: f64, t: f64) -> Result<f64> {
        w2(x, t, self.strategy, &self.ctx)
    }

    pub fn w_and_wx(&self, x: f64, t: f64) -> Result<PointSolution> {
        w_and_wx(x, t, self.strategy, &self.contour, &self.ctx, &self.options)
    }

    pub fn w(&self, x: f64, t: f64) -> Result<f64> {
        Ok(self.w_and_wx(x, t)?.w)
    }

    pub fn theta(&self, x: f64, t: f64) -> Result<f64> {
        let p = self.w_and_wx(x, t)?;
        theta_at(p, x, t, &self.ctx.soil)
    }

    /// Evaluates every cell of `xs × ts` independently and in parallel.
    ///
    /// In strict mode the first failing cell (in grid order) is returned as
    /// the error; otherwise failures are recorded per cell.
    pub fn solve_grid(&self, xs: &[f64], ts: &[f64], strict: bool) -> Result<SolutionGrid> {
        if let Some(&x) = xs.iter().find(|&&x| !(x >= 0.0 && x <= self.ctx.length)) {
            return Err(Error::InvalidParameter(format!(
                "grid position {x} lies outside [0, {}]",
                self.ctx.length
            )));
        }
        if let Some(&t) = ts.iter().find(|&&t| !(t >= 0.0 && t.is_finite())) {
            return Err(Error::InvalidParameter(format!(
                "grid time {t} must be finite and >= 0"
            )));
        }
        let nt = ts.len();
        let cells: Vec<Result<(PointSolution, f64)>> = (0..xs.len() * nt)
            .into_par_iter()
            .map(|k| {
                let (x, t) = (xs[k / nt], ts[k % nt]);
                let p = self.w_and_wx(x, t)?;
                Ok((p, theta_at(p, x, t, &self.ctx.soil)?))
            })
            .collect();

        let mut grid = SolutionGrid {
            xs: xs.to_vec(),
            ts: ts.to_vec(),
            w: vec![vec![f64::NAN; nt]; xs.len()],
            wx: vec![vec![f64::NAN; nt]; xs.len()],
            theta: vec![vec![f64::NAN; nt]; xs.len()],
            diagnostics: vec![Vec::with_capacity(nt); xs.len()],
        };
        for (k, cell) in cells.into_iter().enumerate() {
            let (i, j) = (k / nt, k % nt);
            match cell {
                Ok((p, theta)) => {
                    grid.w[i][j] = p.w;
                    grid.wx[i][j] = p.wx;
                    grid.theta[i][j] = theta;
                    grid.diagnostics[i].push(CellDiagnostics {
                        quad_err: p.quad_err,
                        panels: p.panels,
                        imag_ratio: p.imag_ratio(),
                        error: None,
                    });
                }
                Err(e) if strict => return Err(e),
                Err(e) => {
                    log::warn!("cell x = {}, t = {} failed: {e}", xs[i], ts[j]);
                    grid.diagnostics[i].push(CellDiagnostics {
                        quad_err: f64::NAN,
                        panels: 0,
                        imag_ratio: f64::NAN,
                        error: Some(e),
                    });
                }
            }
        }
        Ok(grid)
    }
}

fn theta_at(p: PointSolution, x: f64, t: f64, soil: &SoilHydraulics) -> Result<f64> {
    theta_from_w(p.w, p.wx, soil).map_err(|_| Error::NonPositiveW { w: p.w, x, t })
}

/// Free-function form of [`Solver::solve_grid`].
pub fn solve_grid(
    xs: &[f64],
    ts: &[f64],
    strategy: PoleStrategy,
    contour: &ContourConfig,
    ctx: &IntegrandContext,
    options: SolverOptions,
    strict: bool,
) -> Result<SolutionGrid> {
    Solver::from_context(*ctx, contour, strategy, options)?.solve_grid(xs, ts, strict)
}
