use crate::error::{Error, Result};
use crate::model::theta_from_w;
use crate::solver::{CellDiagnostics, SolutionGrid};
use crate::spectral::IntegrandContext;

/// Mesh and step of the finite-difference oracle.
///
/// The first `startup_steps` steps run as pairs of backward-Euler half steps,
/// which damps the corner incompatibility between `w₀(L)` and the Robin
/// condition (and between `w₀(0)` and the surface datum).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdConfig {
    pub nx: usize,
    pub dt: f64,
    pub startup_steps: usize,
}

impl Default for FdConfig {
    fn default() -> Self {
        Self {
            nx: 4001,
            dt: 0.25,
            startup_steps: 2,
        }
    }
}

impl FdConfig {
    pub fn validate(&self) -> Result<()> {
        if self.nx < 101 {
            return Err(Error::InvalidParameter(format!(
                "nx must be >= 101, got {}",
                self.nx
            )));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "dt must be > 0, got {}",
                self.dt
            )));
        }
        Ok(())
    }
}

/// Thomas algorithm for `sub[i] y[i-1] + diag[i] y[i] + sup[i] y[i+1] = rhs[i]`.
fn solve_tridiagonal(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &mut [f64], scratch: &mut [f64]) {
    let n = diag.len();
    scratch[0] = sup[0] / diag[0];
    rhs[0] /= diag[0];
    for i in 1..n {
        let m = diag[i] - sub[i] * scratch[i - 1];
        scratch[i] = sup[i] / m;
        rhs[i] = (rhs[i] - sub[i] * rhs[i - 1]) / m;
    }
    for i in (0..n - 1).rev() {
        rhs[i] -= scratch[i] * rhs[i + 1];
    }
}

struct Stepper {
    hx: f64,
    d: f64,
    robin: f64,
    growth: f64,
    sub: Vec<f64>,
    diag: Vec<f64>,
    sup: Vec<f64>,
    rhs: Vec<f64>,
    scratch: Vec<f64>,
}

impl Stepper {
    /// One θ-scheme step of size `dt` from `t` (`theta = 1/2` is Crank–Nicolson).
    fn step(&mut self, w: &mut [f64], t: f64, dt: f64, theta: f64) {
        let n = w.len() - 1;
        let r = self.d * dt / (self.hx * self.hx);
        let (ri, re) = (theta * r, (1.0 - theta) * r);
        let end = 2.0 + 2.0 * self.hx * self.robin;
        for i in 1..=n {
            let k = i - 1;
            if i < n {
                self.sub[k] = -ri;
                self.diag[k] = 1.0 + 2.0 * ri;
                self.sup[k] = -ri;
                self.rhs[k] = (1.0 - 2.0 * re) * w[i] + re * (w[i - 1] + w[i + 1]);
            } else {
                // Ghost node w_{n+1} = w_{n-1} - 2 hx C w_n.
                self.sub[k] = -2.0 * ri;
                self.diag[k] = 1.0 + ri * end;
                self.sup[k] = 0.0;
                self.rhs[k] = (1.0 - re * end) * w[n] + 2.0 * re * w[n - 1];
            }
        }
        let surface = (self.growth * (t + dt)).exp();
        self.rhs[0] += ri * surface;
        self.sub[0] = 0.0;
        solve_tridiagonal(
            &self.sub,
            &self.diag,
            &self.sup,
            &mut self.rhs,
            &mut self.scratch,
        );
        w[0] = surface;
        w[1..].copy_from_slice(&self.rhs);
    }
}

fn check_positive(w: &[f64], step: usize) -> Result<()> {
    match w.iter().position(|&v| !(v > 0.0)) {
        Some(node) => Err(Error::InstabilityDetected {
            w: w[node],
            node,
            step,
        }),
        None => Ok(()),
    }
}

/// Second-order `w_x` on the mesh: one-sided at `x = 0`, ghost node at `x = L`.
fn mesh_derivative(w: &[f64], hx: f64, robin: f64) -> Vec<f64> {
    let n = w.len() - 1;
    let mut wx = vec![0.0; w.len()];
    wx[0] = (-3.0 * w[0] + 4.0 * w[1] - w[2]) / (2.0 * hx);
    for i in 1..n {
        wx[i] = (w[i + 1] - w[i - 1]) / (2.0 * hx);
    }
    wx[n] = -robin * w[n];
    wx
}

/// Crank–Nicolson solution on `nx` uniform nodes, reported at the sorted times `ts`.
///
/// Each gap between output times is covered by equal steps no longer than
/// `dt`, so every output time is hit exactly.
pub fn cn_solve(ctx: &IntegrandContext, cfg: &FdConfig, ts: &[f64]) -> Result<SolutionGrid> {
    cfg.validate()?;
    if ts.iter().any(|&t| !(t >= 0.0 && t.is_finite())) || ts.windows(2).any(|p| p[1] < p[0]) {
        return Err(Error::InvalidParameter(
            "output times must be finite, >= 0 and sorted".into(),
        ));
    }
    let c = ctx.constants;
    let n = cfg.nx - 1;
    let hx = ctx.length / n as f64;
    let xs: Vec<f64> = (0..=n).map(|i| i as f64 * hx).collect();
    let mut w: Vec<f64> = xs.iter().map(|&x| (-c.initial_decay * x).exp()).collect();
    let mut stepper = Stepper {
        hx,
        d: ctx.soil.d,
        robin: c.robin,
        growth: c.surface_growth,
        sub: vec![0.0; n],
        diag: vec![0.0; n],
        sup: vec![0.0; n],
        rhs: vec![0.0; n],
        scratch: vec![0.0; n],
    };

    let mut columns = Vec::with_capacity(ts.len());
    let mut t = 0.0;
    let mut taken = 0usize;
    for &target in ts {
        let gap = target - t;
        let steps = if gap > 0.0 {
            (gap / cfg.dt - 1e-9).ceil().max(1.0) as usize
        } else {
            0
        };
        for k in 0..steps {
            // Land on the target without accumulating rounding in `t`.
            let next = if k + 1 == steps {
                target
            } else {
                t + gap / steps as f64
            };
            let dt = next - t;
            if taken < cfg.startup_steps {
                stepper.step(&mut w, t, 0.5 * dt, 1.0);
                stepper.step(&mut w, t + 0.5 * dt, 0.5 * dt, 1.0);
            } else {
                stepper.step(&mut w, t, dt, 0.5);
            }
            taken += 1;
            check_positive(&w, taken)?;
            t = next;
        }
        columns.push(w.clone());
    }

    let nt = ts.len();
    let mut grid = SolutionGrid {
        xs: xs.clone(),
        ts: ts.to_vec(),
        w: vec![vec![0.0; nt]; n + 1],
        wx: vec![vec![0.0; nt]; n + 1],
        theta: vec![vec![0.0; nt]; n + 1],
        diagnostics: vec![
            vec![
                CellDiagnostics {
                    quad_err: 0.0,
                    panels: 0,
                    imag_ratio: 0.0,
                    error: None,
                };
                nt
            ];
            n + 1
        ],
    };
    for (j, col) in columns.iter().enumerate() {
        let wx = if ts[j] == 0.0 {
            xs.iter()
                .map(|&x| -c.initial_decay * (-c.initial_decay * x).exp())
                .collect()
        } else {
            mesh_derivative(col, hx, c.robin)
        };
        for i in 0..=n {
            grid.w[i][j] = col[i];
            grid.wx[i][j] = wx[i];
            grid.theta[i][j] =
                theta_from_w(col[i], wx[i], &ctx.soil).map_err(|_| Error::NonPositiveW {
                    w: col[i],
                    x: xs[i],
                    t: ts[j],
                })?;
        }
    }
    Ok(grid)
}

/// `(w, w_x, θ)` of a mesh solution at `x` for output column `it`.
///
/// Mesh nodes are returned as stored; other positions use cubic Lagrange
/// interpolation of `w` and `w_x`.
pub fn sample_mesh(
    grid: &SolutionGrid,
    x: f64,
    it: usize,
    ctx: &IntegrandContext,
) -> Result<(f64, f64, f64)> {
    let n = grid.xs.len() - 1;
    let hx = grid.xs[1] - grid.xs[0];
    let pos = x / hx;
    let near = pos.round();
    if (pos - near).abs() <= 1e-9 && near >= 0.0 && near as usize <= n {
        let i = near as usize;
        return Ok((grid.w[i][it], grid.wx[i][it], grid.theta[i][it]));
    }
    if !(x >= 0.0 && x <= ctx.length) {
        return Err(Error::InvalidParameter(format!(
            "x = {x} lies outside the mesh"
        )));
    }
    let base = (pos.floor() as usize).saturating_sub(1).min(n - 3);
    let nodes = [base, base + 1, base + 2, base + 3];
    let lagrange = |field: &Vec<Vec<f64>>| {
        nodes
            .iter()
            .map(|&i| {
                let weight: f64 = nodes
                    .iter()
                    .filter(|&&k| k != i)
                    .map(|&k| (pos - k as f64) / (i as f64 - k as f64))
                    .product();
                weight * field[i][it]
            })
            .sum::<f64>()
    };
    let (w, wx) = (lagrange(&grid.w), lagrange(&grid.wx));
    let theta = theta_from_w(w, wx, &ctx.soil)?;
    Ok((w, wx, theta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{derive_constants, ColumnScenario, HopfColeConstants, SoilHydraulics};
    use approx::assert_relative_eq;

    fn ctx(scen: ColumnScenario) -> IntegrandContext {
        IntegrandContext::new(SoilHydraulics::reference_loam(), &scen).unwrap()
    }

    #[test]
    fn thomas_solves_a_known_system() {
        let sub = [0.0, 1.0, 1.0, 1.0];
        let diag = [4.0, 4.0, 4.0, 4.0];
        let sup = [1.0, 1.0, 1.0, 0.0];
        let x = [1.0, -2.0, 3.0, 0.5];
        let mut rhs: Vec<f64> = (0..4)
            .map(|i| {
                diag[i] * x[i]
                    + if i > 0 { sub[i] * x[i - 1] } else { 0.0 }
                    + if i < 3 { sup[i] * x[i + 1] } else { 0.0 }
            })
            .collect();
        let mut scratch = [0.0; 4];
        solve_tridiagonal(&sub, &diag, &sup, &mut rhs, &mut scratch);
        for i in 0..4 {
            assert_relative_eq!(rhs[i], x[i], epsilon = 1e-14);
        }
    }

    #[test]
    fn constant_state_is_steady() {
        let base = ctx(ColumnScenario::example2());
        let flat = IntegrandContext::from_parts(
            HopfColeConstants {
                initial_decay: 0.0,
                surface_growth: 0.0,
                robin: 0.0,
                gamma: 0.0,
            },
            base.soil,
            base.length,
        );
        let g = cn_solve(
            &flat,
            &FdConfig {
                nx: 101,
                dt: 5.0,
                startup_steps: 2,
            },
            &[0.0, 600.0, 7200.0],
        )
        .unwrap();
        for row in &g.w {
            for &v in row {
                assert!((v - 1.0).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn output_times_are_hit_and_validated() {
        let c = ctx(ColumnScenario::example1());
        let cfg = FdConfig {
            nx: 201,
            dt: 7.0,
            startup_steps: 2,
        };
        let g = cn_solve(&c, &cfg, &[0.0, 10.0, 100.0]).unwrap();
        let k = c.constants;
        assert_eq!(g.w[0][2], (k.surface_growth * 100.0).exp());
        assert_eq!(g.w[37][0], (-k.initial_decay * g.xs[37]).exp());
        assert!(cn_solve(&c, &cfg, &[10.0, 5.0]).is_err());
        assert!(cn_solve(&c, &FdConfig { nx: 50, ..cfg }, &[10.0]).is_err());
        assert!(cn_solve(&c, &FdConfig { dt: 0.0, ..cfg }, &[10.0]).is_err());
    }

    #[test]
    fn robin_condition_holds_on_the_mesh() {
        let c = ctx(ColumnScenario::example2());
        let cfg = FdConfig {
            nx: 801,
            dt: 1.0,
            startup_steps: 2,
        };
        let g = cn_solve(&c, &cfg, &[600.0, 3600.0]).unwrap();
        let n = g.xs.len() - 1;
        let hx = g.xs[1];
        for j in 0..2 {
            // Second-order one-sided derivative at L against the Robin value.
            let one_sided = (3.0 * g.w[n][j] - 4.0 * g.w[n - 1][j] + g.w[n - 2][j]) / (2.0 * hx);
            let w = g.w[n][j];
            let robin_term = c.constants.robin * w;
            assert!(
                (one_sided + robin_term).abs() <= 1e-3 * robin_term,
                "{one_sided} vs {}",
                -robin_term
            );
            assert_eq!(g.wx[n][j], -c.constants.robin * w);
        }
    }

    fn self_convergence_error(nx: usize, dt: f64) -> f64 {
        let c = ctx(ColumnScenario::example1());
        let cfg = FdConfig {
            nx,
            dt,
            startup_steps: 2,
        };
        let fine = FdConfig {
            nx: 2 * nx - 1,
            dt: dt / 2.0,
            startup_steps: 2,
        };
        let a = cn_solve(&c, &cfg, &[1800.0]).unwrap();
        let b = cn_solve(&c, &fine, &[1800.0]).unwrap();
        (0..nx)
            .map(|i| (a.w[i][0] - b.w[2 * i][0]).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn refinement_shows_second_order() {
        let e1 = self_convergence_error(201, 8.0);
        let e2 = self_convergence_error(401, 4.0);
        let ratio = e1 / e2;
        assert!(
            ratio > 3.5 && ratio < 4.6,
            "ratio = {ratio} ({e1:e}, {e2:e})"
        );
    }

    #[test]
    fn default_mesh_matches_the_contour_solution() {
        let scen = ColumnScenario::example2();
        let c = ctx(scen);
        let g = cn_solve(&c, &FdConfig::default(), &[3600.0]).unwrap();
        let (w, _, th) = sample_mesh(&g, 0.04, 0, &c).unwrap();
        let fokas =
            crate::solver::Solver::with_defaults(SoilHydraulics::reference_loam(), &scen).unwrap();
        let p = fokas.w_and_wx(0.04, 3600.0).unwrap();
        assert!((w - p.w).abs() <= 1e-6 * p.w, "{w} vs {}", p.w);
        assert!((th - fokas.theta(0.04, 3600.0).unwrap()).abs() <= 1e-4);
    }

    #[test]
    fn sampling_between_nodes() {
        let c = ctx(ColumnScenario::example1());
        let g = cn_solve(
            &c,
            &FdConfig {
                nx: 1001,
                dt: 2.0,
                startup_steps: 2,
            },
            &[0.0, 900.0],
        )
        .unwrap();
        let hx = g.xs[1];
        let (w, wx, th) = sample_mesh(&g, 10.0 * hx, 1, &c).unwrap();
        assert_eq!((w, wx, th), (g.w[10][1], g.wx[10][1], g.theta[10][1]));
        let x = 10.37 * hx;
        let (w, _, _) = sample_mesh(&g, x, 0, &c).unwrap();
        let exact = (-c.constants.initial_decay * x).exp();
        assert!((w - exact).abs() < 1e-12);
        assert!(sample_mesh(&g, 1.0, 0, &c).is_err());
        let k = derive_constants(&c.soil, &ColumnScenario::example1()).unwrap();
        assert_eq!(k, c.constants);
    }
}
