use std::f64::consts::PI;

use rayon::prelude::*;

use crate::contour::integrate_interval;
use crate::error::{Error, Result};
use crate::model::theta_from_w;
use crate::solver::{w2_residue, w2_residue_x, Solver};
use crate::spectral::IntegrandContext;

/// Eigenvalues `μ_n` of `μ cos(μL) + C sin(μL) = 0` and the coefficients of
/// `w₀ − w_p(·, 0)` in the basis `sin(μ_n x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSeries {
    pub mus: Vec<f64>,
    /// Empty until [`project_coefficients`] has run.
    pub coeffs: Vec<f64>,
    pub n: usize,
}

fn characteristic(mu: f64, length: f64, robin: f64) -> f64 {
    mu * (mu * length).cos() + robin * (mu * length).sin()
}

/// First `n` positive roots, one in each `((2k−1)π/(2L), (2k+1)π/(2L))`.
pub fn eigenvalues(ctx: &IntegrandContext, n: usize) -> Result<EigenSeries> {
    if n == 0 {
        return Err(Error::InvalidParameter(
            "need at least one eigenvalue".into(),
        ));
    }
    let l = ctx.length;
    let c = ctx.constants.robin;
    if !(c > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "eigenvalue brackets need C > 0, got {c}"
        )));
    }
    let mus = (1..=n)
        .into_par_iter()
        .map(|k| {
            let mut lo = (2 * k - 1) as f64 * PI / (2.0 * l);
            let mut hi = (2 * k + 1) as f64 * PI / (2.0 * l);
            let f_lo = characteristic(lo, l, c);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if (characteristic(mid, l, c) > 0.0) == (f_lo > 0.0) {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if hi - lo <= 1e-13 {
                    break;
                }
            }
            0.5 * (lo + hi)
        })
        .collect();
    Ok(EigenSeries {
        mus,
        coeffs: Vec::new(),
        n,
    })
}

/// `w_p(x, t) = e^{Bt} R(x)` and its `x`-derivative. `R` is the residue
/// profile for `q > 0` and `(1 + C(L−x)) / (1 + CL)` for `q = 0`.
pub fn particular_solution(x: f64, t: f64, ctx: &IntegrandContext) -> (f64, f64) {
    if ctx.constants.gamma > 0.0 {
        (
            w2_residue(x, t, ctx).expect("q > 0"),
            w2_residue_x(x, t, ctx).expect("q > 0"),
        )
    } else {
        let c = ctx.constants.robin;
        let den = 1.0 + c * ctx.length;
        ((1.0 + c * (ctx.length - x)) / den, -c / den)
    }
}

/// Projection coefficients by adaptive quadrature, in parallel over modes.
pub fn project_coefficients(ctx: &IntegrandContext, series: &mut EigenSeries) -> Result<()> {
    let l = ctx.length;
    let a = ctx.constants.initial_decay;
    let coeffs: Result<Vec<f64>> = series
        .mus
        .par_iter()
        .enumerate()
        .map(|(k, &mu)| {
            let panels = k / 4 + 1;
            let f = |x: f64| ((-a * x).exp() - particular_solution(x, 0.0, ctx).0) * (mu * x).sin();
            let num = integrate_interval(0.0, l, panels, f, 1e-12)?.value;
            let norm = 0.5 * l - (2.0 * mu * l).sin() / (4.0 * mu);
            Ok(num / norm)
        })
        .collect();
    series.coeffs = coeffs?;
    Ok(())
}

/// Eigenvalues and coefficients of the first `n` modes.
pub fn build_series(ctx: &IntegrandContext, n: usize) -> Result<EigenSeries> {
    let mut s = eigenvalues(ctx, n)?;
    project_coefficients(ctx, &mut s)?;
    Ok(s)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesPoint {
    pub w: f64,
    pub wx: f64,
}

/// Series value using the first `terms` modes of `series`.
pub fn series_solution(
    ctx: &IntegrandContext,
    series: &EigenSeries,
    terms: usize,
    x: f64,
    t: f64,
) -> Result<SeriesPoint> {
    if !(t >= 0.0) {
        return Err(Error::InvalidParameter(format!("t must be >= 0, got {t}")));
    }
    if terms > series.coeffs.len() {
        return Err(Error::InvalidParameter(format!(
            "series has {} projected modes, {terms} requested",
            series.coeffs.len()
        )));
    }
    let (mut w, mut wx) = particular_solution(x, t, ctx);
    let d = ctx.soil.d;
    // Smallest modes last so the dominant terms are added to a small sum.
    for k in (0..terms).rev() {
        let mu = series.mus[k];
        let amp = series.coeffs[k] * (-d * mu * mu * t).exp();
        w += amp * (mu * x).sin();
        wx += amp * mu * (mu * x).cos();
    }
    Ok(SeriesPoint { w, wx })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationRow {
    pub n: usize,
    pub max_abs_err: f64,
}

/// `max_x |θ_series − θ_fokas|` at time `t` for each truncation in `ns`.
pub fn truncation_study(
    solver: &Solver,
    t: f64,
    ns: &[usize],
    xs: &[f64],
) -> Result<Vec<TruncationRow>> {
    if !(t > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "truncation study needs t > 0, got {t}"
        )));
    }
    let ctx = &solver.ctx;
    let largest = ns.iter().copied().max().unwrap_or(0);
    let series = if largest > 0 {
        build_series(ctx, largest)?
    } else {
        EigenSeries {
            mus: Vec::new(),
            coeffs: Vec::new(),
            n: 0,
        }
    };
    let reference: Vec<f64> = xs
        .par_iter()
        .map(|&x| solver.theta(x, t))
        .collect::<Result<_>>()?;
    ns.iter()
        .map(|&n| {
            let mut worst: f64 = 0.0;
            for (&x, &th_ref) in xs.iter().zip(&reference) {
                let p = series_solution(ctx, &series, n, x, t)?;
                let th = theta_from_w(p.w, p.wx, &ctx.soil)?;
                worst = worst.max((th - th_ref).abs());
            }
            Ok(TruncationRow {
                n,
                max_abs_err: worst,
            })
        })
        .collect()
}
