//! Globally adaptive Gauss–Kronrod (7/15) quadrature along piecewise-linear paths.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;

use super::{ContourSpec, PathSegment};
use crate::error::{Error, Result};

/// Kronrod abscissae on `[0, 1]`; odd indices are the Gauss points.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Panels each segment starts with before adaptive bisection.
const INITIAL_PANELS: usize = 8;

pub const DEFAULT_MAX_PANELS: usize = 1 << 14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult<T = Complex64> {
    pub value: T,
    pub abs_error_estimate: f64,
    pub panels_used: usize,
}

#[derive(Debug, Clone, Copy)]
struct Panel<const K: usize> {
    segment: usize,
    lo: f64,
    hi: f64,
    value: [Complex64; K],
    error: f64,
    /// Rounding floor: splitting below this cannot reduce the error.
    floor: f64,
}

impl<const K: usize> Panel<K> {
    fn splittable(&self) -> bool {
        self.error > self.floor && self.hi - self.lo > 1e-12 * (1.0 + self.lo.abs())
    }
}

struct ByError<const K: usize>(Panel<K>);

impl<const K: usize> PartialEq for ByError<K> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl<const K: usize> Eq for ByError<K> {}
impl<const K: usize> PartialOrd for ByError<K> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<const K: usize> Ord for ByError<K> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .error
            .total_cmp(&other.0.error)
            .then_with(|| other.0.segment.cmp(&self.0.segment))
            .then_with(|| other.0.lo.total_cmp(&self.0.lo))
    }
}

fn kronrod_panel<const K: usize, F>(
    f: &F,
    seg: &PathSegment,
    segment: usize,
    lo: f64,
    hi: f64,
) -> Result<Panel<K>>
where
    F: Fn(Complex64) -> Result<[Complex64; K]>,
{
    let half = 0.5 * (hi - lo);
    let mid = 0.5 * (hi + lo);
    let jac = seg.derivative() * half;
    let mut kron = [Complex64::new(0.0, 0.0); K];
    let mut gauss = [Complex64::new(0.0, 0.0); K];
    let mut abs_sum = 0.0;
    let mut eval = |s: f64, wk: f64, wg: f64| -> Result<()> {
        let vals = f(seg.point(s))?;
        for k in 0..K {
            if !(vals[k].re.is_finite() && vals[k].im.is_finite()) {
                let z = seg.point(s);
                return Err(Error::KernelZero { re: z.re, im: z.im });
            }
            kron[k] += wk * vals[k];
            gauss[k] += wg * vals[k];
            abs_sum += wk * vals[k].norm();
        }
        Ok(())
    };
    eval(mid, WGK[7], WG[3])?;
    for j in 0..7 {
        let dx = half * XGK[j];
        let wg = if j % 2 == 1 { WG[j / 2] } else { 0.0 };
        eval(mid - dx, WGK[j], wg)?;
        eval(mid + dx, WGK[j], wg)?;
    }
    let mut error: f64 = 0.0;
    let mut value = [Complex64::new(0.0, 0.0); K];
    for k in 0..K {
        value[k] = kron[k] * jac;
        error = error.max(((kron[k] - gauss[k]) * jac).norm());
    }
    Ok(Panel {
        segment,
        lo,
        hi,
        value,
        error,
        floor: 50.0 * f64::EPSILON * abs_sum * jac.norm(),
    })
}

/// Pairwise sum for an order-independent rounding pattern.
fn pairwise<const K: usize>(vals: &[[Complex64; K]]) -> [Complex64; K] {
    match vals.len() {
        0 => [Complex64::new(0.0, 0.0); K],
        1 => vals[0],
        n => {
            let (l, r) = vals.split_at(n / 2);
            let (a, b) = (pairwise(l), pairwise(r));
            let mut out = a;
            for k in 0..K {
                out[k] += b[k];
            }
            out
        }
    }
}

/// Integrates `K` integrands sharing one evaluation per node along `spec`.
///
/// Converges when the summed error estimate is at most
/// `tol · max(1, max_k |I_k|)`, or when every remaining panel sits at its
/// rounding floor.
pub fn integrate_many<const K: usize, F>(
    spec: &ContourSpec,
    f: F,
    tol: f64,
    max_panels: usize,
) -> Result<QuadratureResult<[Complex64; K]>>
where
    F: Fn(Complex64) -> Result<[Complex64; K]>,
{
    let mut done: Vec<Panel<K>> = Vec::new();
    let mut heap: BinaryHeap<ByError<K>> = BinaryHeap::new();
    for (i, seg) in spec.segments.iter().enumerate() {
        let (lo, hi) = (seg.s_lo, seg.s_hi);
        if !(lo.is_finite() && hi.is_finite()) {
            return Err(Error::Geometry(
                "integrate needs a truncated contour (call truncate_legs first)".into(),
            ));
        }
        let width = (hi - lo) / INITIAL_PANELS as f64;
        for p in 0..INITIAL_PANELS {
            let a = lo + p as f64 * width;
            let b = if p + 1 == INITIAL_PANELS {
                hi
            } else {
                a + width
            };
            let panel = kronrod_panel(&f, seg, i, a, b)?;
            if panel.splittable() {
                heap.push(ByError(panel));
            } else {
                done.push(panel);
            }
        }
    }

    let mut value_total = [Complex64::new(0.0, 0.0); K];
    let mut err_total = 0.0;
    for p in done.iter().chain(heap.iter().map(|p| &p.0)) {
        for (acc, v) in value_total.iter_mut().zip(p.value) {
            *acc += v;
        }
        err_total += p.error;
    }

    loop {
        let panels = done.len() + heap.len();
        let scale = value_total.iter().map(|v| v.norm()).fold(1.0, f64::max);
        if err_total <= 100.0 * tol * scale {
            // The running total carries cancellation error from large early panels.
            err_total = done.iter().map(|p| p.error).sum::<f64>()
                + heap.iter().map(|p| p.0.error).sum::<f64>();
        }
        if err_total <= tol * scale || heap.is_empty() {
            return Ok(finish(done, heap));
        }
        if panels >= max_panels {
            return Err(Error::NonConvergence {
                estimate: err_total,
                tol: tol * scale,
                panels,
            });
        }
        let worst = heap.pop().expect("heap is non-empty").0;
        for (acc, v) in value_total.iter_mut().zip(worst.value) {
            *acc -= v;
        }
        err_total -= worst.error;
        let seg = &spec.segments[worst.segment];
        let mid = 0.5 * (worst.lo + worst.hi);
        for (a, b) in [(worst.lo, mid), (mid, worst.hi)] {
            let panel = kronrod_panel(&f, seg, worst.segment, a, b)?;
            for (acc, v) in value_total.iter_mut().zip(panel.value) {
                *acc += v;
            }
            err_total += panel.error;
            if panel.splittable() {
                heap.push(ByError(panel));
            } else {
                done.push(panel);
            }
        }
        err_total = err_total.max(0.0);
    }
}

/// Final sum in path order, independent of the refinement history.
fn finish<const K: usize>(
    mut done: Vec<Panel<K>>,
    heap: BinaryHeap<ByError<K>>,
) -> QuadratureResult<[Complex64; K]> {
    done.extend(heap.into_iter().map(|p| p.0));
    done.sort_by(|a, b| a.segment.cmp(&b.segment).then(a.lo.total_cmp(&b.lo)));
    let vals: Vec<[Complex64; K]> = done.iter().map(|p| p.value).collect();
    QuadratureResult {
        value: pairwise(&vals),
        abs_error_estimate: done.iter().map(|p| p.error).sum(),
        panels_used: done.len(),
    }
}

/// Integrates a single integrand `f(λ) dλ` along `spec`.
pub fn integrate<F>(spec: &ContourSpec, f: F, tol: f64) -> Result<QuadratureResult>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    let res = integrate_many(spec, |z| Ok([f(z)?]), tol, DEFAULT_MAX_PANELS)?;
    Ok(QuadratureResult {
        value: res.value[0],
        abs_error_estimate: res.abs_error_estimate,
        panels_used: res.panels_used,
    })
}

/// Adaptive Gauss–Kronrod on a real interval, with `initial` starting panels.
pub fn integrate_interval<F>(
    lo: f64,
    hi: f64,
    initial: usize,
    f: F,
    tol: f64,
) -> Result<QuadratureResult<f64>>
where
    F: Fn(f64) -> f64,
{
    let initial = initial.max(1);
    let width = (hi - lo) / initial as f64;
    let segments = (0..initial)
        .map(|p| {
            let a = lo + p as f64 * width;
            let b = if p + 1 == initial { hi } else { a + width };
            PathSegment::line(
                Complex64::new(0.0, 0.0),
                0.0,
                Complex64::new(1.0, 0.0),
                a,
                b,
            )
        })
        .collect();
    let spec = ContourSpec {
        kind: super::ContourKind::Interval,
        segments,
    };
    let res = integrate_many(
        &spec,
        |z| Ok([Complex64::new(f(z.re), 0.0)]),
        tol,
        DEFAULT_MAX_PANELS.max(64 * initial),
    )?;
    Ok(QuadratureResult {
        value: res.value[0].re,
        abs_error_estimate: res.abs_error_estimate,
        panels_used: res.panels_used,
    })
}
