//! Integration paths in the upper half λ-plane.
//!
//! Two families are built: the trapezoid (two asymptotic legs joined by a
//! horizontal segment at height `h`) and the exclusion path, which threads
//! between `iA` and `iγ` so that `iγ` lies on the real-axis side of the path.
//! Every segment is a straight line `z(s) = anchor + (s - s_anchor) · dir`.

mod quadrature;

use std::f64::consts::PI;

use num_complex::Complex64;

pub use quadrature::{
    integrate, integrate_interval, integrate_many, QuadratureResult, DEFAULT_MAX_PANELS,
};

use crate::error::{Error, Result};
use crate::model::HopfColeConstants;

/// Largest leg parameter accepted by [`truncate_legs`].
pub const DEFAULT_S_CAP: f64 = 1e7;

/// One straight piece of a path, possibly unbounded at one end.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathSegment {
    anchor: Complex64,
    s_anchor: f64,
    dir: Complex64,
    pub s_lo: f64,
    pub s_hi: f64,
}

impl PathSegment {
    pub fn line(anchor: Complex64, s_anchor: f64, dir: Complex64, s_lo: f64, s_hi: f64) -> Self {
        Self {
            anchor,
            s_anchor,
            dir,
            s_lo,
            s_hi,
        }
    }

    pub fn point(&self, s: f64) -> Complex64 {
        self.anchor + (s - self.s_anchor) * self.dir
    }

    pub fn derivative(&self) -> Complex64 {
        self.dir
    }

    pub fn is_finite(&self) -> bool {
        self.s_lo.is_finite() && self.s_hi.is_finite()
    }

    /// Distance from `p` to the (possibly unbounded) segment.
    fn distance_to(&self, p: Complex64) -> f64 {
        let rel = p - self.anchor;
        // Projection onto the line in parameter units.
        let s = self.s_anchor + (rel * self.dir.conj()).re / self.dir.norm_sqr();
        let s = s.clamp(self.s_lo, self.s_hi);
        (self.point(s) - p).norm()
    }

    fn min_imag(&self) -> f64 {
        let mut m = f64::INFINITY;
        for s in [self.s_lo, self.s_hi] {
            if s.is_finite() {
                m = m.min(self.point(s).im);
            } else if (self.dir * s.signum()).im < 0.0 {
                return f64::NEG_INFINITY;
            }
        }
        m
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ContourKind {
    /// Top segment `[-ℓ, ℓ] + ih`; legs leave at `right_angle` and arrive from `left_angle`.
    Trapezoid {
        ell: f64,
        h: f64,
        right_angle: f64,
        left_angle: f64,
    },
    /// Path through `P₊ = iγ + (1+i)` and `P₋ = iA − (1+i)`.
    Exclusion { a: f64, gamma: f64 },
    /// A real interval; used for ordinary quadrature.
    Interval,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContourSpec {
    pub kind: ContourKind,
    pub segments: Vec<PathSegment>,
}

fn unit(angle: f64) -> Complex64 {
    Complex64::from_polar(1.0, angle)
}

/// Trapezoid with the default asymptote angles `π/6` and `5π/6`.
pub fn trapezoid_contour(ell: f64, h: f64) -> Result<ContourSpec> {
    trapezoid_with_angles(ell, h, PI / 6.0, 5.0 * PI / 6.0)
}

/// Trapezoid `C⁺`:
///
/// * `z₁(s) = (-ℓ + ih) + (-s - ℓ) e^{i·left}` for `s ≤ -ℓ`,
/// * `z₂(s) = s + ih` for `-ℓ ≤ s ≤ ℓ`,
/// * `z₃(s) = (ℓ + ih) + (s - ℓ) e^{i·right}` for `s ≥ ℓ`.
///
/// Both legs must lie strictly between the real axis and the rays
/// `arg λ = π/4, 3π/4`, where `e^{-Dλ²t}` decays.
pub fn trapezoid_with_angles(
    ell: f64,
    h: f64,
    right_angle: f64,
    left_angle: f64,
) -> Result<ContourSpec> {
    if !(ell > 0.0 && h > 0.0 && ell.is_finite() && h.is_finite()) {
        return Err(Error::Geometry(format!(
            "trapezoid needs ell > 0 and h > 0, got ell = {ell}, h = {h}"
        )));
    }
    if !(right_angle > 0.0 && right_angle < PI / 4.0) {
        return Err(Error::Geometry(format!(
            "right asymptote angle must lie in (0, pi/4), got {right_angle}"
        )));
    }
    if !(left_angle > 3.0 * PI / 4.0 && left_angle < PI) {
        return Err(Error::Geometry(format!(
            "left asymptote angle must lie in (3pi/4, pi), got {left_angle}"
        )));
    }
    let top_left = Complex64::new(-ell, h);
    let top_right = Complex64::new(ell, h);
    Ok(ContourSpec {
        kind: ContourKind::Trapezoid {
            ell,
            h,
            right_angle,
            left_angle,
        },
        segments: vec![
            PathSegment::line(top_left, -ell, -unit(left_angle), f64::NEG_INFINITY, -ell),
            PathSegment::line(top_left, -ell, Complex64::new(1.0, 0.0), -ell, ell),
            PathSegment::line(top_right, ell, unit(right_angle), ell, f64::INFINITY),
        ],
    })
}

/// Path that leaves `iγ` below it and `iA` above it.
///
/// With `P₊ = iγ + (1+i)` and `P₋ = iA − (1+i)`:
///
/// * `z(s) = P₊ + s e^{-iπ/8}` for `s < 0` (arrives from the upper left, passing over `iγ`),
/// * `z(s) = (P₋ − P₊) s + P₊` for `0 ≤ s ≤ 1`,
/// * `z(s) = P₋ + (s − 1) e^{iπ/8}` for `s > 1` (leaves to the upper right, passing under `iA`).
pub fn exclusion_contour(c: &HopfColeConstants) -> Result<ContourSpec> {
    let (a, gamma) = (c.initial_decay, c.gamma);
    if !(gamma > a) {
        return Err(Error::Geometry(format!(
            "exclusion contour needs gamma > A, got gamma = {gamma}, A = {a}"
        )));
    }
    if !(a > 1.0) {
        return Err(Error::Geometry(format!(
            "exclusion contour needs A > 1 so that P- stays above the real axis, got A = {a}"
        )));
    }
    let one_i = Complex64::new(1.0, 1.0);
    let p_plus = Complex64::new(0.0, gamma) + one_i;
    let p_minus = Complex64::new(0.0, a) - one_i;
    Ok(ContourSpec {
        kind: ContourKind::Exclusion { a, gamma },
        segments: vec![
            PathSegment::line(p_plus, 0.0, unit(-PI / 8.0), f64::NEG_INFINITY, 0.0),
            PathSegment::line(p_plus, 0.0, p_minus - p_plus, 0.0, 1.0),
            PathSegment::line(p_minus, 1.0, unit(PI / 8.0), 1.0, f64::INFINITY),
        ],
    })
}

/// Cuts the unbounded legs where `|e^{-Dλ²t}| ≤ tail_tol` holds for good.
///
/// Along a leg `z = P + r·d` (`r ≥ 0` from the finite end),
/// `Re z² = Re P² + 2r Re(P d) + r² cos 2φ`, so the cut is the larger root of
/// `D t Re z² = ln(1/tail_tol)`.
pub fn truncate_legs(
    spec: &ContourSpec,
    diffusivity: f64,
    t: f64,
    tail_tol: f64,
) -> Result<ContourSpec> {
    truncate_legs_capped(spec, diffusivity, t, tail_tol, DEFAULT_S_CAP)
}

pub fn truncate_legs_capped(
    spec: &ContourSpec,
    diffusivity: f64,
    t: f64,
    tail_tol: f64,
    s_cap: f64,
) -> Result<ContourSpec> {
    if !(t > 0.0) {
        return Err(Error::EarlyTime { t, t_min: 0.0 });
    }
    if !(tail_tol > 0.0 && tail_tol < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "tail tolerance must lie in (0, 1), got {tail_tol}"
        )));
    }
    let target = (1.0 / tail_tol).ln() / (diffusivity * t);
    let mut segments = spec.segments.clone();
    for seg in &mut segments {
        for upper in [false, true] {
            let end = if upper { seg.s_hi } else { seg.s_lo };
            if end.is_finite() {
                continue;
            }
            let from = if upper { seg.s_lo } else { seg.s_hi };
            let sign = if upper { 1.0 } else { -1.0 };
            let p = seg.point(from);
            let d = seg.dir * sign;
            let lead = (d * d).re;
            if !(lead > 0.0) {
                return Err(Error::Geometry(
                    "leg direction does not lie in the decay sector Re(lambda^2) > 0".into(),
                ));
            }
            let lin = 2.0 * (p * d).re;
            let cst = (p * p).re - target;
            let disc = lin * lin - 4.0 * lead * cst;
            let r = if disc <= 0.0 {
                0.0
            } else {
                ((-lin + disc.sqrt()) / (2.0 * lead)).max(0.0)
            };
            let cut = from + sign * r;
            if !(cut.abs() <= s_cap) {
                // Rough time at which the cut would fall back inside the cap.
                let t_min = (1.0 / tail_tol).ln() / (diffusivity * lead * s_cap * s_cap);
                return Err(Error::EarlyTime { t, t_min });
            }
            if upper {
                seg.s_hi = cut.max(seg.s_lo);
            } else {
                seg.s_lo = cut.min(seg.s_hi);
            }
        }
    }
    Ok(ContourSpec {
        kind: spec.kind,
        segments,
    })
}

impl ContourSpec {
    /// Smallest distance between the path and any of `points`.
    pub fn min_clearance(&self, points: &[Complex64]) -> f64 {
        points
            .iter()
            .flat_map(|&p| self.segments.iter().map(move |seg| seg.distance_to(p)))
            .fold(f64::INFINITY, f64::min)
    }

    /// Smallest imaginary part along the path (its clearance from the real axis).
    pub fn real_axis_clearance(&self) -> f64 {
        self.segments
            .iter()
            .map(PathSegment::min_imag)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn is_truncated(&self) -> bool {
        self.segments.iter().all(PathSegment::is_finite)
    }

    /// Largest `|s|` over the segment ranges of a truncated path.
    pub fn s_extent(&self) -> f64 {
        self.segments
            .iter()
            .flat_map(|s| [s.s_lo.abs(), s.s_hi.abs()])
            .fold(0.0, f64::max)
    }
}

/// Free-function form of [`ContourSpec::min_clearance`].
pub fn min_clearance(spec: &ContourSpec, points: &[Complex64]) -> f64 {
    spec.min_clearance(points)
}
