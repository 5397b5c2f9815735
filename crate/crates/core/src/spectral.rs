//! Spectral kernels and contour integrands of the unified-transform solution.
//!
//! The solution of the transformed heat problem is `w = w₁ + w₂`, each a
//! contour integral over `C⁺` in the upper half λ-plane. The integrands built
//! here already carry the `±1/(2π)` normalisation, so a plain path integral
//! yields `w₁`, `∂w₁/∂x`, `w₂` or `∂w₂/∂x` directly.
//!
//! `Δ(λ, -L)` grows like `exp(|Im λ| L)` along the contour legs. Every ratio
//! that appears in the integrands is therefore evaluated with the growing
//! exponential cancelled analytically: with `E = exp(-iλL)`,
//! `Δ(λ, -L) = E · [λ(1 + e^{2iλL}) + iC(1 - e^{2iλL})] / 2`, and similarly for
//! `Δ(λ, x - L)`, `F(λ, x - L)`, `sin(λx)` and `cos(λx)`. Only decaying
//! exponentials are ever formed for `Im λ ≥ 0`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{derive_constants, ColumnScenario, HopfColeConstants, SoilHydraulics};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Below this magnitude of the scaled argument the removable quotients
/// `(1 - e^{-u})/u` and `(e^{u} - 1)/u` switch to their Taylor series.
const SERIES_RADIUS: f64 = 1e-2;

/// `Δ(λ, y) = λ cos(λy) − C sin(λy)`.
pub fn delta(lambda: Complex64, y: f64, robin: f64) -> Complex64 {
    let arg = lambda * y;
    lambda * arg.cos() - robin * arg.sin()
}

/// `F(λ, y) = ∂Δ/∂y = −λ² sin(λy) − Cλ cos(λy)`.
pub fn cap_f(lambda: Complex64, y: f64, robin: f64) -> Complex64 {
    let arg = lambda * y;
    -lambda * lambda * arg.sin() - robin * lambda * arg.cos()
}

/// `(1 - e^{-u}) / u`, continuous through `u = 0`.
fn one_minus_exp_neg_over(u: Complex64) -> Complex64 {
    if u.norm() < SERIES_RADIUS {
        // 1 - u/2 + u²/6 - u³/24 + u⁴/120 - u⁵/720
        let mut sum = Complex64::new(0.0, 0.0);
        let mut term = Complex64::new(1.0, 0.0);
        let mut fact = 1.0;
        for k in 1..=6 {
            fact *= k as f64;
            sum += term / fact;
            term *= -u;
        }
        sum
    } else {
        (1.0 - (-u).exp()) / u
    }
}

/// `(e^{u} - 1) / u`, continuous through `u = 0`.
fn exp_minus_one_over(u: Complex64) -> Complex64 {
    one_minus_exp_neg_over(-u)
}

/// Symbols shared by every integrand: `A, B, C, γ`, `D` and `L`.
#[derive(Debug, Clone, Copy)]
pub struct IntegrandContext {
    pub constants: HopfColeConstants,
    pub soil: SoilHydraulics,
    pub length: f64,
    exp_neg_al: f64,
}

/// `Δ`-ratios at one `(λ, x)` with the growing exponentials cancelled.
struct Ratios {
    /// `e^{iλx}`
    e_x: Complex64,
    /// `e^{iλ(L-x)}`
    e_lx: Complex64,
    /// `e^{iλL}`
    e_l: Complex64,
    /// `Δ(λ, x-L) / Δ(λ, -L)`
    delta: Complex64,
    /// `F(λ, x-L) / Δ(λ, -L)`
    cap_f: Complex64,
    /// `sin(λx) / Δ(λ, -L)`
    sin: Complex64,
    /// `cos(λx) / Δ(λ, -L)`
    cos: Complex64,
}

impl IntegrandContext {
    pub fn new(soil: SoilHydraulics, scen: &ColumnScenario) -> Result<Self> {
        let constants = derive_constants(&soil, scen)?;
        Ok(Self::from_parts(constants, soil, scen.length))
    }

    pub fn from_parts(constants: HopfColeConstants, soil: SoilHydraulics, length: f64) -> Self {
        Self {
            constants,
            soil,
            length,
            exp_neg_al: (-constants.initial_decay * length).exp(),
        }
    }

    fn ratios(&self, lambda: Complex64, x: f64) -> Result<Ratios> {
        let c = self.constants.robin;
        let l = self.length;
        let u = l - x;
        let q = (2.0 * I * lambda * l).exp();
        let denom = lambda * (1.0 + q) + I * c * (1.0 - q);
        if !(denom.norm() > 1e-280) {
            return Err(Error::KernelZero {
                re: lambda.re,
                im: lambda.im,
            });
        }
        let p = (2.0 * I * lambda * u).exp();
        let e_x = (I * lambda * x).exp();
        let e_lx = (I * lambda * u).exp();
        let e_2x = (2.0 * I * lambda * x).exp();
        let delta_num = lambda * (1.0 + p) + I * c * (1.0 - p);
        let f_num = I * lambda * lambda * (1.0 - p) - c * lambda * (1.0 + p);
        Ok(Ratios {
            e_x,
            e_lx,
            e_l: (I * lambda * l).exp(),
            delta: e_x * delta_num / denom,
            cap_f: e_x * f_num / denom,
            sin: I * e_lx * (1.0 - e_2x) / denom,
            cos: e_lx * (1.0 + e_2x) / denom,
        })
    }

    fn check_poles(&self, lambda: Complex64) -> Result<(Complex64, Complex64)> {
        let a = self.constants.initial_decay;
        let d = self.soil.d;
        let b = self.constants.surface_growth;
        let l2 = lambda * lambda;
        let quad_a = a * a + l2;
        let quad_b = d * l2 + b;
        let tiny = 64.0 * f64::EPSILON;
        if quad_a.norm() <= tiny * (a * a + l2.norm())
            || quad_b.norm() <= tiny * (d * l2.norm() + b)
        {
            return Err(Error::PoleOnContour {
                re: lambda.re,
                im: lambda.im,
            });
        }
        Ok((quad_a, quad_b))
    }

    /// Fourier transform of the initial datum, `ŵ₀(λ) = (1 - e^{-(A+iλ)L}) / (A + iλ)`.
    pub fn hat_w0(&self, lambda: Complex64) -> Complex64 {
        let z = self.constants.initial_decay + I * lambda;
        self.length * one_minus_exp_neg_over(z * self.length)
    }

    /// Time transform of the surface datum, `f̃(k, t) = (e^{(k+B)t} - 1) / (k + B)`.
    pub fn tilde_f(&self, k: Complex64, t: f64) -> Complex64 {
        let s = k + self.constants.surface_growth;
        t * exp_minus_one_over(s * t)
    }

    /// The four bracket terms of the `w₁` integrand divided by `Δ(λ, -L)`,
    /// without the `e^{-Dλ²t}/(2π)` factor: `[T1, T2, T3, T4]` with
    /// integrand `∝ T1 − T2 − T3 + T4`.
    pub(crate) fn v1_terms(&self, lambda: Complex64, x: f64) -> Result<[Complex64; 4]> {
        let (quad_a, quad_b) = self.check_poles(lambda)?;
        let r = self.ratios(lambda, x)?;
        let a = self.constants.initial_decay;
        let c = self.constants.robin;
        let d = self.soil.d;
        let eal = self.exp_neg_al;
        let t1 = (r.e_x * (a - I * lambda) - eal * r.e_lx * (a + I * lambda)) / quad_a;
        let t2 = (I * lambda + c) * r.sin * (r.e_l - eal) / (a + I * lambda);
        let t3 = r.delta * (1.0 - eal * r.e_l) / (a - I * lambda);
        let t4 = 2.0 * I * lambda * d * r.delta / quad_b;
        Ok([t1, t2, t3, t4])
    }

    /// `x`-derivatives of [`Self::v1_terms`].
    pub(crate) fn v1x_terms(&self, lambda: Complex64, x: f64) -> Result<[Complex64; 4]> {
        let (quad_a, quad_b) = self.check_poles(lambda)?;
        let r = self.ratios(lambda, x)?;
        let a = self.constants.initial_decay;
        let c = self.constants.robin;
        let d = self.soil.d;
        let eal = self.exp_neg_al;
        let t1 = I * lambda * (r.e_x * (a - I * lambda) + eal * r.e_lx * (a + I * lambda)) / quad_a;
        let t2 = lambda * (I * lambda + c) * r.cos * (r.e_l - eal) / (a + I * lambda);
        let t3 = r.cap_f * (1.0 - eal * r.e_l) / (a - I * lambda);
        let t4 = 2.0 * I * lambda * d * r.cap_f / quad_b;
        Ok([t1, t2, t3, t4])
    }

    fn decay(&self, lambda: Complex64, t: f64) -> Complex64 {
        (-self.soil.d * lambda * lambda * t).exp() / (2.0 * PI)
    }

    /// Integrand of `w₁(x, t)`.
    pub fn v1(&self, lambda: Complex64, x: f64, t: f64) -> Result<Complex64> {
        let [t1, t2, t3, t4] = self.v1_terms(lambda, x)?;
        Ok(self.decay(lambda, t) * (t1 - t2 - t3 + t4))
    }

    /// Integrand of `∂w₁/∂x (x, t)`.
    pub fn v1x(&self, lambda: Complex64, x: f64, t: f64) -> Result<Complex64> {
        let [t1, t2, t3, t4] = self.v1x_terms(lambda, x)?;
        Ok(self.decay(lambda, t) * (t1 - t2 - t3 + t4))
    }

    /// Both `w₁` integrands at once; they share every transcendental evaluation.
    pub fn v1_pair(&self, lambda: Complex64, x: f64, t: f64) -> Result<[Complex64; 2]> {
        let (quad_a, quad_b) = self.check_poles(lambda)?;
        let r = self.ratios(lambda, x)?;
        let a = self.constants.initial_decay;
        let c = self.constants.robin;
        let d = self.soil.d;
        let eal = self.exp_neg_al;
        let il = I * lambda;
        let plus = a + il;
        let minus = a - il;
        let fwd = r.e_x * minus;
        let back = eal * r.e_lx * plus;
        let shift = r.e_l - eal;
        let tail = (1.0 - eal * r.e_l) / minus;
        let flux = 2.0 * il * d / quad_b;
        let w = (fwd - back) / quad_a - (il + c) * r.sin * shift / plus - r.delta * tail
            + flux * r.delta;
        let wx =
            il * (fwd + back) / quad_a - lambda * (il + c) * r.cos * shift / plus - r.cap_f * tail
                + flux * r.cap_f;
        let g = self.decay(lambda, t);
        Ok([g * w, g * wx])
    }

    /// Integrand of `w₂(x, t)`: `−(1/2π) 2iλD Δ(λ,x−L) e^{Bt} / ((Dλ²+B) Δ(λ,−L))`.
    pub fn v2(&self, lambda: Complex64, x: f64, t: f64) -> Result<Complex64> {
        let quad_b = self.flux_denominator(lambda)?;
        let r = self.ratios(lambda, x)?;
        Ok(self.v2_prefactor(lambda, t) * r.delta / quad_b)
    }

    /// Integrand of `∂w₂/∂x (x, t)`.
    pub fn v2x(&self, lambda: Complex64, x: f64, t: f64) -> Result<Complex64> {
        let quad_b = self.flux_denominator(lambda)?;
        let r = self.ratios(lambda, x)?;
        Ok(self.v2_prefactor(lambda, t) * r.cap_f / quad_b)
    }

    fn v2_prefactor(&self, lambda: Complex64, t: f64) -> Complex64 {
        -(2.0 * I * lambda * self.soil.d) * (self.constants.surface_growth * t).exp() / (2.0 * PI)
    }

    /// `Dλ² + B`, rejected when `λ = ±iγ` to rounding.
    fn flux_denominator(&self, lambda: Complex64) -> Result<Complex64> {
        let d = self.soil.d;
        let b = self.constants.surface_growth;
        let quad_b = d * lambda * lambda + b;
        if quad_b.norm() <= 64.0 * f64::EPSILON * (d * lambda.norm_sqr() + b) {
            return Err(Error::PoleOnContour {
                re: lambda.re,
                im: lambda.im,
            });
        }
        Ok(quad_b)
    }
}
