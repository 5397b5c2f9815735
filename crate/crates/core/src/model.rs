//! Physical parameters of the soil column and the Hopf–Cole reduction.
//!
//! With constant diffusivity `D` and conductivity `K(θ) = a(θ + b)²`, the
//! vertical infiltration equation becomes Burgers' equation. The substitution
//! `w = exp(-(a/D) u)` with `u_x = θ + b` turns it into the heat equation
//! `w_t = D w_xx` on `0 < x < L` with
//!
//! * `w(x, 0) = exp(-A x)`,
//! * `w(0, t) = exp(B t)` (constant surface flux),
//! * `w_x(L, t) + C w(L, t) = 0` (fixed bottom moisture).
//!
//! All quantities are SI: metres, seconds, m³/m³.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Soil hydraulic constants of the quadratic-conductivity model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SoilHydraulics {
    /// Conductivity coefficient (m/s).
    pub a: f64,
    /// Moisture offset (m³/m³). Usually negative.
    pub b: f64,
    /// Soil water diffusivity (m²/s).
    #[serde(rename = "D")]
    pub d: f64,
}

impl SoilHydraulics {
    pub fn new(a: f64, b: f64, d: f64) -> Result<Self> {
        let soil = Self { a, b, d };
        soil.validate()?;
        Ok(soil)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a.is_finite() && self.a > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "a must be > 0, got {}",
                self.a
            )));
        }
        if !self.b.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "b must be finite, got {}",
                self.b
            )));
        }
        if !(self.d.is_finite() && self.d > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "D must be > 0, got {}",
                self.d
            )));
        }
        Ok(())
    }

    /// The ratio `a / D` (1/m per unit moisture) that scales every derived constant.
    pub fn ratio(&self) -> f64 {
        self.a / self.d
    }

    /// Soil used in both worked examples: loam data of Clothier et al.
    pub fn reference_loam() -> Self {
        Self {
            a: 9.88e-5,
            b: -0.0065,
            d: 3.51e-7,
        }
    }
}

/// Geometry, surface flux and moisture data of a soil column.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ColumnScenario {
    /// Column length (m).
    #[serde(rename = "L")]
    pub length: f64,
    /// Constant surface flux (m/s); zero for a sealed surface.
    pub q: f64,
    /// Initial water content.
    pub theta0: f64,
    /// Water content held at the bottom of the column.
    #[serde(rename = "thetaL")]
    pub theta_l: f64,
}

impl ColumnScenario {
    pub fn new(length: f64, q: f64, theta0: f64, theta_l: f64) -> Result<Self> {
        let scen = Self {
            length,
            q,
            theta0,
            theta_l,
        };
        scen.validate()?;
        Ok(scen)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.length.is_finite() && self.length > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "L must be > 0, got {}",
                self.length
            )));
        }
        if !(self.q.is_finite() && self.q >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "q must be >= 0 (evaporation is not supported), got {}",
                self.q
            )));
        }
        if !(self.theta_l.is_finite() && self.theta_l > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "thetaL must be > 0, got {}",
                self.theta_l
            )));
        }
        if !(self.theta0.is_finite() && self.theta0 >= self.theta_l) {
            return Err(Error::InvalidParameter(format!(
                "theta0 must be >= thetaL, got theta0 = {}, thetaL = {}",
                self.theta0, self.theta_l
            )));
        }
        Ok(())
    }

    /// First worked example: 25 cm column wetted by a constant flux.
    pub fn example1() -> Self {
        Self {
            length: 0.25,
            q: 3.4e-6,
            theta0: 0.03,
            theta_l: 0.03,
        }
    }

    /// Second worked example: 8 cm column draining under a sealed surface.
    pub fn example2() -> Self {
        Self {
            length: 0.08,
            q: 0.0,
            theta0: 0.355,
            theta_l: 0.10,
        }
    }
}

/// Constants of the transformed heat problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HopfColeConstants {
    /// `A = (a/D)(θ₀ + b)`, decay rate of the initial profile (1/m).
    pub initial_decay: f64,
    /// `B = (a/D) q`, growth rate of the surface datum (1/s).
    pub surface_growth: f64,
    /// `C = (a/D)(θ_L + b)`, Robin coefficient at the bottom (1/m).
    pub robin: f64,
    /// `γ = √(B/D)`; `iγ` is the pole of `1/(Dλ² + B)` in the upper half-plane (1/m).
    pub gamma: f64,
}

/// Derives `A`, `B`, `C` and `γ` from the physical data.
pub fn derive_constants(soil: &SoilHydraulics, scen: &ColumnScenario) -> Result<HopfColeConstants> {
    soil.validate()?;
    scen.validate()?;
    if scen.theta0 + soil.b <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "theta0 + b must be > 0, got {}",
            scen.theta0 + soil.b
        )));
    }
    if scen.theta_l + soil.b <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "thetaL + b must be > 0, got {}",
            scen.theta_l + soil.b
        )));
    }
    let k = soil.ratio();
    let surface_growth = k * scen.q;
    Ok(HopfColeConstants {
        initial_decay: k * (scen.theta0 + soil.b),
        surface_growth,
        robin: k * (scen.theta_l + soil.b),
        gamma: (surface_growth / soil.d).sqrt(),
    })
}

/// Initial datum `w₀(x) = exp(-A x)`.
pub fn w0_of_x(x: f64, c: &HopfColeConstants) -> f64 {
    (-c.initial_decay * x).exp()
}

/// Surface datum `f(t) = exp(B t)`.
pub fn f_of_t(t: f64, c: &HopfColeConstants) -> f64 {
    (c.surface_growth * t).exp()
}

/// Water content from the Hopf–Cole state: `θ = -(D/a) w_x / w - b`.
pub fn theta_from_w(w: f64, wx: f64, soil: &SoilHydraulics) -> Result<f64> {
    if !(w > 0.0) {
        return Err(Error::NonPositiveW {
            w,
            x: f64::NAN,
            t: f64::NAN,
        });
    }
    Ok(-(soil.d / soil.a) * (wx / w) - soil.b)
}

/// Hydraulic conductivity `K(θ) = a(θ + b)²` (m/s).
pub fn conductivity(theta: f64, soil: &SoilHydraulics) -> f64 {
    soil.a * (theta + soil.b).powi(2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn ex1() -> HopfColeConstants {
        derive_constants(
            &SoilHydraulics::reference_loam(),
            &ColumnScenario::example1(),
        )
        .unwrap()
    }

    #[test]
    fn example1_constants() {
        let c = ex1();
        assert!(
            (6.55..=6.65).contains(&c.initial_decay),
            "A = {}",
            c.initial_decay
        );
        assert!((52.0..=52.4).contains(&c.gamma), "gamma = {}", c.gamma);
        assert_eq!(c.initial_decay, c.robin);
        assert_relative_eq!(
            c.surface_growth,
            9.570_370_370_370_37e-4,
            max_relative = 1e-12
        );
    }

    #[test]
    fn example2_constants() {
        let c = derive_constants(
            &SoilHydraulics::reference_loam(),
            &ColumnScenario::example2(),
        )
        .unwrap();
        assert_eq!(c.surface_growth, 0.0);
        assert_eq!(c.gamma, 0.0);
        assert!(
            (c.initial_decay - 98.1).abs() < 0.05,
            "A = {}",
            c.initial_decay
        );
        assert!((c.robin - 26.3).abs() < 0.05, "C = {}", c.robin);
    }

    #[test]
    fn rejects_nonpositive_offsets() {
        let soil = SoilHydraulics::reference_loam();
        let mut scen = ColumnScenario::example1();
        scen.theta_l = 0.005;
        assert!(matches!(
            derive_constants(&soil, &scen),
            Err(Error::InvalidParameter(_))
        ));
        let scen = ColumnScenario::new(0.25, 0.0, 0.0065, 0.0065).unwrap();
        assert!(derive_constants(&soil, &scen).is_err());
    }

    #[test]
    fn rejects_bad_scenarios() {
        assert!(ColumnScenario::new(0.25, -1e-6, 0.03, 0.03).is_err());
        assert!(ColumnScenario::new(0.0, 0.0, 0.03, 0.03).is_err());
        assert!(ColumnScenario::new(0.25, 0.0, 0.02, 0.03).is_err());
        assert!(ColumnScenario::new(0.25, 0.0, 0.03, 0.0).is_err());
        assert!(SoilHydraulics::new(0.0, 0.0, 1.0).is_err());
        assert!(SoilHydraulics::new(1.0, 0.0, -1.0).is_err());
    }

    #[test]
    fn data_functions() {
        let c = ex1();
        assert_eq!(w0_of_x(0.0, &c), 1.0);
        assert_relative_eq!(w0_of_x(0.25, &c), 0.191_3, max_relative = 1e-3);
        assert_eq!(f_of_t(0.0, &c), 1.0);
        assert_relative_eq!(f_of_t(2400.0, &c), 9.943, max_relative = 1e-3);
        let flat = HopfColeConstants {
            initial_decay: 0.0,
            surface_growth: 0.0,
            robin: 1.0,
            gamma: 0.0,
        };
        assert_eq!(w0_of_x(0.1, &flat), 1.0);
        assert_eq!(f_of_t(1e4, &flat), 1.0);
    }

    #[test]
    fn theta_reconstruction() {
        let soil = SoilHydraulics::reference_loam();
        let scen = ColumnScenario::example2();
        let c = derive_constants(&soil, &scen).unwrap();
        assert_eq!(theta_from_w(3.0, 0.0, &soil).unwrap(), -soil.b);
        // Initial profile and Robin identity invert A and C.
        let w = w0_of_x(0.03, &c);
        assert_relative_eq!(
            theta_from_w(w, -c.initial_decay * w, &soil).unwrap(),
            scen.theta0,
            epsilon = 1e-15
        );
        assert_relative_eq!(
            theta_from_w(0.7, -c.robin * 0.7, &soil).unwrap(),
            scen.theta_l,
            epsilon = 1e-15
        );
        assert!(matches!(
            theta_from_w(0.0, 1.0, &soil),
            Err(Error::NonPositiveW { .. })
        ));
        assert!(theta_from_w(-1.0, 1.0, &soil).is_err());
    }

    #[test]
    fn conductivity_is_quadratic_about_minus_b() {
        let soil = SoilHydraulics::reference_loam();
        assert_eq!(conductivity(-soil.b, &soil), 0.0);
        assert_relative_eq!(conductivity(0.03, &soil), 5.456e-8, max_relative = 1e-3);
        for delta in [1e-3, 0.02, 0.3] {
            assert_relative_eq!(
                conductivity(-soil.b + delta, &soil),
                conductivity(-soil.b - delta, &soil),
                max_relative = 1e-12
            );
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn constants_invert_exactly(
                theta_l in 0.01f64..0.4,
                extra in 0.0f64..0.2,
                q in 0.0f64..1e-5,
            ) {
                let soil = SoilHydraulics::reference_loam();
                let scen = ColumnScenario::new(0.2, q, theta_l + extra, theta_l).unwrap();
                let c = derive_constants(&soil, &scen).unwrap();
                let back0 = c.initial_decay * soil.d / soil.a - soil.b;
                let back_l = c.robin * soil.d / soil.a - soil.b;
                prop_assert!((back0 - scen.theta0).abs() <= 1e-15);
                prop_assert!((back_l - scen.theta_l).abs() <= 1e-15);
                prop_assert!((c.gamma * c.gamma * soil.d - c.surface_growth).abs()
                    <= 4.0 * f64::EPSILON * c.surface_growth.max(f64::MIN_POSITIVE));
                // Round trip through the initial profile.
                for x in [0.0, 0.05, 0.2] {
                    let w = w0_of_x(x, &c);
                    let th = theta_from_w(w, -c.initial_decay * w, &soil).unwrap();
                    prop_assert!((th - scen.theta0).abs() <= 1e-14);
                }
            }
        }
    }
}
