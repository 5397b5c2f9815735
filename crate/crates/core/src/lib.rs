//! Vertical infiltration into a finite soil column, solved through the
//! Hopf–Cole transform and a unified-transform (Fokas) contour integral.
//!
//! Crank–Nicolson and eigenfunction-series oracles live in [`oracle`].

// Negated comparisons are deliberate: NaN must fail every validity check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod contour;
pub mod error;
pub mod model;
pub mod oracle;
pub mod solver;
pub mod spectral;

#[cfg(test)]
mod testutil;

pub use error::{Error, Result};
pub use model::{ColumnScenario, HopfColeConstants, SoilHydraulics};
