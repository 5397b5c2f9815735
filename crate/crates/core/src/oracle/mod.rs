//! Reference solvers for the transformed heat problem, used to check the
//! contour-integral solution: a Crank–Nicolson scheme and an eigenfunction
//! series.

mod crank_nicolson;
mod series;

pub use crank_nicolson::{cn_solve, sample_mesh, FdConfig};
pub use series::{
    build_series, eigenvalues, particular_solution, project_coefficients, series_solution,
    truncation_study, EigenSeries, SeriesPoint, TruncationRow,
};
