//! Finite-model laboratory for Muckenhoupt weights.
//!
//! The crate computes `A_p`, Fujii–Wilson and exponential `A_∞` constants,
//! the uncentered, dyadic and local maximal operators, a local
//! Calderón–Zygmund decomposition, and evaluates the sharp reverse Hölder
//! family of inequalities with explicit structural constants on two kinds of
//! finite models:
//!
//! * [`QuasiMetricSpace`]: a finite point set with a distance matrix and a
//!   positive point measure, from which the quasitriangle constant `κ` and
//!   the doubling constant `C_μ` are derived exactly;
//! * [`DyadicGrid`]: a depth-`K` dyadic subdivision of the unit cube.
//!
//! Suprema over "all balls" are exact maxima over canonical balls, one per
//! distinct member set and center.

pub mod cli;
pub mod constants;
pub mod corpus;
pub mod czd;
mod error;
pub mod maximal;
pub mod space;
pub mod verify;

pub use constants::{CubeFamily, Weight};
pub use error::{Error, Result};
pub use space::{Ball, Cube, DistanceMatrix, DyadicGrid, LocalBasis, QuasiMetricSpace};
