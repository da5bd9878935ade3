//! Time-optimal path parametrization.
//!
//! A path is traversed with squared speed `h(s)` subject to value bounds
//! `B_l(s) <= h <= B_u(s)` and slope bounds `f⁻(s, h) <= dh/ds <= f⁺(s, h)`.
//! The fastest traversal is the pointwise largest admissible `h`, which the
//! [`solver`] approximates on a grid with one backward and one forward pass.
//!
//! ```
//! use toppkit::{instances, solver::solve_default};
//!
//! let spec = instances::line();
//! let grid = spec.uniform_grid(1001).unwrap();
//! let report = solve_default(&grid, &spec.build_model().unwrap(), spec.endpoints()).unwrap();
//! assert!((report.traversal_time.unwrap() - 2.0).abs() < 1e-3);
//! ```

// NaN must fail bound checks, so comparisons are written negated.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod grid;
pub mod harness;
pub mod instances;
pub mod model;
pub mod oracle;
pub mod path;
pub mod profile;
pub mod retime;
pub mod solver;

pub use error::{Error, Pass, Result};
pub use grid::Discretization;
pub use model::{DynamicsModel, Endpoints};
pub use path::{PathKind, PathSpec};
pub use profile::{check_admissible, profile_error, Provenance, SpeedProfile};
pub use solver::{solve, solve_default, SolveReport, SolveStatus, StepSolverConfig};
