//! Quasilinear Dirichlet problems driven by an N-function `Phi`:
//! `-div(phi(|grad u|) grad u) = f` and its superlinear counterpart with `g(u)` on the right.
//!
//! The solvers work on P1 finite elements over the unit interval or rectangles and
//! report diagnostics (bounds, pairings, mountain-pass levels) alongside the solutions.

// `!(x > 0.0)` also rejects NaN, which is the point
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dirichlet;
pub mod energy;
pub mod error;
pub mod grid;
pub mod linalg;
pub mod nfunc;
pub mod nonlin;
pub mod report;
pub mod superlin;
pub mod verify;

pub use error::{Error, Result};
pub use grid::{build_mesh, gradient_field, integrate, Field, Mesh, MeshSummary};
pub use nfunc::{
    conjugate_eval, luxemburg_norm, zeta_bounds, NFunction, OrliczFunction, RegularizedNFunction,
    SampledMeasureSpace, Zeta,
};
pub use energy::{EnergyValue, Source};
pub use nonlin::{Nonlinearity, Variant};
pub use dirichlet::{
    solve_continuation, solve_reflexive, ContinuationConfig, ContinuationSchedule, SolverConfig,
};
pub use report::{APrioriBound, BoundMonitor, EpsRecord, SolveReport, SweepRecord};
pub use superlin::{certify_geometry, mountain_pass_solve, GeometryConfig, MountainPassConfig};
pub use verify::{convergence_study, moser_ladder, poincare_check, MoserParams, NormLadder, RateTable};
