//! Projection-characteristics solver for alpha-dissipative solutions of the
//! Hunter-Saxton equation `(u_t + u u_x)_x = u_x^2 / 2`.
//!
//! The pipeline is `project -> to_lagrangian -> evolve -> to_eulerian`. Every
//! stage is exact on piecewise-linear data, so the only discretisation error
//! comes from the initial projection onto the grid `x_j = j dx`.

pub mod error;
pub mod euler_data;
pub mod evolution;
pub mod harness;
pub mod lagrangian;
pub mod metrics;
pub mod projection;
pub mod pushforward;
pub mod quadrature;
pub mod reference;

pub use error::{HsError, Result};
pub use euler_data::{
    appendix_a_datum, cosine_datum, cusp_datum, make_multipeakon, validate, Atom, EnergyMeasure, EulerianSolution,
    InitialDatum, PiecewiseLinear, Side,
};
pub use evolution::{brute_force_oracle, events, evolve, evolve_before, total_energy, EventSchedule};
pub use lagrangian::{breaking_time, to_lagrangian, LagrangianState};
pub use projection::{project, projection_error, ProjectedDatum, ProjectionConfig, SignRule};
pub use pushforward::{eval_f, eval_u, to_eulerian};
