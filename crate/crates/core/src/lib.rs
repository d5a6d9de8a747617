//! Numerical laboratory for the perturbed one-dimensional wave equation
//!
//! ```text
//! w_tt - a^2 w_xx + c(x,t) w = 0,   0 < x < 1,  t > 0
//! w(0,t) = p (w_t + a w_x)(0,t),    (w_t + a w_x)(1,t) = 0
//! ```
//!
//! The equation is rewritten in the characteristic pair `(w, u = w_t + a w_x)`
//! and marched on a grid with `dt = dx / a`, so that transport is exact and
//! only the zero-order coupling needs quadrature. The unperturbed problem
//! vanishes identically after `t = 2/a`; the modules here measure how that
//! property degrades into exponential decay and eventual `C^2` regularity
//! when a small coefficient `c` is switched on.
//!
//! * [`problem`]: problem description, initial data reduction, mirror map.
//! * [`solver`]: characteristic-aligned time stepper.
//! * [`oracle`]: closed-form transport solution and Picard iteration on the
//!   integral form of the system, used as an independent reference.
//! * [`analysis`]: extinction times, decay and growth fits, discrete `C^2`
//!   norms, stability index.
//! * [`mollify`]: compactly supported approximants of rough data.

pub mod analysis;
pub mod data;
pub mod error;
pub mod exec;
pub mod field;
pub mod grid;
pub mod manufactured;
pub mod mollify;
pub mod norms;
pub mod oracle;
pub mod problem;
pub mod solver;

pub use error::{Error, Result};
pub use exec::Exec;
pub use field::CoefficientField;
pub use grid::{GridState, NormRecord, Trajectory};
pub use problem::{InitialData, Orientation, ProblemSpec};
pub use solver::{Forcing, QuadratureRule, StepScheme};
