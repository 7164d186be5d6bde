//! Toolkit for the quaternionic Monge-Ampere operator.
//!
//! The crate is organised around five subsystems:
//!
//! * [`quat`] — quaternion arithmetic, hyperhermitian matrices, the complex
//!   embedding, Pfaffians and the Moore determinant (two independent routes);
//! * [`forms`] — exact exterior calculus over polynomial coefficients in
//!   `z`, `z-bar` variables with the operators `d`, `d-bar` and the twisted
//!   differential, used for symbolic verification of operator identities;
//! * [`hessians`] — finite-difference real, complex and quaternionic Hessians
//!   of black-box scalar fields, the pointwise Monge-Ampere density and the
//!   determinant inequality checker;
//! * [`models`] — closed-form radial test functions with exact densities,
//!   including the fundamental solution and the log family;
//! * [`solver`] — Dirichlet solvers on balls (exact-quadrature radial for any
//!   `n`, full-grid 4-D for `n = 1`) plus bound utilities and experiments.
//!
//! All numeric entry points are pure functions of immutable inputs and are
//! safe to call concurrently.

pub mod error;
pub mod forms;
pub mod hessians;
pub mod models;
pub mod pfaffian;
pub mod quad;
pub mod quat;
pub mod solver;
pub mod verify;

pub use error::{QmaError, Result};
