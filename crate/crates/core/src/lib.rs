//! Closed-form solutions of `y'' + a·y' + b·y = 0` using only real
//! arithmetic, with independent verification.
//!
//! * [`parser`] reads equations such as `"2y'' - y' + 0.5y = 0"`.
//! * [`solver`] classifies the equation, builds the general solution, fits
//!   initial conditions at `x = 0` and converts between the hyperbolic and
//!   exponential bases.
//! * [`invariants`] exposes the substitution `z = e^(αx)·y` and the two
//!   first integrals of each case.
//! * [`oracle`] integrates the equation with RK4 and compares.
//! * [`cli`] is the `closedode` command line.
//!
//! ```
//! use closedode::{parser, solver};
//!
//! let coeffs = parser::parse_coefficients("y'' + 3y' + 2y = 0").unwrap();
//! let form = solver::general_solution(coeffs, solver::DEFAULT_TOL).fit_initial_conditions(1.0, -1.0);
//! assert_eq!(form.render(), "y = e^(-1.5x)·(1·cosh(0.5x) + 1·sinh(0.5x))");
//! assert!((form.evaluate(2.0).unwrap() - (-2.0f64).exp()).abs() < 1e-15);
//! ```

pub mod cli;
mod dd;
pub mod invariants;
pub mod oracle;
pub mod parser;
pub mod solver;

pub use parser::{Coefficients, ParseError, RawEquation};
pub use solver::{ClosedForm, DampingClass, ExponentialForm, ShapeParams, SolveError};
