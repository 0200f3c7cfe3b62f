//! Independent numerical check of closed-form output.
//!
//! The equation is integrated as the first-order system `y' = v`,
//! `v' = −a·v − b·y` with classical fixed-step RK4. Nothing here calls into
//! the closed-form machinery except [`residual`] and [`compare`], which only
//! read values from it.

use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::parser::Coefficients;
use crate::solver::{ClosedForm, DampingClass, SolveError};

pub const DEFAULT_STEP: f64 = 1e-3;
pub const DEFAULT_SPAN: f64 = 5.0;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("step size must be positive and finite, got {0}")]
    InvalidStep(f64),
    #[error("integration end must be positive and finite, got {0}")]
    InvalidSpan(f64),
    #[error("initial conditions must be finite")]
    InvalidInitial,
    #[error("integration diverged at x = {x}")]
    Divergence { x: f64 },
    #[error("trajectory is empty")]
    EmptyTrajectory,
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error("csv export failed: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Samples `(x, y, y')` of one integration run.
///
/// Samples are spaced by `h` except for the last interval, which may be
/// shorter so that the run ends exactly on `x_end`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub vs: Vec<f64>,
    pub h: f64,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn last(&self) -> Option<(f64, f64, f64)> {
        let i = self.len().checked_sub(1)?;
        Some((self.xs[i], self.ys[i], self.vs[i]))
    }

    /// Writes `x,y,v` rows with a header line.
    pub fn write_csv<W: io::Write>(&self, out: W) -> Result<(), OracleError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["x", "y", "v"])?;
        for i in 0..self.len() {
            w.serialize((self.xs[i], self.ys[i], self.vs[i]))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<(), OracleError> {
        self.write_csv(std::fs::File::create(path)?)
    }
}

fn rk4_step(coeffs: Coefficients, y: f64, v: f64, h: f64) -> (f64, f64) {
    let f = |y: f64, v: f64| (v, -coeffs.a * v - coeffs.b * y);
    let (k1y, k1v) = f(y, v);
    let (k2y, k2v) = f(y + 0.5 * h * k1y, v + 0.5 * h * k1v);
    let (k3y, k3v) = f(y + 0.5 * h * k2y, v + 0.5 * h * k2v);
    let (k4y, k4v) = f(y + h * k3y, v + h * k3v);
    (y + h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y), v + h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v))
}

/// Integrates from `x = 0` with `y(0) = y0`, `y'(0) = v0` up to `x_end`.
pub fn rk4_integrate(coeffs: Coefficients, y0: f64, v0: f64, x_end: f64, h: f64) -> Result<Trajectory, OracleError> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(OracleError::InvalidStep(h));
    }
    if !(x_end > 0.0 && x_end.is_finite()) {
        return Err(OracleError::InvalidSpan(x_end));
    }
    if !(y0.is_finite() && v0.is_finite()) {
        return Err(OracleError::InvalidInitial);
    }

    // Full steps, plus one short closing step unless x_end is (within
    // rounding) a multiple of h.
    let ratio = x_end / h;
    let nearest = ratio.round();
    let (full, short) = if (ratio - nearest).abs() <= 1e-9 * ratio.max(1.0) {
        (nearest as usize, false)
    } else {
        (ratio.floor() as usize, true)
    };

    let n = full + short as usize + 1;
    let mut xs = Vec::with_capacity(n);
    let mut ys = Vec::with_capacity(n);
    let mut vs = Vec::with_capacity(n);
    xs.push(0.0);
    ys.push(y0);
    vs.push(v0);

    let (mut y, mut v) = (y0, v0);
    for i in 1..n {
        let x_prev = xs[i - 1];
        let x = if i == n - 1 { x_end } else { i as f64 * h };
        (y, v) = rk4_step(coeffs, y, v, x - x_prev);
        if !(y.is_finite() && v.is_finite()) {
            return Err(OracleError::Divergence { x });
        }
        xs.push(x);
        ys.push(y);
        vs.push(v);
    }
    Ok(Trajectory { xs, ys, vs, h })
}

/// `y'' + a·y' + b·y` from the solver's analytic derivatives.
pub fn residual(coeffs: Coefficients, form: &ClosedForm, x: f64) -> Result<f64, SolveError> {
    let jet = form.jet(x)?;
    let r = jet.ddy + coeffs.a * jet.dy + coeffs.b * jet.y;
    if r.is_finite() {
        Ok(r)
    } else {
        Err(SolveError::Overflow { x })
    }
}

/// Residual divided by `1 + |y| + |y'| + |y''|`.
pub fn scaled_residual(coeffs: Coefficients, form: &ClosedForm, x: f64) -> Result<f64, SolveError> {
    let jet = form.jet(x)?;
    let r = residual(coeffs, form, x)?;
    Ok(r.abs() / (1.0 + jet.y.abs() + jet.dy.abs() + jet.ddy.abs()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub max_err_y: f64,
    pub max_err_v: f64,
    /// Errors were divided by the running maximum of `max(1, |y|)` (and of
    /// `max(1, |y'|)` for the derivative).
    pub relative: bool,
    pub n_samples: usize,
}

impl ComparisonReport {
    pub fn max_err(&self) -> f64 {
        self.max_err_y.max(self.max_err_v)
    }
}

/// True when some solution of the form's equation grows exponentially.
pub fn has_growing_mode(form: &ClosedForm) -> bool {
    let (alpha, beta) = (form.alpha(), form.beta());
    match form.class() {
        DampingClass::Overdamped => beta - alpha > 0.0,
        DampingClass::Critical | DampingClass::Underdamped => alpha < 0.0,
    }
}

/// Largest deviation between `form` and `traj` over all samples.
///
/// Equations with a growing mode are compared in relative terms.
pub fn compare(form: &ClosedForm, traj: &Trajectory) -> Result<ComparisonReport, OracleError> {
    if traj.is_empty() {
        return Err(OracleError::EmptyTrajectory);
    }
    let relative = has_growing_mode(form);
    let (mut peak_y, mut peak_v) = (1.0f64, 1.0f64);
    let (mut err_y, mut err_v) = (0.0f64, 0.0f64);
    for i in 0..traj.len() {
        let jet = form.jet(traj.xs[i])?;
        let dy = (jet.y - traj.ys[i]).abs();
        let dv = (jet.dy - traj.vs[i]).abs();
        if !(dy.is_finite() && dv.is_finite()) {
            return Err(SolveError::Overflow { x: traj.xs[i] }.into());
        }
        if relative {
            peak_y = peak_y.max(traj.ys[i].abs());
            peak_v = peak_v.max(traj.vs[i].abs());
            err_y = err_y.max(dy / peak_y);
            err_v = err_v.max(dv / peak_v);
        } else {
            err_y = err_y.max(dy);
            err_v = err_v.max(dv);
        }
    }
    Ok(ComparisonReport { max_err_y: err_y, max_err_v: err_v, relative, n_samples: traj.len() })
}
