//! Closed-form general solution of `y'' + a·y' + b·y = 0` in real arithmetic.
//!
//! With `α = a/2` and `β = √|a²/4 − b|` every solution has one of three
//! shapes, selected by the sign of `a²/4 − b`:
//!
//! | class       | condition   | y(x)                                  |
//! |-------------|-------------|---------------------------------------|
//! | overdamped  | a²/4 > b    | e^(−αx)·(C1·cosh(βx) + C2·sinh(βx))   |
//! | critical    | a²/4 = b    | e^(−αx)·(C1·x + C2)                   |
//! | underdamped | a²/4 < b    | e^(−αx)·(C1·cos(βx) + C2·sin(βx))     |
//!
//! Overdamped solutions can also be written `D1·e^(r1·x) + D2·e^(r2·x)` with
//! `r1,2 = −α ± β` the real roots of `r² + a·r + b = 0`; see
//! [`ExponentialForm`].

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::parser::Coefficients;

/// Default relative width of the band around `a²/4 = b` that is snapped to
/// [`DampingClass::Critical`].
pub const DEFAULT_TOL: f64 = 1e-9;

/// Above this `|βx|` overdamped solutions are evaluated through the
/// exponential basis instead of cosh/sinh.
pub const HYPERBOLIC_SWITCH: f64 = 30.0;

/// Overdamped solutions also use the exponential basis when
/// `C1·cosh + C2·sinh` (or `C1·sinh + C2·cosh`) is smaller than
/// `|C1|·cosh + |C2|·|sinh|` by more than this factor (16 bits lost).
const CANCELLATION_LIMIT: f64 = 65536.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("constants C1, C2 are free; fit initial conditions first")]
    FreeConstants,
    #[error("result is not finite at x = {x}")]
    Overflow { x: f64 },
    #[error("operation requires an overdamped solution, got {0}")]
    ClassMismatch(DampingClass),
    #[error("roots {r1} and {r2} coincide; the solution is critical, not overdamped")]
    RootCoincidence { r1: f64, r2: f64 },
    #[error("derivative order must be 1 or 2, got {0}")]
    DerivativeOrder(u8),
    #[error("invalid closed form record: {0}")]
    InvalidRecord(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DampingClass {
    Overdamped,
    Critical,
    Underdamped,
}

impl fmt::Display for DampingClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DampingClass::Overdamped => "overdamped",
            DampingClass::Critical => "critical",
            DampingClass::Underdamped => "underdamped",
        })
    }
}

/// `α`, `β` and the damping class of an equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShapeParams {
    pub alpha: f64,
    pub beta: f64,
    pub class: DampingClass,
}

/// Computes `α = a/2`, `β = √|a²/4 − b|` and classifies the equation.
///
/// `a²/4 − b` is treated as zero when its magnitude is at most
/// `tol·max(1, a²/4, |b|)`; the class is then `Critical` and `β = 0`.
pub fn shape_params(coeffs: Coefficients, tol: f64) -> ShapeParams {
    let alpha = coeffs.a / 2.0;
    let quarter_a2 = alpha * alpha;
    // fma keeps the discriminant correctly rounded near the critical boundary
    let disc = alpha.mul_add(alpha, -coeffs.b);
    let band = tol * 1f64.max(quarter_a2).max(coeffs.b.abs());
    if disc.abs() <= band {
        ShapeParams { alpha, beta: 0.0, class: DampingClass::Critical }
    } else if disc > 0.0 {
        ShapeParams { alpha, beta: disc.sqrt(), class: DampingClass::Overdamped }
    } else {
        ShapeParams { alpha, beta: (-disc).sqrt(), class: DampingClass::Underdamped }
    }
}

/// Integration constants of a [`ClosedForm`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Constants {
    Free,
    Bound { c1: f64, c2: f64 },
}

/// A solution of the three-case template, with free or bound constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "ClosedFormRecord", try_from = "ClosedFormRecord")]
pub struct ClosedForm {
    shape: ShapeParams,
    constants: Constants,
    coeffs: Coefficients,
}

/// y, y' and y'' at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub y: f64,
    pub dy: f64,
    pub ddy: f64,
}

/// General solution with free constants.
pub fn general_solution(coeffs: Coefficients, tol: f64) -> ClosedForm {
    ClosedForm { shape: shape_params(coeffs, tol), constants: Constants::Free, coeffs }
}

impl ClosedForm {
    pub fn shape(&self) -> ShapeParams {
        self.shape
    }

    pub fn class(&self) -> DampingClass {
        self.shape.class
    }

    pub fn alpha(&self) -> f64 {
        self.shape.alpha
    }

    pub fn beta(&self) -> f64 {
        self.shape.beta
    }

    pub fn coeffs(&self) -> Coefficients {
        self.coeffs
    }

    pub fn constants(&self) -> Constants {
        self.constants
    }

    /// `(C1, C2)`, or `None` while the constants are free.
    pub fn bound_constants(&self) -> Option<(f64, f64)> {
        match self.constants {
            Constants::Free => None,
            Constants::Bound { c1, c2 } => Some((c1, c2)),
        }
    }

    fn require_bound(&self) -> Result<(f64, f64), SolveError> {
        self.bound_constants().ok_or(SolveError::FreeConstants)
    }

    /// Same shape with the given constants.
    pub fn with_constants(&self, c1: f64, c2: f64) -> ClosedForm {
        ClosedForm { constants: Constants::Bound { c1, c2 }, ..*self }
    }

    /// Binds C1, C2 so that `y(0) = y0` and `y'(0) = v0`.
    ///
    /// Initial conditions are always taken at `x = 0`. For data given at
    /// `x0`, solve in the shifted variable `t = x − x0`. Any constants
    /// already bound are replaced.
    pub fn fit_initial_conditions(&self, y0: f64, v0: f64) -> ClosedForm {
        let ShapeParams { alpha, beta, class } = self.shape;
        let slope = alpha.mul_add(y0, v0);
        let (c1, c2) = match class {
            DampingClass::Critical => (slope, y0),
            DampingClass::Overdamped | DampingClass::Underdamped => (y0, slope / beta),
        };
        self.with_constants(c1, c2)
    }

    /// y, y' and y'' at `x` from the analytically differentiated formula.
    ///
    /// Entries that overflow come back as non-finite values; the checked
    /// accessors [`evaluate`](Self::evaluate) and
    /// [`evaluate_derivative`](Self::evaluate_derivative) turn those into
    /// [`SolveError::Overflow`].
    pub fn jet(&self, x: f64) -> Result<Jet, SolveError> {
        let (c1, c2) = self.require_bound()?;
        let ShapeParams { alpha, beta, class } = self.shape;

        if class == DampingClass::Overdamped && self.needs_exponential_basis(c1, c2, beta * x) {
            let (d1, d2) = ((c1 + c2) / 2.0, (c1 - c2) / 2.0);
            let (r1, r2) = (beta - alpha, -alpha - beta);
            let (e1, e2) = ((r1 * x).exp(), (r2 * x).exp());
            let term = |d: f64, r: f64, e: f64| if d == 0.0 { 0.0 } else { d * r * e };
            return Ok(Jet {
                y: term(d1, 1.0, e1) + term(d2, 1.0, e2),
                dy: term(d1, r1, e1) + term(d2, r2, e2),
                ddy: term(d1, r1 * r1, e1) + term(d2, r2 * r2, e2),
            });
        }

        // y = env·u with env = e^(−αx); u is the basis combination.
        let (u, du, ddu) = match class {
            DampingClass::Overdamped => {
                let (ch, sh) = ((beta * x).cosh(), (beta * x).sinh());
                let u = c1 * ch + c2 * sh;
                (u, beta * (c1 * sh + c2 * ch), beta * beta * u)
            }
            DampingClass::Underdamped => {
                let (s, c) = (beta * x).sin_cos();
                let u = c1 * c + c2 * s;
                (u, beta * (c2 * c - c1 * s), -beta * beta * u)
            }
            DampingClass::Critical => (c1 * x + c2, c1, 0.0),
        };
        let env = (-alpha * x).exp();
        let scale = |v: f64| if v == 0.0 { 0.0 } else { env * v };
        Ok(Jet { y: scale(u), dy: scale(du - alpha * u), ddy: scale(ddu - 2.0 * alpha * du + alpha * alpha * u) })
    }

    fn needs_exponential_basis(&self, c1: f64, c2: f64, bx: f64) -> bool {
        if bx.abs() > HYPERBOLIC_SWITCH {
            return true;
        }
        let (ch, sh) = (bx.cosh(), bx.sinh());
        let magnitude = c1.abs() * ch + c2.abs() * sh.abs();
        let u = c1 * ch + c2 * sh;
        let du = c1 * sh + c2 * ch;
        u.abs() * CANCELLATION_LIMIT < magnitude || du.abs() * CANCELLATION_LIMIT < magnitude
    }

    pub fn evaluate(&self, x: f64) -> Result<f64, SolveError> {
        finite(self.jet(x)?.y, x)
    }

    /// `y'(x)` for `order == 1`, `y''(x)` for `order == 2`.
    pub fn evaluate_derivative(&self, x: f64, order: u8) -> Result<f64, SolveError> {
        let jet = self.jet(x)?;
        match order {
            1 => finite(jet.dy, x),
            2 => finite(jet.ddy, x),
            other => Err(SolveError::DerivativeOrder(other)),
        }
    }

    /// Hyperbolic form rewritten as `D1·e^(r1·x) + D2·e^(r2·x)`.
    pub fn to_exponential_form(&self) -> Result<ExponentialForm, SolveError> {
        if self.shape.class != DampingClass::Overdamped {
            return Err(SolveError::ClassMismatch(self.shape.class));
        }
        let (c1, c2) = self.require_bound()?;
        let ShapeParams { alpha, beta, .. } = self.shape;
        Ok(ExponentialForm { d1: (c1 + c2) / 2.0, d2: (c1 - c2) / 2.0, r1: -alpha + beta, r2: -alpha - beta })
    }

    /// Human-readable formula, e.g. `y = e^(-1.5x)·(C1·cosh(0.5x) + C2·sinh(0.5x))`.
    pub fn render(&self) -> String {
        let ShapeParams { alpha, beta, class } = self.shape;
        let (k1, k2) = match self.constants {
            Constants::Free => ("C1".to_string(), "C2".to_string()),
            Constants::Bound { c1, c2 } => (fmt_num(c1), fmt_num(c2)),
        };
        let arg = linear(beta);
        let (b1, b2) = match class {
            DampingClass::Overdamped => (format!("cosh({arg})"), Some(format!("sinh({arg})"))),
            DampingClass::Underdamped => (format!("cos({arg})"), Some(format!("sin({arg})"))),
            DampingClass::Critical => ("x".to_string(), None),
        };
        let mut inner = format!("{k1}·{b1}");
        match b2 {
            Some(b2) => inner.push_str(&signed_join(&k2, &format!("·{b2}"))),
            None => inner.push_str(&signed_join(&k2, "")),
        }
        if alpha == 0.0 {
            format!("y = {inner}")
        } else {
            format!("y = e^({})·({inner})", linear(-alpha))
        }
    }
}

impl fmt::Display for ClosedForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

fn finite(v: f64, x: f64) -> Result<f64, SolveError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(SolveError::Overflow { x })
    }
}

/// Shortest round-trip decimal, without a negative zero.
pub(crate) fn fmt_num(v: f64) -> String {
    if v == 0.0 {
        "0".to_string()
    } else {
        format!("{v}")
    }
}

/// `k·x` written compactly: `x`, `-x`, `0.5x`.
fn linear(k: f64) -> String {
    if k == 1.0 {
        "x".to_string()
    } else if k == -1.0 {
        "-x".to_string()
    } else {
        format!("{}x", fmt_num(k))
    }
}

/// ` + k{rest}` or ` - |k|{rest}` for a numeric `k`; symbols always get `+`.
fn signed_join(k: &str, rest: &str) -> String {
    match k.strip_prefix('-') {
        Some(abs) => format!(" - {abs}{rest}"),
        None => format!(" + {k}{rest}"),
    }
}

/// Roots of `r² + a·r + b = 0`, real ones only.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Roots {
    /// `r1 > r2`.
    Distinct(f64, f64),
    Double(f64),
    /// Complex pair; this library stays real.
    NoReal,
}

impl Roots {
    pub fn as_vec(&self) -> Option<Vec<f64>> {
        match *self {
            Roots::Distinct(r1, r2) => Some(vec![r1, r2]),
            Roots::Double(r) => Some(vec![r, r]),
            Roots::NoReal => None,
        }
    }
}

pub fn characteristic_roots(coeffs: Coefficients, tol: f64) -> Roots {
    let ShapeParams { alpha, beta, class } = shape_params(coeffs, tol);
    match class {
        DampingClass::Overdamped => Roots::Distinct(-alpha + beta, -alpha - beta),
        DampingClass::Critical => Roots::Double(-alpha),
        DampingClass::Underdamped => Roots::NoReal,
    }
}

/// `y = D1·e^(r1·x) + D2·e^(r2·x)` with distinct real roots `r1 > r2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentialForm {
    pub d1: f64,
    pub d2: f64,
    pub r1: f64,
    pub r2: f64,
}

impl ExponentialForm {
    pub fn evaluate(&self, x: f64) -> f64 {
        self.d1 * (self.r1 * x).exp() + self.d2 * (self.r2 * x).exp()
    }

    pub fn render(&self) -> String {
        let term = |d: f64, r: f64| {
            if r == 0.0 {
                fmt_num(d)
            } else {
                format!("{}·e^({})", fmt_num(d), linear(r))
            }
        };
        let second = term(self.d2, self.r2);
        let joined = match second.strip_prefix('-') {
            Some(abs) => format!(" - {abs}"),
            None => format!(" + {second}"),
        };
        format!("y = {}{joined}", term(self.d1, self.r1))
    }
}

/// Converts back to the hyperbolic form: `α = −(r1+r2)/2`, `β = (r1−r2)/2`,
/// `C1 = D1 + D2`, `C2 = D1 − D2`.
///
/// The roots may be given in either order. Roots closer than the
/// classification band of `tol` describe a critical equation and are
/// rejected.
pub fn from_exponential_form(exp: ExponentialForm, tol: f64) -> Result<ClosedForm, SolveError> {
    let ExponentialForm { mut d1, mut d2, mut r1, mut r2 } = exp;
    if r1 < r2 {
        std::mem::swap(&mut r1, &mut r2);
        std::mem::swap(&mut d1, &mut d2);
    }
    let alpha = -(r1 + r2) / 2.0;
    let beta = (r1 - r2) / 2.0;
    let coeffs = Coefficients { a: 2.0 * alpha, b: r1 * r2 };
    let band = tol * 1f64.max(alpha * alpha).max(coeffs.b.abs());
    if (beta * beta).is_nan() || beta * beta <= band {
        return Err(SolveError::RootCoincidence { r1, r2 });
    }
    Ok(ClosedForm {
        shape: ShapeParams { alpha, beta, class: DampingClass::Overdamped },
        constants: Constants::Bound { c1: d1 + d2, c2: d1 - d2 },
        coeffs,
    })
}

/// Wire record `{class, alpha, beta, c1, c2, a, b}`; `c1`/`c2` are null
/// while free.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClosedFormRecord {
    pub class: DampingClass,
    pub alpha: f64,
    pub beta: f64,
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    pub a: f64,
    pub b: f64,
}

impl From<ClosedForm> for ClosedFormRecord {
    fn from(f: ClosedForm) -> Self {
        let (c1, c2) = f.bound_constants().unzip();
        ClosedFormRecord {
            class: f.shape.class,
            alpha: f.shape.alpha,
            beta: f.shape.beta,
            c1,
            c2,
            a: f.coeffs.a,
            b: f.coeffs.b,
        }
    }
}

impl TryFrom<ClosedFormRecord> for ClosedForm {
    type Error = SolveError;

    fn try_from(r: ClosedFormRecord) -> Result<Self, Self::Error> {
        let bad = |m: &str| Err(SolveError::InvalidRecord(m.to_string()));
        if ![r.alpha, r.beta, r.a, r.b].iter().all(|v| v.is_finite()) {
            return bad("non-finite parameter");
        }
        if r.alpha != r.a / 2.0 {
            return bad("alpha must equal a/2");
        }
        match r.class {
            DampingClass::Critical if r.beta != 0.0 => return bad("critical class requires beta = 0"),
            DampingClass::Overdamped | DampingClass::Underdamped if r.beta.is_nan() || r.beta <= 0.0 => {
                return bad("beta must be positive outside the critical class")
            }
            _ => {}
        }
        let constants = match (r.c1, r.c2) {
            (None, None) => Constants::Free,
            (Some(c1), Some(c2)) => Constants::Bound { c1, c2 },
            _ => return bad("c1 and c2 must both be null or both be numbers"),
        };
        Ok(ClosedForm {
            shape: ShapeParams { alpha: r.alpha, beta: r.beta, class: r.class },
            constants,
            coeffs: Coefficients { a: r.a, b: r.b },
        })
    }
}
