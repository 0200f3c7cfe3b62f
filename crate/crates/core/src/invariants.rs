//! The substitution `z = e^(αx)·y` and the conserved quantities it exposes.
//!
//! Substituting removes the first-derivative term: `z'' = β²z`, `z'' = 0` or
//! `z'' = −β²z` by class. Each reduced equation has two first integrals,
//! functions of `(x, z, z')` that stay constant along every solution and
//! equal the constants `C1`, `C2`:
//!
//! | class       | I1                              | I2                              |
//! |-------------|---------------------------------|---------------------------------|
//! | overdamped  | −z'·sinh(βx)/β + z·cosh(βx)     | −z·sinh(βx) + z'·cosh(βx)/β     |
//! | critical    | z'                              | z − z'·x                        |
//! | underdamped | −z'·sin(βx)/β + z·cos(βx)       | z·sin(βx) + z'·cos(βx)/β        |
//!
//! Recombining gives back z: `I1·cosh + I2·sinh`, `I1·x + I2` and
//! `I1·cos + I2·sin` respectively.

use serde::{Deserialize, Serialize};

use crate::dd::Dd;
use crate::solver::{ClosedForm, DampingClass, ShapeParams, SolveError};

/// Default grid: 101 uniform points on [−5, 5].
pub const GRID_POINTS: usize = 101;
pub const GRID_HALF_WIDTH: f64 = 5.0;
/// Overdamped grids are clipped to `|βx|` at most this.
pub const HYPERBOLIC_CLIP: f64 = 25.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZState {
    pub x: f64,
    pub z: f64,
    pub zprime: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FirstIntegralPair {
    pub i1: f64,
    pub i2: f64,
}

/// `z = e^(αx)·y(x)` and `z' = α·z + e^(αx)·y'(x)`.
pub fn z_state(form: &ClosedForm, x: f64) -> Result<ZState, SolveError> {
    let alpha = form.alpha();
    let jet = form.jet(x)?;
    let lift = (alpha * x).exp();
    let z = lift * jet.y;
    let zprime = alpha * z + lift * jet.dy;
    if !(z.is_finite() && zprime.is_finite()) {
        return Err(SolveError::Overflow { x });
    }
    Ok(ZState { x, z, zprime })
}

/// First integrals evaluated from a given z-state in plain f64.
///
/// For overdamped shapes this loses about `2|βx|/ln 10` digits to
/// cancellation; [`first_integrals`] avoids that when the form is at hand.
pub fn first_integrals_from_state(shape: ShapeParams, s: &ZState) -> FirstIntegralPair {
    let ShapeParams { beta, class, .. } = shape;
    let bx = beta * s.x;
    match class {
        DampingClass::Overdamped => {
            let (ch, sh) = (bx.cosh(), bx.sinh());
            let w = s.zprime / beta;
            FirstIntegralPair { i1: s.z * ch - w * sh, i2: w * ch - s.z * sh }
        }
        DampingClass::Underdamped => {
            let (sn, cs) = bx.sin_cos();
            let w = s.zprime / beta;
            FirstIntegralPair { i1: s.z * cs - w * sn, i2: s.z * sn + w * cs }
        }
        DampingClass::Critical => FirstIntegralPair { i1: s.zprime, i2: s.z - s.zprime * s.x },
    }
}

/// First integrals of a bound form at `x`.
///
/// Overdamped forms re-evaluate `y`, `y'`, the substitution and the
/// integrals in double-double arithmetic; the other classes have no
/// cancellation beyond a small constant factor and use [`z_state`].
pub fn first_integrals(form: &ClosedForm, x: f64) -> Result<FirstIntegralPair, SolveError> {
    if form.class() != DampingClass::Overdamped {
        let state = z_state(form, x)?;
        return Ok(first_integrals_from_state(form.shape(), &state));
    }
    let (c1, c2) = form.bound_constants().ok_or(SolveError::FreeConstants)?;
    let alpha = Dd::from_f64(form.alpha());
    let beta = Dd::from_f64(form.beta());
    let (c1, c2) = (Dd::from_f64(c1), Dd::from_f64(c2));
    let half = Dd::from_f64(0.5);

    let eb = (beta * x).exp();
    let eb_inv = eb.recip();
    let ch = (eb + eb_inv) * half;
    let sh = (eb - eb_inv) * half;
    let lift = (alpha * x).exp();
    let env = lift.recip();

    // y and y' exactly as the solver defines them, then the substitution.
    let u = c1 * ch + c2 * sh;
    let du = beta * (c1 * sh + c2 * ch);
    let y = env * u;
    let dy = env * (du - alpha * u);
    let z = lift * y;
    let zprime = alpha * z + lift * dy;

    let w = zprime / beta;
    let pair = FirstIntegralPair { i1: (z * ch - w * sh).to_f64(), i2: (w * ch - z * sh).to_f64() };
    if pair.i1.is_finite() && pair.i2.is_finite() {
        Ok(pair)
    } else {
        Err(SolveError::Overflow { x })
    }
}

/// `I1·basis1(x) + I2·basis2(x)`, which should equal `z(x)`.
pub fn reconstruct_z(shape: ShapeParams, pair: FirstIntegralPair, x: f64) -> f64 {
    let bx = shape.beta * x;
    match shape.class {
        DampingClass::Overdamped => pair.i1 * bx.cosh() + pair.i2 * bx.sinh(),
        DampingClass::Underdamped => pair.i1 * bx.cos() + pair.i2 * bx.sin(),
        DampingClass::Critical => pair.i1 * x + pair.i2,
    }
}

/// 101 points on [−5, 5]; overdamped shapes keep only `|βx| ≤ 25`.
pub fn default_grid(shape: ShapeParams) -> Vec<f64> {
    let n = (GRID_POINTS - 1) as f64;
    (0..GRID_POINTS)
        .map(|i| (2.0 * i as f64 - n) * GRID_HALF_WIDTH / n)
        .filter(|x| shape.class != DampingClass::Overdamped || (shape.beta * x).abs() <= HYPERBOLIC_CLIP)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstancyReport {
    pub case: DampingClass,
    #[serde(rename = "max_dev_I1")]
    pub max_dev_i1: f64,
    #[serde(rename = "max_dev_I2")]
    pub max_dev_i2: f64,
    #[serde(rename = "identified_C1")]
    pub identified_c1: f64,
    #[serde(rename = "identified_C2")]
    pub identified_c2: f64,
    pub pass: bool,
}

impl ConstancyReport {
    /// Grades integral samples against their value at `x = 0` and against
    /// the constants they should identify.
    ///
    /// Deviations are measured relative to `max(1, |I1(0)|, |I2(0)|)`.
    /// Non-finite samples fail the report.
    pub fn assess(
        case: DampingClass,
        reference: FirstIntegralPair,
        samples: &[FirstIntegralPair],
        constants: (f64, f64),
        tol: f64,
    ) -> ConstancyReport {
        let scale = 1f64.max(reference.i1.abs()).max(reference.i2.abs());
        let dev = |f: fn(&FirstIntegralPair) -> f64| {
            samples.iter().map(|p| (f(p) - f(&reference)).abs() / scale).fold(0.0, |m: f64, d| {
                if d.is_nan() {
                    f64::INFINITY
                } else {
                    m.max(d)
                }
            })
        };
        let max_dev_i1 = dev(|p| p.i1);
        let max_dev_i2 = dev(|p| p.i2);
        let ident1 = (reference.i1 - constants.0).abs() / scale;
        let ident2 = (reference.i2 - constants.1).abs() / scale;
        let pass = !samples.is_empty() && [max_dev_i1, max_dev_i2, ident1, ident2].iter().all(|&d| d <= tol);
        ConstancyReport { case, max_dev_i1, max_dev_i2, identified_c1: reference.i1, identified_c2: reference.i2, pass }
    }
}

/// Evaluates both first integrals on `xs` and checks that they stay at
/// their `x = 0` values, which must in turn equal `C1` and `C2`.
pub fn check_constancy(form: &ClosedForm, xs: &[f64], tol: f64) -> Result<ConstancyReport, SolveError> {
    let constants = form.bound_constants().ok_or(SolveError::FreeConstants)?;
    let reference = first_integrals(form, 0.0)?;
    let samples = xs.iter().map(|&x| first_integrals(form, x)).collect::<Result<Vec<_>, _>>()?;
    Ok(ConstancyReport::assess(form.class(), reference, &samples, constants, tol))
}
