mod common;

use closedode::invariants::{first_integrals, reconstruct_z, z_state};
use closedode::oracle::{compare, rk4_integrate, scaled_residual};
use closedode::parser::{normalize, parse_coefficients, parse_ode};
use closedode::solver::{
    characteristic_roots, from_exponential_form, general_solution, shape_params, Roots, DEFAULT_TOL,
};
use closedode::{Coefficients, DampingClass, RawEquation};
use proptest::prelude::*;

use common::{fitted, ulp_of};

fn coeff() -> impl Strategy<Value = f64> {
    -6.0..6.0f64
}

fn coefficients() -> impl Strategy<Value = Coefficients> {
    (coeff(), coeff()).prop_map(|(a, b)| Coefficients { a, b })
}

/// `b = a²/4 − β²` with `β` well outside the critical band.
fn overdamped() -> impl Strategy<Value = Coefficients> {
    (coeff(), 1e-3..3.0f64).prop_map(|(a, beta)| Coefficients { a, b: a * a / 4.0 - beta * beta })
}

fn nonzero() -> impl Strategy<Value = f64> {
    prop_oneof![-100.0..-1e-3f64, 1e-3..100.0f64]
}

fn term(c: f64, f: &str) -> String {
    if c < 0.0 {
        format!("- {:?}*{f}", -c)
    } else {
        format!("+ {c:?}*{f}")
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn display_parses_back_exactly(a in any::<f64>(), b in any::<f64>()) {
        prop_assume!(a.is_finite() && b.is_finite());
        let c = Coefficients { a, b };
        prop_assert_eq!(parse_coefficients(&c.to_string()), Ok(c));
    }

    #[test]
    fn scaling_every_coefficient_is_harmless(c2 in nonzero(), c1 in coeff(), c0 in coeff(), k in nonzero()) {
        let base = normalize(RawEquation { c2, c1, c0 }).unwrap();
        let scaled = normalize(RawEquation { c2: k * c2, c1: k * c1, c0: k * c0 }).unwrap();
        for (p, q) in [(base.a, scaled.a), (base.b, scaled.b)] {
            prop_assert!((p - q).abs() <= 4.0 * f64::EPSILON * p.abs(), "{} vs {}", p, q);
        }
        let exact = normalize(RawEquation { c2: 4.0 * c2, c1: 4.0 * c1, c0: 4.0 * c0 }).unwrap();
        prop_assert_eq!(exact, base);
    }

    #[test]
    fn term_order_does_not_matter(c2 in nonzero(), c1 in coeff(), c0 in coeff(), order in Just([0usize, 1, 2]).prop_shuffle()) {
        let terms = [term(c2, "y''"), term(c1, "y'"), term(c0, "y")];
        let text = format!("{} {} {} = 0", terms[order[0]], terms[order[1]], terms[order[2]]);
        prop_assert_eq!(parse_ode(&text), Ok(RawEquation { c2, c1, c0 }), "{}", text);
    }

    #[test]
    fn every_closed_form_solves_the_equation(coeffs in coefficients(), c1 in -3.0..3.0f64, c2 in -3.0..3.0f64, x in -3.0..3.0f64) {
        let form = general_solution(coeffs, DEFAULT_TOL).with_constants(c1, c2);
        prop_assert!(scaled_residual(coeffs, &form, x).unwrap() <= 1e-9);
    }

    #[test]
    fn initial_conditions_are_reproduced(coeffs in coefficients(), y0 in -3.0..3.0f64, v0 in -3.0..3.0f64) {
        let form = fitted(coeffs, y0, v0);
        let j = form.jet(0.0).unwrap();
        prop_assert!((j.y - y0).abs() <= 1e-12 * y0.abs().max(1.0));
        prop_assert!((j.dy - v0).abs() <= 1e-12 * (v0.abs() + coeffs.a.abs() * y0.abs()).max(1.0));
    }

    #[test]
    fn exponential_basis_round_trips(coeffs in overdamped(), c1 in -3.0..3.0f64, c2 in -3.0..3.0f64, x in -3.0..3.0f64) {
        let form = general_solution(coeffs, DEFAULT_TOL).with_constants(c1, c2);
        prop_assert_eq!(form.class(), DampingClass::Overdamped);
        let exp = form.to_exponential_form().unwrap();
        prop_assert!(exp.r1 > exp.r2);
        let back = from_exponential_form(exp, DEFAULT_TOL).unwrap();
        let (b1, b2) = back.bound_constants().unwrap();
        // sums and differences are exact only up to an ulp of the larger operand
        let shape_unit = ulp_of(form.alpha(), form.beta());
        let constant_unit = ulp_of(c1, c2);
        for (p, q, unit) in [
            (form.alpha(), back.alpha(), shape_unit),
            (form.beta(), back.beta(), shape_unit),
            (c1, b1, constant_unit),
            (c2, b2, constant_unit),
        ] {
            prop_assert!((p - q).abs() <= 4.0 * unit, "{} vs {}", p, q);
        }
        let y = form.evaluate(x).unwrap();
        prop_assert!((exp.evaluate(x) - y).abs() <= 1e-10 * y.abs().max(1.0));
    }

    #[test]
    fn roots_satisfy_the_characteristic_equation(coeffs in coefficients()) {
        let Coefficients { a, b } = coeffs;
        let check = |r: f64| (r * r + a * r + b).abs() <= 1e-9 * (r * r + (a * r).abs() + b.abs()).max(1.0);
        match characteristic_roots(coeffs, DEFAULT_TOL) {
            Roots::Distinct(r1, r2) => {
                prop_assert!(r1 > r2);
                prop_assert!(check(r1) && check(r2));
                prop_assert!((r1 + r2 + a).abs() <= 1e-12 * a.abs().max(1.0));
            }
            Roots::Double(r) => prop_assert!((r + a / 2.0).abs() <= 1e-12 * a.abs().max(1.0)),
            Roots::NoReal => prop_assert!(a * a / 4.0 < b),
        }
    }

    #[test]
    fn classification_follows_the_discriminant(coeffs in coefficients()) {
        let Coefficients { a, b } = coeffs;
        let d = a * a / 4.0 - b;
        let band = 1e-9 * (a * a / 4.0).max(b.abs()).max(1.0);
        let shape = shape_params(coeffs, 1e-9);
        let want = if d.abs() <= band * 0.5 {
            Some(DampingClass::Critical)
        } else if d > band * 2.0 {
            Some(DampingClass::Overdamped)
        } else if d < -band * 2.0 {
            Some(DampingClass::Underdamped)
        } else {
            None
        };
        if let Some(class) = want {
            prop_assert_eq!(shape.class, class);
        }
        prop_assert_eq!(shape.alpha, a / 2.0);
        prop_assert!(shape.beta >= 0.0);
        prop_assert_eq!(shape.beta == 0.0, shape.class == DampingClass::Critical);
    }

    #[test]
    fn near_critical_coefficients_snap(a in -6.0..6.0f64, nudge in -0.9..0.9f64) {
        let b = a * a / 4.0 + nudge * 1e-9 * (a * a / 4.0).max(1.0);
        prop_assert_eq!(shape_params(Coefficients { a, b }, 1e-9).class, DampingClass::Critical);
    }

    #[test]
    fn first_integrals_rebuild_z(coeffs in coefficients(), y0 in -3.0..3.0f64, v0 in -3.0..3.0f64, x in -4.0..4.0f64) {
        let form = fitted(coeffs, y0, v0);
        let z = z_state(&form, x).unwrap().z;
        let rebuilt = reconstruct_z(form.shape(), first_integrals(&form, x).unwrap(), x);
        prop_assert!((rebuilt - z).abs() <= 1e-9 * z.abs().max(1.0));
    }

    #[test]
    fn first_integrals_match_the_constants(coeffs in coefficients(), y0 in -3.0..3.0f64, v0 in -3.0..3.0f64, x in -4.0..4.0f64) {
        let form = fitted(coeffs, y0, v0);
        let (c1, c2) = form.bound_constants().unwrap();
        let pair = first_integrals(&form, x).unwrap();
        let scale = c1.abs().max(c2.abs()).max(1.0);
        prop_assert!((pair.i1 - c1).abs() <= 1e-9 * scale && (pair.i2 - c2).abs() <= 1e-9 * scale);
    }

    #[test]
    fn z_derivative_matches_finite_difference(coeffs in coefficients(), y0 in -3.0..3.0f64, v0 in -3.0..3.0f64, x in -2.0..2.0f64) {
        let form = fitted(coeffs, y0, v0);
        let s = z_state(&form, x).unwrap();
        for h in [1e-5, 1e-6] {
            let fd = (z_state(&form, x + h).unwrap().z - z_state(&form, x - h).unwrap().z) / (2.0 * h);
            prop_assert!((fd - s.zprime).abs() <= 1e-6 * (1.0 + s.zprime.abs()), "h={}: {} vs {}", h, fd, s.zprime);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn closed_form_agrees_with_rk4(a in -3.0..3.0f64, b in -3.0..3.0f64, y0 in -2.0..2.0f64, v0 in -2.0..2.0f64) {
        let coeffs = Coefficients { a, b };
        let form = fitted(coeffs, y0, v0);
        let traj = rk4_integrate(coeffs, y0, v0, 3.0, 1e-3).unwrap();
        prop_assert!(compare(&form, &traj).unwrap().max_err() <= 1e-8);
    }
}
