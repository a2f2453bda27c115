//! Orientation normalization for the local construction: translate the
//! center to the origin and apply (at most) the shear change of variables
//! `u'(x', y') = u(x'+y', x'-y')` and a sign flip so that
//! `dxx u' - dyy u' > 0` at the origin.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::{ScalarFieldExpr, Var};

/// The transforms applied, sufficient to undo them: first translate by
/// `translation`, then (optionally) the shear, then (optionally) negate.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct OrientationRecord {
    pub translation: (f64, f64),
    pub rotated: bool,
    pub negated: bool,
}

impl OrientationRecord {
    /// Map a point of the working (normalized) plane back to the original
    /// plane.
    pub fn to_original(&self, x: f64, y: f64) -> (f64, f64) {
        let (px, py) = if self.rotated { (x + y, x - y) } else { (x, y) };
        (px + self.translation.0, py + self.translation.1)
    }
}

pub fn normalize_orientation(
    u: &ScalarFieldExpr,
    center: (f64, f64),
) -> Result<(ScalarFieldExpr, OrientationRecord)> {
    // translate the center to the origin
    let x = ScalarFieldExpr::x().add(&ScalarFieldExpr::constant(center.0));
    let y = ScalarFieldExpr::y().add(&ScalarFieldExpr::constant(center.1));
    let shifted = u.subst_xy(&x, &y).simplify();

    // strain at the origin: e11 = -u_xy, e12 = (u_xx - u_yy)/2
    let uxy = shifted.d(Var::X).d(Var::Y);
    let d = shifted
        .differentiate(Var::X, 2)
        .sub(&shifted.differentiate(Var::Y, 2))
        .simplify();
    let m0 = uxy.eval(0.0, 0.0);
    let d0 = d.eval(0.0, 0.0);
    let strain_norm = (2.0 * (m0 * m0 + 0.25 * d0 * d0)).sqrt();
    if strain_norm <= 1e-10 {
        return Err(Error::Hypothesis(format!(
            "strain vanishes at center ({}, {}): |e(U)| = {strain_norm:.3e} <= 1e-10; \
             the local construction requires e(U) != 0 there",
            center.0, center.1
        )));
    }

    // prefer the direct orientation when the diagonal part dominates;
    // otherwise the shear moves the off-diagonal part onto the diagonal
    let rotated = d0.abs() < m0.abs();
    let oriented = if rotated {
        let xs = ScalarFieldExpr::x().add(&ScalarFieldExpr::y());
        let ys = ScalarFieldExpr::x().sub(&ScalarFieldExpr::y());
        shifted.subst_xy(&xs, &ys).simplify()
    } else {
        shifted
    };
    let d_or = oriented
        .differentiate(Var::X, 2)
        .sub(&oriented.differentiate(Var::Y, 2))
        .simplify();
    let dval = d_or.eval(0.0, 0.0);
    let negated = dval < 0.0;
    let out = if negated { oriented.neg().simplify() } else { oriented };

    let record = OrientationRecord {
        translation: center,
        rotated,
        negated,
    };
    debug_assert!({
        let check = out
            .differentiate(Var::X, 2)
            .sub(&out.differentiate(Var::Y, 2))
            .eval(0.0, 0.0);
        check > 0.0
    });
    Ok((out, record))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expression;

    fn p(s: &str) -> ScalarFieldExpr {
        parse_expression(s).unwrap()
    }

    #[test]
    fn identity_orientation_for_saddle_stream() {
        let (u, rec) = normalize_orientation(&p("(x^2-y^2)/2"), (0.0, 0.0)).unwrap();
        assert!(!rec.rotated && !rec.negated);
        assert!(u.structurally_eq(&p("(x^2-y^2)/2").simplify()));
    }

    #[test]
    fn sign_flip_for_negated_stream() {
        let (u, rec) = normalize_orientation(&p("-(x^2-y^2)/2"), (0.0, 0.0)).unwrap();
        assert!(!rec.rotated && rec.negated);
        let d = u
            .differentiate(Var::X, 2)
            .sub(&u.differentiate(Var::Y, 2))
            .eval(0.0, 0.0);
        assert!(d > 0.0);
    }

    #[test]
    fn shear_for_pure_cross_term() {
        let (u, rec) = normalize_orientation(&p("x*y"), (0.0, 0.0)).unwrap();
        assert!(rec.rotated);
        // u(x+y, x-y) = x^2 - y^2
        let d = u
            .differentiate(Var::X, 2)
            .sub(&u.differentiate(Var::Y, 2))
            .eval(0.0, 0.0);
        assert!((d - 4.0).abs() < 1e-13);
    }

    #[test]
    fn zero_strain_center_rejected() {
        let err = normalize_orientation(&p("x^3"), (0.0, 0.0)).unwrap_err();
        assert!(matches!(err, Error::Hypothesis(_)));
        // same stream away from the degenerate point is fine
        assert!(normalize_orientation(&p("x^3"), (0.5, 0.0)).is_ok());
    }

    #[test]
    fn record_undoes_transforms() {
        let (_, rec) = normalize_orientation(&p("x*y"), (0.25, -0.5)).unwrap();
        let (ox, oy) = rec.to_original(0.0, 0.0);
        assert_eq!((ox, oy), (0.25, -0.5));
    }
}
