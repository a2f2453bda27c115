//! Coefficients of the realizability wave equation for a periodic
//! perturbation of an affine velocity field: `A = e(U) R_perp` has entries
//! `a = (dx Uy + dy Ux)/2` and `b = -dx Ux`; the characteristic speeds are
//! `alpha = (b - sqrt(a^2+b^2))/a`, `beta = (b + sqrt(a^2+b^2))/a`.
//!
//! When the average `M` has `M12 + M21 = 0` the shear change of variables
//! `(x, y) -> (x + y, x - y)` (with stream `u' = -u(x+y, x-y)/2`) swaps the
//! roles of `a` and `b`, after which `|a|` is bounded below.

use crate::error::{Error, Result};
use crate::expr::{ScalarFieldExpr, Var};
use crate::field::{Matrix2, VelocityField};

#[derive(Clone, Debug)]
pub struct WaveCoefficients {
    /// working stream function (rotated if needed)
    pub stream: ScalarFieldExpr,
    /// working average gradient
    pub average: Matrix2,
    pub velocity: VelocityField,
    pub a: ScalarFieldExpr,
    pub b: ScalarFieldExpr,
    pub alpha: ScalarFieldExpr,
    pub beta: ScalarFieldExpr,
    pub alpha_x: ScalarFieldExpr,
    pub alpha_y: ScalarFieldExpr,
    pub beta_x: ScalarFieldExpr,
    pub beta_y: ScalarFieldExpr,
    pub rotated: bool,
    /// sampled lower bound of |a| over the unit cell
    pub a_lower_bound: f64,
}

/// Stream function of the affine field `U = MX` (trace-free `M`):
/// `u_M = m21 x^2/2 + m22 x y - m12 y^2/2`.
pub fn affine_stream(m: &Matrix2) -> ScalarFieldExpr {
    let x = ScalarFieldExpr::x();
    let y = ScalarFieldExpr::y();
    x.pow(2)
        .scale(m.m21 / 2.0)
        .add(&x.mul(&y).scale(m.m22))
        .sub(&y.pow(2).scale(m.m12 / 2.0))
        .simplify()
}

pub fn wave_coefficients(stream: &ScalarFieldExpr, m: Matrix2) -> Result<WaveCoefficients> {
    if !m.is_trace_free(1e-12) {
        return Err(Error::Hypothesis(format!(
            "average gradient must be trace-free, trace = {}",
            m.trace()
        )));
    }
    if (m.m11.abs() + m.m22.abs() + (m.m12 + m.m21).abs()) <= 1e-12 {
        return Err(Error::Hypothesis(
            "M + M^T = 0: the average strain vanishes and the perturbation \
             result does not apply"
                .into(),
        ));
    }

    // rotate when the symmetric off-diagonal part of M vanishes
    let rotated = (m.m12 + m.m21).abs() <= 1e-12;
    let (work_stream, work_m) = if rotated {
        let xs = ScalarFieldExpr::x().add(&ScalarFieldExpr::y());
        let ys = ScalarFieldExpr::x().sub(&ScalarFieldExpr::y());
        let s = stream.subst_xy(&xs, &ys).scale(-0.5).simplify();
        // M' = P M P / 2 with P = [[1, 1], [1, -1]]
        let pm = Matrix2::new(
            m.m11 + m.m21,
            m.m12 + m.m22,
            m.m11 - m.m21,
            m.m12 - m.m22,
        );
        let pmp = Matrix2::new(
            pm.m11 + pm.m12,
            pm.m11 - pm.m12,
            pm.m21 + pm.m22,
            pm.m21 - pm.m22,
        );
        (s, pmp.scale(0.5))
    } else {
        (stream.clone(), m)
    };

    let velocity = VelocityField::from_stream(&work_stream);
    let strain = velocity.strain();
    let a = strain.e12.clone();
    let b = strain.e11.neg().simplify();

    // sampled lower bound of |a| over the unit cell
    let mut lower = f64::INFINITY;
    for i in 0..64 {
        for j in 0..64 {
            let v = a.eval(i as f64 / 64.0, j as f64 / 64.0).abs();
            lower = lower.min(v);
        }
    }
    if !(lower > 1e-8) {
        return Err(Error::Hypothesis(format!(
            "|a| reaches {lower:.3e} on the unit cell: the perturbation is too \
             large for the characteristic construction (|a| must stay bounded \
             below by ~|M12 + M21|/2)"
        )));
    }

    let root = a.pow(2).add(&b.pow(2)).sqrt_positive();
    let alpha = b.sub(&root).div(&a).simplify();
    let beta = b.add(&root).div(&a).simplify();
    let alpha_x = alpha.d(Var::X);
    let alpha_y = alpha.d(Var::Y);
    let beta_x = beta.d(Var::X);
    let beta_y = beta.d(Var::Y);

    Ok(WaveCoefficients {
        stream: work_stream,
        average: work_m,
        velocity,
        a,
        b,
        alpha,
        beta,
        alpha_x,
        alpha_y,
        beta_x,
        beta_y,
        rotated,
        a_lower_bound: lower,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expression;

    fn p(s: &str) -> ScalarFieldExpr {
        parse_expression(s).unwrap()
    }

    #[test]
    fn affine_shear_has_unit_a() {
        // U = MX with M = [[0,1],[1,0]]: stream (x^2 - y^2)/2
        let m = Matrix2::new(0.0, 1.0, 1.0, 0.0);
        let u = affine_stream(&m);
        assert!(u.structurally_eq(&p("(x^2-y^2)/2").simplify()), "u = {u}");
        let c = wave_coefficients(&u, m).unwrap();
        assert!(!c.rotated);
        for &(x, y) in &[(0.0, 0.0), (0.4, -0.7)] {
            assert!((c.a.eval(x, y) - 1.0).abs() < 1e-13);
            assert!(c.b.eval(x, y).abs() < 1e-13);
            assert!((c.alpha.eval(x, y) + 1.0).abs() < 1e-13);
            assert!((c.beta.eval(x, y) - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn diagonal_average_triggers_rotation() {
        // the periodic counterexample family: M = diag(1, -1)
        let u = p("-x*y + (0.01/(2*pi^2))*sin(2*pi*y)");
        let m = Matrix2::new(1.0, 0.0, 0.0, -1.0);
        let c = wave_coefficients(&u, m).unwrap();
        assert!(c.rotated);
        // rotated average is [[0, 1], [1, 0]]
        assert!((c.average.m12 - 1.0).abs() < 1e-13);
        assert!((c.average.m21 - 1.0).abs() < 1e-13);
        assert!(c.average.m11.abs() < 1e-13);
        // a' = 1 exactly for this stream (the perturbation is y-only)
        for &(x, y) in &[(0.0, 0.0), (0.3, 0.8), (-1.0, 0.2)] {
            assert!((c.a.eval(x, y) - 1.0).abs() < 1e-12, "a at ({x},{y})");
        }
        assert!(c.a_lower_bound > 0.99);
        // b' = -eps sin(2 pi (x - y))
        let eps = 0.01;
        for &(x, y) in &[(0.2, 0.5), (0.7, -0.3)] {
            let want = -eps * (2.0 * std::f64::consts::PI * (x - y)).sin();
            assert!((c.b.eval(x, y) - want).abs() < 1e-12);
        }
        // the rotated velocity still has the declared periodicity
        assert!(c.velocity.periodicity_mismatch(&c.average, 6) < 1e-10);
    }

    #[test]
    fn zero_symmetric_part_rejected() {
        // M = [[0,1],[-1,0]] is a rotation: M + M^T = 0
        let m = Matrix2::new(0.0, 1.0, -1.0, 0.0);
        let u = affine_stream(&m);
        let err = wave_coefficients(&u, m).unwrap_err();
        assert!(matches!(err, Error::Hypothesis(_)));
    }

    #[test]
    fn alpha_beta_product_is_minus_one() {
        let u = p("-x*y + (0.05/(2*pi^2))*sin(2*pi*y) + (0.03/(2*pi^2))*cos(2*pi*x)");
        let m = Matrix2::new(1.0, 0.0, 0.0, -1.0);
        let c = wave_coefficients(&u, m).unwrap();
        let mut state = 0xdeadbeefu64;
        for _ in 0..100 {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let x = (state >> 11) as f64 / (1u64 << 53) as f64 * 4.0 - 2.0;
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let y = (state >> 11) as f64 / (1u64 << 53) as f64 * 4.0 - 2.0;
            let prod = c.alpha.eval(x, y) * c.beta.eval(x, y);
            assert!((prod + 1.0).abs() < 1e-12, "alpha beta = {prod} at ({x},{y})");
        }
    }
}
