//! Velocity fields, strain tensors and the first-order differential
//! operators in the conventions used throughout:
//!
//! - `R_perp = [[0, -1], [1, 0]]`
//! - `curl U = dx(Uy) - dy(Ux)`
//! - `DU = [[dx Ux, dx Uy], [dy Ux, dy Uy]]`,  `e(U) = (DU + DU^T)/2`
//! - `Div(S) = (dx S11 + dy S21, dx S12 + dy S22)`

use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::{ScalarFieldExpr, Var};

/// Plain 2x2 real matrix.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Matrix2 {
    pub m11: f64,
    pub m12: f64,
    pub m21: f64,
    pub m22: f64,
}

impl Matrix2 {
    pub fn new(m11: f64, m12: f64, m21: f64, m22: f64) -> Self {
        Matrix2 { m11, m12, m21, m22 }
    }

    pub fn zero() -> Self {
        Matrix2::new(0.0, 0.0, 0.0, 0.0)
    }

    pub fn trace(&self) -> f64 {
        self.m11 + self.m22
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        (self.m12 - self.m21).abs() <= tol
    }

    pub fn is_trace_free(&self, tol: f64) -> bool {
        self.trace().abs() <= tol
    }

    /// Frobenius inner product `A:B = tr(A^T B)`.
    pub fn frob_dot(&self, o: &Matrix2) -> f64 {
        self.m11 * o.m11 + self.m12 * o.m12 + self.m21 * o.m21 + self.m22 * o.m22
    }

    pub fn frob_norm(&self) -> f64 {
        self.frob_dot(self).sqrt()
    }

    pub fn scale(&self, c: f64) -> Matrix2 {
        Matrix2::new(c * self.m11, c * self.m12, c * self.m21, c * self.m22)
    }

    pub fn sub(&self, o: &Matrix2) -> Matrix2 {
        Matrix2::new(
            self.m11 - o.m11,
            self.m12 - o.m12,
            self.m21 - o.m21,
            self.m22 - o.m22,
        )
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: (f64, f64)) -> (f64, f64) {
        (
            self.m11 * v.0 + self.m12 * v.1,
            self.m21 * v.0 + self.m22 * v.1,
        )
    }
}

/// `R_perp v = (-v_y, v_x)`.
pub fn r_perp(v: (f64, f64)) -> (f64, f64) {
    (-v.1, v.0)
}

/// Symmetric trace-free strain tensor: `e11`, `e12` stored, `e22 = -e11`,
/// `e21 = e12`.
#[derive(Clone, Debug)]
pub struct StrainField {
    pub e11: ScalarFieldExpr,
    pub e12: ScalarFieldExpr,
}

impl StrainField {
    pub fn e22(&self) -> ScalarFieldExpr {
        self.e11.neg().simplify()
    }

    pub fn eval(&self, x: f64, y: f64) -> Matrix2 {
        let e11 = self.e11.eval(x, y);
        let e12 = self.e12.eval(x, y);
        Matrix2::new(e11, e12, e12, -e11)
    }

    /// trace(e) as the literal expression e11 + e22.
    pub fn trace_expr(&self) -> ScalarFieldExpr {
        self.e11.add(&self.e11.neg()).simplify()
    }
}

/// Divergence-free velocity field with an optional declared average
/// gradient `M` (`DU` averages to `M`; `X -> U(X) - MX` is 1-periodic).
#[derive(Clone, Debug)]
pub struct VelocityField {
    pub ux: ScalarFieldExpr,
    pub uy: ScalarFieldExpr,
    pub average_gradient: Option<Matrix2>,
}

impl VelocityField {
    pub fn new(ux: ScalarFieldExpr, uy: ScalarFieldExpr) -> Self {
        VelocityField {
            ux,
            uy,
            average_gradient: None,
        }
    }

    pub fn with_average(mut self, m: Matrix2) -> Result<Self> {
        if !m.is_trace_free(1e-12) {
            return Err(Error::Invalid(format!(
                "average gradient must be trace-free, trace = {}",
                m.trace()
            )));
        }
        self.average_gradient = Some(m);
        Ok(self)
    }

    /// `U = R_perp grad u = (-dy u, dx u)`; divergence-free by construction.
    pub fn from_stream(u: &ScalarFieldExpr) -> Self {
        VelocityField {
            ux: u.d(Var::Y).neg().simplify(),
            uy: u.d(Var::X),
            average_gradient: None,
        }
    }

    pub fn eval(&self, x: f64, y: f64) -> (f64, f64) {
        (self.ux.eval(x, y), self.uy.eval(x, y))
    }

    /// dx Ux + dy Uy, simplified.
    pub fn divergence(&self) -> ScalarFieldExpr {
        self.ux.d(Var::X).add(&self.uy.d(Var::Y)).simplify()
    }

    /// curl U = dx Uy - dy Ux.
    pub fn curl(&self) -> ScalarFieldExpr {
        self.uy.d(Var::X).sub(&self.ux.d(Var::Y)).simplify()
    }

    /// Componentwise Laplacian.
    pub fn laplacian(&self) -> (ScalarFieldExpr, ScalarFieldExpr) {
        (laplacian(&self.ux), laplacian(&self.uy))
    }

    /// DU in the convention `[[dx Ux, dx Uy], [dy Ux, dy Uy]]`.
    pub fn gradient_eval(&self, x: f64, y: f64) -> Matrix2 {
        Matrix2::new(
            self.ux.d(Var::X).eval(x, y),
            self.uy.d(Var::X).eval(x, y),
            self.ux.d(Var::Y).eval(x, y),
            self.uy.d(Var::Y).eval(x, y),
        )
    }

    pub fn strain(&self) -> StrainField {
        StrainField {
            e11: self.ux.d(Var::X).simplify(),
            e12: self
                .uy
                .d(Var::X)
                .add(&self.ux.d(Var::Y))
                .scale(0.5)
                .simplify(),
        }
    }

    /// Max over an `n x n` sample lattice of the periodicity mismatch of
    /// `U(X) - MX` (shifts by one period in each direction).
    pub fn periodicity_mismatch(&self, m: &Matrix2, samples: usize) -> f64 {
        let mut worst = 0.0f64;
        let per = |x: f64, y: f64| {
            let (ux, uy) = self.eval(x, y);
            // affine part of U is the literal matrix-vector product MX
            (ux - (m.m11 * x + m.m12 * y), uy - (m.m21 * x + m.m22 * y))
        };
        for i in 0..samples {
            for j in 0..samples {
                let x = i as f64 / samples as f64;
                let y = j as f64 / samples as f64;
                let p0 = per(x, y);
                let px = per(x + 1.0, y);
                let py = per(x, y + 1.0);
                worst = worst
                    .max((px.0 - p0.0).abs())
                    .max((px.1 - p0.1).abs())
                    .max((py.0 - p0.0).abs())
                    .max((py.1 - p0.1).abs());
            }
        }
        worst
    }
}

pub fn gradient(f: &ScalarFieldExpr) -> (ScalarFieldExpr, ScalarFieldExpr) {
    (f.d(Var::X), f.d(Var::Y))
}

/// curl of a gradient-shaped pair.
pub fn curl_vec(fx: &ScalarFieldExpr, fy: &ScalarFieldExpr) -> ScalarFieldExpr {
    fy.d(Var::X).sub(&fx.d(Var::Y)).simplify()
}

pub fn laplacian(f: &ScalarFieldExpr) -> ScalarFieldExpr {
    f.differentiate(Var::X, 2)
        .add(&f.differentiate(Var::Y, 2))
        .simplify()
}

/// Divergence of a 2x2 symbolic matrix field
/// `[[m11, m12], [m21, m22]]`: `(dx m11 + dy m21, dx m12 + dy m22)`.
pub fn div_matrix(
    m11: &ScalarFieldExpr,
    m12: &ScalarFieldExpr,
    m21: &ScalarFieldExpr,
    m22: &ScalarFieldExpr,
) -> (ScalarFieldExpr, ScalarFieldExpr) {
    (
        m11.d(Var::X).add(&m21.d(Var::Y)).simplify(),
        m12.d(Var::X).add(&m22.d(Var::Y)).simplify(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expression;

    fn p(s: &str) -> ScalarFieldExpr {
        parse_expression(s).unwrap()
    }

    #[test]
    fn stream_examples() {
        // u = xy -> U = (-x, y)
        let u = VelocityField::from_stream(&p("x*y"));
        assert!(u.ux.structurally_eq(&p("-x")));
        assert!(u.uy.structurally_eq(&p("y")));
        // u = (x^2 - y^2)/2 -> U = (y, x)
        let u = VelocityField::from_stream(&p("(x^2-y^2)/2"));
        assert!(u.ux.structurally_eq(&p("y")), "got {}", u.ux);
        assert!(u.uy.structurally_eq(&p("x")), "got {}", u.uy);
    }

    #[test]
    fn stream_reproduces_periodic_counterexample_field() {
        // u = -xy + (eps/(2 pi^2)) sin(2 pi y) with eps = 0.1
        let u = p("-x*y + (0.1/(2*pi^2))*sin(2*pi*y)");
        let vf = VelocityField::from_stream(&u);
        let eps = 0.1;
        for &(x, y) in &[(0.0, 0.0), (0.3, 0.2), (-1.1, 0.7), (2.0, -0.4)] {
            let (ux, uy) = vf.eval(x, y);
            let want_ux = x - eps / std::f64::consts::PI * (2.0 * std::f64::consts::PI * y).cos();
            assert!((ux - want_ux).abs() < 1e-13);
            assert!((uy + y).abs() < 1e-13);
        }
        assert!(vf.divergence().is_zero());
    }

    #[test]
    fn strain_examples() {
        let vf = VelocityField::from_stream(&p("(x^2-y^2)/2"));
        let e = vf.strain();
        let m = e.eval(0.3, -0.8);
        assert_eq!(m.m11, 0.0);
        assert_eq!(m.m12, 1.0);

        // zero field
        let z = VelocityField::new(p("0"), p("0"));
        let e = z.strain();
        assert!(e.e11.is_zero() && e.e12.is_zero());

        // counterexample family strain
        let eps = 0.1;
        let vf = VelocityField::from_stream(&p("-x*y + (0.1/(2*pi^2))*sin(2*pi*y)"));
        let e = vf.strain();
        for &(x, y) in &[(0.2, 0.9), (1.4, -0.3)] {
            let m = e.eval(x, y);
            let s = eps * (2.0 * std::f64::consts::PI * y).sin();
            assert!((m.m11 - 1.0).abs() < 1e-13);
            assert!((m.m12 - s).abs() < 1e-13);
        }
    }

    #[test]
    fn curl_of_gradient_vanishes() {
        let f = p("exp(x)*sin(y)");
        let (fx, fy) = gradient(&f);
        assert!(curl_vec(&fx, &fy).is_zero());
    }

    #[test]
    fn div_of_diagonal_matrix() {
        let (d1, d2) = div_matrix(&p("x"), &p("0"), &p("0"), &p("y"));
        assert!(d1.structurally_eq(&p("1")));
        assert!(d2.structurally_eq(&p("1")));
    }

    #[test]
    fn laplacian_of_curl_of_counterexample() {
        let vf = VelocityField::from_stream(&p("-x*y + (0.1/(2*pi^2))*sin(2*pi*y)"));
        let c = vf.curl();
        // curl U = -2 eps sin(2 pi y)
        let want = p("-2*0.1*sin(2*pi*y)");
        assert!(c.structurally_eq(&want), "curl = {c}");
        let lc = laplacian(&c);
        let want = p("8*pi^2*0.1*sin(2*pi*y)");
        assert!(lc.structurally_eq(&want), "lap curl = {lc}");
    }

    #[test]
    fn trace_of_strain_is_divergence() {
        let vf = VelocityField::from_stream(&p("x^3*y - cos(x)*sin(y)"));
        assert!(vf.strain().trace_expr().is_zero());
        assert!(vf.divergence().is_zero());
    }

    #[test]
    fn declared_periodicity_is_checked_by_sampling() {
        let vf = VelocityField::from_stream(&p("-x*y + (0.1/(2*pi^2))*sin(2*pi*y)"));
        let m = Matrix2::new(1.0, 0.0, 0.0, -1.0);
        assert!(vf.periodicity_mismatch(&m, 8) < 1e-10);
    }
}
