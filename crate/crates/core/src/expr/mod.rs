//! Symbolic scalar fields in the variables `x`, `y`.
//!
//! Expressions are immutable trees over constants, the variables, `pi`, the
//! four arithmetic operations, integer powers and `sin`/`cos`/`exp`/`log`.
//! Differentiation is exact and closed on this node set, which is what the
//! realizability constructions rely on (they need up to fifth derivatives of
//! a stream function without rounding).

mod calculus;
mod display;
mod parse;
mod simplify;

pub use parse::parse_expression;

use std::sync::Arc;

use crate::error::Error;

/// Field variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Var {
    X,
    Y,
}

impl Var {
    pub fn name(self) -> &'static str {
        match self {
            Var::X => "x",
            Var::Y => "y",
        }
    }
}

/// Expression tree node.
#[derive(Clone, Debug)]
pub enum Expr {
    Const(f64),
    Var(Var),
    Pi,
    Add(Arc<Expr>, Arc<Expr>),
    Sub(Arc<Expr>, Arc<Expr>),
    Mul(Arc<Expr>, Arc<Expr>),
    Div(Arc<Expr>, Arc<Expr>),
    /// Power with integer exponent.
    Pow(Arc<Expr>, i32),
    Neg(Arc<Expr>),
    Sin(Arc<Expr>),
    Cos(Arc<Expr>),
    Exp(Arc<Expr>),
    Log(Arc<Expr>),
}

/// A symbolic scalar field with optional declared periodicity.
///
/// Periodicity ("1-periodic in x and y") is metadata set by the caller and
/// verified by sampling where it matters; it is never inferred.
#[derive(Clone, Debug)]
pub struct ScalarFieldExpr {
    root: Arc<Expr>,
    unit_periodic: bool,
}

impl ScalarFieldExpr {
    pub(crate) fn from_arc(root: Arc<Expr>) -> Self {
        ScalarFieldExpr {
            root,
            unit_periodic: false,
        }
    }

    pub fn from_expr(e: Expr) -> Self {
        Self::from_arc(Arc::new(e))
    }

    pub fn root(&self) -> &Expr {
        &self.root
    }

    pub(crate) fn root_arc(&self) -> Arc<Expr> {
        self.root.clone()
    }

    pub fn constant(c: f64) -> Self {
        Self::from_expr(Expr::Const(c))
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn one() -> Self {
        Self::constant(1.0)
    }

    pub fn var(v: Var) -> Self {
        Self::from_expr(Expr::Var(v))
    }

    pub fn x() -> Self {
        Self::var(Var::X)
    }

    pub fn y() -> Self {
        Self::var(Var::Y)
    }

    pub fn pi() -> Self {
        Self::from_expr(Expr::Pi)
    }

    pub fn add(&self, rhs: &Self) -> Self {
        Self::from_expr(Expr::Add(self.root_arc(), rhs.root_arc()))
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        Self::from_expr(Expr::Sub(self.root_arc(), rhs.root_arc()))
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        Self::from_expr(Expr::Mul(self.root_arc(), rhs.root_arc()))
    }

    pub fn div(&self, rhs: &Self) -> Self {
        Self::from_expr(Expr::Div(self.root_arc(), rhs.root_arc()))
    }

    pub fn pow(&self, n: i32) -> Self {
        Self::from_expr(Expr::Pow(self.root_arc(), n))
    }

    pub fn neg(&self) -> Self {
        Self::from_expr(Expr::Neg(self.root_arc()))
    }

    pub fn sin(&self) -> Self {
        Self::from_expr(Expr::Sin(self.root_arc()))
    }

    pub fn cos(&self) -> Self {
        Self::from_expr(Expr::Cos(self.root_arc()))
    }

    pub fn exp(&self) -> Self {
        Self::from_expr(Expr::Exp(self.root_arc()))
    }

    pub fn log(&self) -> Self {
        Self::from_expr(Expr::Log(self.root_arc()))
    }

    /// Square root of a (pointwise positive) expression, written inside the
    /// node set as `exp(log(e)/2)`. Differentiation stays exact.
    pub fn sqrt_positive(&self) -> Self {
        self.log().mul(&Self::constant(0.5)).exp()
    }

    pub fn scale(&self, c: f64) -> Self {
        Self::constant(c).mul(self)
    }

    /// Declared 1-periodicity in both variables.
    pub fn unit_periodic(&self) -> bool {
        self.unit_periodic
    }

    pub fn with_unit_periodicity(mut self, flag: bool) -> Self {
        self.unit_periodic = flag;
        self
    }

    /// Evaluate at a point. Domain violations (log of a non-positive number,
    /// division by zero) surface as non-finite values, as in plain `f64`
    /// arithmetic.
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        eval_node(&self.root, x, y)
    }

    /// Evaluate as a univariate function, binding both variables to `t`.
    /// Intended for expressions that mention a single variable.
    pub fn eval1(&self, t: f64) -> f64 {
        self.eval(t, t)
    }

    pub fn contains_var(&self, v: Var) -> bool {
        contains_var(&self.root, v)
    }

    /// Exact partial derivative of the given order, simplified.
    pub fn differentiate(&self, var: Var, order: u32) -> Self {
        let mut cur = self.clone();
        for _ in 0..order {
            cur = Self::from_arc(calculus::diff(&cur.root, var)).simplify();
        }
        cur.unit_periodic = self.unit_periodic;
        cur
    }

    /// First partial, shorthand for `differentiate(var, 1)`.
    pub fn d(&self, var: Var) -> Self {
        self.differentiate(var, 1)
    }

    /// Best-effort simplification: constant folding, 0/1 identities,
    /// like-term collection under canonical ordering of commutative nodes.
    pub fn simplify(&self) -> Self {
        let mut out = Self::from_arc(simplify::simplify(&self.root));
        out.unit_periodic = self.unit_periodic;
        out
    }

    /// Structural equality modulo canonical ordering of commutative nodes.
    pub fn structurally_eq(&self, other: &Self) -> bool {
        simplify::canonical_eq(&self.root, &other.root)
    }

    /// True when the expression simplifies to the literal zero.
    pub fn is_zero(&self) -> bool {
        matches!(*simplify::simplify(&self.root), Expr::Const(c) if c == 0.0)
    }

    /// Substitute expressions for both variables simultaneously.
    pub fn subst_xy(&self, for_x: &Self, for_y: &Self) -> Self {
        let mut out = Self::from_arc(subst(&self.root, &for_x.root, &for_y.root));
        out.unit_periodic = false;
        out
    }

    /// Rename the single variable the expression uses to `target`.
    /// Errors if both variables occur.
    pub fn into_univariate(&self, target: Var) -> Result<Self, Error> {
        if self.contains_var(Var::X) && self.contains_var(Var::Y) {
            return Err(Error::Invalid(
                "expected a univariate expression, found both x and y".into(),
            ));
        }
        let t = Self::var(target);
        Ok(self.subst_xy(&t, &t))
    }

    /// Antiderivative in `var` with zero constant of integration, when the
    /// expression is built from polynomials and `sin`/`cos`/`exp` of
    /// arguments linear in `var`.
    pub fn antiderivative(&self, var: Var) -> Option<Self> {
        calculus::antiderivative(&self.root, var).map(|a| Self::from_arc(a).simplify())
    }

    pub fn node_count(&self) -> usize {
        count(&self.root)
    }
}

impl std::str::FromStr for ScalarFieldExpr {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        parse_expression(s)
    }
}

fn eval_node(e: &Expr, x: f64, y: f64) -> f64 {
    match e {
        Expr::Const(c) => *c,
        Expr::Var(Var::X) => x,
        Expr::Var(Var::Y) => y,
        Expr::Pi => std::f64::consts::PI,
        Expr::Add(a, b) => eval_node(a, x, y) + eval_node(b, x, y),
        Expr::Sub(a, b) => eval_node(a, x, y) - eval_node(b, x, y),
        Expr::Mul(a, b) => eval_node(a, x, y) * eval_node(b, x, y),
        Expr::Div(a, b) => eval_node(a, x, y) / eval_node(b, x, y),
        Expr::Pow(a, n) => eval_node(a, x, y).powi(*n),
        Expr::Neg(a) => -eval_node(a, x, y),
        Expr::Sin(a) => eval_node(a, x, y).sin(),
        Expr::Cos(a) => eval_node(a, x, y).cos(),
        Expr::Exp(a) => eval_node(a, x, y).exp(),
        Expr::Log(a) => eval_node(a, x, y).ln(),
    }
}

fn contains_var(e: &Expr, v: Var) -> bool {
    match e {
        Expr::Const(_) | Expr::Pi => false,
        Expr::Var(w) => *w == v,
        Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
            contains_var(a, v) || contains_var(b, v)
        }
        Expr::Pow(a, _) => contains_var(a, v),
        Expr::Neg(a) | Expr::Sin(a) | Expr::Cos(a) | Expr::Exp(a) | Expr::Log(a) => {
            contains_var(a, v)
        }
    }
}

fn subst(e: &Expr, for_x: &Arc<Expr>, for_y: &Arc<Expr>) -> Arc<Expr> {
    match e {
        Expr::Const(_) | Expr::Pi => Arc::new(e.clone()),
        Expr::Var(Var::X) => for_x.clone(),
        Expr::Var(Var::Y) => for_y.clone(),
        Expr::Add(a, b) => Arc::new(Expr::Add(subst(a, for_x, for_y), subst(b, for_x, for_y))),
        Expr::Sub(a, b) => Arc::new(Expr::Sub(subst(a, for_x, for_y), subst(b, for_x, for_y))),
        Expr::Mul(a, b) => Arc::new(Expr::Mul(subst(a, for_x, for_y), subst(b, for_x, for_y))),
        Expr::Div(a, b) => Arc::new(Expr::Div(subst(a, for_x, for_y), subst(b, for_x, for_y))),
        Expr::Pow(a, n) => Arc::new(Expr::Pow(subst(a, for_x, for_y), *n)),
        Expr::Neg(a) => Arc::new(Expr::Neg(subst(a, for_x, for_y))),
        Expr::Sin(a) => Arc::new(Expr::Sin(subst(a, for_x, for_y))),
        Expr::Cos(a) => Arc::new(Expr::Cos(subst(a, for_x, for_y))),
        Expr::Exp(a) => Arc::new(Expr::Exp(subst(a, for_x, for_y))),
        Expr::Log(a) => Arc::new(Expr::Log(subst(a, for_x, for_y))),
    }
}

fn count(e: &Expr) -> usize {
    match e {
        Expr::Const(_) | Expr::Var(_) | Expr::Pi => 1,
        Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
            1 + count(a) + count(b)
        }
        Expr::Pow(a, _)
        | Expr::Neg(a)
        | Expr::Sin(a)
        | Expr::Cos(a)
        | Expr::Exp(a)
        | Expr::Log(a) => 1 + count(a),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> ScalarFieldExpr {
        parse_expression(s).unwrap()
    }

    #[test]
    fn evaluates_arithmetic() {
        assert_eq!(p("(x^2 - y^2)/2").eval(2.0, 1.0), 1.5);
        assert_eq!(p("x*y").eval(3.0, -2.0), -6.0);
        assert_eq!(p("sin(2*pi*y)").eval(0.3, 0.0), 0.0);
    }

    #[test]
    fn fifth_derivative_of_exp() {
        let f = p("exp(x)").differentiate(Var::X, 5);
        assert!((f.eval(0.0, 0.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn derivative_of_product_is_structural() {
        let f = p("x*y").d(Var::X);
        assert!(f.structurally_eq(&p("y")));
    }

    #[test]
    fn second_derivative_of_sine() {
        let f = p("sin(2*pi*y)").differentiate(Var::Y, 2);
        let expected = p("-4*pi^2*sin(2*pi*y)");
        assert!(f.structurally_eq(&expected), "got {f}");
    }

    #[test]
    fn sqrt_differentiates_exactly() {
        // d/dx sqrt(x^2+1) = x / sqrt(x^2+1)
        let s = p("x^2+1").sqrt_positive();
        let ds = s.d(Var::X);
        for &x in &[0.0f64, 0.5, -1.3, 2.7] {
            let want = x / (x * x + 1.0).sqrt();
            assert!((ds.eval(x, 0.0) - want).abs() < 1e-14);
        }
    }

    #[test]
    fn mixed_partials_commute_structurally() {
        let u = p("exp(x)*sin(y) + x^3*y^2/7 + cos(x*y)");
        let a = u.d(Var::X).d(Var::Y);
        let b = u.d(Var::Y).d(Var::X);
        assert!(a.structurally_eq(&b));
    }

    #[test]
    fn univariate_rename() {
        let g = p("x^4").into_univariate(Var::Y).unwrap();
        assert!(g.structurally_eq(&p("y^4")));
        assert!(p("x*y").into_univariate(Var::Y).is_err());
    }

    #[test]
    fn antiderivative_of_polynomial() {
        let f = p("x^2");
        let af = f.antiderivative(Var::X).unwrap();
        assert!(af.structurally_eq(&p("x^3/3")), "got {af}");
        // sin(2*pi*x) -> -cos(2*pi*x)/(2*pi)
        let g = p("sin(2*pi*x)").antiderivative(Var::X).unwrap();
        for &x in &[0.1, 0.4, 1.7] {
            let want = -(2.0 * std::f64::consts::PI * x).cos() / (2.0 * std::f64::consts::PI);
            // constant of integration is fixed by the rule itself
            let got = g.eval(x, 0.0);
            let got0 = g.eval(0.0, 0.0);
            let want0 = -1.0 / (2.0 * std::f64::consts::PI);
            assert!(((got - got0) - (want - want0)).abs() < 1e-14);
        }
    }
}
