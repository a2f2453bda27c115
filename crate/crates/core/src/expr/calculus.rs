//! Exact differentiation and limited antidifferentiation on expression trees.

use std::sync::Arc;

use super::{contains_var, Expr, Var};

pub fn diff(e: &Expr, v: Var) -> Arc<Expr> {
    match e {
        Expr::Const(_) | Expr::Pi => Arc::new(Expr::Const(0.0)),
        Expr::Var(w) => Arc::new(Expr::Const(if *w == v { 1.0 } else { 0.0 })),
        Expr::Add(a, b) => Arc::new(Expr::Add(diff(a, v), diff(b, v))),
        Expr::Sub(a, b) => Arc::new(Expr::Sub(diff(a, v), diff(b, v))),
        Expr::Mul(a, b) => Arc::new(Expr::Add(
            Arc::new(Expr::Mul(diff(a, v), b.clone())),
            Arc::new(Expr::Mul(a.clone(), diff(b, v))),
        )),
        Expr::Div(a, b) => Arc::new(Expr::Div(
            Arc::new(Expr::Sub(
                Arc::new(Expr::Mul(diff(a, v), b.clone())),
                Arc::new(Expr::Mul(a.clone(), diff(b, v))),
            )),
            Arc::new(Expr::Pow(b.clone(), 2)),
        )),
        Expr::Pow(a, n) => Arc::new(Expr::Mul(
            Arc::new(Expr::Mul(
                Arc::new(Expr::Const(f64::from(*n))),
                Arc::new(Expr::Pow(a.clone(), n - 1)),
            )),
            diff(a, v),
        )),
        Expr::Neg(a) => Arc::new(Expr::Neg(diff(a, v))),
        Expr::Sin(a) => Arc::new(Expr::Mul(diff(a, v), Arc::new(Expr::Cos(a.clone())))),
        Expr::Cos(a) => Arc::new(Expr::Neg(Arc::new(Expr::Mul(
            diff(a, v),
            Arc::new(Expr::Sin(a.clone())),
        )))),
        Expr::Exp(a) => Arc::new(Expr::Mul(diff(a, v), Arc::new(Expr::Exp(a.clone())))),
        Expr::Log(a) => Arc::new(Expr::Div(diff(a, v), a.clone())),
    }
}

/// Antiderivative in `v` (constant of integration zero at the natural
/// origin of each rule). Covers sums, constant multiples, integer powers of
/// `v`, and `sin`/`cos`/`exp` with arguments linear in `v`. Returns `None`
/// outside that family.
pub fn antiderivative(e: &Expr, v: Var) -> Option<Arc<Expr>> {
    if !contains_var(e, v) {
        // constant in v: c -> c*v
        return Some(Arc::new(Expr::Mul(
            Arc::new(e.clone()),
            Arc::new(Expr::Var(v)),
        )));
    }
    match e {
        Expr::Var(w) if *w == v => Some(Arc::new(Expr::Div(
            Arc::new(Expr::Pow(Arc::new(Expr::Var(v)), 2)),
            Arc::new(Expr::Const(2.0)),
        ))),
        Expr::Add(a, b) => Some(Arc::new(Expr::Add(
            antiderivative(a, v)?,
            antiderivative(b, v)?,
        ))),
        Expr::Sub(a, b) => Some(Arc::new(Expr::Sub(
            antiderivative(a, v)?,
            antiderivative(b, v)?,
        ))),
        Expr::Neg(a) => Some(Arc::new(Expr::Neg(antiderivative(a, v)?))),
        Expr::Mul(a, b) => {
            if !contains_var(a, v) {
                Some(Arc::new(Expr::Mul(a.clone(), antiderivative(b, v)?)))
            } else if !contains_var(b, v) {
                Some(Arc::new(Expr::Mul(antiderivative(a, v)?, b.clone())))
            } else {
                None
            }
        }
        Expr::Div(a, b) => {
            if !contains_var(b, v) {
                Some(Arc::new(Expr::Div(antiderivative(a, v)?, b.clone())))
            } else {
                None
            }
        }
        Expr::Pow(a, n) => {
            // (s*v + t)^n with n != -1 -> (s*v + t)^(n+1) / (s*(n+1))
            let slope = linear_slope(a, v)?;
            if *n == -1 {
                return None;
            }
            Some(Arc::new(Expr::Div(
                Arc::new(Expr::Pow(a.clone(), n + 1)),
                Arc::new(Expr::Mul(
                    Arc::new(slope),
                    Arc::new(Expr::Const(f64::from(n + 1))),
                )),
            )))
        }
        Expr::Sin(a) => {
            let slope = linear_slope(a, v)?;
            Some(Arc::new(Expr::Neg(Arc::new(Expr::Div(
                Arc::new(Expr::Cos(a.clone())),
                Arc::new(slope),
            )))))
        }
        Expr::Cos(a) => {
            let slope = linear_slope(a, v)?;
            Some(Arc::new(Expr::Div(Arc::new(Expr::Sin(a.clone())), Arc::new(slope))))
        }
        Expr::Exp(a) => {
            let slope = linear_slope(a, v)?;
            Some(Arc::new(Expr::Div(Arc::new(Expr::Exp(a.clone())), Arc::new(slope))))
        }
        _ => None,
    }
}

/// If `e` is linear in `v` (derivative free of `v` and nonzero), return that
/// constant-in-`v` derivative.
fn linear_slope(e: &Expr, v: Var) -> Option<Expr> {
    let d = super::simplify::simplify(&diff(e, v));
    if contains_var(&d, v) {
        return None;
    }
    if let Expr::Const(c) = &*d {
        if *c == 0.0 {
            return None;
        }
    }
    Some((*d).clone())
}
