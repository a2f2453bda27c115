//! Printing with the minimal parenthesization that re-parses to the same
//! canonical tree.

use std::fmt;

use super::{Expr, ScalarFieldExpr};

// precedence levels: additive 1, multiplicative 2, unary minus 2, power 3
const ADD: u8 = 1;
const MUL: u8 = 2;
const POW: u8 = 3;
const ATOM: u8 = 4;

fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Add(_, _) | Expr::Sub(_, _) => ADD,
        Expr::Mul(_, _) | Expr::Div(_, _) => MUL,
        Expr::Neg(_) => MUL,
        Expr::Pow(_, _) => POW,
        Expr::Const(c) if *c < 0.0 => MUL,
        _ => ATOM,
    }
}

fn write_expr(f: &mut fmt::Formatter<'_>, e: &Expr, min_prec: u8) -> fmt::Result {
    let parens = prec(e) < min_prec;
    if parens {
        write!(f, "(")?;
    }
    match e {
        Expr::Const(c) => write!(f, "{c}")?,
        Expr::Var(v) => write!(f, "{}", v.name())?,
        Expr::Pi => write!(f, "pi")?,
        Expr::Add(a, b) => {
            write_expr(f, a, ADD)?;
            // fold `a + (-b)` into `a - b` for readability
            if let Expr::Neg(inner) = &**b {
                write!(f, " - ")?;
                write_expr(f, inner, ADD + 1)?;
            } else {
                write!(f, " + ")?;
                write_expr(f, b, ADD + 1)?;
            }
        }
        Expr::Sub(a, b) => {
            write_expr(f, a, ADD)?;
            write!(f, " - ")?;
            write_expr(f, b, ADD + 1)?;
        }
        Expr::Mul(a, b) => {
            write_expr(f, a, MUL)?;
            write!(f, "*")?;
            write_expr(f, b, MUL + 1)?;
        }
        Expr::Div(a, b) => {
            write_expr(f, a, MUL)?;
            write!(f, "/")?;
            write_expr(f, b, MUL + 1)?;
        }
        Expr::Pow(a, n) => {
            write_expr(f, a, ATOM)?;
            write!(f, "^{n}")?;
        }
        Expr::Neg(a) => {
            write!(f, "-")?;
            write_expr(f, a, MUL + 1)?;
        }
        Expr::Sin(a) => {
            write!(f, "sin(")?;
            write_expr(f, a, 0)?;
            write!(f, ")")?;
        }
        Expr::Cos(a) => {
            write!(f, "cos(")?;
            write_expr(f, a, 0)?;
            write!(f, ")")?;
        }
        Expr::Exp(a) => {
            write!(f, "exp(")?;
            write_expr(f, a, 0)?;
            write!(f, ")")?;
        }
        Expr::Log(a) => {
            write!(f, "log(")?;
            write_expr(f, a, 0)?;
            write!(f, ")")?;
        }
    }
    if parens {
        write!(f, ")")?;
    }
    Ok(())
}

impl fmt::Display for ScalarFieldExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(f, self.root(), 0)
    }
}
