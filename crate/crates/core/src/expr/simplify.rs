//! Best-effort simplification: constant folding, 0/1 identities, like-term
//! collection and canonical ordering of commutative nodes. Structural
//! equality of two expressions is defined as exact equality of their
//! canonical forms.

use std::cmp::Ordering;
use std::sync::Arc;

use super::Expr;

pub fn simplify(e: &Expr) -> Arc<Expr> {
    simp(e)
}

pub fn canonical_eq(a: &Expr, b: &Expr) -> bool {
    strict_eq(&simp(a), &simp(b))
}

fn is_integral(v: f64) -> bool {
    v.is_finite() && v.fract() == 0.0 && v.abs() < 9.0e15
}

/// Recover a small rational `p/q` exactly equal to `net` (q <= 64), falling
/// back to the gathered integral pair or a plain float coefficient.
fn rational_form(net: f64, cn: f64, cd: f64) -> (f64, f64) {
    if is_integral(net) {
        return (net, 1.0);
    }
    for q in 2..=64u32 {
        let p = net * f64::from(q);
        if is_integral(p) {
            return (p, f64::from(q));
        }
    }
    if is_integral(cn) && is_integral(cd) {
        (cn, cd)
    } else {
        (net, 1.0)
    }
}

fn gcd_f(a: f64, b: f64) -> f64 {
    let (mut x, mut y) = (a.abs() as i128, b.abs() as i128);
    while y != 0 {
        let t = x % y;
        x = y;
        y = t;
    }
    x.max(1) as f64
}

fn rank(e: &Expr) -> u8 {
    match e {
        Expr::Const(_) => 0,
        Expr::Pi => 1,
        Expr::Var(_) => 2,
        Expr::Sin(_) => 3,
        Expr::Cos(_) => 4,
        Expr::Exp(_) => 5,
        Expr::Log(_) => 6,
        Expr::Pow(_, _) => 7,
        Expr::Neg(_) => 8,
        Expr::Mul(_, _) => 9,
        Expr::Div(_, _) => 10,
        Expr::Add(_, _) => 11,
        Expr::Sub(_, _) => 12,
    }
}

/// Deterministic total order used for canonical sorting.
pub fn cmp(a: &Expr, b: &Expr) -> Ordering {
    let (ra, rb) = (rank(a), rank(b));
    if ra != rb {
        return ra.cmp(&rb);
    }
    match (a, b) {
        (Expr::Const(x), Expr::Const(y)) => x.total_cmp(y),
        (Expr::Pi, Expr::Pi) => Ordering::Equal,
        (Expr::Var(x), Expr::Var(y)) => x.cmp(y),
        (Expr::Sin(x), Expr::Sin(y))
        | (Expr::Cos(x), Expr::Cos(y))
        | (Expr::Exp(x), Expr::Exp(y))
        | (Expr::Log(x), Expr::Log(y))
        | (Expr::Neg(x), Expr::Neg(y)) => cmp(x, y),
        (Expr::Pow(x, n), Expr::Pow(y, m)) => cmp(x, y).then(n.cmp(m)),
        (Expr::Add(x1, x2), Expr::Add(y1, y2))
        | (Expr::Sub(x1, x2), Expr::Sub(y1, y2))
        | (Expr::Mul(x1, x2), Expr::Mul(y1, y2))
        | (Expr::Div(x1, x2), Expr::Div(y1, y2)) => cmp(x1, y1).then(cmp(x2, y2)),
        _ => unreachable!("rank dispatch"),
    }
}

fn strict_eq(a: &Expr, b: &Expr) -> bool {
    cmp(a, b) == Ordering::Equal
}

fn simp(e: &Expr) -> Arc<Expr> {
    match e {
        Expr::Const(c) => Arc::new(Expr::Const(*c)),
        Expr::Var(v) => Arc::new(Expr::Var(*v)),
        Expr::Pi => Arc::new(Expr::Pi),
        Expr::Add(_, _) | Expr::Sub(_, _) | Expr::Neg(_) => simp_sum(e),
        Expr::Mul(_, _) | Expr::Div(_, _) => {
            let p = simp_product(e);
            // constant-over-sum forms re-enter the sum normalizer so that
            // (x^2 - y^2)/2 and x^2/2 - y^2/2 canonicalize identically
            let redo = match &*p {
                Expr::Div(a, b) => {
                    matches!(&**b, Expr::Const(_))
                        && matches!(&**a, Expr::Add(_, _) | Expr::Sub(_, _))
                }
                Expr::Mul(a, b) => {
                    matches!(&**a, Expr::Const(_))
                        && matches!(&**b, Expr::Add(_, _) | Expr::Sub(_, _))
                }
                Expr::Neg(a) => matches!(&**a, Expr::Add(_, _) | Expr::Sub(_, _)),
                _ => false,
            };
            if redo {
                distribute_constant_over_sum(&p)
            } else {
                p
            }
        }
        Expr::Pow(a, n) => simp_pow(&simp(a), *n),
        Expr::Sin(a) => {
            let sa = simp(a);
            match &*sa {
                Expr::Const(c) if *c == 0.0 => Arc::new(Expr::Const(0.0)),
                _ => Arc::new(Expr::Sin(sa)),
            }
        }
        Expr::Cos(a) => {
            let sa = simp(a);
            match &*sa {
                Expr::Const(c) if *c == 0.0 => Arc::new(Expr::Const(1.0)),
                _ => Arc::new(Expr::Cos(sa)),
            }
        }
        Expr::Exp(a) => {
            let sa = simp(a);
            match &*sa {
                Expr::Const(c) if *c == 0.0 => Arc::new(Expr::Const(1.0)),
                _ => Arc::new(Expr::Exp(sa)),
            }
        }
        Expr::Log(a) => {
            let sa = simp(a);
            match &*sa {
                Expr::Const(c) if *c == 1.0 => Arc::new(Expr::Const(0.0)),
                Expr::Exp(inner) => inner.clone(),
                _ => Arc::new(Expr::Log(sa)),
            }
        }
    }
}

fn simp_pow(base: &Arc<Expr>, n: i32) -> Arc<Expr> {
    match (&**base, n) {
        (_, 0) => Arc::new(Expr::Const(1.0)),
        (_, 1) => base.clone(),
        (Expr::Const(c), _) => Arc::new(Expr::Const(c.powi(n))),
        (Expr::Pow(inner, m), _) => simp_pow(inner, m.saturating_mul(n)),
        (Expr::Neg(inner), _) if n % 2 == 0 => simp_pow(inner, n),
        _ => Arc::new(Expr::Pow(base.clone(), n)),
    }
}

// ---------------------------------------------------------------------------
// Sums: flatten Add/Sub/Neg chains into (coefficient, core) terms, merge
// terms with equal cores, rebuild in canonical order.
// ---------------------------------------------------------------------------

fn simp_sum(e: &Expr) -> Arc<Expr> {
    let mut terms: Vec<(f64, Arc<Expr>)> = Vec::new();
    let mut constant = 0.0;
    gather_terms(e, 1.0, &mut terms, &mut constant);
    rebuild_terms(terms, constant)
}

/// Distribute an already-simplified constant-over-sum product
/// (`Div(sum, c)`, `Mul(c, sum)` or `Neg(sum)`) without re-entering the
/// simplifier on the same node.
fn distribute_constant_over_sum(p: &Arc<Expr>) -> Arc<Expr> {
    let mut terms: Vec<(f64, Arc<Expr>)> = Vec::new();
    let mut constant = 0.0;
    match &**p {
        Expr::Div(a, b) => {
            if let Expr::Const(c) = &**b {
                gather_terms(a, 1.0 / c, &mut terms, &mut constant);
            } else {
                return p.clone();
            }
        }
        Expr::Mul(a, b) => {
            if let Expr::Const(c) = &**a {
                gather_terms(b, *c, &mut terms, &mut constant);
            } else {
                return p.clone();
            }
        }
        Expr::Neg(a) => gather_terms(a, -1.0, &mut terms, &mut constant),
        _ => return p.clone(),
    }
    rebuild_terms(terms, constant)
}

fn rebuild_terms(terms: Vec<(f64, Arc<Expr>)>, constant: f64) -> Arc<Expr> {
    let mut merged: Vec<(f64, Arc<Expr>)> = Vec::new();
    for (c, core) in terms {
        if let Some(slot) = merged.iter_mut().find(|(_, k)| strict_eq(k, &core)) {
            slot.0 += c;
        } else {
            merged.push((c, core));
        }
    }
    merged.retain(|(c, _)| *c != 0.0);
    merged.sort_by(|a, b| cmp(&a.1, &b.1));

    let mut acc: Option<Arc<Expr>> = None;
    for (c, core) in merged {
        let term = apply_coeff(c, core);
        acc = Some(match acc {
            None => term,
            Some(prev) => Arc::new(Expr::Add(prev, term)),
        });
    }
    match acc {
        None => Arc::new(Expr::Const(constant)),
        Some(sum) if constant == 0.0 => sum,
        Some(sum) => Arc::new(Expr::Add(sum, Arc::new(Expr::Const(constant)))),
    }
}

/// Flatten into `sign`-weighted terms. Children are simplified before being
/// split into (coefficient, core).
fn gather_terms(e: &Expr, sign: f64, terms: &mut Vec<(f64, Arc<Expr>)>, constant: &mut f64) {
    match e {
        Expr::Add(a, b) => {
            gather_terms(a, sign, terms, constant);
            gather_terms(b, sign, terms, constant);
        }
        Expr::Sub(a, b) => {
            gather_terms(a, sign, terms, constant);
            gather_terms(b, -sign, terms, constant);
        }
        Expr::Neg(a) => gather_terms(a, -sign, terms, constant),
        other => {
            let s = simp(other);
            match &*s {
                // simplified children can still be sums (e.g. a Mul that
                // folded to a single Add is not expanded, but a direct Add is)
                Expr::Add(_, _) | Expr::Sub(_, _) | Expr::Neg(_) => {
                    gather_terms(&s.clone(), sign, terms, constant)
                }
                Expr::Const(c) => *constant += sign * c,
                // distribute division by a numeric constant so that
                // (x^2 - y^2)/2 and x^2/2 - y^2/2 share a canonical form
                Expr::Div(num, den) => {
                    if let Expr::Const(c) = &**den {
                        if *c != 0.0 {
                            return gather_terms(&num.clone(), sign / c, terms, constant);
                        }
                    }
                    let (c, core) = split_coeff(&s);
                    terms.push((sign * c, core));
                }
                _ => {
                    let (c, core) = split_coeff(&s);
                    if matches!(&*core, Expr::Add(_, _) | Expr::Sub(_, _) | Expr::Neg(_)) {
                        gather_terms(&core.clone(), sign * c, terms, constant);
                    } else {
                        terms.push((sign * c, core));
                    }
                }
            }
        }
    }
}

/// Peel a leading numeric coefficient off a (canonical) term.
fn split_coeff(e: &Arc<Expr>) -> (f64, Arc<Expr>) {
    match &**e {
        Expr::Mul(a, b) => {
            if let Expr::Const(c) = &**a {
                (*c, b.clone())
            } else {
                (1.0, e.clone())
            }
        }
        Expr::Neg(a) => {
            let (c, core) = split_coeff(a);
            (-c, core)
        }
        _ => (1.0, e.clone()),
    }
}

fn apply_coeff(c: f64, core: Arc<Expr>) -> Arc<Expr> {
    if c == 1.0 {
        core
    } else {
        // route through the product normalizer so coefficients merge into
        // quotient numerators consistently (2 * (x/3) == 2*x/3)
        simp(&Expr::Mul(Arc::new(Expr::Const(c)), core))
    }
}

// ---------------------------------------------------------------------------
// Products: flatten Mul/Div/Neg chains into a numeric coefficient pair
// (numerator, denominator) and a set of (base, integer exponent) factors.
// ---------------------------------------------------------------------------

fn simp_product(e: &Expr) -> Arc<Expr> {
    let mut factors: Vec<(Arc<Expr>, i32)> = Vec::new();
    let mut num = 1.0f64;
    let mut den = 1.0f64;
    if !gather_factors(e, 1, &mut factors, &mut num, &mut den) {
        return Arc::new(Expr::Const(0.0));
    }
    if num == 0.0 {
        return Arc::new(Expr::Const(0.0));
    }
    factors.retain(|(_, n)| *n != 0);
    factors.sort_by(|a, b| cmp(&a.0, &b.0).then(a.1.cmp(&b.1)));

    let mut pos: Vec<Arc<Expr>> = Vec::new();
    let mut negf: Vec<Arc<Expr>> = Vec::new();
    for (base, n) in factors {
        if n > 0 {
            pos.push(simp_pow(&base, n));
        } else {
            negf.push(simp_pow(&base, -n));
        }
    }

    // Decide where the numeric part lives so that e.g. x/3 and f'/c stay in
    // quotient form instead of turning into 0.333…*x.
    let mut cn = num;
    let mut cd = den;
    if cd < 0.0 {
        cn = -cn;
        cd = -cd;
    }
    if cd != 1.0 && is_integral(cn) && is_integral(cd) {
        let g = gcd_f(cn.abs(), cd);
        if g > 1.0 {
            cn /= g;
            cd /= g;
        }
    }
    // the choice depends only on the net value so the canonical form does
    // not depend on how the coefficient was assembled
    let net = cn / cd;
    let (coeff_num, coeff_den) = rational_form(net, cn, cd);

    let numerator = build_product(coeff_num, pos);
    if negf.is_empty() && coeff_den == 1.0 {
        numerator
    } else {
        let denominator = build_product(coeff_den, negf);
        Arc::new(Expr::Div(numerator, denominator))
    }
}

fn build_product(coeff: f64, factors: Vec<Arc<Expr>>) -> Arc<Expr> {
    let mut acc: Option<Arc<Expr>> = None;
    for f in factors {
        acc = Some(match acc {
            None => f,
            Some(prev) => Arc::new(Expr::Mul(prev, f)),
        });
    }
    match acc {
        None => Arc::new(Expr::Const(coeff)),
        Some(p) if coeff == 1.0 => p,
        Some(p) if coeff == -1.0 => Arc::new(Expr::Neg(p)),
        Some(p) if coeff < 0.0 => Arc::new(Expr::Neg(Arc::new(Expr::Mul(
            Arc::new(Expr::Const(-coeff)),
            p,
        )))),
        Some(p) => Arc::new(Expr::Mul(Arc::new(Expr::Const(coeff)), p)),
    }
}

/// Returns false if a hard zero was found in the numerator.
fn gather_factors(
    e: &Expr,
    exp: i32,
    factors: &mut Vec<(Arc<Expr>, i32)>,
    num: &mut f64,
    den: &mut f64,
) -> bool {
    match e {
        Expr::Mul(a, b) => {
            gather_factors(a, exp, factors, num, den) && gather_factors(b, exp, factors, num, den)
        }
        Expr::Div(a, b) => {
            gather_factors(a, exp, factors, num, den) && gather_factors(b, -exp, factors, num, den)
        }
        Expr::Neg(a) => {
            *num = -*num;
            gather_factors(a, exp, factors, num, den)
        }
        other => {
            let s = simp(other);
            match &*s {
                Expr::Mul(_, _) | Expr::Div(_, _) | Expr::Neg(_) => {
                    return gather_factors(&s.clone(), exp, factors, num, den)
                }
                Expr::Const(c) => {
                    if *c == 0.0 && exp > 0 {
                        return false;
                    }
                    let v = c.powi(exp.abs());
                    if exp > 0 {
                        *num *= v;
                    } else {
                        *den *= v;
                    }
                }
                Expr::Pow(base, n) => {
                    let total = n * exp;
                    match &**base {
                        // flatten powers of composite bases: (c*pi)^2 etc.
                        Expr::Mul(_, _) | Expr::Div(_, _) | Expr::Const(_) => {
                            return gather_factors(&base.clone(), total, factors, num, den)
                        }
                        Expr::Neg(inner) => {
                            if total % 2 != 0 {
                                *num = -*num;
                            }
                            return gather_factors(&inner.clone(), total, factors, num, den);
                        }
                        _ => push_factor(factors, base.clone(), total),
                    }
                }
                _ => push_factor(factors, s, exp),
            }
            true
        }
    }
}

fn push_factor(factors: &mut Vec<(Arc<Expr>, i32)>, base: Arc<Expr>, exp: i32) {
    if let Some(slot) = factors.iter_mut().find(|(b, _)| strict_eq(b, &base)) {
        slot.1 += exp;
    } else {
        factors.push((base, exp));
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse_expression;

    fn check_eq(a: &str, b: &str) {
        let ea = parse_expression(a).unwrap();
        let eb = parse_expression(b).unwrap();
        assert!(
            ea.structurally_eq(&eb),
            "`{a}` simplifies to `{}`, `{b}` to `{}`",
            ea.simplify(),
            eb.simplify()
        );
    }

    #[test]
    fn folds_constants_and_identities() {
        check_eq("0*x + 1*y + 0", "y");
        check_eq("x + x", "2*x");
        check_eq("x*x", "x^2");
        check_eq("2*x - 2*x", "0");
        check_eq("x/3 + x/3", "2*x/3");
        check_eq("sin(0) + cos(0)", "1");
    }

    #[test]
    fn commutative_reordering() {
        check_eq("y*x", "x*y");
        check_eq("x + y + 1", "1 + y + x");
        check_eq("2*pi*y*3", "6*pi*y");
    }

    #[test]
    fn quotients_keep_quotient_form() {
        let e = parse_expression("x/3").unwrap().simplify();
        assert_eq!(e.to_string(), "x/3");
        check_eq("x/3", "(2*x)/6");
    }

    #[test]
    fn zero_product_collapses() {
        check_eq("(x + y)*0", "0");
        check_eq("0/(1 + x^2)", "0");
    }

    #[test]
    fn like_terms_cancel_in_mixed_partials() {
        // the shape that appears in div(stream velocity)
        check_eq("-(2*x) + 2*x", "0");
        check_eq("x*y - y*x", "0");
    }
}
