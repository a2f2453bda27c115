//! Interpolation on uniform lattices.
//!
//! The solvers differentiate interpolated grids up to four times, so the
//! interpolation error has to sit well below the scheme's own O(h^2); the
//! default here is 6-point Lagrange (O(h^6)) with window clamping near the
//! ends, plus cubic Hermite along ODE trajectories where exact slopes are
//! available.

/// 6-point Lagrange interpolation of `values` sampled at `pos0 + k*step`.
/// Queries outside the lattice are clamped to the boundary window.
pub fn lagrange6(values: &[f64], pos0: f64, step: f64, q: f64) -> f64 {
    lagrange6_range(values, 0, values.len(), pos0, step, q)
}

/// Same, restricted to the index range `[lo, hi)` of valid samples.
pub fn lagrange6_range(
    values: &[f64],
    lo: usize,
    hi: usize,
    pos0: f64,
    step: f64,
    q: f64,
) -> f64 {
    let n = hi - lo;
    debug_assert!(n >= 2, "interpolation needs at least 2 samples");
    if n < 6 {
        return lagrange_small(&values[lo..hi], pos0 + step * lo as f64, step, q);
    }
    let t = (q - pos0) / step;
    // centered 6-point window [i0, i0+5]
    let mut i0 = t.floor() as isize - 2;
    let lo_i = lo as isize;
    let hi_i = hi as isize - 6;
    if i0 < lo_i {
        i0 = lo_i;
    } else if i0 > hi_i {
        i0 = hi_i;
    }
    let s = t - i0 as f64;
    let mut acc = 0.0;
    for m in 0..6usize {
        let mut w = 1.0;
        for k in 0..6usize {
            if k != m {
                w *= (s - k as f64) / (m as f64 - k as f64);
            }
        }
        acc += w * values[(i0 as usize) + m];
    }
    acc
}

fn lagrange_small(values: &[f64], pos0: f64, step: f64, q: f64) -> f64 {
    let n = values.len();
    let s = (q - pos0) / step;
    let mut acc = 0.0;
    for m in 0..n {
        let mut w = 1.0;
        for k in 0..n {
            if k != m {
                w *= (s - k as f64) / (m as f64 - k as f64);
            }
        }
        acc += w * values[m];
    }
    acc
}

/// Cubic Hermite between two nodes with exact endpoint slopes.
pub fn hermite_cubic(x0: f64, f0: f64, d0: f64, x1: f64, f1: f64, d1: f64, q: f64) -> f64 {
    let h = x1 - x0;
    let t = (q - x0) / h;
    let t2 = t * t;
    let t3 = t2 * t;
    let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    let h10 = t3 - 2.0 * t2 + t;
    let h01 = -2.0 * t3 + 3.0 * t2;
    let h11 = t3 - t2;
    h00 * f0 + h10 * h * d0 + h01 * f1 + h11 * h * d1
}

/// Monotone bracket + root solve of a scalar function on `[a, b]`.
/// Assumes `f` has a sign change on the interval. Alternates secant and
/// bisection steps (so the bracket provably shrinks) and returns the
/// iterate with the smallest |f| seen; a plain false-position loop can
/// stall with one endpoint pinned and must not report the midpoint of a
/// wide bracket.
pub fn monotone_root(mut a: f64, mut b: f64, mut fa: f64, mut fb: f64, f: impl Fn(f64) -> f64) -> f64 {
    if fa == 0.0 {
        return a;
    }
    if fb == 0.0 {
        return b;
    }
    debug_assert!(fa * fb < 0.0, "root not bracketed: f({a})={fa}, f({b})={fb}");
    let mut best = if fa.abs() <= fb.abs() { (a, fa.abs()) } else { (b, fb.abs()) };
    for iter in 0..200 {
        let c = if iter % 2 == 0 {
            let sec = b - fb * (b - a) / (fb - fa);
            if sec.is_finite() && sec > a && sec < b {
                sec
            } else {
                0.5 * (a + b)
            }
        } else {
            0.5 * (a + b)
        };
        let fc = f(c);
        if fc.abs() < best.1 {
            best = (c, fc.abs());
        }
        if fc == 0.0 {
            return c;
        }
        if fa * fc < 0.0 {
            b = c;
            fb = fc;
        } else {
            a = c;
            fa = fc;
        }
        if (b - a).abs() <= 1e-15 * (1.0 + a.abs() + b.abs()) {
            break;
        }
    }
    best.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lagrange6_reproduces_quintics() {
        let f = |x: f64| 1.0 + x - 0.5 * x.powi(3) + 0.125 * x.powi(5);
        let vals: Vec<f64> = (0..12).map(|k| f(-1.0 + 0.2 * k as f64)).collect();
        for &q in &[-0.93, -0.5, 0.0, 0.47, 1.11] {
            let got = lagrange6(&vals, -1.0, 0.2, q);
            assert!((got - f(q)).abs() < 1e-12, "q={q}: {got} vs {}", f(q));
        }
    }

    #[test]
    fn lagrange6_error_order() {
        let f = |x: f64| (2.5 * x).sin();
        let err_at = |h: f64| {
            let n = (2.0 / h) as usize + 1;
            let vals: Vec<f64> = (0..n).map(|k| f(-1.0 + h * k as f64)).collect();
            let mut worst = 0.0f64;
            for m in 0..400 {
                let q = -0.9 + 1.8 * (m as f64) / 399.0;
                worst = worst.max((lagrange6(&vals, -1.0, h, q) - f(q)).abs());
            }
            worst
        };
        let e1 = err_at(0.1);
        let e2 = err_at(0.05);
        let order = (e1 / e2).log2();
        assert!(order > 5.0, "observed order {order}");
    }

    #[test]
    fn hermite_reproduces_cubics() {
        let f = |x: f64| 2.0 - x + 3.0 * x * x - 0.5 * x.powi(3);
        let d = |x: f64| -1.0 + 6.0 * x - 1.5 * x * x;
        for &q in &[0.1, 0.25, 0.49] {
            let got = hermite_cubic(0.0, f(0.0), d(0.0), 0.5, f(0.5), d(0.5), q);
            assert!((got - f(q)).abs() < 1e-14);
        }
    }

    #[test]
    fn root_solve_converges() {
        let f = |x: f64| x.exp() - 2.0;
        let r = monotone_root(0.0, 1.0, f(0.0), f(1.0), f);
        assert!((r - 2.0f64.ln()).abs() < 1e-12);
    }
}
