//! Picard solution of the semilinear hyperbolic system
//!
//! ```text
//! dx v + alpha dy v = w
//! dx w + beta dy w + gamma dy v = 0
//! ```
//!
//! with Cauchy data on `{0} x [-1, 1]`, solved on the dependence domain
//! `{ -1 + c|x| <= y <= 1 - c|x| }` through the fixed-point form
//!
//! ```text
//! v(x,y) = v0(Y(0;x,y)) + int_0^x w(s, Y(s;x,y)) ds
//! w(x,y) = w0(Z(0;x,y)) - int_0^x (gamma dy v)(s, Z(s;x,y)) ds
//! ```
//!
//! where `Y`, `Z` are the alpha- and beta-characteristics. The grid is
//! uniform with equal spacing in x and y; `dy v` uses centered differences
//! each sweep. The x-range may sit on either side of the data line or
//! straddle it.

use rayon::prelude::*;

use crate::charfamily::{CharacteristicFamily, SpeedField};
use crate::error::{Error, Result};
use crate::expr::ScalarFieldExpr;
use crate::grid::{Grid2D, ScalarGrid};
use crate::interp;

pub struct HyperbolicInputs {
    pub alpha: Box<dyn SpeedField + Send>,
    pub beta: Box<dyn SpeedField + Send>,
    pub gamma: Box<dyn Fn(f64, f64) -> f64 + Sync + Send>,
    /// characteristic speed bound defining the dependence domain
    pub c: f64,
    /// Cauchy data, univariate expressions in the data-line coordinate
    pub v0: ScalarFieldExpr,
    pub w0: ScalarFieldExpr,
}

#[derive(Clone, Debug)]
pub struct PicardDiagnostics {
    pub iterations: usize,
    pub sup_history: Vec<f64>,
    pub converged: bool,
}

#[derive(Debug)]
pub struct HyperbolicSolution {
    /// uniform spacing, identical in x and y
    pub h: f64,
    /// leftmost column position (a multiple of h, <= 0)
    pub x_min: f64,
    /// columns x_i = x_min + i h, i = 0..=n_cols
    pub n_cols: usize,
    /// rows y_j = -1 + j h, j = 0..=n_rows
    pub n_rows: usize,
    pub c: f64,
    /// per-column inclusive row mask of the dependence domain
    pub jmin: Vec<usize>,
    pub jmax: Vec<usize>,
    /// column-major storage: index = col * (n_rows + 1) + row
    pub v: Vec<f64>,
    pub w: Vec<f64>,
    pub v0: ScalarFieldExpr,
    pub w0: ScalarFieldExpr,
    pub diagnostics: PicardDiagnostics,
}

impl HyperbolicSolution {
    pub fn idx(&self, i: usize, j: usize) -> usize {
        i * (self.n_rows + 1) + j
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + self.h * i as f64
    }

    pub fn y(&self, j: usize) -> f64 {
        -1.0 + self.h * j as f64
    }

    /// Column index of the data line x = 0.
    pub fn i_data(&self) -> usize {
        (-self.x_min / self.h).round() as usize
    }

    /// Row index of y = 0.
    pub fn j_zero(&self) -> usize {
        ((1.0 / self.h).round()) as usize
    }

    /// Largest rectangle `[x_min, x_max] x [-ylim, ylim]` inside the masked
    /// domain, as grids (y-outer layout).
    pub fn rect_grids(&self) -> (ScalarGrid, ScalarGrid) {
        let j0 = self
            .jmin
            .iter()
            .copied()
            .max()
            .unwrap_or(0);
        let j1 = self.n_rows - j0;
        let grid = Grid2D {
            x0: self.x(0),
            y0: self.y(j0),
            x1: self.x(self.n_cols),
            y1: self.y(j1),
            nx: self.n_cols + 1,
            ny: j1 - j0 + 1,
        };
        let mut v = ScalarGrid::zeros(grid);
        let mut w = ScalarGrid::zeros(grid);
        for j in j0..=j1 {
            for i in 0..=self.n_cols {
                v.values[grid.idx(i, j - j0)] = self.v[self.idx(i, j)];
                w.values[grid.idx(i, j - j0)] = self.w[self.idx(i, j)];
            }
        }
        (v, w)
    }

    /// The right half `[0, x_max]` as its own solution object (the plus
    /// problem of the split construction; values agree with a one-sided
    /// run because the fixed-point updates never cross the data line).
    pub fn right_half(&self) -> HyperbolicSolution {
        let i0 = self.i_data();
        let rows = self.n_rows + 1;
        let n_cols = self.n_cols - i0;
        let take = |src: &Vec<f64>| -> Vec<f64> {
            let mut out = vec![0.0; (n_cols + 1) * rows];
            out.copy_from_slice(&src[i0 * rows..]);
            out
        };
        HyperbolicSolution {
            h: self.h,
            x_min: 0.0,
            n_cols,
            n_rows: self.n_rows,
            c: self.c,
            jmin: self.jmin[i0..].to_vec(),
            jmax: self.jmax[i0..].to_vec(),
            v: take(&self.v),
            w: take(&self.w),
            v0: self.v0.clone(),
            w0: self.w0.clone(),
            diagnostics: self.diagnostics.clone(),
        }
    }
}

/// Solve on `[x_min, x_max]` (with `x_min <= 0 <= x_max`) at spacing `h`;
/// `x_min/h`, `x_max/h` and `1/h` must be integral. Picard iterations stop
/// when the successive sup-difference drops below 1e-10, capped at 50
/// sweeps; three consecutive growths of the difference abort with
/// domain-shrink advice.
pub fn solve_hyperbolic_cauchy(
    inp: HyperbolicInputs,
    x_min: f64,
    x_max: f64,
    h: f64,
) -> Result<HyperbolicSolution> {
    let n_cols = ((x_max - x_min) / h).round() as usize;
    let n_rows = (2.0 / h).round() as usize;
    let i0 = (-x_min / h).round() as usize;
    let lattice_ok = ((x_max - x_min) / h - n_cols as f64).abs() < 1e-9
        && ((2.0 / h) - n_rows as f64).abs() < 1e-9
        && (-x_min / h - i0 as f64).abs() < 1e-9
        && x_min <= 0.0
        && x_max >= 0.0;
    if !lattice_ok {
        return Err(Error::Invalid(format!(
            "spacing h = {h} must divide x_min = {x_min}, x_max = {x_max} and the data line"
        )));
    }
    if inp.c * x_max.max(-x_min) >= 1.0 {
        return Err(Error::Invalid(format!(
            "domain exceeds the dependence region of speed bound c = {}",
            inp.c
        )));
    }
    let cols = n_cols + 1;
    let rows = n_rows + 1;

    // dependence-domain masks
    let mut jmin = vec![0usize; cols];
    let mut jmax = vec![n_rows; cols];
    for i in 0..cols {
        let cut = inp.c * (x_min + h * i as f64).abs();
        let k = ((cut / h) - 1e-9).ceil().max(0.0) as usize;
        jmin[i] = k;
        jmax[i] = n_rows - k;
    }

    // characteristic families anchored on the data line
    let alpha_fam = CharacteristicFamily::integrate(
        inp.alpha,
        0.0,
        h,
        -(i0 as i64),
        (n_cols - i0) as i64,
        -1.0,
        h,
        rows,
    );
    let beta_fam = CharacteristicFamily::integrate(
        inp.beta,
        0.0,
        h,
        -(i0 as i64),
        (n_cols - i0) as i64,
        -1.0,
        h,
        rows,
    );

    // anchor coordinates of the two characteristics through every masked node
    let mut q_alpha = vec![0.0f64; cols * rows];
    let mut q_beta = vec![0.0f64; cols * rows];
    for i in 0..cols {
        if i == i0 {
            for j in jmin[i]..=jmax[i] {
                q_alpha[i * rows + j] = -1.0 + h * j as f64;
                q_beta[i * rows + j] = -1.0 + h * j as f64;
            }
            continue;
        }
        let row_res: Result<Vec<(f64, f64)>> = (jmin[i]..=jmax[i])
            .into_par_iter()
            .map(|j| {
                let y = -1.0 + h * j as f64;
                Ok((
                    alpha_fam.invert_at_station(i, y)?,
                    beta_fam.invert_at_station(i, y)?,
                ))
            })
            .collect();
        for (off, (qa, qb)) in row_res?.into_iter().enumerate() {
            let j = jmin[i] + off;
            q_alpha[i * rows + j] = qa;
            q_beta[i * rows + j] = qb;
        }
    }

    // gamma sampled once on the lattice
    let gamma: Vec<f64> = (0..cols * rows)
        .into_par_iter()
        .map(|k| {
            let i = k / rows;
            let j = k % rows;
            (inp.gamma)(x_min + h * i as f64, -1.0 + h * j as f64)
        })
        .collect();

    let mut v = vec![0.0f64; cols * rows];
    let mut w = vec![0.0f64; cols * rows];
    // data line is exact
    for j in 0..rows {
        let y = -1.0 + h * j as f64;
        v[i0 * rows + j] = inp.v0.eval1(y);
        w[i0 * rows + j] = inp.w0.eval1(y);
    }

    let mut sup_history: Vec<f64> = Vec::new();
    let mut converged = false;
    let mut grow_streak = 0usize;
    let mut iterations = 0usize;

    // stations between the data line and column i, with trapezoid weights
    // and the orientation sign of int_0^x
    let span = |i: usize| -> (usize, usize, f64) {
        if i >= i0 {
            (i0, i, h)
        } else {
            (i, i0, -h)
        }
    };

    for sweep in 0..50 {
        iterations = sweep + 1;

        // centered dy v per column (one-sided second order at mask edges)
        let dyv: Vec<f64> = (0..cols)
            .into_par_iter()
            .flat_map_iter(|i| {
                let mut col = vec![0.0f64; rows];
                let (lo, hi) = (jmin[i], jmax[i]);
                for j in lo..=hi {
                    let at = |jj: usize| v[i * rows + jj];
                    col[j] = if j == lo {
                        (-3.0 * at(j) + 4.0 * at(j + 1) - at(j + 2)) / (2.0 * h)
                    } else if j == hi {
                        (3.0 * at(j) - 4.0 * at(j - 1) + at(j - 2)) / (2.0 * h)
                    } else {
                        (at(j + 1) - at(j - 1)) / (2.0 * h)
                    };
                }
                col
            })
            .collect();
        let gdyv: Vec<f64> = gamma.iter().zip(&dyv).map(|(g, d)| g * d).collect();

        // w update along beta-characteristics
        let new_w: Vec<f64> = (0..cols)
            .into_par_iter()
            .flat_map_iter(|i| {
                let mut col = vec![0.0f64; rows];
                let (lo, hi, sh) = span(i);
                for j in jmin[i]..=jmax[i] {
                    let q = q_beta[i * rows + j];
                    let mut integral = 0.0;
                    if i != i0 {
                        for k in lo..=hi {
                            let weight = if k == lo || k == hi { 0.5 } else { 1.0 };
                            let z = if k == i {
                                -1.0 + h * j as f64
                            } else {
                                beta_fam.value_at_station(k, q)
                            };
                            let val = interp::lagrange6_range(
                                &gdyv[k * rows..(k + 1) * rows],
                                jmin[k],
                                jmax[k] + 1,
                                -1.0,
                                h,
                                z,
                            );
                            integral += weight * val;
                        }
                        integral *= sh;
                    }
                    col[j] = inp.w0.eval1(q) - integral;
                }
                col
            })
            .collect();

        // v update along alpha-characteristics, using the fresh w
        let new_v: Vec<f64> = (0..cols)
            .into_par_iter()
            .flat_map_iter(|i| {
                let mut col = vec![0.0f64; rows];
                let (lo, hi, sh) = span(i);
                for j in jmin[i]..=jmax[i] {
                    let q = q_alpha[i * rows + j];
                    let mut integral = 0.0;
                    if i != i0 {
                        for k in lo..=hi {
                            let weight = if k == lo || k == hi { 0.5 } else { 1.0 };
                            let yk = if k == i {
                                -1.0 + h * j as f64
                            } else {
                                alpha_fam.value_at_station(k, q)
                            };
                            let val = interp::lagrange6_range(
                                &new_w[k * rows..(k + 1) * rows],
                                jmin[k],
                                jmax[k] + 1,
                                -1.0,
                                h,
                                yk,
                            );
                            integral += weight * val;
                        }
                        integral *= sh;
                    }
                    col[j] = inp.v0.eval1(q) + integral;
                }
                col
            })
            .collect();

        let mut sup = 0.0f64;
        for i in 0..cols {
            for j in jmin[i]..=jmax[i] {
                let k = i * rows + j;
                sup = sup.max((new_v[k] - v[k]).abs()).max((new_w[k] - w[k]).abs());
            }
        }
        v = new_v;
        w = new_w;

        if let Some(&prev) = sup_history.last() {
            if sup > prev {
                grow_streak += 1;
                if grow_streak >= 3 {
                    return Err(Error::Numerical(format!(
                        "Picard iteration diverges (sup difference grew 3 sweeps \
                         running, last {sup:.3e}); shrink the domain (smaller \
                         tau-max or disk radius) and retry"
                    )));
                }
            } else {
                grow_streak = 0;
            }
        }
        sup_history.push(sup);
        if sup <= 1e-10 {
            converged = true;
            break;
        }
    }

    if !converged {
        return Err(Error::Numerical(
            "Picard iteration did not reach 1e-10 within 50 sweeps".into(),
        ));
    }

    Ok(HyperbolicSolution {
        h,
        x_min,
        n_cols,
        n_rows,
        c: inp.c,
        jmin,
        jmax,
        v,
        w,
        v0: inp.v0,
        w0: inp.w0,
        diagnostics: PicardDiagnostics {
            iterations,
            sup_history,
            converged,
        },
    })
}

/// Max-norm residuals of the two first-order equations over the interior
/// (mask edges and the first/last columns excluded), by finite differences.
pub fn system_residual(
    sol: &HyperbolicSolution,
    alpha: &dyn SpeedField,
    beta: &dyn SpeedField,
    gamma: &dyn Fn(f64, f64) -> f64,
) -> (f64, f64) {
    let rows = sol.n_rows + 1;
    let h = sol.h;
    let mut r1 = 0.0f64;
    let mut r2 = 0.0f64;
    for i in 1..sol.n_cols {
        for j in (sol.jmin[i] + 1)..sol.jmax[i] {
            if j <= sol.jmin[i + 1]
                || j >= sol.jmax[i + 1]
                || j <= sol.jmin[i - 1]
                || j >= sol.jmax[i - 1]
            {
                continue;
            }
            let x = sol.x(i);
            let y = sol.y(j);
            let k = i * rows + j;
            let dxv = (sol.v[(i + 1) * rows + j] - sol.v[(i - 1) * rows + j]) / (2.0 * h);
            let dyv = (sol.v[k + 1] - sol.v[k - 1]) / (2.0 * h);
            let dxw = (sol.w[(i + 1) * rows + j] - sol.w[(i - 1) * rows + j]) / (2.0 * h);
            let dyw = (sol.w[k + 1] - sol.w[k - 1]) / (2.0 * h);
            r1 = r1.max((dxv + alpha.value(x, y) * dyv - sol.w[k]).abs());
            r2 = r2.max((dxw + beta.value(x, y) * dyw + gamma(x, y) * dyv).abs());
        }
    }
    (r1, r2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expression;
    use crate::local::coefficients::local_coefficients;
    use crate::local::orientation::normalize_orientation;

    fn p(s: &str) -> ScalarFieldExpr {
        parse_expression(s).unwrap()
    }

    fn dalembert_inputs() -> HyperbolicInputs {
        let u = p("(x^2-y^2)/2");
        let (u, rec) = normalize_orientation(&u, (0.0, 0.0)).unwrap();
        let c = local_coefficients(&u, 1.0, rec).unwrap();
        HyperbolicInputs {
            alpha: Box::new(c.blended().alpha_field()),
            beta: Box::new(c.blended().beta_field()),
            gamma: {
                let b = c.blended();
                Box::new(move |x, y| b.gamma(x, y))
            },
            c: c.c,
            v0: p("0"),
            w0: p("y"),
        }
    }

    #[test]
    fn dalembert_case_is_exact() {
        // a = 0, v0 = 0, w0 = y: v = x y, w = y - x
        let sol = solve_hyperbolic_cauchy(dalembert_inputs(), 0.0, 0.125, 1.0 / 64.0).unwrap();
        for i in 0..=sol.n_cols {
            for j in sol.jmin[i]..=sol.jmax[i] {
                let (x, y) = (sol.x(i), sol.y(j));
                let k = sol.idx(i, j);
                assert!((sol.v[k] - x * y).abs() < 1e-12, "v({x},{y}) = {}", sol.v[k]);
                assert!((sol.w[k] - (y - x)).abs() < 1e-12);
            }
        }
        assert!(sol.diagnostics.iterations <= 4);
    }

    #[test]
    fn two_sided_dalembert_is_exact() {
        let sol =
            solve_hyperbolic_cauchy(dalembert_inputs(), -0.125, 0.125, 1.0 / 64.0).unwrap();
        assert_eq!(sol.i_data(), 8);
        for i in 0..=sol.n_cols {
            for j in sol.jmin[i]..=sol.jmax[i] {
                let (x, y) = (sol.x(i), sol.y(j));
                let k = sol.idx(i, j);
                assert!((sol.v[k] - x * y).abs() < 1e-12, "v({x},{y}) = {}", sol.v[k]);
                assert!((sol.w[k] - (y - x)).abs() < 1e-12);
            }
        }
        // the right half is the one-sided plus solution
        let plus = sol.right_half();
        assert_eq!(plus.x_min, 0.0);
        assert!((plus.v[plus.idx(4, plus.j_zero() + 3)]
            - sol.v[sol.idx(sol.i_data() + 4, sol.j_zero() + 3)])
        .abs()
            .eq(&0.0));
    }

    #[test]
    fn zero_data_gives_zero_solution() {
        let mut inp = dalembert_inputs();
        inp.v0 = p("0");
        inp.w0 = p("0");
        let sol = solve_hyperbolic_cauchy(inp, -0.125, 0.125, 1.0 / 32.0).unwrap();
        assert!(sol.v.iter().all(|&t| t == 0.0));
        assert!(sol.w.iter().all(|&t| t == 0.0));
    }

    #[test]
    fn data_line_is_exact() {
        let u = p("(x^2-y^2)/2 + 0.05*sin(x)*sin(y)");
        let (u, rec) = normalize_orientation(&u, (0.0, 0.0)).unwrap();
        let c = local_coefficients(&u, 1.0, rec).unwrap();
        let inp = HyperbolicInputs {
            alpha: Box::new(c.blended().alpha_field()),
            beta: Box::new(c.blended().beta_field()),
            gamma: {
                let b = c.blended();
                Box::new(move |x, y| b.gamma(x, y))
            },
            c: c.c,
            v0: p("0"),
            w0: p("y"),
        };
        let sol = solve_hyperbolic_cauchy(inp, -0.125, 0.125, 1.0 / 32.0).unwrap();
        let i0 = sol.i_data();
        for j in 0..=sol.n_rows {
            let y = sol.y(j);
            assert_eq!(sol.v[sol.idx(i0, j)], 0.0);
            assert_eq!(sol.w[sol.idx(i0, j)], y);
        }
    }

    #[test]
    fn boundary_derivative_identities() {
        // dx v(0, y) = w0(y) - alpha(0, y) v0'(y), dy v(0, y) = v0'(y),
        // checked at second order with data v0 = sin(y)/4, w0 = y.
        let u = p("(x^2-y^2)/2 + 0.05*sin(x)*sin(y)");
        let (u, rec) = normalize_orientation(&u, (0.0, 0.0)).unwrap();
        let c = local_coefficients(&u, 1.0, rec).unwrap();
        let alpha = c.blended().alpha_field();
        let mk = |h: f64| {
            let inp = HyperbolicInputs {
                alpha: Box::new(c.blended().alpha_field()),
                beta: Box::new(c.blended().beta_field()),
                gamma: {
                    let b = c.blended();
                    Box::new(move |x, y| b.gamma(x, y))
                },
                c: c.c,
                v0: p("sin(y)/4"),
                w0: p("y"),
            };
            solve_hyperbolic_cauchy(inp, 0.0, 0.125, h).unwrap()
        };
        let mut errs = Vec::new();
        let hs = [1.0 / 32.0, 1.0 / 64.0];
        for &h in &hs {
            let sol = mk(h);
            let rows = sol.n_rows + 1;
            let mut worst = 0.0f64;
            for j in (rows / 4)..(3 * rows / 4) {
                let y = sol.y(j);
                // one-sided second-order dx at the data line
                let dxv =
                    (-3.0 * sol.v[j] + 4.0 * sol.v[rows + j] - sol.v[2 * rows + j]) / (2.0 * h);
                let want = y - alpha.value(0.0, y) * (y.cos() / 4.0);
                worst = worst.max((dxv - want).abs());
                let dyv = (sol.v[j + 1] - sol.v[j - 1]) / (2.0 * h);
                worst = worst.max((dyv - y.cos() / 4.0).abs());
            }
            errs.push(worst);
        }
        let order = crate::fd::fitted_order(&hs, &errs);
        assert!(order > 1.6, "order {order}, errs {errs:?}");
    }

    #[test]
    fn perturbed_system_residual_is_second_order() {
        let u = p("(x^2-y^2)/2 + 0.05*sin(x)*sin(y)");
        let (u, rec) = normalize_orientation(&u, (0.0, 0.0)).unwrap();
        let c = local_coefficients(&u, 1.0, rec).unwrap();
        let mut errs = Vec::new();
        let hs = [1.0 / 32.0, 1.0 / 64.0];
        for &h in &hs {
            let inp = HyperbolicInputs {
                alpha: Box::new(c.blended().alpha_field()),
                beta: Box::new(c.blended().beta_field()),
                gamma: {
                    let b = c.blended();
                    Box::new(move |x, y| b.gamma(x, y))
                },
                c: c.c,
                v0: p("0"),
                w0: p("y"),
            };
            let sol = solve_hyperbolic_cauchy(inp, -0.125, 0.125, h).unwrap();
            let alpha = c.blended().alpha_field();
            let beta = c.blended().beta_field();
            let b = c.blended();
            let g = move |x: f64, y: f64| b.gamma(x, y);
            let (r1, r2) = system_residual(&sol, &alpha, &beta, &g);
            errs.push(r1.max(r2));
        }
        assert!(errs[1] < errs[0], "residuals {errs:?}");
        let order = crate::fd::fitted_order(&hs, &errs);
        assert!(order > 1.5, "order {order}, errs {errs:?}");
    }
}
