//! Residual oracles for the Stokes realizability equation
//! `curl[Div(mu e(U))] = 0`.
//!
//! Two independent routes are always available: a fully symbolic assembly
//! (when the viscosity is an expression) sampled on the grid, and nested
//! centered finite differences applied to sampled values. Agreement of the
//! two at O(h^2) is the standing cross-check for the sign conventions.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::{ScalarFieldExpr, Var};
use crate::fd;
use crate::field::VelocityField;
use crate::grid::{Grid2D, ScalarGrid};

/// Residual magnitudes over a grid.
#[derive(Clone, Debug, Serialize)]
pub struct ResidualReport {
    pub max_abs: f64,
    pub l2: f64,
    pub grid: Grid2D,
    pub convergence_order: Option<f64>,
}

impl ResidualReport {
    pub fn from_grid(g: &ScalarGrid) -> Self {
        ResidualReport {
            max_abs: g.max_abs(),
            l2: g.l2(),
            grid: g.grid,
            convergence_order: None,
        }
    }
}

/// Viscosity given either symbolically or as grid samples.
#[derive(Clone, Debug)]
pub enum ViscositySpec {
    Symbolic(ScalarFieldExpr),
    Grid(ScalarGrid),
}

/// Both pipelines' reports; `symbolic` is present when the viscosity was
/// symbolic.
#[derive(Clone, Debug)]
pub struct StokesResidual {
    pub symbolic: Option<ResidualReport>,
    pub fd: ResidualReport,
    pub fd_grid: ScalarGrid,
}

/// Symbolic `curl[Div(mu e(U))]` as one expression.
pub fn symbolic_stokes_residual(mu: &ScalarFieldExpr, u: &VelocityField) -> ScalarFieldExpr {
    let e = u.strain();
    let s11 = mu.mul(&e.e11).simplify();
    let s12 = mu.mul(&e.e12).simplify();
    // Div(S) = (dx s11 + dy s12, dx s12 - dy s11) for symmetric trace-free S
    let d1 = s11.d(Var::X).add(&s12.d(Var::Y)).simplify();
    let d2 = s12.d(Var::X).sub(&s11.d(Var::Y)).simplify();
    // curl(D) = dx d2 - dy d1
    d2.d(Var::X).sub(&d1.d(Var::Y)).simplify()
}

/// The realizability condition written as a semilinear wave equation in
/// `u = log(mu)`: with `A = e(U) R_perp = [[a, b], [b, -a]]`
/// (`a = e12`, `b = -e11`),
///
/// ```text
/// exp(-u) curl[Div(e^u e(U))]
///   = A : grad^2 u + A grad u . grad u - R_perp (Lap U) . grad u
///     + (1/2) Lap(curl U)
/// ```
///
/// returned as a single expression. Realizability with `mu = e^u` is
/// equivalent to this vanishing.
pub fn wave_form_residual(u: &ScalarFieldExpr, vf: &VelocityField) -> ScalarFieldExpr {
    let e = vf.strain();
    let a = e.e12.clone();
    let b = e.e11.neg().simplify();
    let ux = u.d(Var::X);
    let uy = u.d(Var::Y);
    let uxx = ux.d(Var::X);
    let uyy = uy.d(Var::Y);
    let uxy = ux.d(Var::Y);

    let principal = a.mul(&uxx.sub(&uyy)).add(&b.mul(&uxy).scale(2.0));
    let quadratic = a
        .mul(&ux.pow(2).sub(&uy.pow(2)))
        .add(&b.mul(&ux).mul(&uy).scale(2.0));
    let (lap_ux, lap_uy) = vf.laplacian();
    // R_perp (Lap U) = (-Lap Uy, Lap Ux)
    let transport = lap_uy.neg().mul(&ux).add(&lap_ux.mul(&uy));
    let forcing = crate::field::laplacian(&vf.curl()).scale(0.5);

    principal
        .add(&quadratic)
        .sub(&transport)
        .add(&forcing)
        .simplify()
}

/// Evaluate the realizability residual on `grid`, rejecting non-positive
/// viscosities with the offending location.
pub fn realization_residual(
    mu: &ViscositySpec,
    u: &VelocityField,
    grid: &Grid2D,
) -> Result<StokesResidual> {
    let e = u.strain();

    match mu {
        ViscositySpec::Symbolic(mu_expr) => {
            // positivity on the requested grid
            check_positive(&ScalarGrid::from_fn(*grid, |x, y| mu_expr.eval(x, y)))?;

            // symbolic route
            let resid_expr = symbolic_stokes_residual(mu_expr, u);
            let sym = ScalarGrid::from_fn(*grid, |x, y| resid_expr.eval(x, y));

            // FD route on a padded sampling so the reported window sees only
            // centered stencils
            let padded = grid.padded(3);
            let mu_g = ScalarGrid::from_fn(padded, |x, y| mu_expr.eval(x, y));
            let fd_full = nested_fd_residual(&mu_g, u, &e);
            let fdw = crop(&fd_full, 3);

            Ok(StokesResidual {
                symbolic: Some(ResidualReport::from_grid(&sym)),
                fd: ResidualReport::from_grid(&fdw),
                fd_grid: fdw,
            })
        }
        ViscositySpec::Grid(mu_g) => {
            if mu_g.grid.nx != grid.nx || mu_g.grid.ny != grid.ny {
                return Err(Error::Invalid(
                    "viscosity grid does not match the requested grid".into(),
                ));
            }
            check_positive(mu_g)?;
            let fdw = nested_fd_residual(mu_g, u, &e);
            Ok(StokesResidual {
                symbolic: None,
                fd: ResidualReport::from_grid(&fdw),
                fd_grid: fdw,
            })
        }
    }
}

fn check_positive(mu: &ScalarGrid) -> Result<()> {
    for j in 0..mu.grid.ny {
        for i in 0..mu.grid.nx {
            let v = mu.get(i, j);
            if !(v > 0.0) {
                return Err(Error::Hypothesis(format!(
                    "viscosity must be positive: mu({}, {}) = {v}",
                    mu.grid.x(i),
                    mu.grid.y(j)
                )));
            }
        }
    }
    Ok(())
}

/// curl[Div(mu e)] with every derivative taken by finite differences on the
/// sampled stress.
pub fn nested_fd_residual(
    mu: &ScalarGrid,
    _u: &VelocityField,
    e: &crate::field::StrainField,
) -> ScalarGrid {
    let g = mu.grid;
    let e11 = ScalarGrid::from_fn(g, |x, y| e.e11.eval(x, y));
    let e12 = ScalarGrid::from_fn(g, |x, y| e.e12.eval(x, y));
    let s11 = ScalarGrid {
        grid: g,
        values: mu
            .values
            .iter()
            .zip(&e11.values)
            .map(|(m, v)| m * v)
            .collect(),
    };
    let s12 = ScalarGrid {
        grid: g,
        values: mu
            .values
            .iter()
            .zip(&e12.values)
            .map(|(m, v)| m * v)
            .collect(),
    };
    let (d1, d2) = fd::div_symmetric_tracefree(&s11, &s12);
    fd::curl(&d1, &d2)
}

fn crop(g: &ScalarGrid, cells: usize) -> ScalarGrid {
    let inner = Grid2D {
        x0: g.grid.x(cells),
        y0: g.grid.y(cells),
        x1: g.grid.x(g.grid.nx - 1 - cells),
        y1: g.grid.y(g.grid.ny - 1 - cells),
        nx: g.grid.nx - 2 * cells,
        ny: g.grid.ny - 2 * cells,
    };
    let mut out = ScalarGrid::zeros(inner);
    for j in 0..inner.ny {
        for i in 0..inner.nx {
            out.values[inner.idx(i, j)] = g.get(i + cells, j + cells);
        }
    }
    out
}
