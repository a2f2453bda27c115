//! Finite-difference stencils on sampling grids: centered second-order in
//! the interior, one-sided second-order at boundaries. These are the
//! cross-checks for every symbolic pipeline and the only derivative route
//! for grid-valued viscosities.

use crate::grid::ScalarGrid;

fn d1(values: &[f64], stride: usize, n: usize, base: usize, idx: usize, h: f64) -> f64 {
    let at = |k: usize| values[base + k * stride];
    if idx == 0 {
        (-3.0 * at(0) + 4.0 * at(1) - at(2)) / (2.0 * h)
    } else if idx == n - 1 {
        (3.0 * at(n - 1) - 4.0 * at(n - 2) + at(n - 3)) / (2.0 * h)
    } else {
        (at(idx + 1) - at(idx - 1)) / (2.0 * h)
    }
}

fn d2(values: &[f64], stride: usize, n: usize, base: usize, idx: usize, h: f64) -> f64 {
    let at = |k: usize| values[base + k * stride];
    if idx == 0 {
        (2.0 * at(0) - 5.0 * at(1) + 4.0 * at(2) - at(3)) / (h * h)
    } else if idx == n - 1 {
        (2.0 * at(n - 1) - 5.0 * at(n - 2) + 4.0 * at(n - 3) - at(n - 4)) / (h * h)
    } else {
        (at(idx + 1) - 2.0 * at(idx) + at(idx - 1)) / (h * h)
    }
}

pub fn ddx(g: &ScalarGrid) -> ScalarGrid {
    let (nx, ny, h) = (g.grid.nx, g.grid.ny, g.grid.hx());
    let mut out = ScalarGrid::zeros(g.grid);
    for j in 0..ny {
        for i in 0..nx {
            out.values[g.grid.idx(i, j)] = d1(&g.values, 1, nx, j * nx, i, h);
        }
    }
    out
}

pub fn ddy(g: &ScalarGrid) -> ScalarGrid {
    let (nx, ny, h) = (g.grid.nx, g.grid.ny, g.grid.hy());
    let mut out = ScalarGrid::zeros(g.grid);
    for j in 0..ny {
        for i in 0..nx {
            out.values[g.grid.idx(i, j)] = d1(&g.values, nx, ny, i, j, h);
        }
    }
    out
}

pub fn d2dx2(g: &ScalarGrid) -> ScalarGrid {
    let (nx, ny, h) = (g.grid.nx, g.grid.ny, g.grid.hx());
    let mut out = ScalarGrid::zeros(g.grid);
    for j in 0..ny {
        for i in 0..nx {
            out.values[g.grid.idx(i, j)] = d2(&g.values, 1, nx, j * nx, i, h);
        }
    }
    out
}

pub fn d2dy2(g: &ScalarGrid) -> ScalarGrid {
    let (nx, ny, h) = (g.grid.nx, g.grid.ny, g.grid.hy());
    let mut out = ScalarGrid::zeros(g.grid);
    for j in 0..ny {
        for i in 0..nx {
            out.values[g.grid.idx(i, j)] = d2(&g.values, nx, ny, i, j, h);
        }
    }
    out
}

pub fn d2dxdy(g: &ScalarGrid) -> ScalarGrid {
    ddy(&ddx(g))
}

pub fn laplacian(g: &ScalarGrid) -> ScalarGrid {
    let a = d2dx2(g);
    let b = d2dy2(g);
    ScalarGrid {
        grid: g.grid,
        values: a
            .values
            .iter()
            .zip(&b.values)
            .map(|(p, q)| p + q)
            .collect(),
    }
}

/// curl of the grid vector field (fx, fy): dx(fy) - dy(fx).
pub fn curl(fx: &ScalarGrid, fy: &ScalarGrid) -> ScalarGrid {
    let a = ddx(fy);
    let b = ddy(fx);
    ScalarGrid {
        grid: fx.grid,
        values: a
            .values
            .iter()
            .zip(&b.values)
            .map(|(p, q)| p - q)
            .collect(),
    }
}

/// Row divergence of a symmetric matrix grid [[s11, s12], [s12, -s11]]:
/// component 1 = dx(s11) + dy(s12), component 2 = dx(s12) + dy(-s11).
pub fn div_symmetric_tracefree(s11: &ScalarGrid, s12: &ScalarGrid) -> (ScalarGrid, ScalarGrid) {
    let dxs11 = ddx(s11);
    let dys12 = ddy(s12);
    let dxs12 = ddx(s12);
    let dys11 = ddy(s11);
    let d1 = ScalarGrid {
        grid: s11.grid,
        values: dxs11
            .values
            .iter()
            .zip(&dys12.values)
            .map(|(a, b)| a + b)
            .collect(),
    };
    let d2 = ScalarGrid {
        grid: s11.grid,
        values: dxs12
            .values
            .iter()
            .zip(&dys11.values)
            .map(|(a, b)| a - b)
            .collect(),
    };
    (d1, d2)
}

/// Least-squares slope of log(err) against log(h): the observed convergence
/// order of a refinement study.
pub fn fitted_order(hs: &[f64], errs: &[f64]) -> f64 {
    assert_eq!(hs.len(), errs.len());
    assert!(hs.len() >= 2);
    let n = hs.len() as f64;
    let xs: Vec<f64> = hs.iter().map(|h| h.ln()).collect();
    let ys: Vec<f64> = errs.iter().map(|e| e.max(1e-300).ln()).collect();
    let sx: f64 = xs.iter().sum();
    let sy: f64 = ys.iter().sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| x * y).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}
