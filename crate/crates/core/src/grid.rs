//! Rectangular sampling grids and the bit-stable export formats.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};

/// Uniform rectangular grid. Nodes are `x0 + i*hx`, `y0 + j*hy` with
/// `i < nx`, `j < ny`; storage is row-major in y then x (y outer).
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Grid2D {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
    pub nx: usize,
    pub ny: usize,
}

impl Grid2D {
    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64, nx: usize, ny: usize) -> Result<Self> {
        if nx < 3 || ny < 3 {
            return Err(Error::Invalid(format!(
                "grid needs nx, ny >= 3, got {nx} x {ny}"
            )));
        }
        if !(x1 > x0) || !(y1 > y0) {
            return Err(Error::Invalid(format!(
                "grid bounds must satisfy x1 > x0, y1 > y0, got [{x0},{x1}] x [{y0},{y1}]"
            )));
        }
        Ok(Grid2D { x0, y0, x1, y1, nx, ny })
    }

    pub fn square(half: f64, n: usize) -> Result<Self> {
        Self::new(-half, -half, half, half, n, n)
    }

    pub fn hx(&self) -> f64 {
        (self.x1 - self.x0) / (self.nx - 1) as f64
    }

    pub fn hy(&self) -> f64 {
        (self.y1 - self.y0) / (self.ny - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x0 + self.hx() * i as f64
    }

    pub fn y(&self, j: usize) -> f64 {
        self.y0 + self.hy() * j as f64
    }

    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Same bounds extended by `cells` extra nodes on every side.
    pub fn padded(&self, cells: usize) -> Grid2D {
        let (hx, hy) = (self.hx(), self.hy());
        Grid2D {
            x0: self.x0 - hx * cells as f64,
            y0: self.y0 - hy * cells as f64,
            x1: self.x1 + hx * cells as f64,
            y1: self.y1 + hy * cells as f64,
            nx: self.nx + 2 * cells,
            ny: self.ny + 2 * cells,
        }
    }
}

/// Scalar samples over a [`Grid2D`].
#[derive(Clone, Debug)]
pub struct ScalarGrid {
    pub grid: Grid2D,
    pub values: Vec<f64>,
}

impl ScalarGrid {
    pub fn zeros(grid: Grid2D) -> Self {
        ScalarGrid {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    pub fn from_fn(grid: Grid2D, f: impl Fn(f64, f64) -> f64 + Sync) -> Self {
        use rayon::prelude::*;
        let values: Vec<f64> = (0..grid.len())
            .into_par_iter()
            .map(|k| {
                let i = k % grid.nx;
                let j = k / grid.nx;
                f(grid.x(i), grid.y(j))
            })
            .collect();
        ScalarGrid { grid, values }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.idx(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let k = self.grid.idx(i, j);
        self.values[k] = v;
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Discrete L2 norm `sqrt(sum v^2 hx hy)`.
    pub fn l2(&self) -> f64 {
        let cell = self.grid.hx() * self.grid.hy();
        (self.values.iter().map(|v| v * v).sum::<f64>() * cell).sqrt()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().fold(f64::INFINITY, |m, v| m.min(*v))
    }

    pub fn max(&self) -> f64 {
        self.values.iter().fold(f64::NEG_INFINITY, |m, v| m.max(*v))
    }

    /// Map values pointwise.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> ScalarGrid {
        ScalarGrid {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// CSV export: header `x,y,value`, rows ordered y-outer then x, full
    /// double precision (17 significant digits).
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = String::with_capacity(self.values.len() * 64);
        out.push_str("x,y,value\n");
        for j in 0..self.grid.ny {
            for i in 0..self.grid.nx {
                out.push_str(&format!(
                    "{:.16e},{:.16e},{:.16e}\n",
                    self.grid.x(i),
                    self.grid.y(j),
                    self.get(i, j)
                ));
            }
        }
        write_atomic(path, out.as_bytes())
    }

    /// Gnuplot-ready whitespace matrix: one block per y scanline, blank line
    /// between blocks.
    pub fn write_gnuplot(&self, path: &Path) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::Invalid("refusing to export an empty grid".into()));
        }
        let mut out = String::with_capacity(self.values.len() * 60);
        for j in 0..self.grid.ny {
            for i in 0..self.grid.nx {
                out.push_str(&format!(
                    "{:.16e} {:.16e} {:.16e}\n",
                    self.grid.x(i),
                    self.grid.y(j),
                    self.get(i, j)
                ));
            }
            if j + 1 < self.grid.ny {
                out.push('\n');
            }
        }
        write_atomic(path, out.as_bytes())
    }
}

/// Four scalar channels over one grid, exported as a 2x2 matrix field.
#[derive(Clone, Debug)]
pub struct MatrixGrid {
    pub grid: Grid2D,
    pub v11: Vec<f64>,
    pub v12: Vec<f64>,
    pub v21: Vec<f64>,
    pub v22: Vec<f64>,
}

impl MatrixGrid {
    /// CSV export with header `x,y,v11,v12,v21,v22`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = String::with_capacity(self.grid.len() * 120);
        out.push_str("x,y,v11,v12,v21,v22\n");
        for j in 0..self.grid.ny {
            for i in 0..self.grid.nx {
                let k = self.grid.idx(i, j);
                out.push_str(&format!(
                    "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
                    self.grid.x(i),
                    self.grid.y(j),
                    self.v11[k],
                    self.v12[k],
                    self.v21[k],
                    self.v22[k]
                ));
            }
        }
        write_atomic(path, out.as_bytes())
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(bytes)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spacing_and_nodes() {
        let g = Grid2D::new(-1.0, -1.0, 1.0, 1.0, 5, 9).unwrap();
        assert!((g.hx() - 0.5).abs() < 1e-15);
        assert!((g.hy() - 0.25).abs() < 1e-15);
        assert_eq!(g.x(4), 1.0);
        assert_eq!(g.y(0), -1.0);
    }

    #[test]
    fn rejects_degenerate_grids() {
        assert!(Grid2D::new(0.0, 0.0, 1.0, 1.0, 2, 5).is_err());
        assert!(Grid2D::new(1.0, 0.0, 0.0, 1.0, 5, 5).is_err());
    }

    #[test]
    fn csv_layout_is_y_outer() {
        let g = Grid2D::new(0.0, 0.0, 1.0, 1.0, 3, 3).unwrap();
        let s = ScalarGrid::from_fn(g, |x, y| x + 10.0 * y);
        let dir = std::env::temp_dir().join("strainreal_grid_test");
        std::fs::create_dir_all(&dir).unwrap();
        let p = dir.join("t.csv");
        s.write_csv(&p).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "x,y,value");
        let second: Vec<&str> = lines.next().unwrap().split(',').collect();
        // first row: x=0, y=0
        assert!(second[0].starts_with("0.0"));
    }
}
