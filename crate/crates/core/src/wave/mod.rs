//! Quasi-global realizability for periodic perturbations of an affine
//! field: the realizability condition is a semilinear wave equation in
//! `u = log mu`; a global characteristic diffeomorphism carries it to
//! canonical form, the periodic coefficients are truncated to compact
//! support, the canonical equation is integrated by leapfrog with blow-up
//! detection, and `mu = e^u` is reconstructed on a disk.

mod canonical;
mod coefficients;
mod diffeo;
mod leapfrog;
mod truncate;

pub use canonical::{
    assemble_canonical, forcing_by_composition, truncate_fields, CanonicalSystem,
    TruncatedFields, WaveLattice,
};
pub use coefficients::{affine_stream, wave_coefficients, WaveCoefficients};
pub use diffeo::{build_diffeomorphism, CharacteristicDiffeo, DiffeoExtent, InverseDerivs};
pub use leapfrog::{
    amplitude_sweep, solve_wave, sweep_system, BlowUp, SweepConfig, SweepRow, WaveSolution,
};
pub use truncate::{
    periodic_truncate, smallest_n_for_disk, verify_truncation_on_disk, Mode, Mollifier,
    PeriodicTruncation,
};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::ScalarFieldExpr;
use crate::field::Matrix2;
use crate::grid::{Grid2D, ScalarGrid};
use crate::stokes::{self, ViscositySpec};

#[derive(Clone, Debug, Serialize)]
pub struct GlobalReport {
    #[serde(rename = "n_R")]
    pub n_r: i64,
    pub blowup: bool,
    pub lifespan: Option<f64>,
    pub max_residual: f64,
    pub jacobian_min: f64,
    pub rotated: bool,
    pub radius: f64,
    pub dz: f64,
    pub truncation_tail: f64,
    pub support_radius: f64,
}

pub struct GlobalRealization {
    pub radius: f64,
    pub grid: Grid2D,
    /// `u = log mu` on the grid (original coordinates)
    pub u: ScalarGrid,
    pub mu: ScalarGrid,
    pub report: GlobalReport,
}

pub enum GlobalOutcome {
    Realized(Box<GlobalRealization>),
    /// blow-up before the needed horizon: realizability is not established
    /// (this is not a proof of non-realizability)
    BlowUp {
        lifespan: f64,
        reason: String,
        report: GlobalReport,
    },
}

#[derive(Clone, Debug)]
pub struct GlobalConfig {
    pub radius: f64,
    /// scales the periodic part of the stream around its affine part
    pub epsilon_scale: f64,
    /// lattice step of the wave solve and the output grid
    pub dz: f64,
    /// Fourier cutoff per axis
    pub cutoff: usize,
}

impl Default for GlobalConfig {
    fn default() -> Self {
        GlobalConfig {
            radius: 1.0,
            epsilon_scale: 1.0,
            dz: 1.0 / 64.0,
            cutoff: 32,
        }
    }
}

/// End-to-end pipeline: from a stream function with declared average
/// gradient to a viscosity grid on the disk `D(0, radius)`.
pub fn realize_global(
    stream: &ScalarFieldExpr,
    m: Matrix2,
    cfg: &GlobalConfig,
) -> Result<GlobalOutcome> {
    // scale the periodic part around the affine stream
    let u_affine = affine_stream(&m);
    let scaled = if (cfg.epsilon_scale - 1.0).abs() > 1e-15 {
        u_affine
            .add(&stream.sub(&u_affine).scale(cfg.epsilon_scale))
            .simplify()
    } else {
        stream.clone()
    };

    let coeffs = wave_coefficients(&scaled, m)?;
    // working radius: the shear contracts lengths by sqrt(2)
    let r_work = if coeffs.rotated {
        cfg.radius / std::f64::consts::SQRT_2
    } else {
        cfg.radius
    };

    let fields = truncate_fields(&coeffs, cfg.cutoff)?;
    let tail = fields
        .a
        .tail
        .max(fields.b.tail)
        .max(fields.lap_ux.tail)
        .max(fields.lap_uy.tail)
        .max(fields.lap_curl.tail);

    // sampled speed bound fixes the extents of everything downstream
    let mut c_s = 0.0f64;
    for i in 0..33 {
        for j in 0..33 {
            let x = -2.0 * r_work + 4.0 * r_work * i as f64 / 32.0;
            let y = -2.0 * r_work + 4.0 * r_work * j as f64 / 32.0;
            c_s = c_s
                .max(coeffs.alpha.eval(x, y).abs())
                .max(coeffs.beta.eval(x, y).abs());
        }
    }
    c_s *= 1.1;

    let t_need = c_s * r_work + 0.25;
    let z_need = r_work * (1.0 + c_s) + t_need / 0.9 + 0.5;
    let extent = DiffeoExtent {
        x_max: t_need + 0.25,
        anchor_max: z_need + t_need + 0.5,
        step: cfg.dz,
    };

    // Truncation level: at least the disk requirement, enlarged so the
    // truncated fields equal the periodic ones across the whole solved
    // lattice. Runs at different radii then integrate bitwise-identical
    // equations inside the shared causal region, which is what makes the
    // reconstructed viscosities agree on the smaller disk.
    let level = smallest_n_for_disk(r_work)
        .max(smallest_n_for_disk(z_need.max(extent.x_max) + 0.25));

    // sampled verification of the truncation level on the working disk
    let lap_curl_expr = crate::field::laplacian(&coeffs.velocity.curl());
    let trunc_err =
        verify_truncation_on_disk(&fields.lap_curl, &lap_curl_expr, level, r_work, 33);
    if trunc_err > 1e-8 {
        return Err(Error::Numerical(format!(
            "truncation level {level} fails on the working disk: {trunc_err:.3e}"
        )));
    }
    let diffeo = build_diffeomorphism(&coeffs, extent)?;
    let lattice = WaveLattice::new(cfg.dz, z_need, t_need);
    let sys = assemble_canonical(&coeffs, &fields, level, &diffeo, lattice)?;
    let sol = solve_wave(&sys);

    if let Some(b) = &sol.blowup {
        let report = GlobalReport {
            n_r: level,
            blowup: true,
            lifespan: Some(b.time.abs()),
            max_residual: f64::NAN,
            jacobian_min: f64::NAN,
            rotated: coeffs.rotated,
            radius: cfg.radius,
            dz: cfg.dz,
            truncation_tail: tail,
            support_radius: sys.support_radius,
        };
        return Ok(GlobalOutcome::BlowUp {
            lifespan: b.time.abs(),
            reason: b.reason.clone(),
            report,
        });
    }

    let real = reconstruct_viscosity(&coeffs, &diffeo, &sol, cfg, level, tail, &sys)?;
    Ok(GlobalOutcome::Realized(Box::new(real)))
}

/// Pull the wave solution back to the plane: `u(X) = w(t(X'), z(X'))`
/// (with `X' = P^{-1} X` when the shear was applied), `mu = e^u`, plus the
/// Stokes residual report on the disk.
pub fn reconstruct_viscosity(
    coeffs: &WaveCoefficients,
    diffeo: &CharacteristicDiffeo,
    sol: &WaveSolution,
    cfg: &GlobalConfig,
    level: i64,
    tail: f64,
    sys: &CanonicalSystem,
) -> Result<GlobalRealization> {
    let r = cfg.radius;
    let n = ((2.0 * r / cfg.dz).round() as usize) + 1;
    let n = if n % 2 == 0 { n + 1 } else { n };
    let grid = Grid2D::square(r, n)?;

    let rotated = coeffs.rotated;
    let to_working = |x: f64, y: f64| -> (f64, f64) {
        if rotated {
            (0.5 * (x + y), 0.5 * (x - y))
        } else {
            (x, y)
        }
    };

    let mut u_vals = vec![0.0f64; grid.len()];
    let mut jac_min = f64::INFINITY;
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let (x0, y0) = (grid.x(i), grid.y(j));
            let (x, y) = to_working(x0, y0);
            let (xi, eta) = diffeo.forward(x, y)?;
            let t = (xi - eta) / 2.0;
            let z = (xi + eta) / 2.0;
            u_vals[grid.idx(i, j)] = sol.interp(t, z);
            if x0 * x0 + y0 * y0 <= r * r {
                jac_min = jac_min.min(diffeo.jacobian_at(x, y, xi, eta).abs());
            }
        }
    }
    let u = ScalarGrid {
        grid,
        values: u_vals,
    };
    let mu = u.map(f64::exp);

    // Stokes residual in the original coordinates, masked to the disk
    // interior away from the square-boundary stencils
    let velocity_original = if rotated {
        // undo the shear on the working stream:
        // u(x, y) = -2 u'((x+y)/2, (x-y)/2)
        let xs = ScalarFieldExpr::x().add(&ScalarFieldExpr::y()).scale(0.5);
        let ys = ScalarFieldExpr::x().sub(&ScalarFieldExpr::y()).scale(0.5);
        let orig_stream = coeffs.stream.subst_xy(&xs, &ys).scale(-2.0).simplify();
        crate::field::VelocityField::from_stream(&orig_stream)
    } else {
        coeffs.velocity.clone()
    };
    let res =
        stokes::realization_residual(&ViscositySpec::Grid(mu.clone()), &velocity_original, &grid)?;
    let mut max_res = 0.0f64;
    let g = &res.fd_grid;
    for j in 0..g.grid.ny {
        for i in 0..g.grid.nx {
            let (x, y) = (g.grid.x(i), g.grid.y(j));
            let margin = 3.5 * cfg.dz;
            if x * x + y * y <= (r - margin) * (r - margin) {
                max_res = max_res.max(g.get(i, j).abs());
            }
        }
    }

    let report = GlobalReport {
        n_r: level,
        blowup: false,
        lifespan: None,
        max_residual: max_res,
        jacobian_min: jac_min,
        rotated,
        radius: r,
        dz: cfg.dz,
        truncation_tail: tail,
        support_radius: sys.support_radius,
    };
    Ok(GlobalRealization {
        radius: r,
        grid,
        u,
        mu,
        report,
    })
}

/// Periodized average
/// `mu_k(X) = (2k+1)^{-2} sum_{|p|,|q| <= k} mu0(X + (p, q))` sampled on a
/// grid, with the growth diagnostic `sup mu_k` over the cell.
pub fn periodized_average(
    mu0: &dyn Fn(f64, f64) -> f64,
    k: i64,
    grid: &Grid2D,
) -> (ScalarGrid, f64) {
    let norm = ((2 * k + 1) * (2 * k + 1)) as f64;
    let mut vals = vec![0.0f64; grid.len()];
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let (x, y) = (grid.x(i), grid.y(j));
            let mut acc = 0.0;
            for p in -k..=k {
                for q in -k..=k {
                    acc += mu0(x + p as f64, y + q as f64);
                }
            }
            vals[grid.idx(i, j)] = acc / norm;
        }
    }
    let g = ScalarGrid {
        grid: *grid,
        values: vals,
    };
    let sup = g.max();
    (g, sup)
}
