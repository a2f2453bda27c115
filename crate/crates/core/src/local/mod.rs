//! Local isotropic realizability: from a stream function and a point where
//! the strain does not vanish, construct a positive viscosity and a
//! pressure on a square neighborhood by solving two hyperbolic Cauchy
//! problems along characteristics (one per half-plane, the left one by
//! reflection).

mod coefficients;
mod hyperbolic;
mod orientation;

pub use coefficients::{local_coefficients, AlphaField, BlendedCoef, LocalCoefficients};
pub use hyperbolic::{
    solve_hyperbolic_cauchy, system_residual, HyperbolicInputs, HyperbolicSolution,
    PicardDiagnostics,
};
pub use orientation::{normalize_orientation, OrientationRecord};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::{ScalarFieldExpr, Var};
use crate::field::VelocityField;
use crate::grid::{Grid2D, ScalarGrid};
use crate::stokes::{self, ViscositySpec};
use crate::{fd, interp};

#[derive(Clone, Debug)]
pub struct LocalRealizeConfig {
    pub center: (f64, f64),
    pub tau_max: Option<f64>,
    /// grid points per side of the output square when tau equals the cap
    /// (odd, >= 5)
    pub nx: usize,
    /// initial disk radius for the coefficient construction
    pub omega_radius: f64,
}

impl Default for LocalRealizeConfig {
    fn default() -> Self {
        LocalRealizeConfig {
            center: (0.0, 0.0),
            tau_max: None,
            nx: 129,
            omega_radius: 1.0,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LocalReport {
    pub tau: f64,
    /// interior max of |curl Div(mu e(U))| (3-cell crop)
    pub max_residual: f64,
    pub orthogonality_residual: f64,
    pub interface_jump: f64,
    pub picard_iters: PicardIters,
    pub wave_residual_plus: f64,
    pub wave_residual_minus: f64,
    pub mu_min: f64,
    pub mu_max: f64,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct PicardIters {
    pub plus: usize,
    pub minus: usize,
}

#[derive(Debug)]
pub struct LocalRealization {
    pub tau: f64,
    pub grid: Grid2D,
    pub mu: ScalarGrid,
    pub p: ScalarGrid,
    pub plus: HyperbolicSolution,
    /// the reflected problem's solution (tilde variables, x >= 0)
    pub minus: HyperbolicSolution,
    pub coeffs: LocalCoefficients,
    pub report: LocalReport,
    /// velocity of the oriented stream, the field the realization verifies
    /// against
    pub velocity: VelocityField,
}

pub fn assemble_local_realization(
    u_raw: &ScalarFieldExpr,
    cfg: &LocalRealizeConfig,
) -> Result<LocalRealization> {
    if cfg.nx < 5 || cfg.nx % 2 == 0 {
        return Err(Error::Invalid(format!(
            "nx must be odd and at least 5, got {}",
            cfg.nx
        )));
    }
    let (u, record) = normalize_orientation(u_raw, cfg.center)?;

    // disk radius: retry smaller disks while the denominator changes sign
    let mut coeffs = None;
    let mut last_err = None;
    let mut rho = cfg.omega_radius;
    for _ in 0..4 {
        match local_coefficients(&u, rho, record) {
            Ok(c) => {
                coeffs = Some(c);
                break;
            }
            Err(e) => {
                last_err = Some(e);
                rho *= 0.5;
            }
        }
    }
    let coeffs = match coeffs {
        Some(c) => c,
        None => return Err(last_err.unwrap()),
    };

    // largest dyadic tau under the dependence-domain and disk constraints
    let mut bound = (1.0 / (2.0 * coeffs.c)).min(coeffs.rho / std::f64::consts::SQRT_2);
    if let Some(tm) = cfg.tau_max {
        bound = bound.min(tm);
    }
    if !(bound > 0.0) {
        return Err(Error::Invalid("tau-max must be positive".into()));
    }
    let k = (-bound.log2()).ceil().max(1.0) as i32;
    let tau_cap = 2.0f64.powi(-k);
    let h = 2.0 * tau_cap / (cfg.nx - 1) as f64;

    // the two Cauchy problems: data v0 = 0, w0 = y (w0 = -y reflected)
    let mk_inputs = |reflected: bool| -> HyperbolicInputs {
        let blend = if reflected {
            coeffs.blended_reflected()
        } else {
            coeffs.blended()
        };
        let gamma_src = blend.clone();
        HyperbolicInputs {
            alpha: Box::new(blend.alpha_field()),
            beta: Box::new(blend.beta_field()),
            gamma: Box::new(move |x, y| gamma_src.gamma(x, y)),
            c: coeffs.c,
            v0: ScalarFieldExpr::zero(),
            w0: if reflected {
                ScalarFieldExpr::y().neg()
            } else {
                ScalarFieldExpr::y()
            },
        }
    };
    // One two-sided solve assembles mu and p: the reflected data is chosen
    // so that v-(x, y) = v~(-x, y) continues v+ smoothly across x = 0 (same
    // wave equation, same Cauchy data), and a single discretization keeps
    // the h^2 error field smooth there. Two separately discretized halves
    // would meet with mismatched error slopes, and the nested curl-div
    // residual amplifies that kink to O(1).
    let combined = solve_hyperbolic_cauchy(mk_inputs(false), -tau_cap, tau_cap, h)?;
    // the reflected problem, solved on its own for the split-construction
    // diagnostics (interface jumps of the two half-solutions)
    let minus = solve_hyperbolic_cauchy(mk_inputs(true), 0.0, tau_cap, h)?;
    let plus = combined.right_half();

    let (v_joined, _) = combined.rect_grids();
    let (vp, _) = plus.rect_grids();
    let (vm, _) = minus.rect_grids();
    let v_xy = fd::d2dxdy(&v_joined);
    let v_yy = fd::d2dy2(&v_joined);

    // separate one-sided derivatives at the interface for the jump report
    let vp_xy = fd::d2dxdy(&vp);
    let vm_xy = fd::d2dxdy(&vm);
    let vp_yy = fd::d2dy2(&vp);
    let vm_yy = fd::d2dy2(&vm);

    let rect = vp.grid;
    let j_zero = ((0.0 - rect.y0) / rect.hy()).round() as usize;
    let i_cap = (tau_cap / h).round() as usize;

    // dyadic tau search: cross-derivative margin 0.5 on both half-squares
    // (the analytic interface value is 1)
    let mut tau = tau_cap;
    let mut i_tau;
    loop {
        i_tau = (tau / h).round() as usize;
        if i_tau < 2 {
            return Err(Error::Numerical(
                "no admissible tau: the cross-derivative positivity margin \
                 failed down to the grid scale"
                    .into(),
            ));
        }
        let mut ok = true;
        'scan: for io in (i_cap - i_tau)..=(i_cap + i_tau) {
            for j in (j_zero - i_tau)..=(j_zero + i_tau) {
                if v_xy.get(io, j) < 0.5 {
                    ok = false;
                    break 'scan;
                }
            }
        }
        if ok {
            break;
        }
        tau *= 0.5;
    }

    // assemble mu and p on [-tau, tau]^2
    let n_out = 2 * i_tau + 1;
    let out_grid = Grid2D {
        x0: -tau,
        y0: -tau,
        x1: tau,
        y1: tau,
        nx: n_out,
        ny: n_out,
    };
    let uxy = u.d(Var::X).d(Var::Y);
    let mut mu = ScalarGrid::zeros(out_grid);
    let mut p = ScalarGrid::zeros(out_grid);
    for jo in 0..n_out {
        let jr = j_zero - i_tau + jo;
        for io in 0..n_out {
            let x = out_grid.x(io);
            let y = out_grid.y(jo);
            let denom = coeffs.denom.eval(x, y);
            let ic = i_cap - i_tau + io;
            let m = 2.0 * v_xy.get(ic, jr) / denom;
            mu.set(io, jo, m);
            p.set(io, jo, -m * uxy.eval(x, y) + v_yy.get(ic, jr));
        }
    }

    // interface jump of mu, p and the stress entries across x = 0, from the
    // two half-solutions' own one-sided derivatives
    let velocity = VelocityField::from_stream(&u);
    let strain = velocity.strain();
    let mut interface_jump = 0.0f64;
    for jo in 0..n_out {
        let jr = j_zero - i_tau + jo;
        let y = out_grid.y(jo);
        let denom = coeffs.denom.eval(0.0, y);
        let mu_p = 2.0 * vp_xy.get(0, jr) / denom;
        let mu_m = 2.0 * (-vm_xy.get(0, jr)) / denom;
        let p_p = -mu_p * uxy.eval(0.0, y) + vp_yy.get(0, jr);
        let p_m = -mu_m * uxy.eval(0.0, y) + vm_yy.get(0, jr);
        let e = strain.eval(0.0, y);
        let dm = (mu_p - mu_m).abs();
        interface_jump = interface_jump
            .max(dm)
            .max((p_p - p_m).abs())
            .max(dm * e.m11.abs())
            .max(dm * e.m12.abs());
    }

    let verify = verify_local_parts(&coeffs, &vp, &vm, &mu, &out_grid, i_tau, j_zero, &velocity)?;

    let report = LocalReport {
        tau,
        max_residual: verify.stokes_interior_max,
        orthogonality_residual: verify.orthogonality_max,
        interface_jump,
        picard_iters: PicardIters {
            plus: plus.diagnostics.iterations,
            minus: minus.diagnostics.iterations,
        },
        wave_residual_plus: verify.wave_plus_max,
        wave_residual_minus: verify.wave_minus_max,
        mu_min: mu.min(),
        mu_max: mu.max(),
    };

    Ok(LocalRealization {
        tau,
        grid: out_grid,
        mu,
        p,
        plus,
        minus,
        coeffs,
        report,
        velocity,
    })
}

/// Residual bundle from `verify_local`.
#[derive(Clone, Debug, Serialize)]
pub struct VerifyLocal {
    /// interior max of the nested-FD Stokes residual
    pub stokes_interior_max: f64,
    /// full-grid max of the same residual
    pub stokes_full_max: f64,
    pub orthogonality_max: f64,
    pub wave_plus_max: f64,
    pub wave_minus_max: f64,
}

/// Verification report of an assembled realization: orthogonality
/// `e(U):e(V+-)`, the Stokes residual of the constructed viscosity, and the
/// second-order wave-equation residuals of `v+-`.
pub fn verify_local(real: &LocalRealization) -> Result<VerifyLocal> {
    let (vp, _) = real.plus.rect_grids();
    let (vm, _) = real.minus.rect_grids();
    let rect = vp.grid;
    let j_zero = ((0.0 - rect.y0) / rect.hy()).round() as usize;
    let i_tau = (real.tau / real.plus.h).round() as usize;
    verify_local_parts(
        &real.coeffs,
        &vp,
        &vm,
        &real.mu,
        &real.grid,
        i_tau,
        j_zero,
        &real.velocity,
    )
}

#[allow(clippy::too_many_arguments)]
fn verify_local_parts(
    coeffs: &LocalCoefficients,
    vp: &ScalarGrid,
    vm: &ScalarGrid,
    mu: &ScalarGrid,
    out_grid: &Grid2D,
    i_tau: usize,
    j_zero: usize,
    velocity: &VelocityField,
) -> Result<VerifyLocal> {
    let vp_xx = fd::d2dx2(vp);
    let vm_xx = fd::d2dx2(vm);
    let vp_yy = fd::d2dy2(vp);
    let vm_yy = fd::d2dy2(vm);
    let vp_xy = fd::d2dxdy(vp);
    let vm_xy = fd::d2dxdy(vm);
    let rect = vp.grid;

    // orthogonality e(U):e(V) = 2 (e11 e11V + e12 e12V) and the
    // second-order wave residuals on both half-squares
    let strain = velocity.strain();
    let blend_m = coeffs.blended_reflected();
    let mut orth = 0.0f64;
    let mut wave_p = 0.0f64;
    let mut wave_m = 0.0f64;
    for i in 0..=i_tau {
        let x = rect.x(i);
        for dj in 0..=(2 * i_tau) {
            let j = j_zero - i_tau + dj;
            let y = rect.y(j);
            let e = strain.eval(x, y);
            // plus side at (x, y)
            let e11v = -vp_xy.get(i, j);
            let e12v = 0.5 * (vp_xx.get(i, j) - vp_yy.get(i, j));
            orth = orth.max(2.0 * (e.m11 * e11v + e.m12 * e12v).abs());
            let a = coeffs.a.eval(x, y);
            wave_p =
                wave_p.max((vp_xx.get(i, j) - vp_yy.get(i, j) + 2.0 * a * vp_xy.get(i, j)).abs());
            // minus side at (-x, y): tilde problem evaluated at (x, y)
            let em = strain.eval(-x, y);
            let e11vm = vm_xy.get(i, j);
            let e12vm = 0.5 * (vm_xx.get(i, j) - vm_yy.get(i, j));
            orth = orth.max(2.0 * (em.m11 * e11vm + em.m12 * e12vm).abs());
            let at = blend_m.value(x, y);
            wave_m =
                wave_m.max((vm_xx.get(i, j) - vm_yy.get(i, j) + 2.0 * at * vm_xy.get(i, j)).abs());
        }
    }

    // Stokes residual of the assembled grid viscosity
    let stokes =
        stokes::realization_residual(&ViscositySpec::Grid(mu.clone()), velocity, out_grid)?;
    let full = stokes.fd.max_abs;
    let interior = if out_grid.nx > 8 {
        let g = &stokes.fd_grid;
        let mut m = 0.0f64;
        for j in 3..g.grid.ny - 3 {
            for i in 3..g.grid.nx - 3 {
                m = m.max(g.get(i, j).abs());
            }
        }
        m
    } else {
        full
    };

    Ok(VerifyLocal {
        stokes_interior_max: interior,
        stokes_full_max: full,
        orthogonality_max: orth,
        wave_plus_max: wave_p,
        wave_minus_max: wave_m,
    })
}

/// Characteristic traced with a symbolic speed (the spec-level operation;
/// the solvers use the lattice families in [`crate::charfamily`]).
pub fn trace_characteristic(
    speed: &ScalarFieldExpr,
    anchor: (f64, f64),
    t_range: (f64, f64),
    step: f64,
) -> crate::charfamily::CharacteristicPath {
    let field = crate::charfamily::SmoothField::new(speed.clone());
    crate::charfamily::trace_characteristic(&field, anchor, t_range, step, 4.0)
}

/// Interpolated sample of a rectangular grid at an off-lattice point.
pub fn sample_grid(g: &ScalarGrid, x: f64, y: f64) -> f64 {
    let nyv = g.grid.ny;
    let col_at = |i: usize| -> Vec<f64> { (0..nyv).map(|j| g.get(i, j)).collect() };
    // interpolate in y along the two bracketing columns, then linearly in x
    let fi = (x - g.grid.x0) / g.grid.hx();
    let i0 = (fi.floor().max(0.0) as usize).min(g.grid.nx - 2);
    let t = fi - i0 as f64;
    let c0 = interp::lagrange6(&col_at(i0), g.grid.y0, g.grid.hy(), y);
    let c1 = interp::lagrange6(&col_at(i0 + 1), g.grid.y0, g.grid.hy(), y);
    c0 * (1.0 - t) + c1 * t
}
