//! Assembly of the canonical semilinear wave equation
//! `Box w = B grad w . grad w + V . grad w + h` on the `(t, z)` lattice.
//!
//! Every node is pulled back through the characteristic diffeomorphism;
//! the multiplying factor `a (a^2 + b^2)^{-1} dR/dxi dS/deta` makes the
//! principal coefficient exactly one, and the truncated periodic fields
//! give the coefficients compact support.

use rayon::prelude::*;

use crate::error::Result;
use crate::expr::Var;
use crate::field::laplacian;

use super::coefficients::WaveCoefficients;
use super::diffeo::CharacteristicDiffeo;
use super::truncate::{periodic_truncate, PeriodicTruncation};

/// Leapfrog lattice: `z_j = (j - jz) dz` for `j = 0..=2 jz`, and
/// `t_m = (m - mt) dt` for `m = 0..=2 mt`, with `dt = 0.9 dz`.
#[derive(Clone, Copy, Debug)]
pub struct WaveLattice {
    pub dz: f64,
    pub dt: f64,
    pub jz: usize,
    pub mt: usize,
}

impl WaveLattice {
    pub fn new(dz: f64, z_max: f64, t_max: f64) -> Self {
        let dt = 0.9 * dz;
        WaveLattice {
            dz,
            dt,
            jz: (z_max / dz).ceil() as usize,
            mt: (t_max / dt).ceil() as usize,
        }
    }

    pub fn n_z(&self) -> usize {
        2 * self.jz + 1
    }

    pub fn n_t(&self) -> usize {
        2 * self.mt + 1
    }

    pub fn z(&self, j: usize) -> f64 {
        (j as i64 - self.jz as i64) as f64 * self.dz
    }

    pub fn t(&self, m: usize) -> f64 {
        (m as i64 - self.mt as i64) as f64 * self.dt
    }

    pub fn idx(&self, m: usize, j: usize) -> usize {
        m * self.n_z() + j
    }
}

/// Coefficient grids of the canonical equation over the lattice.
pub struct CanonicalSystem {
    pub lattice: WaveLattice,
    pub b11: Vec<f64>,
    pub b12: Vec<f64>,
    pub b22: Vec<f64>,
    pub v1: Vec<f64>,
    pub v2: Vec<f64>,
    pub h: Vec<f64>,
    /// truncation level used
    pub level: i64,
    /// radius in max(|t|, |z|) beyond which all coefficients vanish
    pub support_radius: f64,
    /// largest coefficient magnitude found beyond the reported radius
    pub beyond_support: f64,
}

/// The truncated periodic fields entering the right-hand side.
pub struct TruncatedFields {
    pub a: PeriodicTruncation,
    pub b: PeriodicTruncation,
    pub lap_ux: PeriodicTruncation,
    pub lap_uy: PeriodicTruncation,
    pub lap_curl: PeriodicTruncation,
}

pub fn truncate_fields(coeffs: &WaveCoefficients, cutoff: usize) -> Result<TruncatedFields> {
    let (lux, luy) = coeffs.velocity.laplacian();
    let lap_curl = laplacian(&coeffs.velocity.curl());
    Ok(TruncatedFields {
        a: periodic_truncate(&coeffs.a.clone().with_unit_periodicity(true), cutoff)?,
        b: periodic_truncate(&coeffs.b.clone().with_unit_periodicity(true), cutoff)?,
        lap_ux: periodic_truncate(&lux.with_unit_periodicity(true), cutoff)?,
        lap_uy: periodic_truncate(&luy.with_unit_periodicity(true), cutoff)?,
        lap_curl: periodic_truncate(&lap_curl.with_unit_periodicity(true), cutoff)?,
    })
}

pub fn assemble_canonical(
    coeffs: &WaveCoefficients,
    fields: &TruncatedFields,
    level: i64,
    diffeo: &CharacteristicDiffeo,
    lattice: WaveLattice,
) -> Result<CanonicalSystem> {
    let n = lattice.n_t() * lattice.n_z();
    let a_x = coeffs.a.d(Var::X);
    let _ = a_x; // symbolic partials live in the diffeo; nothing extra here

    let rows: Vec<Result<[f64; 6]>> = (0..n)
        .into_par_iter()
        .map(|k| {
            let m = k / lattice.n_z();
            let j = k % lattice.n_z();
            let t = lattice.t(m);
            let z = lattice.z(j);
            node_coefficients(coeffs, fields, level, diffeo, t, z)
        })
        .collect();

    let mut b11 = vec![0.0; n];
    let mut b12 = vec![0.0; n];
    let mut b22 = vec![0.0; n];
    let mut v1 = vec![0.0; n];
    let mut v2 = vec![0.0; n];
    let mut h = vec![0.0; n];
    for (k, r) in rows.into_iter().enumerate() {
        let vals = r?;
        b11[k] = vals[0];
        b12[k] = vals[1];
        b22[k] = vals[2];
        v1[k] = vals[3];
        v2[k] = vals[4];
        h[k] = vals[5];
    }

    // compact support: find the smallest max(|t|,|z|) radius containing all
    // coefficients above 1e-14
    let mut radius = 0.0f64;
    for m in 0..lattice.n_t() {
        for j in 0..lattice.n_z() {
            let k = lattice.idx(m, j);
            let mag = b11[k]
                .abs()
                .max(b12[k].abs())
                .max(b22[k].abs())
                .max(v1[k].abs())
                .max(v2[k].abs())
                .max(h[k].abs());
            if mag > 1e-14 {
                radius = radius.max(lattice.t(m).abs().max(lattice.z(j).abs()));
            }
        }
    }
    let mut beyond = 0.0f64;
    for m in 0..lattice.n_t() {
        for j in 0..lattice.n_z() {
            let k = lattice.idx(m, j);
            if lattice.t(m).abs().max(lattice.z(j).abs()) > radius + 1e-12 {
                let mag = b11[k]
                    .abs()
                    .max(b12[k].abs())
                    .max(b22[k].abs())
                    .max(v1[k].abs())
                    .max(v2[k].abs())
                    .max(h[k].abs());
                beyond = beyond.max(mag);
            }
        }
    }

    Ok(CanonicalSystem {
        lattice,
        b11,
        b12,
        b22,
        v1,
        v2,
        h,
        level,
        support_radius: radius,
        beyond_support: beyond,
    })
}

/// Coefficients `(B11, B12, B22, V1, V2, h)` at one `(t, z)` node.
fn node_coefficients(
    coeffs: &WaveCoefficients,
    fields: &TruncatedFields,
    level: i64,
    diffeo: &CharacteristicDiffeo,
    t: f64,
    z: f64,
) -> Result<[f64; 6]> {
    let (x, y) = diffeo.from_tz(t, z)?;
    let xi0 = z + t;
    let eta0 = z - t;

    let a = coeffs.a.eval(x, y);
    let b = coeffs.b.eval(x, y);
    let dxi = diffeo.xi_derivs(x, y, xi0);
    let deta = diffeo.eta_derivs(x, y, eta0);

    // the factor cancelling the principal coefficient (a^2 + b^2)/a
    // dy(xi) dy(eta)
    let factor = a / (a * a + b * b) * dxi.danchor * deta.danchor;

    // truncated fields at the pulled-back point
    let ta = fields.a.truncated(level, x, y);
    let tb = fields.b.truncated(level, x, y);
    let tlux = fields.lap_ux.truncated(level, x, y);
    let tluy = fields.lap_uy.truncated(level, x, y);
    let tlc = fields.lap_curl.truncated(level, x, y);

    // gradients of t and z as functions of (x, y)
    let gt = (0.5 * (dxi.dx - deta.dx), 0.5 * (dxi.dy - deta.dy));
    let gz = (0.5 * (dxi.dx + deta.dx), 0.5 * (dxi.dy + deta.dy));

    // [A]_n quadratic forms: A v . v with A = [[a, b], [b, -a]]
    let aq = |u: (f64, f64), v: (f64, f64)| -> f64 {
        ta * (u.0 * v.0 - u.1 * v.1) + tb * (u.0 * v.1 + u.1 * v.0)
    };
    let b11 = -factor * aq(gt, gt);
    let b12 = -factor * aq(gt, gz);
    let b22 = -factor * aq(gz, gz);

    // [A]_n : (Hess xi -/+ Hess eta)
    let a_colon = |h11: f64, h12: f64, h22: f64| ta * (h11 - h22) + 2.0 * tb * h12;
    let hm = a_colon(dxi.dxx - deta.dxx, dxi.dxy - deta.dxy, dxi.dyy - deta.dyy);
    let hp = a_colon(dxi.dxx + deta.dxx, dxi.dxy + deta.dxy, dxi.dyy + deta.dyy);

    // R_perp [Lap U]_n = (-[Lap Uy]_n, [Lap Ux]_n)
    let rl = (-tluy, tlux);
    let v1 = -factor * 0.5 * hm + factor * (rl.0 * gt.0 + rl.1 * gt.1);
    let v2 = -factor * 0.5 * hp + factor * (rl.0 * gz.0 + rl.1 * gz.1);

    let h = -factor * 0.5 * tlc;

    Ok([b11, b12, b22, v1, v2, h])
}

/// Direct composition of the forcing formula at a `(t, z)` point, used as
/// the assembly cross-check:
/// `h(t,z) = -a dR/dxi dS/deta / (2 (a^2 + b^2)) [Lap curl U]_n (x, y)`.
pub fn forcing_by_composition(
    coeffs: &WaveCoefficients,
    fields: &TruncatedFields,
    level: i64,
    diffeo: &CharacteristicDiffeo,
    t: f64,
    z: f64,
) -> Result<f64> {
    let (x, y) = diffeo.from_tz(t, z)?;
    let a = coeffs.a.eval(x, y);
    let b = coeffs.b.eval(x, y);
    let dr = diffeo.r_family.danchor(x, z + t);
    let ds = diffeo.s_family.danchor(x, z - t);
    Ok(-a * dr * ds / (2.0 * (a * a + b * b)) * fields.lap_curl.truncated(level, x, y))
}
