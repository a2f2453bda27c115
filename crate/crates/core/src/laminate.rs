//! Exact realizability decision for two-phase rank-one laminate strain
//! fields: phases `E1`, `E2` in the symmetric trace-free 2x2 matrices,
//! lamination direction `xi` (unit), jump `E1 - E2 = lambda * xi (.) R_perp xi`
//! where `(.)` is the symmetric tensor product.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::Matrix2;

/// Layer profile. The decision depends only on the phases and the
/// direction; the profile is carried for export.
#[derive(Clone, Debug, Serialize)]
pub enum Profile {
    /// 50/50 square wave in the `xi . X` coordinate with unit period.
    SquareWave,
    /// Any measurable 0/1 profile, described for the record.
    Custom(String),
}

#[derive(Clone, Debug)]
pub struct LaminateField {
    pub e1: Matrix2,
    pub e2: Matrix2,
    pub xi: (f64, f64),
    pub lambda: f64,
    pub chi: Profile,
}

#[derive(Clone, Debug, Serialize)]
pub struct LaminateRealization {
    pub mu1: f64,
    pub mu2: f64,
    pub pressure_jump: f64,
}

/// Symmetric tensor product `xi (.) R_perp xi` as a matrix:
/// `[[-xi_x xi_y, (xi_x^2 - xi_y^2)/2], [(xi_x^2 - xi_y^2)/2, xi_x xi_y]]`.
pub fn xi_odot_rperp_xi(xi: (f64, f64)) -> Matrix2 {
    let (c, s) = xi;
    Matrix2::new(-c * s, 0.5 * (c * c - s * s), 0.5 * (c * c - s * s), c * s)
}

/// `E R_perp xi . xi` for symmetric E; equals `E : (xi (.) R_perp xi)`.
pub fn e_rperp_xi_dot_xi(e: &Matrix2, xi: (f64, f64)) -> f64 {
    let rxi = (-xi.1, xi.0);
    let v = e.apply(rxi);
    v.0 * xi.0 + v.1 * xi.1
}

fn validate_phase(e: &Matrix2, name: &str) -> Result<()> {
    if !e.is_symmetric(1e-12) {
        return Err(Error::Hypothesis(format!("{name} must be symmetric")));
    }
    if !e.is_trace_free(1e-12) {
        return Err(Error::Hypothesis(format!("{name} must be trace-free")));
    }
    Ok(())
}

fn validate_xi(xi: (f64, f64)) -> Result<()> {
    let n = (xi.0 * xi.0 + xi.1 * xi.1).sqrt();
    if (n - 1.0).abs() > 1e-14 {
        return Err(Error::Hypothesis(format!(
            "lamination direction must be unit, |xi| = {n}"
        )));
    }
    Ok(())
}

/// Solve `E1 - E2 = lambda * xi (.) R_perp xi` for `lambda`, rejecting
/// incompatible jumps.
pub fn strain_compatibility(e1: &Matrix2, e2: &Matrix2, xi: (f64, f64)) -> Result<f64> {
    validate_phase(e1, "E1")?;
    validate_phase(e2, "E2")?;
    validate_xi(xi)?;
    let jump = e1.sub(e2);
    let basis = xi_odot_rperp_xi(xi);
    // lambda from the largest basis entry; then verify entrywise
    let lambda = if basis.m11.abs() >= basis.m12.abs() {
        jump.m11 / basis.m11
    } else {
        jump.m12 / basis.m12
    };
    let lambda = if lambda.is_finite() { lambda } else { 0.0 };
    let resid = jump.sub(&basis.scale(lambda));
    let scale = 1.0 + jump.frob_norm();
    if resid.frob_norm() > 1e-12 * scale {
        return Err(Error::Hypothesis(format!(
            "jump E1 - E2 is not proportional to xi (.) R_perp xi (residual {:.3e})",
            resid.frob_norm()
        )));
    }
    Ok(lambda)
}

/// The exact realizability criterion
/// `E1:E2 > (|E1|^2 |E2|^2 + (E1:E2)^2) / (|E1|^2 + |E2|^2)`, or `E1 = E2`.
pub fn is_realizable(e1: &Matrix2, e2: &Matrix2) -> bool {
    if e1.sub(e2).frob_norm() == 0.0 {
        return true;
    }
    let dot = e1.frob_dot(e2);
    let n1 = e1.frob_dot(e1);
    let n2 = e2.frob_dot(e2);
    dot > (n1 * n2 + dot * dot) / (n1 + n2)
}

/// Build the two-phase viscosity and pressure jump. `mu1 mu2 = 1`
/// normalization (the criterion determines only the ratio).
pub fn realize_laminate(e1: &Matrix2, e2: &Matrix2, xi: (f64, f64)) -> Result<LaminateRealization> {
    let _lambda = strain_compatibility(e1, e2, xi)?;
    if e1.sub(e2).frob_norm() == 0.0 {
        return Ok(LaminateRealization {
            mu1: 1.0,
            mu2: 1.0,
            pressure_jump: 0.0,
        });
    }
    let c1 = e_rperp_xi_dot_xi(e1, xi);
    let c2 = e_rperp_xi_dot_xi(e2, xi);
    if !is_realizable(e1, e2) {
        let detail = if c1 * c2 <= 0.0 {
            format!("(E1 R_perp xi . xi)(E2 R_perp xi . xi) = {:.6e} <= 0", c1 * c2)
        } else {
            "interface balance cannot hold with positive phases".into()
        };
        let dot = e1.frob_dot(e2);
        let rhs =
            (e1.frob_dot(e1) * e2.frob_dot(e2) + dot * dot) / (e1.frob_dot(e1) + e2.frob_dot(e2));
        return Err(Error::Hypothesis(format!(
            "laminate not realizable: E1:E2 = {dot} <= {rhs}; {detail}"
        )));
    }
    // mu1 c1 = mu2 c2 with mu1 mu2 = 1
    let ratio = c2 / c1;
    debug_assert!(ratio > 0.0);
    let mu1 = ratio.sqrt();
    let mu2 = 1.0 / mu1;
    // (mu1 E1 - mu2 E2) xi is parallel to xi; its xi-component is the
    // pressure jump p1 - p2
    let m = e1.scale(mu1).sub(&e2.scale(mu2));
    let v = m.apply(xi);
    let pressure_jump = v.0 * xi.0 + v.1 * xi.1;
    Ok(LaminateRealization {
        mu1,
        mu2,
        pressure_jump,
    })
}

/// Cross component of `(mu1 E1 - mu2 E2) xi` orthogonal to `xi`, the
/// quantity the independent search drives to zero.
pub fn interface_cross_component(e1: &Matrix2, e2: &Matrix2, xi: (f64, f64), ratio: f64) -> f64 {
    // mu1 = ratio, mu2 = 1
    let m = e1.scale(ratio).sub(e2);
    let v = m.apply(xi);
    let rxi = (-xi.1, xi.0);
    v.0 * rxi.0 + v.1 * rxi.1
}

/// Independent oracle: scan a log-spaced ratio grid for a sign change of
/// the cross component and refine by bisection; exact fall-through for
/// `E1 = E2`. Never consults the closed-form criterion.
pub fn brute_force_realizable(
    e1: &Matrix2,
    e2: &Matrix2,
    xi: (f64, f64),
    ratio_points: usize,
) -> bool {
    if e1.sub(e2).frob_norm() == 0.0 {
        return true;
    }
    let lo = 1e-6f64.ln();
    let hi = 1e6f64.ln();
    let n = ratio_points.max(2);
    let ratio_at = |k: usize| (lo + (hi - lo) * k as f64 / (n - 1) as f64).exp();
    let f = |r: f64| interface_cross_component(e1, e2, xi, r);
    let mut prev = f(ratio_at(0));
    for k in 1..n {
        let cur = f(ratio_at(k));
        if prev == 0.0 || prev * cur < 0.0 {
            // refine to a genuine vanishing point
            let (a, b) = (ratio_at(k - 1), ratio_at(k));
            let r = crate::interp::monotone_root(a, b, f(a), f(b), f);
            if f(r).abs() <= 1e-9 * (1.0 + e1.frob_norm() + e2.frob_norm()) && r > 0.0 {
                return true;
            }
        }
        prev = cur;
    }
    false
}
