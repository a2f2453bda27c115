//! Characteristic-speed coefficients for the local construction:
//! `a = 2 u_xy / (u_xx - u_yy)` on a disk where the denominator is
//! positive, `alpha = a - sqrt(a^2+1) < 0 < beta = a + sqrt(a^2+1)`,
//! `gamma = -dx alpha - beta dy alpha`, together with the smooth radial
//! extension of `a` outside the disk that keeps the speeds bounded.

use crate::charfamily::SpeedField;
use crate::error::{Error, Result};
use crate::expr::{ScalarFieldExpr, Var};

use super::orientation::OrientationRecord;

/// Coefficient data for one oriented stream function.
#[derive(Clone, Debug)]
pub struct LocalCoefficients {
    /// symbolic `a` (valid on the disk)
    pub a: ScalarFieldExpr,
    pub alpha: ScalarFieldExpr,
    pub beta: ScalarFieldExpr,
    pub gamma: ScalarFieldExpr,
    /// bound on |alpha| + |beta| over the extended plane, with margin
    pub c: f64,
    /// disk radius; the extension blends over [rho, 2 rho]
    pub rho: f64,
    /// value of `a` at the origin, the far-field constant of the extension
    pub a_center: f64,
    pub orientation: OrientationRecord,
    /// the oriented stream function
    pub stream: ScalarFieldExpr,
    /// `u_xx - u_yy`, positive on the disk
    pub denom: ScalarFieldExpr,
    base: CoefExprs,
}

/// The symbolic pieces the numeric evaluators need.
#[derive(Clone, Debug)]
struct CoefExprs {
    a: ScalarFieldExpr,
    ax: ScalarFieldExpr,
    ay: ScalarFieldExpr,
    ayy: ScalarFieldExpr,
}

pub fn local_coefficients(
    stream: &ScalarFieldExpr,
    rho: f64,
    orientation: OrientationRecord,
) -> Result<LocalCoefficients> {
    let uxx = stream.differentiate(Var::X, 2);
    let uyy = stream.differentiate(Var::Y, 2);
    let uxy = stream.d(Var::X).d(Var::Y);
    let denom = uxx.sub(&uyy).simplify();

    // positivity of the denominator on the closed disk, dense polar sampling
    let mut min_denom = f64::INFINITY;
    for ir in 0..=40 {
        let r = rho * ir as f64 / 40.0;
        let n_th = if ir == 0 { 1 } else { 128 };
        for it in 0..n_th {
            let th = 2.0 * std::f64::consts::PI * it as f64 / n_th as f64;
            min_denom = min_denom.min(denom.eval(r * th.cos(), r * th.sin()));
        }
    }
    if !(min_denom > 0.0) {
        return Err(Error::Numerical(format!(
            "u_xx - u_yy reaches {min_denom:.3e} on the disk of radius {rho}; \
             shrink the disk around the center and retry"
        )));
    }

    let a = uxy.scale(2.0).div(&denom).simplify();
    let sqrt_term = a.pow(2).add(&ScalarFieldExpr::one()).sqrt_positive();
    let alpha = a.sub(&sqrt_term).simplify();
    let beta = a.add(&sqrt_term).simplify();
    let gamma = alpha
        .d(Var::X)
        .neg()
        .sub(&beta.mul(&alpha.d(Var::Y)))
        .simplify();

    let base = CoefExprs {
        a: a.clone(),
        ax: a.d(Var::X),
        ay: a.d(Var::Y),
        ayy: a.d(Var::Y).d(Var::Y),
    };
    let a_center = a.eval(0.0, 0.0);

    let mut coeffs = LocalCoefficients {
        a,
        alpha,
        beta,
        gamma,
        c: 0.0,
        rho,
        a_center,
        orientation,
        stream: stream.clone(),
        denom,
        base,
    };

    // c bounds |alpha| + |beta| = 2 sqrt(a_blend^2 + 1) over the extended
    // plane; sample the blend region densely and add a 10% margin
    let blend = coeffs.blended();
    let mut sup = 0.0f64;
    let lim = 2.0 * rho;
    for i in 0..=80 {
        for j in 0..=80 {
            let x = -lim + 2.0 * lim * i as f64 / 80.0;
            let y = -lim + 2.0 * lim * j as f64 / 80.0;
            let av = blend.value(x, y);
            sup = sup.max(2.0 * (av * av + 1.0).sqrt());
        }
    }
    sup = sup.max(2.0 * (a_center * a_center + 1.0).sqrt());
    coeffs.c = 1.1 * sup;
    Ok(coeffs)
}

impl LocalCoefficients {
    /// Extended coefficient `a` for the right half-plane problem.
    pub fn blended(&self) -> BlendedCoef {
        BlendedCoef {
            base: self.base.clone(),
            a0: self.a_center,
            rho: self.rho,
            reflected: false,
        }
    }

    /// Extended coefficient for the reflected problem,
    /// `a~(x, y) = -a(-x, y)`.
    pub fn blended_reflected(&self) -> BlendedCoef {
        BlendedCoef {
            base: self.base.clone(),
            a0: self.a_center,
            rho: self.rho,
            reflected: true,
        }
    }
}

/// `a` blended to its center value outside the disk:
/// `a_blend = a0 + chi(r) (a - a0)` with a quintic transition on
/// `[rho, 2 rho]`. Optionally pre-composed with the reflection
/// `(x, y) -> (-x, y)` and a sign flip.
#[derive(Clone, Debug)]
pub struct BlendedCoef {
    base: CoefExprs,
    a0: f64,
    rho: f64,
    reflected: bool,
}

fn smoothstep_quintic(s: f64) -> (f64, f64, f64) {
    // S(0)=0, S(1)=1, S', S'' vanish at both ends
    let s2 = s * s;
    let s3 = s2 * s;
    (
        6.0 * s3 * s2 - 15.0 * s2 * s2 + 10.0 * s3,
        30.0 * s2 * s2 - 60.0 * s3 + 30.0 * s2,
        120.0 * s3 - 180.0 * s2 + 60.0 * s,
    )
}

impl BlendedCoef {
    /// chi and first two radial derivatives at radius r.
    fn chi(&self, r: f64) -> (f64, f64, f64) {
        if r <= self.rho {
            (1.0, 0.0, 0.0)
        } else if r >= 2.0 * self.rho {
            (0.0, 0.0, 0.0)
        } else {
            let s = (r - self.rho) / self.rho;
            let (v, d1, d2) = smoothstep_quintic(s);
            (1.0 - v, -d1 / self.rho, -d2 / (self.rho * self.rho))
        }
    }

    /// Value and partials of the blended field at an (unreflected) point.
    fn raw(&self, x: f64, y: f64) -> (f64, f64, f64, f64) {
        let r = (x * x + y * y).sqrt();
        let a = self.base.a.eval(x, y);
        let ax = self.base.ax.eval(x, y);
        let ay = self.base.ay.eval(x, y);
        let ayy = self.base.ayy.eval(x, y);
        if r <= self.rho {
            return (a, ax, ay, ayy);
        }
        let (chi, dchi, ddchi) = self.chi(r);
        let d = a - self.a0;
        if chi == 0.0 && dchi == 0.0 {
            return (self.a0, 0.0, 0.0, 0.0);
        }
        // r > rho > 0 here
        let rx = x / r;
        let ry = y / r;
        let ryy = x * x / (r * r * r);
        let val = self.a0 + chi * d;
        let vx = dchi * rx * d + chi * ax;
        let vy = dchi * ry * d + chi * ay;
        let vyy = ddchi * ry * ry * d + dchi * ryy * d + 2.0 * dchi * ry * ay + chi * ayy;
        (val, vx, vy, vyy)
    }

    /// (a, a_x, a_y, a_yy) of the working coefficient, reflections applied.
    pub fn partials(&self, x: f64, y: f64) -> (f64, f64, f64, f64) {
        if self.reflected {
            let (v, vx, vy, vyy) = self.raw(-x, y);
            (-v, vx, -vy, -vyy)
        } else {
            self.raw(x, y)
        }
    }

    pub fn value(&self, x: f64, y: f64) -> f64 {
        self.partials(x, y).0
    }

    /// `gamma = -(1 - a/s)(a_x + beta a_y)` with `s = sqrt(a^2+1)`,
    /// `beta = a + s`.
    pub fn gamma(&self, x: f64, y: f64) -> f64 {
        let (a, ax, ay, _) = self.partials(x, y);
        let s = (a * a + 1.0).sqrt();
        let beta = a + s;
        -(1.0 - a / s) * (ax + beta * ay)
    }

    pub fn alpha_field(&self) -> AlphaField {
        AlphaField {
            coef: self.clone(),
            plus_branch: false,
        }
    }

    pub fn beta_field(&self) -> AlphaField {
        AlphaField {
            coef: self.clone(),
            plus_branch: true,
        }
    }
}

/// `alpha = a -/+ sqrt(a^2 + 1)` as a transport speed with analytic
/// y-derivatives (`plus_branch` selects beta).
#[derive(Clone)]
pub struct AlphaField {
    coef: BlendedCoef,
    plus_branch: bool,
}

impl SpeedField for AlphaField {
    fn value(&self, x: f64, y: f64) -> f64 {
        let (a, _, _, _) = self.coef.partials(x, y);
        let s = (a * a + 1.0).sqrt();
        if self.plus_branch {
            a + s
        } else {
            a - s
        }
    }

    fn dy(&self, x: f64, y: f64) -> f64 {
        let (a, _, ay, _) = self.coef.partials(x, y);
        let s = (a * a + 1.0).sqrt();
        let factor = if self.plus_branch { 1.0 + a / s } else { 1.0 - a / s };
        ay * factor
    }

    fn dyy(&self, x: f64, y: f64) -> f64 {
        let (a, _, ay, ayy) = self.coef.partials(x, y);
        let s = (a * a + 1.0).sqrt();
        let factor = if self.plus_branch { 1.0 + a / s } else { 1.0 - a / s };
        // d/da of (-/+ a/s) is -/+ 1/s^3
        let second = if self.plus_branch { 1.0 } else { -1.0 } / (s * s * s);
        ayy * factor + ay * ay * second
    }
}
