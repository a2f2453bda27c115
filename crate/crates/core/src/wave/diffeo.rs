//! The global change of variables carrying the wave-form equation to
//! canonical form: characteristic families `R(x, xi)` (speed alpha) and
//! `S(x, eta)` (speed beta) anchored on `x = 0`, their inverses
//! `xi(x, y)`, `eta(x, y)` by monotone root solves in the anchor variable,
//! and `t = (xi - eta)/2`, `z = (xi + eta)/2`.

use crate::charfamily::{CharacteristicFamily, SmoothField};
use crate::error::{Error, Result};
use crate::expr::ScalarFieldExpr;

use super::coefficients::WaveCoefficients;

pub struct CharacteristicDiffeo {
    pub r_family: CharacteristicFamily,
    pub s_family: CharacteristicFamily,
    /// symbolic speeds and their first partials for the Hessian chain rule
    alpha: ScalarFieldExpr,
    beta: ScalarFieldExpr,
    alpha_x: ScalarFieldExpr,
    alpha_y: ScalarFieldExpr,
    beta_x: ScalarFieldExpr,
    beta_y: ScalarFieldExpr,
}

#[derive(Clone, Copy, Debug)]
pub struct DiffeoExtent {
    /// stations span [-x_max, x_max]
    pub x_max: f64,
    /// anchors span [-anchor_max, anchor_max]
    pub anchor_max: f64,
    /// lattice step for stations and anchors
    pub step: f64,
}

/// First and second partials of one inverse coordinate at a point.
#[derive(Clone, Copy, Debug)]
pub struct InverseDerivs {
    pub dx: f64,
    pub dy: f64,
    pub dxx: f64,
    pub dxy: f64,
    pub dyy: f64,
    /// danchor of the family value at the point (exp of the logged
    /// sensitivity), i.e. `dR/dxi`
    pub danchor: f64,
}

pub fn build_diffeomorphism(
    coeffs: &WaveCoefficients,
    extent: DiffeoExtent,
) -> Result<CharacteristicDiffeo> {
    let k = (extent.x_max / extent.step).ceil() as i64;
    let n_anchors = (2.0 * extent.anchor_max / extent.step).ceil() as usize + 1;
    let anchor0 = -extent.anchor_max;
    let r_family = CharacteristicFamily::integrate(
        Box::new(SmoothField::new(coeffs.alpha.clone())),
        0.0,
        extent.step,
        -k,
        k,
        anchor0,
        extent.step,
        n_anchors,
    );
    let s_family = CharacteristicFamily::integrate(
        Box::new(SmoothField::new(coeffs.beta.clone())),
        0.0,
        extent.step,
        -k,
        k,
        anchor0,
        extent.step,
        n_anchors,
    );
    Ok(CharacteristicDiffeo {
        r_family,
        s_family,
        alpha: coeffs.alpha.clone(),
        beta: coeffs.beta.clone(),
        alpha_x: coeffs.alpha_x.clone(),
        alpha_y: coeffs.alpha_y.clone(),
        beta_x: coeffs.beta_x.clone(),
        beta_y: coeffs.beta_y.clone(),
    })
}

impl CharacteristicDiffeo {
    /// `(xi, eta)` through the point `(x, y)`.
    pub fn forward(&self, x: f64, y: f64) -> Result<(f64, f64)> {
        Ok((self.r_family.invert(x, y)?, self.s_family.invert(x, y)?))
    }

    pub fn to_tz(&self, x: f64, y: f64) -> Result<(f64, f64)> {
        let (xi, eta) = self.forward(x, y)?;
        Ok(((xi - eta) / 2.0, (xi + eta) / 2.0))
    }

    /// The point `(x, y)` with `xi(x,y) = xi0`, `eta(x,y) = eta0`
    /// (intersection of the two anchored characteristics).
    pub fn inverse(&self, xi0: f64, eta0: f64) -> Result<(f64, f64)> {
        self.r_family.cross(&self.s_family, xi0, eta0)
    }

    pub fn from_tz(&self, t: f64, z: f64) -> Result<(f64, f64)> {
        self.inverse(z + t, z - t)
    }

    /// Jacobian `(beta - alpha) dy(xi) dy(eta)` at a point with known
    /// anchors.
    pub fn jacobian_at(&self, x: f64, y: f64, xi: f64, eta: f64) -> f64 {
        let dyxi = 1.0 / self.r_family.danchor(x, xi);
        let dyeta = 1.0 / self.s_family.danchor(x, eta);
        (self.beta.eval(x, y) - self.alpha.eval(x, y)) * dyxi * dyeta
    }

    /// Partials of `xi(x, y)` through the chain rule on the anchored
    /// family: `dy xi = 1/dR`, `dx xi = -alpha dy xi`,
    /// `dyy xi = -d2R / dR^3`, `dxy xi = -alpha_y dy xi - alpha dyy xi`,
    /// `dxx xi = -alpha_x dy xi - alpha dxy xi`.
    pub fn xi_derivs(&self, x: f64, y: f64, xi: f64) -> InverseDerivs {
        inverse_derivs(
            &self.r_family,
            &self.alpha,
            &self.alpha_x,
            &self.alpha_y,
            x,
            y,
            xi,
        )
    }

    pub fn eta_derivs(&self, x: f64, y: f64, eta: f64) -> InverseDerivs {
        inverse_derivs(
            &self.s_family,
            &self.beta,
            &self.beta_x,
            &self.beta_y,
            x,
            y,
            eta,
        )
    }

    /// Round-trip error `|R(x, xi(x, y)) - y|`, the working check of the
    /// inversion.
    pub fn round_trip(&self, x: f64, y: f64) -> Result<f64> {
        let (xi, eta) = self.forward(x, y)?;
        let e1 = (self.r_family.value(x, xi) - y).abs();
        let e2 = (self.s_family.value(x, eta) - y).abs();
        Ok(e1.max(e2))
    }

    /// Jacobian sign constancy and nonvanishing over a sample rectangle.
    pub fn jacobian_scan(&self, x_lim: f64, y_lim: f64, n: usize) -> Result<(f64, f64)> {
        let mut min_abs = f64::INFINITY;
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            for j in 0..n {
                let x = -x_lim + 2.0 * x_lim * i as f64 / (n - 1) as f64;
                let y = -y_lim + 2.0 * y_lim * j as f64 / (n - 1) as f64;
                let (xi, eta) = self.forward(x, y)?;
                let jac = self.jacobian_at(x, y, xi, eta);
                min_abs = min_abs.min(jac.abs());
                lo = lo.min(jac);
                hi = hi.max(jac);
            }
        }
        if lo < 0.0 && hi > 0.0 {
            return Err(Error::Numerical(
                "characteristic Jacobian changes sign on the working rectangle".into(),
            ));
        }
        Ok((min_abs, if lo >= 0.0 { 1.0 } else { -1.0 }))
    }
}

fn inverse_derivs(
    family: &CharacteristicFamily,
    speed: &ScalarFieldExpr,
    speed_x: &ScalarFieldExpr,
    speed_y: &ScalarFieldExpr,
    x: f64,
    y: f64,
    anchor: f64,
) -> InverseDerivs {
    let dr = family.danchor(x, anchor);
    let d2r = family.d2anchor(x, anchor);
    let a = speed.eval(x, y);
    let ax = speed_x.eval(x, y);
    let ay = speed_y.eval(x, y);
    let dy = 1.0 / dr;
    let dx = -a * dy;
    let dyy = -d2r / (dr * dr * dr);
    let dxy = -ay * dy - a * dyy;
    let dxx = -ax * dy - a * dxy;
    InverseDerivs {
        dx,
        dy,
        dxx,
        dxy,
        dyy,
        danchor: dr,
    }
}
