//! Compactly supported truncation of periodic fields.
//!
//! A 1-periodic `f` is mapped to `phi_f(x, y) = f_P(x, y) h(x, y)`, where
//! `f_P` is its Fourier partial sum and `h = theta * 1_[0,1]^2` is the
//! window built from a fixed bump `theta` supported in `[-1/4, 1/4]^2`
//! with unit integral. Integer translates of `phi_f` sum back to `f`, and
//! the level-`n` truncation
//!
//! ```text
//! [f]_n(x, y) = sum_{|p|,|q| <= n} phi_f(x + p, y + q)
//!             = f_P(x, y) W_n(x) W_n(y)
//! ```
//!
//! (the window sums telescope) equals `f` on the disk `D(0, R)` once
//! `n >= n_R`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::ScalarFieldExpr;
use crate::quad;

/// The fixed bump: `theta1(t) = C (1 - 16 t^2)^5` on `[-1/4, 1/4]`,
/// normalized to unit integral (by quadrature), separable in 2D.
pub struct Mollifier;

// normalization C = 1 / int_{-1/4}^{1/4} (1 - 16 t^2)^5 dt, computed once
fn norm_c() -> f64 {
    static CELL: std::sync::OnceLock<f64> = std::sync::OnceLock::new();
    *CELL.get_or_init(|| {
        let integral = quad::integrate(|t| (1.0 - 16.0 * t * t).powi(5), -0.25, 0.25, 16, 2);
        1.0 / integral
    })
}

impl Mollifier {
    pub fn theta1(t: f64) -> f64 {
        if t.abs() >= 0.25 {
            0.0
        } else {
            norm_c() * (1.0 - 16.0 * t * t).powi(5)
        }
    }

    pub fn theta(x: f64, y: f64) -> f64 {
        Self::theta1(x) * Self::theta1(y)
    }

    /// Antiderivative `int_{-inf}^x theta1`, exactly 0 below -1/4 and 1
    /// above 1/4 (closed-form polynomial in between).
    pub fn theta1_cdf(x: f64) -> f64 {
        if x <= -0.25 {
            return 0.0;
        }
        if x >= 0.25 {
            return 1.0;
        }
        // int (1 - 16 t^2)^5 dt expanded in monomials
        let poly = |t: f64| -> f64 {
            // coefficients of (1 - 16 t^2)^5 = sum_k binom(5,k) (-16)^k t^(2k)
            let mut acc = 0.0;
            let mut pow = t;
            let mut c16 = 1.0f64;
            let binom = [1.0, 5.0, 10.0, 10.0, 5.0, 1.0];
            for (k, b) in binom.iter().enumerate() {
                acc += b * c16 * pow / (2 * k + 1) as f64;
                c16 *= -16.0;
                pow *= t * t;
            }
            acc
        };
        norm_c() * (poly(x) - poly(-0.25))
    }

    /// One-dimensional window `H1 = theta1 * 1_[0,1]`, supported on
    /// `[-1/4, 5/4]`, identically 1 on `[1/4, 3/4]`.
    pub fn window1(x: f64) -> f64 {
        Self::theta1_cdf(x) - Self::theta1_cdf(x - 1.0)
    }

    pub fn window(x: f64, y: f64) -> f64 {
        Self::window1(x) * Self::window1(y)
    }

    /// Telescoped window sum `sum_{p=-n}^{n} H1(x + p)`.
    pub fn window_sum1(n: i64, x: f64) -> f64 {
        Self::theta1_cdf(x + n as f64) - Self::theta1_cdf(x - n as f64 - 1.0)
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Mode {
    pub p: i32,
    pub q: i32,
    pub re: f64,
    pub im: f64,
}

/// Sparse Fourier data of a periodic field plus the windowing machinery.
#[derive(Clone, Debug)]
pub struct PeriodicTruncation {
    pub cutoff: i32,
    pub modes: Vec<Mode>,
    /// largest coefficient magnitude on the cutoff ring
    pub tail: f64,
    /// tail below 1e-6 (otherwise a larger cutoff is advisable)
    pub tail_ok: bool,
}

/// Fourier coefficients up to `cutoff` by a two-stage partial DFT on an
/// `N x N` sample lattice (`N = 4 * cutoff`, trapezoidal rule; spectrally
/// exact for band-limited fields). Requires declared periodicity.
pub fn periodic_truncate(f: &ScalarFieldExpr, cutoff: usize) -> Result<PeriodicTruncation> {
    if !f.unit_periodic() {
        return Err(Error::Invalid(
            "periodic_truncate requires a field declared 1-periodic".into(),
        ));
    }
    let p_max = cutoff as i32;
    let n = (4 * cutoff).max(64);
    let nn = n as f64;
    let tau = 2.0 * std::f64::consts::PI;

    // samples
    let mut samples = vec![0.0f64; n * n];
    for jy in 0..n {
        for jx in 0..n {
            samples[jy * n + jx] = f.eval(jx as f64 / nn, jy as f64 / nn);
        }
    }
    // stage 1: G(p, jy) = (1/N) sum_jx f(jx, jy) e^{-2 pi i p jx / N}
    let pcount = (2 * p_max + 1) as usize;
    let mut g_re = vec![0.0f64; pcount * n];
    let mut g_im = vec![0.0f64; pcount * n];
    for (ip, p) in (-p_max..=p_max).enumerate() {
        for jy in 0..n {
            let mut re = 0.0;
            let mut im = 0.0;
            for jx in 0..n {
                let ang = -tau * p as f64 * jx as f64 / nn;
                let v = samples[jy * n + jx];
                re += v * ang.cos();
                im += v * ang.sin();
            }
            g_re[ip * n + jy] = re / nn;
            g_im[ip * n + jy] = im / nn;
        }
    }
    // stage 2: fhat(p, q) = (1/N) sum_jy G(p, jy) e^{-2 pi i q jy / N}
    let mut modes = Vec::new();
    let mut scale = 0.0f64;
    let mut raw = Vec::with_capacity(pcount * pcount);
    for (ip, p) in (-p_max..=p_max).enumerate() {
        for q in -p_max..=p_max {
            let mut re = 0.0;
            let mut im = 0.0;
            for jy in 0..n {
                let ang = -tau * q as f64 * jy as f64 / nn;
                let (gr, gi) = (g_re[ip * n + jy], g_im[ip * n + jy]);
                re += gr * ang.cos() - gi * ang.sin();
                im += gr * ang.sin() + gi * ang.cos();
            }
            re /= nn;
            im /= nn;
            let mag = (re * re + im * im).sqrt();
            scale = scale.max(mag);
            raw.push((p, q, re, im, mag));
        }
    }
    let floor = 1e-14 * scale.max(1.0);
    let mut tail = 0.0f64;
    for (p, q, re, im, mag) in raw {
        if p.abs() == p_max || q.abs() == p_max {
            tail = tail.max(mag);
        }
        if mag > floor {
            modes.push(Mode { p, q, re, im });
        }
    }
    Ok(PeriodicTruncation {
        cutoff: p_max,
        modes,
        tail,
        tail_ok: tail <= 1e-6,
    })
}

impl PeriodicTruncation {
    /// Fourier partial sum (real part).
    pub fn partial_sum(&self, x: f64, y: f64) -> f64 {
        let tau = 2.0 * std::f64::consts::PI;
        let mut acc = 0.0;
        for m in &self.modes {
            let ang = tau * (m.p as f64 * x + m.q as f64 * y);
            acc += m.re * ang.cos() - m.im * ang.sin();
        }
        acc
    }

    /// `phi_f(x, y) = f_P(x, y) h(x, y)`, compactly supported in
    /// `[-1/4, 5/4]^2`.
    pub fn phi(&self, x: f64, y: f64) -> f64 {
        let w = Mollifier::window(x, y);
        if w == 0.0 {
            return 0.0;
        }
        self.partial_sum(x, y) * w
    }

    /// Level-`n` truncation via the telescoped window sums.
    pub fn truncated(&self, n: i64, x: f64, y: f64) -> f64 {
        let w = Mollifier::window_sum1(n, x) * Mollifier::window_sum1(n, y);
        if w == 0.0 {
            return 0.0;
        }
        self.partial_sum(x, y) * w
    }
}

/// Smallest level with `[f]_n = f` on the disk `D(0, R)` by support
/// arithmetic: both window sums are identically 1 there once
/// `n >= R + 1/4`.
pub fn smallest_n_for_disk(radius: f64) -> i64 {
    (radius + 0.25).ceil() as i64
}

/// Sampled verification that `[f]_n = f` on `D(0, R)`.
pub fn verify_truncation_on_disk(
    tr: &PeriodicTruncation,
    f: &ScalarFieldExpr,
    n: i64,
    radius: f64,
    samples: usize,
) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..samples {
        for j in 0..samples {
            let x = -radius + 2.0 * radius * i as f64 / (samples - 1) as f64;
            let y = -radius + 2.0 * radius * j as f64 / (samples - 1) as f64;
            if x * x + y * y > radius * radius {
                continue;
            }
            worst = worst.max((tr.truncated(n, x, y) - f.eval(x, y)).abs());
        }
    }
    worst
}
