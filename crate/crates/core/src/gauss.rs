//! Closed-form Gaussian expectations of piecewise polynomials.
//!
//! Every macroscopic quantity in this crate is an average `∫Dz g(z)` with
//! `Dz` the standard normal measure and `g` piecewise quadratic in `z`
//! (squares of piecewise-linear estimators, their slopes, one-body minimum
//! values). Those reduce to partial moments of orders 0, 1 and 2.

use crate::error::{Error, Result};
use std::f64::consts::{FRAC_1_SQRT_2, PI};

/// Complementary error function, `erfc(x) = 2/√π ∫_x^∞ e^{-t²} dt`.
///
/// Note the convention: `P(|z| >= √2·θ) = erfc(θ)` for standard normal `z`.
pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

/// Standard normal density.
pub fn normal_pdf(z: f64) -> f64 {
    if z.is_infinite() {
        0.0
    } else {
        (-0.5 * z * z).exp() / (2.0 * PI).sqrt()
    }
}

/// `P(z > x)`.
pub fn normal_sf(x: f64) -> f64 {
    0.5 * erfc(x * FRAC_1_SQRT_2)
}

/// `P(z <= x)`.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x * FRAC_1_SQRT_2)
}

fn z_pdf(z: f64) -> f64 {
    if z.is_infinite() {
        0.0
    } else {
        z * normal_pdf(z)
    }
}

/// `[∫ φ, ∫ z φ, ∫ z² φ]` over `[lo, hi]`; either end may be infinite.
pub fn partial_moments(lo: f64, hi: f64) -> [f64; 3] {
    if !(hi > lo) {
        return [0.0; 3];
    }
    // Pick the tail representation that avoids cancellation.
    let p0 = if lo >= 0.0 {
        normal_sf(lo) - normal_sf(hi)
    } else if hi <= 0.0 {
        normal_cdf(hi) - normal_cdf(lo)
    } else {
        1.0 - normal_cdf(lo) - normal_sf(hi)
    };
    let p1 = normal_pdf(lo) - normal_pdf(hi);
    let p2 = p0 + z_pdf(lo) - z_pdf(hi);
    [p0, p1, p2]
}

/// `∫Dz g(z)` where `g(z) = c0 + c1 z + c2 z²` on each interval.
///
/// `breaks` must be sorted; `polys[k]` applies on `[breaks[k-1], breaks[k]]`
/// with `breaks[-1] = -∞` and `breaks[len] = +∞`.
pub fn gaussian_piecewise_moment(breaks: &[f64], polys: &[[f64; 3]]) -> Result<f64> {
    if polys.len() != breaks.len() + 1 {
        return Err(Error::DimensionMismatch {
            expected: breaks.len() + 1,
            got: polys.len(),
        });
    }
    if breaks.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(Error::InvalidParameter("breaks must be sorted".into()));
    }
    Ok(piecewise_moment_unchecked(breaks, polys))
}

pub(crate) fn piecewise_moment_unchecked(breaks: &[f64], polys: &[[f64; 3]]) -> f64 {
    let mut total = 0.0;
    for (k, c) in polys.iter().enumerate() {
        if c.iter().all(|&v| v == 0.0) {
            continue;
        }
        let lo = if k == 0 { f64::NEG_INFINITY } else { breaks[k - 1] };
        let hi = if k == breaks.len() { f64::INFINITY } else { breaks[k] };
        let m = partial_moments(lo, hi);
        total += c[0] * m[0] + c[1] * m[1] + c[2] * m[2];
    }
    total
}

/// Piecewise-linear function of `z` that is odd in `z`.
///
/// `knots` are the nonnegative break points `0 <= t_1 <= ... <= t_k`, and
/// `pieces[j] = (slope, offset)` gives `g(z) = slope*z - offset` on
/// `[t_j, t_{j+1})` for `z >= 0` (the first piece starts at 0, the last runs
/// to infinity). For `z < 0`, `g(z) = -g(-z)`.
#[derive(Debug, Clone)]
pub(crate) struct OddPiecewiseLinear {
    pub knots: Vec<f64>,
    pub pieces: Vec<(f64, f64)>,
}

impl OddPiecewiseLinear {
    /// Mirror per-piece quadratics given for `z >= 0` onto the full line as
    /// an even function.
    fn mirrored(&self, per_piece: impl Fn(usize) -> [f64; 3]) -> (Vec<f64>, Vec<[f64; 3]>) {
        let n = self.pieces.len();
        let mut polys = Vec::with_capacity(2 * n);
        for j in (0..n).rev() {
            let [c0, c1, c2] = per_piece(j);
            polys.push([c0, -c1, c2]);
        }
        for j in 0..n {
            polys.push(per_piece(j));
        }
        (self.breaks(), polys)
    }

    fn breaks(&self) -> Vec<f64> {
        let mut b: Vec<f64> = self.knots.iter().rev().map(|t| -t).collect();
        b.push(0.0);
        b.extend(self.knots.iter().copied());
        b
    }

    /// `∫Dz g(z)²`.
    pub fn second_moment(&self) -> f64 {
        let (b, p) = self.mirrored(|j| {
            let (s, o) = self.pieces[j];
            [o * o, -2.0 * s * o, s * s]
        });
        piecewise_moment_unchecked(&b, &p)
    }

    /// `∫Dz w(piece(z))` for a per-piece constant weight, even in `z`.
    pub fn piece_weighted(&self, weight: impl Fn(usize) -> f64) -> f64 {
        let (b, p) = self.mirrored(|j| [weight(j), 0.0, 0.0]);
        piecewise_moment_unchecked(&b, &p)
    }

    /// `∫Dz q_j(z)` for per-piece quadratics `q_j` given on `z >= 0`, extended evenly.
    pub fn even_quadratic(&self, q: impl Fn(usize) -> [f64; 3]) -> f64 {
        let (b, p) = self.mirrored(q);
        piecewise_moment_unchecked(&b, &p)
    }

    #[cfg(test)]
    pub fn eval(&self, z: f64) -> f64 {
        let w = z.abs();
        let mut j = 0;
        while j < self.knots.len() && w >= self.knots[j] {
            j += 1;
        }
        let (s, o) = self.pieces[j];
        z.signum() * (s * w - o)
    }
}
