//! The SCAD penalty and its one-dimensional thresholding maps.
//!
//! The scalar problem underlying every solver in this crate is
//!
//! ```text
//! phi(x; s2, R) = J(x) + (x - R)^2 / (2 s2)
//! ```
//!
//! whose minimizer [`prox_mean`] is the AMP posterior mean and the replica
//! single-body solution, and whose scaled slope [`prox_variance`] is the AMP
//! posterior variance. Both closed forms are only valid while the transit
//! region stays strictly convex, i.e. `s2 < a - 1`; outside that range they
//! return [`Error::DegenerateCurvature`]. [`scalar_minimizer`] handles any
//! `s2 > 0` by enumerating candidates and is what coordinate descent uses.

use crate::error::{Error, Result};

/// Shape parameters of the SCAD penalty.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScadParams {
    lambda: f64,
    a: f64,
}

impl ScadParams {
    /// Requires `lambda > 0` and `a > 1`.
    pub fn new(lambda: f64, a: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "lambda must be positive and finite, got {lambda}"
            )));
        }
        if !(a > 1.0) || a.is_nan() {
            return Err(Error::InvalidParameter(format!("a must exceed 1, got {a}")));
        }
        Ok(Self { lambda, a })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    /// Curvature of the quadratic piece, `1 / (a - 1)`.
    pub fn concavity(&self) -> f64 {
        1.0 / (self.a - 1.0)
    }

    /// Value of the penalty for `|x| > a * lambda`.
    pub fn plateau(&self) -> f64 {
        0.5 * (self.a + 1.0) * self.lambda * self.lambda
    }

    pub(crate) fn check_curvature(&self, sigma2: f64) -> Result<()> {
        if !(sigma2 > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "effective variance must be positive, got {sigma2}"
            )));
        }
        if sigma2 >= self.a - 1.0 {
            return Err(Error::DegenerateCurvature {
                sigma2,
                limit: self.a - 1.0,
            });
        }
        Ok(())
    }
}

/// Which branch of the thresholding map an input falls into.
///
/// Boundaries are closed on the left piece: `|R| <= lambda*s2` is `Zero`,
/// `|R| <= lambda*(1+s2)` is `Shrink`, `|R| <= a*lambda` is `Transit`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Region {
    /// Thresholded to exactly zero.
    Zero,
    /// Lasso-like shrinkage (region I).
    Shrink,
    /// Linear transition between shrinkage and identity (region II).
    Transit,
    /// Unbiased, the estimate equals the input (region III).
    Unbiased,
}

/// SCAD penalty `J(x)`.
pub fn penalty(x: f64, p: &ScadParams) -> f64 {
    let ax = x.abs();
    let (l, a) = (p.lambda, p.a);
    if ax <= l {
        l * ax
    } else if ax <= a * l {
        -(ax * ax - 2.0 * a * l * ax + l * l) / (2.0 * (a - 1.0))
    } else {
        p.plateau()
    }
}

/// Componentwise sum of [`penalty`].
pub fn vector_penalty(x: &[f64], p: &ScadParams) -> f64 {
    x.iter().map(|&v| penalty(v, p)).sum()
}

pub fn classify_region(sigma2: f64, r: f64, p: &ScadParams) -> Result<Region> {
    if !(sigma2 > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "effective variance must be positive, got {sigma2}"
        )));
    }
    Ok(region_unchecked(sigma2, r, p))
}

fn region_unchecked(sigma2: f64, r: f64, p: &ScadParams) -> Region {
    let ar = r.abs();
    let l = p.lambda;
    if ar <= l * sigma2 {
        Region::Zero
    } else if ar <= l * (1.0 + sigma2) {
        Region::Shrink
    } else if ar <= p.a * l {
        Region::Transit
    } else {
        Region::Unbiased
    }
}

/// Minimizer of `J(x) + (x - R)^2 / (2 sigma2)` in closed form.
///
/// Odd, continuous and nondecreasing in `R`, with `|result| <= |R|`.
pub fn prox_mean(sigma2: f64, r: f64, p: &ScadParams) -> Result<f64> {
    p.check_curvature(sigma2)?;
    Ok(prox_mean_unchecked(sigma2, r, p))
}

pub(crate) fn prox_mean_unchecked(sigma2: f64, r: f64, p: &ScadParams) -> f64 {
    let s = r.signum();
    match region_unchecked(sigma2, r, p) {
        Region::Zero => 0.0,
        Region::Shrink => r - s * p.lambda * sigma2,
        Region::Transit => {
            let c = p.concavity();
            (r / sigma2 - s * p.a * p.lambda * c) / (1.0 / sigma2 - c)
        }
        Region::Unbiased => r,
    }
}

/// `sigma2 * d/dR prox_mean(sigma2, R)`: the AMP posterior variance.
pub fn prox_variance(sigma2: f64, r: f64, p: &ScadParams) -> Result<f64> {
    p.check_curvature(sigma2)?;
    Ok(prox_variance_unchecked(sigma2, r, p))
}

pub(crate) fn prox_variance_unchecked(sigma2: f64, r: f64, p: &ScadParams) -> f64 {
    match region_unchecked(sigma2, r, p) {
        Region::Zero => 0.0,
        Region::Shrink | Region::Unbiased => sigma2,
        Region::Transit => 1.0 / (1.0 / sigma2 - p.concavity()),
    }
}

/// Brute-force minimizer of the one-body objective: a uniform grid over
/// `[-(|R| + a*lambda), |R| + a*lambda]`, then ternary search around the best
/// grid point until the bracket is narrower than `resolution`.
///
/// Only meant as an independent check of [`prox_mean`].
pub fn single_body_oracle(sigma2: f64, r: f64, p: &ScadParams, resolution: f64) -> f64 {
    const GRID: usize = 4096;
    let phi = |x: f64| penalty(x, p) + (x - r) * (x - r) / (2.0 * sigma2);
    let half = r.abs() + p.a * p.lambda;
    let step = 2.0 * half / GRID as f64;

    let mut best = (0.0_f64, phi(0.0));
    for k in 0..=GRID {
        let x = -half + k as f64 * step;
        let v = phi(x);
        if v < best.1 {
            best = (x, v);
        }
    }

    let (mut lo, mut hi) = (best.0 - step, best.0 + step);
    while hi - lo > resolution {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if phi(m1) <= phi(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    let x = 0.5 * (lo + hi);
    // The exact zero is the minimizer on a whole interval of R; keep it exact.
    if phi(0.0) <= phi(x) {
        0.0
    } else {
        x
    }
}

/// `z - sign(z) t` when `|z| > t`, otherwise 0.
pub fn soft_threshold(z: f64, t: f64) -> f64 {
    debug_assert!(t >= 0.0);
    if z > t {
        z - t
    } else if z < -t {
        z + t
    } else {
        0.0
    }
}

/// Global minimizer of `J(x) + (x - R)^2 / (2 sigma2)` for any `sigma2 > 0`.
///
/// Coincides with [`prox_mean`] when `sigma2 < a - 1`. Beyond that the
/// transit piece is concave, the map jumps, and the minimizer is picked among
/// the stationary points of the convex pieces and the piece endpoints. Ties
/// go to the candidate with the smallest magnitude.
pub fn scalar_minimizer(sigma2: f64, r: f64, p: &ScadParams) -> f64 {
    if sigma2 < p.a - 1.0 {
        return prox_mean_unchecked(sigma2, r, p);
    }
    let s = if r < 0.0 { -1.0 } else { 1.0 };
    let w = r.abs();
    let (l, a) = (p.lambda, p.a);
    let phi = |x: f64| penalty(x, p) + (x - w) * (x - w) / (2.0 * sigma2);
    let candidates = [0.0, (w - l * sigma2).clamp(0.0, l), l, a * l, w.max(a * l)];
    let mut best = (0.0, phi(0.0));
    for &x in &candidates[1..] {
        let v = phi(x);
        if v < best.1 {
            best = (x, v);
        }
    }
    s * best.0
}
