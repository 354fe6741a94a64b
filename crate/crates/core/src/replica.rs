//! Replica-symmetric analysis: saddle point, sparsity, de Almeida–Thouless
//! stability, phase boundary, free energy and rate-distortion curves.
//!
//! The saddle point couples the order parameters through the one-body
//! problem `min_x Q̂x²/2 − hx + J(x)` with effective field `h = √χ̂·z`:
//!
//! ```text
//! Q̂ = 1/(1 + χ)            χ̂ = (Q + σ_y²)/(1 + χ)²
//! Q = (1/α) ∫Dz x*²        χ = (1/α) ∫Dz ∂x*/∂h
//! ```

use crate::error::{Error, Result};
use crate::gauss::{erfc, OddPiecewiseLinear};
use crate::penalty::ScadParams;

/// A replica-symmetric saddle point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RsSaddle {
    /// Self-overlap `(1/M) Σ x_i²` (per observation).
    pub q: f64,
    /// Susceptibility.
    pub chi: f64,
    pub qhat: f64,
    /// Variance of the effective field; equals the representation error.
    pub chihat: f64,
    pub theta1: f64,
    pub theta2: f64,
    pub theta3: f64,
    pub iterations: usize,
}

impl RsSaddle {
    fn from_order(q: f64, chi: f64, sigma_y: f64, p: &ScadParams, iterations: usize) -> Result<Self> {
        let qhat = 1.0 / (1.0 + chi);
        let chihat = (q + sigma_y * sigma_y) / ((1.0 + chi) * (1.0 + chi));
        let [theta1, theta2, theta3] = thresholds(qhat, chihat, p)?;
        Ok(Self {
            q,
            chi,
            qhat,
            chihat,
            theta1,
            theta2,
            theta3,
            iterations,
        })
    }

    /// Absolute residuals of the four saddle-point equations, in the order
    /// `Q, χ, Q̂, χ̂`.
    pub fn residuals(&self, alpha: f64, sigma_y: f64, p: &ScadParams) -> Result<[f64; 4]> {
        let (q, chi) = order_update(self.qhat, self.chihat, alpha, p)?;
        Ok([
            (q - self.q).abs(),
            (chi - self.chi).abs(),
            (1.0 / (1.0 + self.chi) - self.qhat).abs(),
            ((self.q + sigma_y * sigma_y) / (1.0 + self.chi).powi(2) - self.chihat).abs(),
        ])
    }
}

/// `θ₁ = λ/√(2χ̂)`, `θ₂ = λ(Q̂+1)/√(2χ̂)`, `θ₃ = aλQ̂/√(2χ̂)`.
///
/// `x*` is zero for `|z| < √2·θ₁`, soft-thresholded up to `√2·θ₂`, in the
/// transit region up to `√2·θ₃` and unbiased beyond.
pub fn thresholds(qhat: f64, chihat: f64, p: &ScadParams) -> Result<[f64; 3]> {
    if !(chihat > 0.0 && qhat > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need Qhat > 0 and chihat > 0, got {qhat}, {chihat}"
        )));
    }
    let s = (2.0 * chihat).sqrt();
    let l = p.lambda();
    Ok([l / s, l * (qhat + 1.0) / s, p.a() * l * qhat / s])
}

fn check_qhat(qhat: f64, p: &ScadParams) -> Result<()> {
    p.check_curvature(1.0 / qhat)
}

/// `x*` as a function of `z`; see [`xstar`].
fn xstar_profile(qhat: f64, chihat: f64, p: &ScadParams) -> OddPiecewiseLinear {
    let (l, c) = (p.lambda(), p.concavity());
    let s = chihat.sqrt();
    let transit = qhat - c;
    OddPiecewiseLinear {
        knots: vec![l / s, l * (qhat + 1.0) / s, p.a() * l * qhat / s],
        pieces: vec![
            (0.0, 0.0),
            (s / qhat, l / qhat),
            (s / transit, p.a() * l * c / transit),
            (s / qhat, 0.0),
        ],
    }
}

/// Minimizer of `Q̂x²/2 − √χ̂·z·x + J(x)`.
///
/// The transit branch is `(h − aλ/(a−1)) / (Q̂ − 1/(a−1))`; it needs
/// `Q̂ > 1/(a−1)`.
pub fn xstar(z: f64, qhat: f64, chihat: f64, p: &ScadParams) -> Result<f64> {
    thresholds(qhat, chihat, p)?;
    check_qhat(qhat, p)?;
    let h = chihat.sqrt() * z;
    let (l, a, c) = (p.lambda(), p.a(), p.concavity());
    let w = h.abs();
    let mag = if w <= l {
        0.0
    } else if w <= l * (qhat + 1.0) {
        (w - l) / qhat
    } else if w <= a * l * qhat {
        (w - a * l * c) / (qhat - c)
    } else {
        w / qhat
    };
    Ok(mag.copysign(h))
}

/// One sweep of the order-parameter equations at fixed conjugates.
fn order_update(qhat: f64, chihat: f64, alpha: f64, p: &ScadParams) -> Result<(f64, f64)> {
    check_qhat(qhat, p)?;
    let prof = xstar_profile(qhat, chihat, p);
    let transit_gain = 1.0 / (qhat - p.concavity());
    let chi = prof.piece_weighted(|j| match j {
        0 => 0.0,
        2 => transit_gain,
        _ => 1.0 / qhat,
    });
    Ok((prof.second_moment() / alpha, chi / alpha))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SaddleOptions {
    /// Weight on the previous `(Q, χ)`.
    pub damping: f64,
    /// Stop once every saddle-point residual is below this.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SaddleOptions {
    fn default() -> Self {
        Self {
            damping: 0.5,
            tol: 1e-10,
            max_iter: 100_000,
        }
    }
}

/// Solves the RS saddle point by damped iteration on `(Q, χ)`, starting
/// from the zero estimator `Q = χ = 0`.
///
/// Undamped, this iteration is exactly density evolution under
/// `V = χ`, `E = Q + σ_y²`.
pub fn rs_saddle_solve(alpha: f64, sigma_y: f64, p: &ScadParams, opts: &SaddleOptions) -> Result<RsSaddle> {
    if !(alpha > 0.0 && sigma_y > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need alpha > 0 and sigma_y > 0, got {alpha}, {sigma_y}"
        )));
    }
    if !(opts.tol > 0.0) || !(0.0..1.0).contains(&opts.damping) {
        return Err(Error::InvalidParameter(format!(
            "need tol > 0 and damping in [0, 1), got {}, {}",
            opts.tol, opts.damping
        )));
    }
    let d = opts.damping;
    let (mut q, mut chi) = (0.0, 0.0);
    for it in 0..opts.max_iter {
        let s = RsSaddle::from_order(q, chi, sigma_y, p, it)?;
        let (nq, nchi) = order_update(s.qhat, s.chihat, alpha, p)?;
        if (nq - q).abs() < opts.tol && (nchi - chi).abs() < opts.tol {
            return Ok(s);
        }
        q = (1.0 - d) * nq + d * q;
        chi = (1.0 - d) * nchi + d * chi;
        if !(q.is_finite() && chi.is_finite()) {
            break;
        }
    }
    Err(Error::NonConvergence {
        what: "RS saddle iteration",
        iterations: opts.max_iter,
    })
}

/// Fraction of nonzero coefficients, `erfc(θ₁)`.
pub fn rho(s: &RsSaddle) -> f64 {
    erfc(s.theta1)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtCondition {
    pub rs_stable: bool,
    pub lhs: f64,
    /// Probability of the transit region, `erfc(θ₂) − erfc(θ₃)`.
    pub gamma: f64,
}

/// de Almeida–Thouless check:
/// `ρ/α + ((Q̂/(Q̂ − 1/(a−1)))² − 1)·γ/α <= 1`.
pub fn at_condition(s: &RsSaddle, alpha: f64, p: &ScadParams) -> Result<AtCondition> {
    check_qhat(s.qhat, p)?;
    let gamma = erfc(s.theta2) - erfc(s.theta3);
    let gain = s.qhat / (s.qhat - p.concavity());
    let lhs = rho(s) / alpha + (gain * gain - 1.0) * gamma / alpha;
    Ok(AtCondition {
        rs_stable: lhs <= 1.0,
        lhs,
        gamma,
    })
}

/// RS stability at `a`, treating a failed saddle solve as unstable.
fn stable_at(alpha: f64, sigma_y: f64, lambda: f64, a: f64, opts: &SaddleOptions) -> Result<bool> {
    let p = ScadParams::new(lambda, a)?;
    match rs_saddle_solve(alpha, sigma_y, &p, opts) {
        Ok(s) => Ok(at_condition(&s, alpha, &p)?.rs_stable),
        Err(Error::DegenerateCurvature { .. } | Error::NonConvergence { .. }) => Ok(false),
        Err(e) => Err(e),
    }
}

/// Critical `a` separating the RSB phase (small `a`) from the RS phase,
/// by bisection until the bracket is narrower than `tol`.
pub fn phase_boundary(alpha: f64, sigma_y: f64, lambda: f64, a_bracket: (f64, f64), tol: f64) -> Result<f64> {
    let (mut lo, mut hi) = a_bracket;
    if !(lo > 1.0 && hi > lo && tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need 1 < low < high and tol > 0, got ({lo}, {hi}), {tol}"
        )));
    }
    let opts = SaddleOptions::default();
    let lo_stable = stable_at(alpha, sigma_y, lambda, lo, &opts)?;
    let hi_stable = stable_at(alpha, sigma_y, lambda, hi, &opts)?;
    if lo_stable == hi_stable {
        return Err(Error::NoSignChange { low: lo, high: hi });
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if stable_at(alpha, sigma_y, lambda, mid, &opts)? == lo_stable {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// RS free energy per observation:
///
/// ```text
/// f = (Q + σ_y²)/(2(1+χ)) − (QQ̂ − χχ̂)/2 + (1/α) ∫Dz min_x {Q̂x²/2 − √χ̂ z x + J(x)}
/// ```
///
/// This is the ground-state energy density `(1/M){½‖y − Ax‖² + ΣJ(x_i)}`.
pub fn rs_free_energy(s: &RsSaddle, alpha: f64, sigma_y: f64, p: &ScadParams) -> Result<f64> {
    check_qhat(s.qhat, p)?;
    let (l, a, c) = (p.lambda(), p.a(), p.concavity());
    let (qh, sq) = (s.qhat, s.chihat.sqrt());
    let ch = s.chihat;
    let d = qh - c;
    let prof = xstar_profile(qh, ch, p);
    let one_body = prof.even_quadratic(|j| match j {
        0 => [0.0, 0.0, 0.0],
        1 => [-l * l / (2.0 * qh), l * sq / qh, -ch / (2.0 * qh)],
        2 => {
            let shift = a * l * c;
            [
                -shift * shift / (2.0 * d) - c * l * l / 2.0,
                shift * sq / d,
                -ch / (2.0 * d),
            ]
        }
        _ => [(a + 1.0) * l * l / 2.0, 0.0, -ch / (2.0 * qh)],
    });
    let noise = sigma_y * sigma_y;
    Ok((s.q + noise) / (2.0 * (1.0 + s.chi)) - (s.q * qh - s.chi * ch) / 2.0 + one_body / alpha)
}

/// Average penalty per observation, `(1/α) ∫Dz J(x*)`, in closed form.
pub fn rs_penalty_density(s: &RsSaddle, alpha: f64, p: &ScadParams) -> Result<f64> {
    check_qhat(s.qhat, p)?;
    let (l, a, c) = (p.lambda(), p.a(), p.concavity());
    let prof = xstar_profile(s.qhat, s.chihat, p);
    // J(x) on each piece with x = slope*z - offset, z >= 0
    let per_piece = |j: usize| -> [f64; 3] {
        let (m, o) = prof.pieces[j];
        match j {
            0 => [0.0, 0.0, 0.0],
            1 => [-l * o, l * m, 0.0],
            2 => {
                // −c(x² − 2aλx + λ²)/2
                let x2 = [o * o, -2.0 * m * o, m * m];
                let x1 = [-o, m, 0.0];
                [
                    -c * (x2[0] - 2.0 * a * l * x1[0] + l * l) / 2.0,
                    -c * (x2[1] - 2.0 * a * l * x1[1]) / 2.0,
                    -c * x2[2] / 2.0,
                ]
            }
            _ => [p.plateau(), 0.0, 0.0],
        }
    };
    Ok(prof.even_quadratic(per_piece) / alpha)
}

/// The RS representation error `E‖y − Ax‖²/M`, which equals `χ̂`.
pub fn representation_error_rs(s: &RsSaddle) -> f64 {
    s.chihat
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RdValue {
    pub rho_over_alpha: f64,
    pub err: f64,
    pub rs_stable: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RdPoint {
    pub lambda: f64,
    pub value: Result<RdValue>,
}

/// Sparsity against representation error along a `λ` grid at fixed `a`.
/// Failures are recorded per point.
pub fn rate_distortion_curve(
    alpha: f64,
    sigma_y: f64,
    a: f64,
    lambda_grid: &[f64],
    opts: &SaddleOptions,
) -> Result<Vec<RdPoint>> {
    if lambda_grid.is_empty() {
        return Err(Error::InvalidParameter("empty lambda grid".into()));
    }
    Ok(lambda_grid
        .iter()
        .map(|&lambda| {
            let value = ScadParams::new(lambda, a).and_then(|p| {
                let s = rs_saddle_solve(alpha, sigma_y, &p, opts)?;
                Ok(RdValue {
                    rho_over_alpha: rho(&s) / alpha,
                    err: representation_error_rs(&s),
                    rs_stable: at_condition(&s, alpha, &p)?.rs_stable,
                })
            });
            RdPoint { lambda, value }
        })
        .collect())
}
