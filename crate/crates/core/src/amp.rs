//! SCAD-AMP: the approximate message passing fixed-point iteration for
//! i.i.d. Gaussian designs with variance `1/M`.
//!
//! One step, with `Σ̃² = 1 + V` shared by every coordinate:
//!
//! ```text
//! V  <- sum(nu) / M
//! ω  <- A a - V/(V+1) (y - ω)
//! R  <- a + Aᵀ(y - ω)
//! a  <- prox_mean(1 + V, R)        (damped)
//! nu <- prox_variance(1 + V, R)    (damped)
//! ```
//!
//! The `V/(V+1)` term is the Onsager correction; it is never damped. `R`
//! is formed without dividing by the column norms: with `1/M` variance
//! entries the columns have unit norm asymptotically. At a fixed point the
//! estimate is an exact stationary point of the penalized least-squares
//! objective either way.

use crate::error::{Error, Result};
use crate::gauss::OddPiecewiseLinear;
use crate::instance::Instance;
use crate::penalty::{prox_mean_unchecked, prox_variance_unchecked, vector_penalty, ScadParams};
use nalgebra::DVector;

#[derive(Debug, Clone, PartialEq)]
pub struct AmpState {
    /// Damped posterior means.
    pub a: DVector<f64>,
    /// Undamped thresholding output of the last step. Equal to `a` at a
    /// fixed point, but with exact zeros where `a` only decays towards zero.
    pub thresholded: DVector<f64>,
    /// Posterior variances.
    pub nu: DVector<f64>,
    /// Onsager-corrected residual means.
    pub omega: DVector<f64>,
    /// Mean posterior variance `sum(nu) / M` used by the last step.
    pub v: f64,
    pub t: usize,
}

impl AmpState {
    /// `a = 0`, `nu = 0`, `ω = y`: the first step then sees `R = Aᵀy`.
    pub fn cold(inst: &Instance) -> Self {
        Self {
            a: DVector::zeros(inst.n()),
            thresholded: DVector::zeros(inst.n()),
            nu: DVector::zeros(inst.n()),
            omega: inst.y.clone(),
            v: 0.0,
            t: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub enum AmpInit {
    #[default]
    Zeros,
    Warm(AmpState),
}

#[derive(Debug, Clone, PartialEq)]
pub struct AmpOptions {
    /// Weight on the previous iterate for `a` and `nu`, in `[0, 1)`.
    pub damping: f64,
    /// Stop once `max_i |a_i(t) - a_i(t-1)| < tol`.
    pub tol: f64,
    pub max_iter: usize,
    pub init: AmpInit,
}

impl Default for AmpOptions {
    fn default() -> Self {
        Self {
            damping: 0.5,
            tol: 1e-8,
            max_iter: 5000,
            init: AmpInit::Zeros,
        }
    }
}

impl AmpOptions {
    fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.damping) {
            return Err(Error::InvalidParameter(format!(
                "damping must lie in [0, 1), got {}",
                self.damping
            )));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "tol must be positive, got {}",
                self.tol
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidParameter("max_iter must be at least 1".into()));
        }
        Ok(())
    }
}

/// Why [`run_amp`] stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Converged,
    MaxIterations,
    /// `1 + V` reached `a - 1`, so the thresholding map stopped being defined.
    CurvatureBreakdown,
    /// The iterate became non-finite.
    Diverged,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AmpResult {
    pub estimate: DVector<f64>,
    pub converged: bool,
    pub termination: Termination,
    pub iterations: usize,
    pub energy: f64,
    /// Nonzero count over `M`.
    pub sparsity_ratio: f64,
    pub rep_error: f64,
    pub final_v: f64,
    pub state: AmpState,
}

fn check_dims(state: &AmpState, inst: &Instance) -> Result<()> {
    for (expected, got) in [
        (inst.n(), state.a.len()),
        (inst.n(), state.thresholded.len()),
        (inst.n(), state.nu.len()),
        (inst.m(), state.omega.len()),
    ] {
        if expected != got {
            return Err(Error::DimensionMismatch { expected, got });
        }
    }
    Ok(())
}

/// One full AMP update.
pub fn amp_step(state: &AmpState, inst: &Instance, p: &ScadParams, opts: &AmpOptions) -> Result<AmpState> {
    check_dims(state, inst)?;
    let m = inst.m() as f64;
    let v = state.nu.sum() / m;
    let sigma2 = 1.0 + v;
    p.check_curvature(sigma2)?;

    let onsager = v / (v + 1.0);
    let mut omega = &inst.design * &state.a;
    omega.axpy(-onsager, &(&inst.y - &state.omega), 1.0);
    let resid = &inst.y - &omega;
    let mut r = inst.design.tr_mul(&resid);
    r += &state.a;

    let d = opts.damping;
    let thresholded = r.map(|ri| prox_mean_unchecked(sigma2, ri, p));
    let a = (1.0 - d) * &thresholded + d * &state.a;
    let nu = DVector::from_fn(inst.n(), |i, _| {
        (1.0 - d) * prox_variance_unchecked(sigma2, r[i], p) + d * state.nu[i]
    });
    Ok(AmpState {
        a,
        thresholded,
        nu,
        omega,
        v,
        t: state.t + 1,
    })
}

/// Iterates [`amp_step`] until the estimate stops moving or `max_iter`.
///
/// Non-convergence is an outcome, reported through `converged` and
/// `termination`; only invalid inputs are errors.
pub fn run_amp(inst: &Instance, p: &ScadParams, opts: &AmpOptions) -> Result<AmpResult> {
    opts.validate()?;
    let mut state = match &opts.init {
        AmpInit::Zeros => AmpState::cold(inst),
        AmpInit::Warm(s) => s.clone(),
    };
    check_dims(&state, inst)?;

    let mut termination = Termination::MaxIterations;
    let mut iterations = 0;
    for _ in 0..opts.max_iter {
        let next = match amp_step(&state, inst, p, opts) {
            Ok(s) => s,
            Err(Error::DegenerateCurvature { .. }) => {
                termination = Termination::CurvatureBreakdown;
                break;
            }
            Err(e) => return Err(e),
        };
        iterations += 1;
        let change = (&next.a - &state.a).amax();
        state = next;
        if !change.is_finite() {
            termination = Termination::Diverged;
            break;
        }
        if change < opts.tol {
            termination = Termination::Converged;
            break;
        }
    }

    let estimate = state.thresholded.clone();
    Ok(AmpResult {
        energy: energy_density(&estimate, inst, p)?,
        sparsity_ratio: sparsity_ratio(estimate.as_slice(), inst.m()),
        rep_error: empirical_rep_error(&estimate, inst)?,
        final_v: state.nu.sum() / inst.m() as f64,
        converged: termination == Termination::Converged,
        termination,
        iterations,
        estimate,
        state,
    })
}

/// `(1/M) { ½‖y − Ax‖² + Σ J(x_i) }`.
pub fn energy_density(x: &DVector<f64>, inst: &Instance, p: &ScadParams) -> Result<f64> {
    let resid = residual(x, inst)?;
    Ok((0.5 * resid.norm_squared() + vector_penalty(x.as_slice(), p)) / inst.m() as f64)
}

/// Number of exactly nonzero entries divided by `M`.
pub fn sparsity_ratio(x: &[f64], m: usize) -> f64 {
    x.iter().filter(|v| **v != 0.0).count() as f64 / m as f64
}

/// `‖y − Ax‖² / M` for this sample.
pub fn empirical_rep_error(x: &DVector<f64>, inst: &Instance) -> Result<f64> {
    Ok(residual(x, inst)?.norm_squared() / inst.m() as f64)
}

fn residual(x: &DVector<f64>, inst: &Instance) -> Result<DVector<f64>> {
    if x.len() != inst.n() {
        return Err(Error::DimensionMismatch {
            expected: inst.n(),
            got: x.len(),
        });
    }
    Ok(&inst.y - &inst.design * x)
}

/// Local stability of an AMP fixed point with macroscopic state `(V, E)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalStability {
    pub stable: bool,
    /// Growth factor of the squared perturbation per iteration.
    pub lhs: f64,
}

/// Linear stability of the fixed point: perturbations of `R` grow by
/// `(1/α) ∫Dz (∂ prox_mean(1+V, R)/∂R)²` at `R = z√E`, stable iff `<= 1`.
///
/// The slope is 1 on the shrinkage and unbiased pieces and
/// `1 / (1 − (1+V)/(a−1))` on the transit piece, so the integral is a sum of
/// Gaussian tail probabilities.
pub fn amp_local_stability(v: f64, e: f64, alpha: f64, p: &ScadParams) -> Result<LocalStability> {
    if !(v >= 0.0 && e >= 0.0 && alpha > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need V >= 0, E >= 0, alpha > 0; got V = {v}, E = {e}, alpha = {alpha}"
        )));
    }
    let sigma2 = 1.0 + v;
    p.check_curvature(sigma2)?;
    if e == 0.0 {
        return Ok(LocalStability { stable: true, lhs: 0.0 });
    }
    let transit_slope = 1.0 / (1.0 - sigma2 * p.concavity());
    let profile = field_profile(sigma2, e.sqrt(), p);
    let mean_sq_slope = profile.piece_weighted(|j| match j {
        0 => 0.0,
        2 => transit_slope * transit_slope,
        _ => 1.0,
    });
    let lhs = mean_sq_slope / alpha;
    Ok(LocalStability {
        stable: lhs <= 1.0,
        lhs,
    })
}

/// `prox_mean(sigma2, z·sqrt_e)` as a function of standard normal `z`.
///
/// Pieces, in order: zero, shrinkage, transit, unbiased.
pub(crate) fn field_profile(sigma2: f64, sqrt_e: f64, p: &ScadParams) -> OddPiecewiseLinear {
    let (l, a, c) = (p.lambda(), p.a(), p.concavity());
    let transit_gain = 1.0 / (1.0 / sigma2 - c);
    OddPiecewiseLinear {
        knots: vec![l * sigma2 / sqrt_e, l * (1.0 + sigma2) / sqrt_e, a * l / sqrt_e],
        pieces: vec![
            (0.0, 0.0),
            (sqrt_e, l * sigma2),
            (transit_gain * sqrt_e / sigma2, transit_gain * a * l * c),
            (sqrt_e, 0.0),
        ],
    }
}
