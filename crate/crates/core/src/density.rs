//! Density evolution: the two-number recursion that AMP follows on average.
//!
//! With `R = z√E`, `z ~ N(0, 1)`:
//!
//! ```text
//! V' = (1/α) ∫Dz prox_variance(1 + V, z√E)
//! E' = (1/α) ∫Dz prox_mean(1 + V, z√E)² + σ_y²
//! ```

use crate::amp::{field_profile, Termination};
use crate::error::{Error, Result};
use crate::penalty::ScadParams;

/// Macroscopic AMP state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MacroState {
    /// Mean posterior variance.
    pub v: f64,
    /// Variance of the effective field `R`.
    pub e: f64,
}

impl MacroState {
    /// The state of the all-zero estimator.
    pub fn cold(sigma_y: f64) -> Self {
        Self {
            v: 0.0,
            e: sigma_y * sigma_y,
        }
    }
}

pub fn de_step(s: MacroState, alpha: f64, sigma_y: f64, p: &ScadParams) -> Result<MacroState> {
    if !(alpha > 0.0 && sigma_y >= 0.0 && s.v >= 0.0 && s.e >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need alpha > 0, sigma_y >= 0, V >= 0, E >= 0; got {alpha}, {sigma_y}, {}, {}",
            s.v, s.e
        )));
    }
    let sigma2 = 1.0 + s.v;
    p.check_curvature(sigma2)?;
    let noise = sigma_y * sigma_y;
    if s.e == 0.0 {
        return Ok(MacroState { v: 0.0, e: noise });
    }
    let profile = field_profile(sigma2, s.e.sqrt(), p);
    let transit_var = 1.0 / (1.0 / sigma2 - p.concavity());
    let mean_var = profile.piece_weighted(|j| match j {
        0 => 0.0,
        2 => transit_var,
        _ => sigma2,
    });
    Ok(MacroState {
        v: mean_var / alpha,
        e: profile.second_moment() / alpha + noise,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeOptions {
    /// Stop when `|ΔV| + |ΔE| < tol`.
    pub tol: f64,
    pub max_iter: usize,
    /// Weight on the previous state, in `[0, 1)`. Zero is plain iteration.
    pub damping: f64,
    /// Starting point; defaults to the cold state `(0, σ_y²)`.
    pub init: Option<MacroState>,
}

impl Default for DeOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iter: 100_000,
            damping: 0.0,
            init: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeResult {
    pub state: MacroState,
    pub converged: bool,
    pub termination: Termination,
    /// Every visited state, starting with the initial one.
    pub trajectory: Vec<MacroState>,
}

impl DeResult {
    pub fn iterations(&self) -> usize {
        self.trajectory.len() - 1
    }
}

/// Iterates [`de_step`] to a fixed point. A curvature breakdown or running
/// out of iterations ends the run with `converged = false`.
pub fn de_fixed_point(alpha: f64, sigma_y: f64, p: &ScadParams, opts: &DeOptions) -> Result<DeResult> {
    if !(opts.tol > 0.0) || !(0.0..1.0).contains(&opts.damping) {
        return Err(Error::InvalidParameter(format!(
            "need tol > 0 and damping in [0, 1); got {}, {}",
            opts.tol, opts.damping
        )));
    }
    let mut s = opts.init.unwrap_or(MacroState::cold(sigma_y));
    let mut trajectory = vec![s];
    let mut termination = Termination::MaxIterations;
    let d = opts.damping;
    for _ in 0..opts.max_iter {
        let raw = match de_step(s, alpha, sigma_y, p) {
            Ok(n) => n,
            Err(Error::DegenerateCurvature { .. }) => {
                termination = Termination::CurvatureBreakdown;
                break;
            }
            Err(e) => return Err(e),
        };
        let next = MacroState {
            v: (1.0 - d) * raw.v + d * s.v,
            e: (1.0 - d) * raw.e + d * s.e,
        };
        let change = (next.v - s.v).abs() + (next.e - s.e).abs();
        s = next;
        trajectory.push(s);
        if !change.is_finite() {
            termination = Termination::Diverged;
            break;
        }
        if change < opts.tol {
            termination = Termination::Converged;
            break;
        }
    }
    Ok(DeResult {
        state: s,
        converged: termination == Termination::Converged,
        termination,
        trajectory,
    })
}
