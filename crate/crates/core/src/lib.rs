//! Approximate message passing, density evolution and replica analysis for
//! SCAD-penalized linear regression in the underdetermined regime.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod amp;
pub mod cd;
pub mod density;
pub mod error;
pub mod gauss;
pub mod instance;
pub mod penalty;
pub mod replica;

#[cfg(test)]
mod testutil;

pub use amp::{run_amp, AmpInit, AmpOptions, AmpResult, AmpState, Termination};
pub use cd::{a_star, multistart_divergence, run_cd, sufficient_condition, AStarOptions, CdOptions, CdResult};
pub use density::{de_fixed_point, de_step, DeOptions, DeResult, MacroState};
pub use error::{Error, Result};
pub use instance::{center_instance, sample_instance, Instance};
pub use penalty::{prox_mean, prox_variance, ScadParams};
pub use replica::{
    at_condition, phase_boundary, rate_distortion_curve, rho, rs_free_energy, rs_saddle_solve, AtCondition, RsSaddle,
    SaddleOptions,
};
