//! Shared fixtures for the solver benchmarks.

use scad_amp::{sample_instance, Instance, ScadParams};

/// A seeded instance at ratio `M/N = 1/2`.
pub fn half_instance(n: usize, seed: u64) -> Instance {
    sample_instance(n / 2, n, 1.0, seed).expect("valid dimensions")
}

/// `(λ, a) = (1.5, 5)`, inside the replica-symmetric phase at `M/N = 1/2`.
pub fn rs_params() -> ScadParams {
    ScadParams::new(1.5, 5.0).expect("valid parameters")
}
