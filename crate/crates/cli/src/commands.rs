//! The six experiments, each a grid of independent points.

use crate::config::{Experiment, Settings};
use crate::sweep::{Point, Sweep};
use scad_amp::amp::amp_local_stability;
use scad_amp::replica::representation_error_rs;
use scad_amp::*;

/// Shortest representation that reads back to the same `f64`.
fn num(x: f64) -> String {
    format!("{x:?}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// Mean and standard error, summed in the given order.
pub fn mean_se(xs: &[f64]) -> (Option<f64>, Option<f64>) {
    if xs.is_empty() {
        return (None, None);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (Some(mean), None);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (Some(mean), Some((var / n).sqrt()))
}

fn termination(t: Termination) -> &'static str {
    match t {
        Termination::Converged => "converged",
        Termination::MaxIterations => "max_iterations",
        Termination::CurvatureBreakdown => "curvature_breakdown",
        Termination::Diverged => "diverged",
    }
}

fn error_status(e: &Error) -> &'static str {
    match e {
        Error::DegenerateCurvature { .. } => "degenerate_curvature",
        Error::NonConvergence { .. } => "no_convergence",
        Error::NoSignChange { .. } => "no_sign_change",
        Error::InsufficientRuns { .. } => "insufficient_runs",
        _ => "error",
    }
}

/// Row-major position of `index` in a grid with the given extents.
fn unravel(mut index: usize, dims: &[usize]) -> Vec<usize> {
    let mut pos = vec![0; dims.len()];
    for (k, &d) in dims.iter().enumerate().rev() {
        pos[k] = index % d;
        index /= d;
    }
    pos
}

fn params(lambda: f64, a: f64) -> ScadParams {
    ScadParams::new(lambda, a).expect("grid values are validated")
}

pub fn build(s: Settings) -> Box<dyn Sweep> {
    match s.experiment {
        Experiment::AmpSweep => Box::new(AmpSweep(s)),
        Experiment::DeFixedPoint => Box::new(DeSweep(s)),
        Experiment::RsSweep => Box::new(RsSweep(s)),
        Experiment::PhaseDiagram => Box::new(PhaseDiagram(s)),
        Experiment::RateDistortion => Box::new(RateDistortion(s)),
        Experiment::CdCompare => Box::new(CdCompare(s)),
    }
}

struct AmpSweep(Settings);

impl Sweep for AmpSweep {
    fn columns(&self) -> &'static [&'static str] {
        &[
            "kind",
            "alpha",
            "lambda",
            "a",
            "seed",
            "termination",
            "iterations",
            "sparsity_ratio",
            "rep_error",
            "energy",
            "converged_seeds",
            "sparsity_ratio_se",
            "rep_error_se",
            "energy_se",
        ]
    }

    fn points(&self) -> usize {
        self.0.alphas.len() * self.0.lambdas.len() * self.0.a_values.len()
    }

    fn compute(&self, index: usize) -> Point {
        let s = &self.0;
        let pos = unravel(index, &[s.alphas.len(), s.lambdas.len(), s.a_values.len()]);
        let (alpha, lambda, a) = (s.alphas[pos[0]], s.lambdas[pos[1]], s.a_values[pos[2]]);
        let m = s.rows_for(alpha).expect("validated");
        let p = params(lambda, a);
        let opts = AmpOptions {
            damping: s.damping,
            tol: s.tol,
            max_iter: s.max_iter,
            init: AmpInit::Zeros,
        };
        let lead = format!("{},{},{}", num(alpha), num(lambda), num(a));
        let mut rows = Vec::with_capacity(s.num_seeds + 1);
        let (mut sparsity, mut err, mut energy) = (Vec::new(), Vec::new(), Vec::new());
        for k in 0..s.num_seeds as u64 {
            let seed = s.base_seed.wrapping_add(k);
            let res = sample_instance(m, s.n, s.sigma_y, seed).and_then(|inst| run_amp(&inst, &p, &opts));
            match res {
                Ok(r) => {
                    rows.push(format!(
                        "seed,{lead},{seed},{},{},{},{},{},,,,",
                        termination(r.termination),
                        r.iterations,
                        num(r.sparsity_ratio),
                        num(r.rep_error),
                        num(r.energy)
                    ));
                    if r.converged {
                        sparsity.push(r.sparsity_ratio);
                        err.push(r.rep_error);
                        energy.push(r.energy);
                    }
                }
                Err(e) => rows.push(format!("seed,{lead},{seed},{},,,,,,,,", error_status(&e))),
            }
        }
        let (ms, ss) = mean_se(&sparsity);
        let (me, se) = mean_se(&err);
        let (mn, sn) = mean_se(&energy);
        rows.push(format!(
            "summary,{lead},,,,{},{},{},{},{},{},{}",
            opt(ms),
            opt(me),
            opt(mn),
            sparsity.len(),
            opt(ss),
            opt(se),
            opt(sn)
        ));
        let failure = sparsity
            .is_empty()
            .then(|| format!("AMP converged for no seed at alpha={alpha} lambda={lambda} a={a}"));
        Point { rows, failure }
    }
}

struct DeSweep(Settings);

impl Sweep for DeSweep {
    fn columns(&self) -> &'static [&'static str] {
        &[
            "alpha",
            "lambda",
            "a",
            "termination",
            "iterations",
            "v",
            "e",
            "amp_lhs",
            "amp_stable",
        ]
    }

    fn points(&self) -> usize {
        self.0.alphas.len() * self.0.lambdas.len() * self.0.a_values.len()
    }

    fn compute(&self, index: usize) -> Point {
        let s = &self.0;
        let pos = unravel(index, &[s.alphas.len(), s.lambdas.len(), s.a_values.len()]);
        let (alpha, lambda, a) = (s.alphas[pos[0]], s.lambdas[pos[1]], s.a_values[pos[2]]);
        let p = params(lambda, a);
        let lead = format!("{},{},{}", num(alpha), num(lambda), num(a));
        let opts = DeOptions {
            tol: s.tol,
            max_iter: s.max_iter,
            damping: s.damping,
            init: None,
        };
        let de = match de_fixed_point(alpha, s.sigma_y, &p, &opts) {
            Ok(de) => de,
            Err(e) => {
                return Point {
                    rows: vec![format!("{lead},{},,,,,", error_status(&e))],
                    failure: Some(format!("density evolution at {lead}: {e}")),
                }
            }
        };
        let stability = if de.converged {
            amp_local_stability(de.state.v, de.state.e, alpha, &p).ok()
        } else {
            None
        };
        let row = format!(
            "{lead},{},{},{},{},{},{}",
            termination(de.termination),
            de.iterations(),
            num(de.state.v),
            num(de.state.e),
            opt(stability.map(|st| st.lhs)),
            stability.map(|st| st.stable.to_string()).unwrap_or_default()
        );
        Point {
            rows: vec![row],
            failure: (!de.converged).then(|| format!("density evolution did not converge at {lead}")),
        }
    }
}

struct RsSweep(Settings);

impl RsSweep {
    fn saddle_options(&self) -> SaddleOptions {
        SaddleOptions {
            damping: self.0.damping,
            tol: self.0.tol,
            max_iter: self.0.max_iter,
        }
    }
}

impl Sweep for RsSweep {
    fn columns(&self) -> &'static [&'static str] {
        &[
            "alpha",
            "lambda",
            "a",
            "status",
            "iterations",
            "q",
            "chi",
            "qhat",
            "chihat",
            "rho_over_alpha",
            "err",
            "free_energy",
            "at_lhs",
            "at_stable",
        ]
    }

    fn points(&self) -> usize {
        self.0.alphas.len() * self.0.lambdas.len() * self.0.a_values.len()
    }

    fn compute(&self, index: usize) -> Point {
        let s = &self.0;
        let pos = unravel(index, &[s.alphas.len(), s.lambdas.len(), s.a_values.len()]);
        let (alpha, lambda, a) = (s.alphas[pos[0]], s.lambdas[pos[1]], s.a_values[pos[2]]);
        let p = params(lambda, a);
        let lead = format!("{},{},{}", num(alpha), num(lambda), num(a));
        let solved = rs_saddle_solve(alpha, s.sigma_y, &p, &self.saddle_options()).and_then(|sd| {
            let at = at_condition(&sd, alpha, &p)?;
            let f = rs_free_energy(&sd, alpha, s.sigma_y, &p)?;
            Ok((sd, at, f))
        });
        match solved {
            Ok((sd, at, f)) => Point {
                rows: vec![format!(
                    "{lead},ok,{},{},{},{},{},{},{},{},{},{}",
                    sd.iterations,
                    num(sd.q),
                    num(sd.chi),
                    num(sd.qhat),
                    num(sd.chihat),
                    num(rho(&sd) / alpha),
                    num(representation_error_rs(&sd)),
                    num(f),
                    num(at.lhs),
                    at.rs_stable
                )],
                failure: None,
            },
            Err(e) => Point {
                rows: vec![format!("{lead},{},,,,,,,,,,", error_status(&e))],
                failure: Some(format!("no RS saddle at {lead}: {e}")),
            },
        }
    }
}

struct PhaseDiagram(Settings);

impl Sweep for PhaseDiagram {
    fn columns(&self) -> &'static [&'static str] {
        &[
            "alpha",
            "lambda",
            "a_critical",
            "status",
            "reference_a",
            "reference_at_stable",
        ]
    }

    fn points(&self) -> usize {
        self.0.alphas.len() * self.0.lambdas.len()
    }

    fn compute(&self, index: usize) -> Point {
        let s = &self.0;
        let pos = unravel(index, &[s.alphas.len(), s.lambdas.len()]);
        let (alpha, lambda) = (s.alphas[pos[0]], s.lambdas[pos[1]]);
        let lead = format!("{},{}", num(alpha), num(lambda));
        let opts = SaddleOptions {
            damping: s.damping,
            tol: s.tol,
            max_iter: s.max_iter,
        };
        let p = params(lambda, s.reference_a);
        // no RS saddle counts as unstable
        let reference = rs_saddle_solve(alpha, s.sigma_y, &p, &opts)
            .and_then(|sd| at_condition(&sd, alpha, &p))
            .is_ok_and(|at| at.rs_stable);
        let tail = format!("{},{reference}", num(s.reference_a));
        match phase_boundary(alpha, s.sigma_y, lambda, s.a_bracket, s.boundary_tol) {
            Ok(ac) => Point {
                rows: vec![format!("{lead},{},ok,{tail}", num(ac))],
                failure: None,
            },
            Err(e) => Point {
                rows: vec![format!("{lead},,{},{tail}", error_status(&e))],
                failure: Some(format!("boundary unresolved at alpha={alpha} lambda={lambda}: {e}")),
            },
        }
    }
}

struct RateDistortion(Settings);

impl Sweep for RateDistortion {
    fn columns(&self) -> &'static [&'static str] {
        &["alpha", "a", "lambda", "status", "rho_over_alpha", "err", "at_stable"]
    }

    fn points(&self) -> usize {
        self.0.alphas.len() * self.0.a_values.len()
    }

    fn compute(&self, index: usize) -> Point {
        let s = &self.0;
        let pos = unravel(index, &[s.alphas.len(), s.a_values.len()]);
        let (alpha, a) = (s.alphas[pos[0]], s.a_values[pos[1]]);
        let opts = SaddleOptions {
            damping: s.damping,
            tol: s.tol,
            max_iter: s.max_iter,
        };
        let curve = rate_distortion_curve(alpha, s.sigma_y, a, &s.lambdas, &opts).expect("settings are validated");
        let mut failed = 0;
        let rows = curve
            .iter()
            .map(|pt| {
                let lead = format!("{},{},{}", num(alpha), num(a), num(pt.lambda));
                match &pt.value {
                    Ok(v) => format!("{lead},ok,{},{},{}", num(v.rho_over_alpha), num(v.err), v.rs_stable),
                    Err(e) => {
                        failed += 1;
                        format!("{lead},{},,,", error_status(e))
                    }
                }
            })
            .collect();
        Point {
            rows,
            failure: (failed > 0)
                .then(|| format!("{failed} lambda points without an RS saddle at alpha={alpha} a={a}")),
        }
    }
}

struct CdCompare(Settings);

impl Sweep for CdCompare {
    fn columns(&self) -> &'static [&'static str] {
        &[
            "kind",
            "alpha",
            "lambda",
            "seed",
            "status",
            "a_star",
            "a_sufficient",
            "instances",
            "failed",
            "a_star_mean",
            "a_star_se",
            "a_sufficient_mean",
            "a_sufficient_se",
            "a_replica_boundary",
        ]
    }

    fn points(&self) -> usize {
        self.0.alphas.len() * self.0.lambdas.len()
    }

    fn compute(&self, index: usize) -> Point {
        let s = &self.0;
        let pos = unravel(index, &[s.alphas.len(), s.lambdas.len()]);
        let (alpha, lambda) = (s.alphas[pos[0]], s.lambdas[pos[1]]);
        let m = s.rows_for(alpha).expect("validated");
        let lead = format!("{},{}", num(alpha), num(lambda));
        let cd = CdOptions {
            tol: s.tol,
            max_sweeps: s.max_iter,
        };
        let mut rows = Vec::with_capacity(s.num_seeds + 1);
        let (mut stars, mut bounds, mut failed) = (Vec::new(), Vec::new(), 0usize);
        for k in 0..s.num_seeds as u64 {
            let seed = s.base_seed.wrapping_add(k);
            let opts = AStarOptions {
                bracket: s.a_bracket,
                starts: s.starts,
                seed,
                a_tol: s.a_tol,
                cd: cd.clone(),
                ..Default::default()
            };
            let inst = sample_instance(m, s.n, s.sigma_y, seed);
            let star = inst
                .as_ref()
                .map_err(Clone::clone)
                .and_then(|i| a_star(i, lambda, &opts));
            let (status, a_suff) = match (&inst, &star) {
                (Ok(i), Ok(astar)) => match sufficient_condition(i, lambda, *astar, &cd) {
                    Ok(sc) if sc.c_min > 0.0 => ("ok", Some(sc.a_bound())),
                    Ok(_) => ("singular_support", None),
                    Err(e) => (error_status(&e), None),
                },
                (_, Err(e)) => (error_status(e), None),
                (Err(e), _) => (error_status(e), None),
            };
            if let Ok(astar) = star {
                stars.push(astar);
            }
            if let Some(b) = a_suff {
                bounds.push(b);
            }
            if status != "ok" {
                failed += 1;
            }
            rows.push(format!(
                "instance,{lead},{seed},{status},{},{},,,,,,,",
                opt(star.ok()),
                opt(a_suff)
            ));
        }
        let boundary = phase_boundary(alpha, s.sigma_y, lambda, (1.001, 1e3), s.boundary_tol).ok();
        let (sm, ss) = mean_se(&stars);
        let (bm, bs) = mean_se(&bounds);
        rows.push(format!(
            "summary,{lead},,,,,{},{failed},{},{},{},{},{}",
            s.num_seeds,
            opt(sm),
            opt(ss),
            opt(bm),
            opt(bs),
            opt(boundary)
        ));
        let failure = stars
            .is_empty()
            .then(|| format!("no instance produced a uniqueness threshold at alpha={alpha} lambda={lambda}"));
        Point { rows, failure }
    }
}
