//! Cyclic coordinate descent for the SCAD objective
//! `½‖y − Ax‖² + Σ J(x_i)`, multi-start divergence of its fixed points,
//! the empirical uniqueness threshold `a*`, and the eigenvalue-based
//! sufficient condition for a unique minimizer.
//!
//! Each coordinate update is the exact minimizer along that coordinate.
//! With column norm `n_j = ‖A_j‖²` and `z_j = A_jᵀr + n_j x_j` it solves
//! `min_t (t − z_j/n_j)²/(2/n_j) + J(t)`. For unit columns and `a > 2`
//! this is the three-branch Breheny–Lee rule.

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::penalty::{scalar_minimizer, ScadParams};
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};
use rand_pcg::Pcg64;

#[derive(Debug, Clone, PartialEq)]
pub struct CdState {
    pub x: DVector<f64>,
    /// Residual `y − Ax`, maintained incrementally.
    pub r: DVector<f64>,
    pub sweep: usize,
}

impl CdState {
    pub fn new(inst: &Instance, x: DVector<f64>) -> Result<Self> {
        if x.len() != inst.n() {
            return Err(Error::DimensionMismatch {
                expected: inst.n(),
                got: x.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("initial point must be finite".into()));
        }
        let r = &inst.y - &inst.design * &x;
        Ok(Self { x, r, sweep: 0 })
    }
}

/// Squared column norms of the design.
pub fn column_norms(inst: &Instance) -> Vec<f64> {
    inst.design.column_iter().map(|c| c.norm_squared()).collect()
}

/// Exact minimization along coordinate `j`; returns `|Δx_j|`.
///
/// `norms` are the squared column norms from [`column_norms`].
pub fn cd_coordinate_update(j: usize, s: &mut CdState, inst: &Instance, p: &ScadParams, norms: &[f64]) -> f64 {
    let col = inst.design.column(j);
    let n = norms[j];
    let old = s.x[j];
    let new = if n > 0.0 {
        let z = col.dot(&s.r) + n * old;
        scalar_minimizer(1.0 / n, z / n, p)
    } else {
        0.0
    };
    let delta = new - old;
    if delta != 0.0 {
        s.r.axpy(-delta, &col, 1.0);
        s.x[j] = new;
    }
    delta.abs()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CdOptions {
    /// Stop after a sweep whose largest coordinate change is below this.
    pub tol: f64,
    pub max_sweeps: usize,
}

impl Default for CdOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_sweeps: 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CdResult {
    pub x: DVector<f64>,
    pub converged: bool,
    pub sweeps: usize,
}

/// One pass over the coordinates in the given order; returns the largest change.
pub fn cd_sweep(
    s: &mut CdState,
    inst: &Instance,
    p: &ScadParams,
    norms: &[f64],
    order: impl Iterator<Item = usize>,
) -> f64 {
    let mut biggest = 0.0f64;
    for j in order {
        biggest = biggest.max(cd_coordinate_update(j, s, inst, p, norms));
    }
    s.sweep += 1;
    biggest
}

/// Full sweeps `j = 0..N` until the largest per-sweep change is below `tol`.
pub fn run_cd(inst: &Instance, p: &ScadParams, init: DVector<f64>, opts: &CdOptions) -> Result<CdResult> {
    let norms = column_norms(inst);
    let mut s = CdState::new(inst, init)?;
    Ok(run_cd_from(&mut s, inst, p, &norms, opts))
}

fn run_cd_from(s: &mut CdState, inst: &Instance, p: &ScadParams, norms: &[f64], opts: &CdOptions) -> CdResult {
    let mut converged = false;
    for _ in 0..opts.max_sweeps {
        let change = cd_sweep(s, inst, p, norms, 0..inst.n());
        if !change.is_finite() {
            break;
        }
        if change < opts.tol {
            converged = true;
            break;
        }
    }
    CdResult {
        x: s.x.clone(),
        converged,
        sweeps: s.sweep,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Divergence {
    /// Mean pairwise squared distance between converged fixed points.
    pub d: f64,
    pub converged: usize,
    pub requested: usize,
}

/// Runs CD from `m` random starts with i.i.d. `N(0, 1)` entries drawn from
/// `Pcg64(seed)` and averages `‖x_k − x_l‖²` over converged pairs.
pub fn multistart_divergence(
    inst: &Instance,
    p: &ScadParams,
    m: usize,
    seed: u64,
    opts: &CdOptions,
) -> Result<Divergence> {
    if m < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 starts, got {m}")));
    }
    let norms = column_norms(inst);
    let mut rng = Pcg64::seed_from_u64(seed);
    let mut ends = Vec::with_capacity(m);
    for _ in 0..m {
        let init = DVector::from_fn(inst.n(), |_, _| StandardNormal.sample(&mut rng));
        let mut s = CdState::new(inst, init)?;
        let res = run_cd_from(&mut s, inst, p, &norms, opts);
        if res.converged {
            ends.push(res.x);
        }
    }
    let k = ends.len();
    if k < 2 {
        return Err(Error::InsufficientRuns {
            converged: k,
            requested: m,
        });
    }
    let mut total = 0.0;
    for i in 0..k {
        for j in i + 1..k {
            total += (&ends[i] - &ends[j]).norm_squared();
        }
    }
    Ok(Divergence {
        d: 2.0 * total / (k * (k - 1)) as f64,
        converged: k,
        requested: m,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AStarOptions {
    pub bracket: (f64, f64),
    /// Number of random starts per trial `a`.
    pub starts: usize,
    pub seed: u64,
    /// `d` below this counts as a unique fixed point.
    pub d_tol: f64,
    /// Bisection stops once the bracket is narrower than this.
    pub a_tol: f64,
    pub cd: CdOptions,
}

impl Default for AStarOptions {
    fn default() -> Self {
        Self {
            bracket: (1.01, 100.0),
            starts: 20,
            seed: 0,
            d_tol: 1e-8,
            a_tol: 1e-2,
            cd: CdOptions::default(),
        }
    }
}

fn unique_at(inst: &Instance, lambda: f64, a: f64, o: &AStarOptions) -> Result<bool> {
    let p = ScadParams::new(lambda, a)?;
    Ok(multistart_divergence(inst, &p, o.starts, o.seed, &o.cd)?.d < o.d_tol)
}

/// Smallest `a` at which all random starts reach the same fixed point,
/// by bisection on `[d < d_tol]`.
///
/// If the fixed point is already unique at the bottom of the bracket, the
/// bottom is returned. Non-uniqueness at the top is [`Error::NoSignChange`].
pub fn a_star(inst: &Instance, lambda: f64, o: &AStarOptions) -> Result<f64> {
    let (mut lo, mut hi) = o.bracket;
    if !(lo > 1.0 && hi > lo && o.a_tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need 1 < low < high and a_tol > 0, got ({lo}, {hi}), {}",
            o.a_tol
        )));
    }
    if unique_at(inst, lambda, lo, o)? {
        return Ok(lo);
    }
    if !unique_at(inst, lambda, hi, o)? {
        return Err(Error::NoSignChange { low: lo, high: hi });
    }
    while hi - lo > o.a_tol {
        let mid = 0.5 * (lo + hi);
        if unique_at(inst, lambda, mid, o)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Smallest eigenvalue of `A_Kᵀ A_K` for the columns in `support`.
pub fn min_gram_eigenvalue(design: &DMatrix<f64>, support: &[usize]) -> Result<f64> {
    if support.is_empty() {
        return Err(Error::InvalidParameter("empty support".into()));
    }
    if let Some(&j) = support.iter().find(|&&j| j >= design.ncols()) {
        return Err(Error::DimensionMismatch {
            expected: design.ncols(),
            got: j + 1,
        });
    }
    let cols = design.select_columns(support.iter());
    let gram = cols.tr_mul(&cols);
    Ok(SymmetricEigen::new(gram).eigenvalues.min())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sufficient {
    /// `a > 1 + 1/c_min` with `c_min > 0`.
    pub holds: bool,
    pub c_min: f64,
    /// Support at the reduced `λ − dλ`.
    pub support: Vec<usize>,
    pub d_lambda: f64,
}

impl Sufficient {
    /// The smallest `a` the condition certifies, `1 + 1/c_min`.
    pub fn a_bound(&self) -> f64 {
        if self.c_min > 0.0 {
            1.0 + 1.0 / self.c_min
        } else {
            f64::INFINITY
        }
    }
}

fn support_of(x: &DVector<f64>) -> Vec<usize> {
    x.iter()
        .enumerate()
        .filter(|(_, v)| **v != 0.0)
        .map(|(i, _)| i)
        .collect()
}

/// Sufficient condition for a unique minimizer at `(λ, a)`.
///
/// Starting from the CD solution at `λ` (zero start), `λ` is lowered in
/// steps of `λ/1000` with warm-started CD until the support grows. If it
/// grows by more than one, the step is bisected to find a support exactly
/// one larger; failing that, the first larger support is used.
pub fn sufficient_condition(inst: &Instance, lambda: f64, a: f64, opts: &CdOptions) -> Result<Sufficient> {
    let norms = column_norms(inst);
    let solve = |l: f64, from: &DVector<f64>| -> Result<DVector<f64>> {
        let p = ScadParams::new(l, a)?;
        let mut s = CdState::new(inst, from.clone())?;
        let res = run_cd_from(&mut s, inst, &p, &norms, opts);
        if !res.converged {
            return Err(Error::NonConvergence {
                what: "coordinate descent",
                iterations: res.sweeps,
            });
        }
        Ok(res.x)
    };
    let base_x = solve(lambda, &DVector::zeros(inst.n()))?;
    let base = support_of(&base_x).len();
    let step = lambda / 1000.0;

    let (mut prev_l, mut prev_x) = (lambda, base_x);
    let mut found = None;
    for k in 1..1000 {
        let l = lambda - k as f64 * step;
        let x = solve(l, &prev_x)?;
        let size = support_of(&x).len();
        if size == base + 1 {
            found = Some((l, x));
            break;
        }
        if size > base + 1 {
            // bisect (l, prev_l) for a support of exactly base + 1
            let (mut lo, mut hi, mut hi_x) = (l, prev_l, prev_x.clone());
            let mut best = (l, x);
            for _ in 0..40 {
                let mid = 0.5 * (lo + hi);
                let xm = solve(mid, &hi_x)?;
                let sm = support_of(&xm).len();
                if sm == base + 1 {
                    best = (mid, xm);
                    break;
                }
                if sm > base + 1 {
                    lo = mid;
                    best = (mid, xm);
                } else {
                    hi = mid;
                    hi_x = xm;
                }
            }
            found = Some(best);
            break;
        }
        prev_l = l;
        prev_x = x;
    }
    let (l, x) = found.ok_or(Error::NoSignChange {
        low: step,
        high: lambda,
    })?;
    let support = support_of(&x);
    let c_min = min_gram_eigenvalue(&inst.design, &support)?;
    Ok(Sufficient {
        holds: c_min > 0.0 && a > 1.0 + 1.0 / c_min,
        c_min,
        support,
        d_lambda: lambda - l,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::amp::energy_density;
    use crate::instance::sample_instance;
    use crate::penalty::{prox_mean, single_body_oracle, soft_threshold};
    use rand::RngExt;

    fn p(l: f64, a: f64) -> ScadParams {
        ScadParams::new(l, a).unwrap()
    }

    /// One column `e_1` scaled to norm one, so `z_1 = y_1` at `x = 0`.
    fn unit_instance(y1: f64) -> Instance {
        let mut design = DMatrix::zeros(2, 3);
        design[(0, 0)] = 1.0;
        design[(1, 1)] = 0.6;
        design[(0, 2)] = 0.8;
        let y = DVector::from_vec(vec![y1, 0.0]);
        Instance::from_parts(y, design, 1.0, 0).unwrap()
    }

    fn breheny_lee(z: f64, q: &ScadParams) -> f64 {
        let (l, a) = (q.lambda(), q.a());
        if z.abs() <= 2.0 * l {
            soft_threshold(z, l)
        } else if z.abs() <= a * l {
            soft_threshold(z, a * l / (a - 1.0)) / (1.0 - 1.0 / (a - 1.0))
        } else {
            z
        }
    }

    #[test]
    fn unit_column_examples() {
        let q = p(1.0, 3.0);
        for (y1, want) in [(0.0, 0.0), (2.5, 2.0), (5.0, 5.0)] {
            let inst = unit_instance(y1);
            let norms = column_norms(&inst);
            let mut s = CdState::new(&inst, DVector::zeros(3)).unwrap();
            let r0 = s.r.clone();
            cd_coordinate_update(0, &mut s, &inst, &q, &norms);
            assert_eq!(s.x[0], want);
            if want == 0.0 {
                assert_eq!(s.r, r0);
            }
            let brute = single_body_oracle(1.0, y1, &q, 1e-9);
            assert!((brute - want).abs() < 1e-6);
        }
    }

    #[test]
    fn unit_update_is_breheny_lee_and_prox() {
        let mut rng = Pcg64::seed_from_u64(17);
        for _ in 0..10_000 {
            let q = p(rng.random_range(0.05..3.0), rng.random_range(2.05..30.0));
            let z = rng.random_range(-40.0..40.0);
            let got = scalar_minimizer(1.0, z, &q);
            assert!((got - breheny_lee(z, &q)).abs() < 1e-12 * (1.0 + z.abs()));
            assert_eq!(got, prox_mean(1.0, z, &q).unwrap());
        }
    }

    #[test]
    fn update_minimizes_along_the_coordinate() {
        let inst = sample_instance(30, 60, 1.0, 3).unwrap();
        let norms = column_norms(&inst);
        for &(l, a) in &[(0.3, 1.5), (0.5, 3.0), (1.0, 10.0)] {
            let q = p(l, a);
            let mut s = CdState::new(&inst, DVector::from_fn(60, |i, _| (i as f64 * 0.37).sin())).unwrap();
            for j in 0..60 {
                cd_coordinate_update(j, &mut s, &inst, &q, &norms);
                let e0 = energy_density(&s.x, &inst, &q).unwrap();
                for dt in [-1e-3, 1e-3, -0.5, 0.5] {
                    let mut x = s.x.clone();
                    x[j] += dt;
                    assert!(energy_density(&x, &inst, &q).unwrap() >= e0 - 1e-14);
                }
            }
        }
    }

    #[test]
    fn objective_never_increases_and_residual_is_exact() {
        for seed in 0..20 {
            let inst = sample_instance(40, 80, 1.0, seed).unwrap();
            let q = p(0.4 + 0.05 * seed as f64, 2.5 + seed as f64 * 0.3);
            let norms = column_norms(&inst);
            let mut rng = Pcg64::seed_from_u64(seed);
            let init = DVector::from_fn(80, |_, _| rng.sample::<f64, _>(StandardNormal));
            let mut s = CdState::new(&inst, init).unwrap();
            let mut e = energy_density(&s.x, &inst, &q).unwrap();
            for _ in 0..30 {
                cd_sweep(&mut s, &inst, &q, &norms, 0..80);
                let next = energy_density(&s.x, &inst, &q).unwrap();
                assert!(next <= e + 1e-13);
                e = next;
                let exact = &inst.y - &inst.design * &s.x;
                assert!((&s.r - exact).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn run_cd_edge_cases() {
        let inst = sample_instance(40, 80, 1.0, 1).unwrap();
        let big = 10.0 * inst.design.tr_mul(&inst.y).amax();
        let r = run_cd(&inst, &p(big, 3.7), DVector::zeros(80), &CdOptions::default()).unwrap();
        assert!(r.converged);
        assert_eq!(r.x.amax(), 0.0);
        assert_eq!(r.sweeps, 1);

        let q = p(0.8, 6.0);
        let first = run_cd(&inst, &q, DVector::zeros(80), &CdOptions::default()).unwrap();
        assert!(first.converged);
        let again = run_cd(&inst, &q, first.x.clone(), &CdOptions::default()).unwrap();
        assert_eq!(again.sweeps, 1);
        assert!((&again.x - &first.x).amax() < 1e-10);

        // reversed order does not move a converged point
        let norms = column_norms(&inst);
        let mut s = CdState::new(&inst, first.x.clone()).unwrap();
        cd_sweep(&mut s, &inst, &q, &norms, (0..80).rev());
        assert!((&s.x - &first.x).amax() < 1e-9);

        assert!(run_cd(&inst, &q, DVector::zeros(79), &CdOptions::default()).is_err());
        let mut bad = DVector::zeros(80);
        bad[3] = f64::NAN;
        assert!(run_cd(&inst, &q, bad, &CdOptions::default()).is_err());
    }

    #[test]
    fn divergence_regimes() {
        let inst = sample_instance(50, 100, 1.0, 4).unwrap();
        assert!(multistart_divergence(&inst, &p(1.0, 5.0), 1, 0, &CdOptions::default()).is_err());
        let convex = multistart_divergence(&inst, &p(1.0, 1e6), 8, 0, &CdOptions::default()).unwrap();
        assert!(convex.d < 1e-10);
        assert_eq!(convex.converged, 8);
        let rough = multistart_divergence(&inst, &p(0.1, 1.2), 8, 0, &CdOptions::default()).unwrap();
        assert!(rough.d > 1e-4, "{}", rough.d);
    }

    #[test]
    fn a_star_bracket_behaviour() {
        let inst = sample_instance(20, 60, 1.0, 5).unwrap();
        let big = 10.0 * inst.design.tr_mul(&inst.y).amax();
        let o = AStarOptions {
            starts: 6,
            ..Default::default()
        };
        assert_eq!(a_star(&inst, big, &o).unwrap(), o.bracket.0);
        let narrow = AStarOptions {
            bracket: (1.01, 1.02),
            ..o.clone()
        };
        assert!(matches!(a_star(&inst, 0.05, &narrow), Err(Error::NoSignChange { .. })));
        let a = a_star(&inst, 0.5, &o).unwrap();
        assert!(a > 1.01 && a < 100.0);
        let p_hi = p(0.5, a);
        assert!(multistart_divergence(&inst, &p_hi, 6, 0, &o.cd).unwrap().d < 1e-8);
    }

    /// Cyclic Jacobi eigenvalue oracle for symmetric matrices.
    fn jacobi_min_eigen(mut m: DMatrix<f64>) -> f64 {
        let n = m.nrows();
        for _ in 0..100 {
            let off: f64 = (0..n)
                .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
                .map(|(i, j)| m[(i, j)].powi(2))
                .sum();
            if off < 1e-30 {
                break;
            }
            for pi in 0..n {
                for qi in pi + 1..n {
                    if m[(pi, qi)].abs() < 1e-300 {
                        continue;
                    }
                    let theta = (m[(qi, qi)] - m[(pi, pi)]) / (2.0 * m[(pi, qi)]);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let t = if theta == 0.0 { 1.0 } else { t };
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let (mkp, mkq) = (m[(k, pi)], m[(k, qi)]);
                        m[(k, pi)] = c * mkp - s * mkq;
                        m[(k, qi)] = s * mkp + c * mkq;
                    }
                    for k in 0..n {
                        let (mpk, mqk) = (m[(pi, k)], m[(qi, k)]);
                        m[(pi, k)] = c * mpk - s * mqk;
                        m[(qi, k)] = s * mpk + c * mqk;
                    }
                }
            }
        }
        (0..n).map(|i| m[(i, i)]).fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn gram_eigenvalue_cases() {
        let inst = unit_instance(1.0);
        assert!((min_gram_eigenvalue(&inst.design, &[0]).unwrap() - 1.0).abs() < 1e-15);
        let ortho = DMatrix::from_row_slice(3, 2, &[0.6, 0.0, 0.8, 0.0, 0.0, 1.0]);
        assert!((min_gram_eigenvalue(&ortho, &[0, 1]).unwrap() - 1.0).abs() < 1e-14);
        assert!(min_gram_eigenvalue(&ortho, &[]).is_err());
        assert!(min_gram_eigenvalue(&ortho, &[2]).is_err());
        let rnd = sample_instance(40, 100, 1.0, 8).unwrap();
        for k in [2usize, 5, 12, 30] {
            let support: Vec<usize> = (0..k).map(|i| (i * 7) % 100).collect();
            let cols = rnd.design.select_columns(support.iter());
            let oracle = jacobi_min_eigen(cols.tr_mul(&cols));
            assert!((min_gram_eigenvalue(&rnd.design, &support).unwrap() - oracle).abs() < 1e-10);
        }
    }

    #[test]
    fn sufficient_condition_grows_support_by_one() {
        let inst = sample_instance(50, 100, 1.0, 6).unwrap();
        let base = run_cd(&inst, &p(1.0, 8.0), DVector::zeros(100), &CdOptions::default()).unwrap();
        let s = sufficient_condition(&inst, 1.0, 8.0, &CdOptions::default()).unwrap();
        assert_eq!(s.support.len(), support_of(&base.x).len() + 1);
        assert!(s.d_lambda > 0.0 && s.d_lambda < 1.0);
        assert!(s.c_min > 0.0);
        assert_eq!(s.holds, 8.0 > s.a_bound());
    }
}
