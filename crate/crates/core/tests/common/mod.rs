//! Oracles shared by the integration tests. Nothing here calls into the
//! closed-form machinery of the library.
#![allow(dead_code)]

use std::f64::consts::PI;

pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

fn legendre_rule(n: usize) -> Vec<(f64, f64)> {
    (0..n)
        .map(|k| {
            let mut x = (PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for j in 2..=n {
                    let j = j as f64;
                    (p0, p1) = (p1, ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j);
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            (x, 2.0 / ((1.0 - x * x) * dp * dp))
        })
        .collect()
}

fn panel(f: &dyn Fn(f64) -> f64, rule: &[(f64, f64)], lo: f64, hi: f64) -> f64 {
    let (mid, half) = (0.5 * (lo + hi), 0.5 * (hi - lo));
    rule.iter().map(|&(x, w)| half * w * f(mid + half * x)).sum()
}

fn adapt(f: &dyn Fn(f64) -> f64, rule: &[(f64, f64)], lo: f64, hi: f64, whole: f64, depth: usize) -> f64 {
    let mid = 0.5 * (lo + hi);
    let (l, r) = (panel(f, rule, lo, mid), panel(f, rule, mid, hi));
    if depth == 0 || (l + r - whole).abs() < 1e-15 {
        return l + r;
    }
    adapt(f, rule, lo, mid, l, depth - 1) + adapt(f, rule, mid, hi, r, depth - 1)
}

/// `∫Dz f(z)` by adaptive 64-node Gauss–Legendre on [-13, 13].
pub fn gaussian_expectation(f: impl Fn(f64) -> f64) -> f64 {
    let rule = legendre_rule(64);
    let g = |z: f64| f(z) * (-0.5 * z * z).exp() / (2.0 * PI).sqrt();
    let whole = panel(&g, &rule, -13.0, 13.0);
    adapt(&g, &rule, -13.0, 13.0, whole, 45)
}

/// Replica-symmetric solution for the ℓ1 penalty `λ|x|`, written directly
/// from the soft-threshold one-body problem. Returns `(ρ/α, err)`.
pub fn lasso_rs(alpha: f64, sigma_y: f64, lambda: f64) -> (f64, f64) {
    let sf = |t: f64| 0.5 * libm::erfc(t / 2f64.sqrt());
    let pdf = |t: f64| (-0.5 * t * t).exp() / (2.0 * PI).sqrt();
    let (mut q, mut chi) = (0.0f64, 0.0f64);
    for _ in 0..1_000_000 {
        let qhat = 1.0 / (1.0 + chi);
        let chihat = (q + sigma_y * sigma_y) / (1.0 + chi).powi(2);
        let t = lambda / chihat.sqrt();
        // E[(|z| - t)^2; |z| > t] and P(|z| > t)
        let tail2 = 2.0 * ((1.0 + t * t) * sf(t) - t * pdf(t));
        let p_on = 2.0 * sf(t);
        let nq = chihat * tail2 / (qhat * qhat * alpha);
        let nchi = p_on / (qhat * alpha);
        if (nq - q).abs() < 1e-14 && (nchi - chi).abs() < 1e-14 {
            return (p_on / alpha, chihat);
        }
        q = 0.5 * (q + nq);
        chi = 0.5 * (chi + nchi);
    }
    panic!("lasso RS iteration did not converge");
}

/// Brute-force minimizer of `J(x) + (x - r)^2 / (2 sigma2)` for the SCAD
/// penalty. Scans a grid for sign changes of the derivative, refines each
/// by bisection, then picks the lowest objective among the local minima.
pub fn scad_argmin(sigma2: f64, r: f64, lambda: f64, a: f64) -> f64 {
    let slope = |x: f64| {
        if x <= lambda {
            lambda
        } else if x <= a * lambda {
            (a * lambda - x) / (a - 1.0)
        } else {
            0.0
        }
    };
    let pen = |x: f64| {
        if x <= lambda {
            lambda * x
        } else if x <= a * lambda {
            (2.0 * a * lambda * x - x * x - lambda * lambda) / (2.0 * (a - 1.0))
        } else {
            lambda * lambda * (a + 1.0) / 2.0
        }
    };
    let w = r.abs();
    let grad = |x: f64| slope(x) + (x - w) / sigma2;
    let obj = |x: f64| pen(x) + (x - w) * (x - w) / (2.0 * sigma2);
    let mut minima = Vec::new();
    if grad(0.0) >= 0.0 {
        minima.push(0.0);
    }
    const GRID: usize = 4096;
    let step = w / GRID as f64;
    for k in 0..GRID {
        let (mut lo, mut hi) = (k as f64 * step, (k + 1) as f64 * step);
        if grad(lo) < 0.0 && grad(hi) >= 0.0 {
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if grad(mid) < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if hi - lo < 1e-14 * w.max(1.0) {
                    break;
                }
            }
            minima.push(0.5 * (lo + hi));
        }
    }
    let best = minima
        .into_iter()
        .fold(f64::NAN, |b, x| if b.is_nan() || obj(x) < obj(b) { x } else { b });
    best.copysign(r)
}

/// [`gaussian_expectation`] with the range also cut at `breaks`, for
/// integrands with jumps.
pub fn gaussian_expectation_split(f: impl Fn(f64) -> f64, breaks: &[f64]) -> f64 {
    let rule = legendre_rule(64);
    let g = |z: f64| f(z) * (-0.5 * z * z).exp() / (2.0 * PI).sqrt();
    let mut cuts: Vec<f64> = breaks.iter().copied().filter(|b| b.abs() < 13.0).collect();
    cuts.extend([-13.0, 13.0]);
    cuts.sort_by(f64::total_cmp);
    cuts.windows(2)
        .map(|w| adapt(&g, &rule, w[0], w[1], panel(&g, &rule, w[0], w[1]), 45))
        .sum()
}
