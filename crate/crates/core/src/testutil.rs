//! Numerical oracles shared by the unit tests.

use std::f64::consts::PI;

/// Gauss–Legendre nodes and weights on [-1, 1], by Newton iteration on P_n.
pub fn legendre_rule(n: usize) -> Vec<(f64, f64)> {
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

fn adapt(f: &dyn Fn(f64) -> f64, rule: &[(f64, f64)], lo: f64, hi: f64, whole: f64, tol: f64, depth: usize) -> f64 {
    let mid = 0.5 * (lo + hi);
    let (l, r) = (panel(f, rule, lo, mid), panel(f, rule, mid, hi));
    if depth == 0 || (l + r - whole).abs() < tol {
        return l + r;
    }
    adapt(f, rule, lo, mid, l, tol, depth - 1) + adapt(f, rule, mid, hi, r, tol, depth - 1)
}

/// `∫Dz f(z)` by adaptive 64-node Gauss–Legendre on [-13, 13]. Knows
/// nothing about where `f` has kinks.
pub fn gaussian_expectation(f: impl Fn(f64) -> f64) -> f64 {
    let rule = legendre_rule(64);
    let g = |z: f64| f(z) * (-0.5 * z * z).exp() / (2.0 * PI).sqrt();
    let (lo, hi) = (-13.0, 13.0);
    let whole = panel(&g, &rule, lo, hi);
    adapt(&g, &rule, lo, hi, whole, 1e-15, 45)
}

#[test]
fn rule_integrates_polynomials() {
    let rule = legendre_rule(64);
    assert!((rule.iter().map(|r| r.1).sum::<f64>() - 2.0).abs() < 1e-13);
    let x10: f64 = rule.iter().map(|&(x, w)| w * x.powi(10)).sum();
    assert!((x10 - 2.0 / 11.0).abs() < 1e-14);
    assert!((gaussian_expectation(|z| z.powi(4)) - 3.0).abs() < 1e-12);
    assert!((gaussian_expectation(|z| if z > 0.3 { 1.0 } else { 0.0 }) - crate::gauss::normal_sf(0.3)).abs() < 1e-12);
}
