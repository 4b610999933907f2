//! Shared helpers for the integration suites: a tridiagonal linear-system
//! oracle for the walk's boundary-value equations, and random parameter
//! generators with fixed seeds.

// Each test binary compiles this module separately and uses a subset of it.
#![allow(dead_code)]

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use ruinwalk::{validate_params, Regime, WalkParams};

/// Solve a tridiagonal system by the Thomas algorithm.
/// `sub[i]` multiplies `x[i-1]`, `diag[i]` multiplies `x[i]`, `sup[i]`
/// multiplies `x[i+1]`; `sub[0]` and `sup[last]` are ignored.
pub fn solve_tridiagonal(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    assert!(n >= 1 && sub.len() == n && sup.len() == n && rhs.len() == n);
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = sup[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let m = diag[i] - sub[i] * c[i - 1];
        c[i] = sup[i] / m;
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / m;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}

/// Absorption probability at the lower barrier of `[0, n]` for every state,
/// from the interior balance `(1-r) x_i = p x_{i+1} + q x_{i-1}` with
/// boundary values `x_0 = 1`, `x_n = 0`.
pub fn absorb_lower_by_solve(w: &WalkParams, n: usize) -> Vec<f64> {
    let interior = n - 1;
    let mut sub = vec![-w.q(); interior];
    let mut sup = vec![-w.p(); interior];
    let diag = vec![1.0 - w.r(); interior];
    let mut rhs = vec![0.0; interior];
    rhs[0] = w.q(); // x_0 = 1 folded into the right-hand side
    sub[0] = 0.0;
    sup[interior - 1] = 0.0;
    let mut x = vec![0.0; n + 1];
    x[0] = 1.0;
    let sol = solve_tridiagonal(&sub, &diag, &sup, &rhs);
    x[1..n].copy_from_slice(&sol);
    x
}

/// Mean time before absorption on `[0, n]` for every state, from
/// `(1-r) m_i = 1 + p m_{i+1} + q m_{i-1}`, `m_0 = m_n = 0`.  The in-place
/// absorbing transition counts as one step, which this equation encodes.
pub fn mean_time_by_solve(w: &WalkParams, n: usize) -> Vec<f64> {
    let interior = n - 1;
    let mut sub = vec![-w.q(); interior];
    let mut sup = vec![-w.p(); interior];
    let diag = vec![1.0 - w.r(); interior];
    let rhs = vec![1.0; interior];
    sub[0] = 0.0;
    sup[interior - 1] = 0.0;
    let mut m = vec![0.0; n + 1];
    let sol = solve_tridiagonal(&sub, &diag, &sup, &rhs);
    m[1..n].copy_from_slice(&sol);
    m
}

/// Expected visit counts to each transient state of `[0, n]` starting from
/// `i0`, from `x_j = delta(j, i0) + p x_{j-1} + q x_{j+1} + r x_j`.
pub fn visits_by_solve(w: &WalkParams, n: usize, i0: usize) -> Vec<f64> {
    let interior = n - 1;
    let mut sub = vec![-w.p(); interior];
    let mut sup = vec![-w.q(); interior];
    let diag = vec![1.0 - w.r(); interior];
    let mut rhs = vec![0.0; interior];
    if (1..n).contains(&i0) {
        rhs[i0 - 1] = 1.0;
    }
    sub[0] = 0.0;
    sup[interior - 1] = 0.0;
    let mut x = vec![0.0; n + 1];
    let sol = solve_tridiagonal(&sub, &diag, &sup, &rhs);
    x[1..n].copy_from_slice(&sol);
    x
}

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// A random parameter set in the requested regime.
pub fn random_params(rng: &mut StdRng, regime: Regime) -> WalkParams {
    loop {
        let p: f64 = rng.gen_range(0.05..1.0);
        let q: f64 = rng.gen_range(0.05..1.0);
        let r: f64 = rng.gen_range(0.0..0.5);
        let s: f64 = match regime {
            Regime::Strict => rng.gen_range(0.01..0.5),
            _ => 0.0,
        };
        let sum = p + q + r + s;
        let (p, q, r, s) = match regime {
            Regime::DegenerateNull => {
                let pq = (p + q) / 2.0;
                (pq / sum, pq / sum, (r + s) / sum, 0.0)
            }
            _ => (p / sum, q / sum, r / sum, s / sum),
        };
        let w = validate_params(p, q, r, s).unwrap();
        if w.regime() == regime {
            return w;
        }
    }
}

/// A random parameter set in any regime (weighted toward Strict).
pub fn random_params_any(rng: &mut StdRng) -> WalkParams {
    let regime = match rng.gen_range(0..4u32) {
        0 | 1 => Regime::Strict,
        2 => Regime::NullFree,
        _ => Regime::DegenerateNull,
    };
    random_params(rng, regime)
}

pub fn assert_close(actual: f64, expected: f64, tol: f64, what: &str) {
    assert!(
        (actual - expected).abs() <= tol,
        "{what}: {actual} vs {expected} (diff {:.3e}, tol {tol:.3e})",
        (actual - expected).abs()
    );
}

pub fn assert_rel_close(actual: f64, expected: f64, tol: f64, what: &str) {
    let scale = actual.abs().max(expected.abs()).max(1e-300);
    assert!(
        (actual - expected).abs() / scale <= tol,
        "{what}: {actual} vs {expected} (rel {:.3e}, tol {tol:.3e})",
        (actual - expected).abs() / scale
    );
}
