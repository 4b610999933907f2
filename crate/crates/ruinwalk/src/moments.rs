//! Barrier absorption-time generating functions and their factorial
//! moments.
//!
//! All moments here are partial (defective) expectations
//! `E[T_u (T_u−1) ⋯ (T_u−k+1) · 1{absorbed at u}]`; divide by the
//! corresponding absorption probability for the conditional moment.

use serde::{Deserialize, Serialize};

use crate::absorption::absorb_interval;
use crate::walk_core::{Regime, StableRoots, WalkParams};
use crate::{Error, Result};

/// Which absorbing barrier of `[0, N]` a moment refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Barrier {
    Lower,
    Upper,
}

/// How a moment value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedForm,
    FiniteDifference,
}

/// A factorial moment of a barrier absorption time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BarrierMomentReport {
    pub barrier: Barrier,
    pub order: u32,
    /// Partial expectation `E[T_u^{(order)} · 1{absorbed at u}]`.
    pub value: f64,
    pub method: Method,
}

fn check_interval(n: i64, i0: i64) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidInterval(0, n));
    }
    if i0 < 0 || i0 > n {
        return Err(Error::StartOutsideInterval(i0, 0, n));
    }
    Ok(())
}

/// The defective PGFs `(X_0(z), X_N(z))` of the barrier absorption times on
/// `[0, N]`.  At `z = 1` they reduce to the absorption probabilities.
pub fn barrier_time_pgf(params: &WalkParams, n: i64, i0: i64, z: f64) -> Result<(f64, f64)> {
    check_interval(n, i0)?;
    if !(z > 0.0 && z <= 1.0) {
        return Err(Error::InvalidArgument(format!("z = {z} outside (0, 1]")));
    }
    if z == 1.0 {
        let probs = absorb_interval(params, 0, n, i0)?;
        return Ok((probs.at_lower, probs.at_upper));
    }
    let roots = StableRoots::at(params, z)?;
    let denom = roots.one_m_rho_pow(n);
    let x0 = roots.pow_xi1(-i0) * roots.one_m_rho_pow(n - i0) / denom;
    let xn = roots.pow_xi2(n - i0) * roots.one_m_rho_pow(i0) / denom;
    Ok((x0, xn))
}

/// First factorial moment `E[T_u · 1{absorbed at u}]` on `[0, N]`, closed
/// form in every regime.
pub fn barrier_first_moment(
    params: &WalkParams,
    n: i64,
    i0: i64,
    barrier: Barrier,
) -> Result<BarrierMomentReport> {
    check_interval(n, i0)?;
    let value = match barrier {
        Barrier::Lower => lower_first_moment(params, n, i0)?,
        // The mirrored walk maps the upper barrier onto the lower one.
        Barrier::Upper => lower_first_moment(&params.mirrored(), n, n - i0)?,
    };
    Ok(BarrierMomentReport {
        barrier,
        order: 1,
        value,
        method: Method::ClosedForm,
    })
}

fn lower_first_moment(params: &WalkParams, n: i64, i0: i64) -> Result<f64> {
    if i0 == 0 || i0 == n {
        // Either absorbed at time 0 at this barrier, or at the opposite one;
        // the partial expectation vanishes both ways.
        return Ok(0.0);
    }
    if params.regime() == Regime::DegenerateNull {
        let (nn, i) = (n as f64, i0 as f64);
        return Ok(i * (nn - i) * (2.0 * nn - i) / (6.0 * params.p() * nn));
    }
    // E[T_0] = zeta xi1^{-i0} [ i0 (1 + rho^{N-i0}) / (1 - rho^N)
    //                           + 2N (rho^N - rho^{N-i0}) / (1 - rho^N)^2 ]
    let roots = StableRoots::at(params, 1.0)?;
    let zeta = roots.zeta.ok_or(Error::InfiniteMoment)?;
    let g_n = roots.one_m_rho_pow(n);
    let term1 = i0 as f64 * (1.0 + roots.pow_rho(n - i0)) / g_n;
    // rho^N - rho^{N-i0} = rho^{N-i0} (rho^{i0} - 1)
    let term2 =
        2.0 * n as f64 * roots.pow_rho(n - i0) * -roots.one_m_rho_pow(i0) / (g_n * g_n);
    Ok(zeta * roots.pow_xi1(-i0) * (term1 + term2))
}

/// Partial first and second factorial moments of the absorption time at the
/// barrier of `[0, ∞)`.
pub fn halfline_time_moments(params: &WalkParams, i0: i64) -> Result<(f64, f64)> {
    if i0 < 0 {
        return Err(Error::StartBelowBarrier(i0, 0));
    }
    if i0 == 0 {
        return Ok((0.0, 0.0));
    }
    let finite = match params.regime() {
        Regime::Strict => true,
        Regime::NullFree => params.q() > params.p(),
        Regime::DegenerateNull => false,
    };
    if !finite {
        return Err(Error::InfiniteMoment);
    }
    let roots = StableRoots::at(params, 1.0)?;
    let zeta = roots.zeta.ok_or(Error::InfiniteMoment)?;
    let (p, q, r) = (params.p(), params.q(), params.r());
    let et = i0 as f64 * zeta * roots.pow_xi1(-i0);
    let et2 = et * (i0 as f64 * zeta + (r * (1.0 - r) + 4.0 * p * q) * zeta * zeta - 1.0);
    Ok((et, et2))
}

/// Factorial moment of order `k` via one-sided finite differences of the
/// barrier PGF at `z = 1`, with two Richardson extrapolation steps.  The
/// numerical oracle for the closed forms above, and the only route to
/// interval moments of order >= 2.
pub fn pgf_derivative_fd(
    params: &WalkParams,
    n: i64,
    i0: i64,
    barrier: Barrier,
    order: u32,
) -> Result<BarrierMomentReport> {
    check_interval(n, i0)?;
    if !(1..=4).contains(&order) {
        return Err(Error::InvalidArgument(format!(
            "finite-difference order {order} outside 1..=4"
        )));
    }
    let f = |z: f64| -> Result<f64> {
        let (x0, xn) = barrier_time_pgf(params, n, i0, z)?;
        Ok(match barrier {
            Barrier::Lower => x0,
            Barrier::Upper => xn,
        })
    };
    // Wider base steps for higher orders keep h^{-k} rounding noise small.
    let h = [2.5e-4, 1e-3, 5e-3, 2e-2][(order - 1) as usize];
    let k = order as i32;
    let backward = |h: f64| -> Result<f64> {
        let mut acc = 0.0;
        let mut binom = 1.0f64;
        for j in 0..=k {
            acc += binom * f(1.0 - j as f64 * h)?;
            binom *= -((k - j) as f64) / (j + 1) as f64;
        }
        Ok(acc / h.powi(k))
    };
    let d0 = backward(h)?;
    let d1 = backward(h / 2.0)?;
    let d2 = backward(h / 4.0)?;
    let d3 = backward(h / 8.0)?;
    let r1a = 2.0 * d1 - d0;
    let r1b = 2.0 * d2 - d1;
    let r1c = 2.0 * d3 - d2;
    let coarse = (4.0 * r1b - r1a) / 3.0;
    let value = (4.0 * r1c - r1b) / 3.0;
    // The drift between successive extrapolants bounds the truncation error
    // of the finer one.
    let err = (value - coarse).abs();
    let rel = err / value.abs().max(1e-300);
    if value.abs() > 1e-12 && rel > 1e-5 {
        return Err(Error::StencilUnstable(rel));
    }
    Ok(BarrierMomentReport {
        barrier,
        order,
        value,
        method: Method::FiniteDifference,
    })
}
