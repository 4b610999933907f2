//! Barrier absorption probabilities, the exit gauge `F_{a,b}` and expected
//! visit counts.
//!
//! For two barriers the probabilities are ratios of root powers,
//! `x_a = (ξ1^{b−i0} − ξ2^{b−i0}) / (ξ1^{b−a} − ξ2^{b−a})`; they are evaluated
//! here in the rearranged form `ξ1^{a−i0} (1 − ρ^{b−i0}) / (1 − ρ^{b−a})`
//! with `ρ = ξ2/ξ1`, which never overflows even for `N = 10^6`.

use crate::walk_core::{DomainKind, DomainSpec, Regime, StableRoots, WalkParams};
use crate::{Error, Result};

/// Where the probability mass of a two-barrier walk ends up.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarrierProbs {
    /// Absorption at the lower barrier `a`.
    pub at_lower: f64,
    /// Absorption at the upper barrier `b`.
    pub at_upper: f64,
    /// In-place absorption before either barrier (`s > 0` only).
    pub interior_mass: f64,
}

/// Absorption probabilities at the barriers of `[a, b]` starting from `i0`.
pub fn absorb_interval(params: &WalkParams, a: i64, b: i64, i0: i64) -> Result<BarrierProbs> {
    if a >= b {
        return Err(Error::InvalidInterval(a, b));
    }
    if i0 < a || i0 > b {
        return Err(Error::StartOutsideInterval(i0, a, b));
    }
    let probs = if i0 == a {
        BarrierProbs {
            at_lower: 1.0,
            at_upper: 0.0,
            interior_mass: 0.0,
        }
    } else if i0 == b {
        BarrierProbs {
            at_lower: 0.0,
            at_upper: 1.0,
            interior_mass: 0.0,
        }
    } else if params.regime() == Regime::DegenerateNull {
        let len = (b - a) as f64;
        BarrierProbs {
            at_lower: (b - i0) as f64 / len,
            at_upper: (i0 - a) as f64 / len,
            interior_mass: 0.0,
        }
    } else {
        let roots = StableRoots::at(params, 1.0)?;
        let denom = roots.one_m_rho_pow(b - a);
        let at_lower = roots.pow_xi1(a - i0) * roots.one_m_rho_pow(b - i0) / denom;
        let at_upper = roots.pow_xi2(b - i0) * roots.one_m_rho_pow(i0 - a) / denom;
        let interior_mass = if params.s() > 0.0 {
            (1.0 - at_lower - at_upper).max(0.0)
        } else {
            0.0
        };
        BarrierProbs {
            at_lower,
            at_upper,
            interior_mass,
        }
    };
    Ok(probs)
}

/// Absorption probability at barrier `a` of `[a, ∞)`: `ξ1^{a−i0}`.
pub fn absorb_halfline(params: &WalkParams, a: i64, i0: i64) -> Result<f64> {
    if i0 < a {
        return Err(Error::StartBelowBarrier(i0, a));
    }
    if params.regime() == Regime::DegenerateNull {
        return Ok(1.0);
    }
    let roots = StableRoots::at(params, 1.0)?;
    Ok(roots.pow_xi1(a - i0))
}

/// Absorption probability at barrier `b` of `(−∞, b]`: `ξ2^{b−i0}`.
pub fn absorb_leftline(params: &WalkParams, b: i64, i0: i64) -> Result<f64> {
    if i0 > b {
        return Err(Error::StartAboveBarrier(i0, b));
    }
    if params.regime() == Regime::DegenerateNull {
        return Ok(1.0);
    }
    let roots = StableRoots::at(params, 1.0)?;
    Ok(roots.pow_xi2(b - i0))
}

/// The gauge `F_{a,b} = x_a^{[a,b]} + x_b^{[a,b]}`: the probability of
/// leaving `[a, b]` through a boundary rather than by in-place absorption.
/// `F` equals 1 whenever `s = 0`, or when the walk starts on a barrier.
pub fn gauge_f(params: &WalkParams, a: i64, b: i64, i0: i64) -> Result<f64> {
    if a == b {
        return if i0 == a {
            Ok(1.0)
        } else {
            Err(Error::StartOutsideInterval(i0, a, b))
        };
    }
    let probs = absorb_interval(params, a, b, i0)?;
    Ok(probs.at_lower + probs.at_upper)
}

/// The assembled visit-count solution on a domain: particular term plus the
/// homogeneous constants `c1`, `c2`.  Exposed so tests can assert the
/// difference-equation residual and the boundary rows directly.
#[derive(Debug, Clone, Copy)]
pub struct VisitSolution {
    pub zeta: f64,
    pub xi1: f64,
    pub xi2: f64,
    pub c1: f64,
    pub c2: f64,
    pub i0: i64,
}

impl VisitSolution {
    /// Expected visits to transient state `n` before absorption.
    pub fn eval(&self, n: i64) -> f64 {
        let particular = if n <= self.i0 {
            self.zeta * self.xi1.powi((n - self.i0) as i32)
        } else {
            self.zeta * self.xi2.powi((n - self.i0) as i32)
        };
        particular + self.c1 * self.xi1.powi(n as i32) + self.c2 * self.xi2.powi(n as i32)
    }
}

/// Constants of the visit solution on `[0, b]` (non-degenerate regimes).
pub fn interval_visit_solution(params: &WalkParams, b: i64, i0: i64) -> Result<VisitSolution> {
    let roots = StableRoots::at(params, 1.0)?;
    let zeta = roots.zeta.ok_or(Error::InfiniteVisits)?;
    let (xi1, xi2) = (roots.xi1, roots.xi2);
    let denom = xi1.powi(b as i32) - xi2.powi(b as i32);
    let c1 = zeta * xi2.powi(b as i32) * (xi1.powi(-i0 as i32) - xi2.powi(-i0 as i32)) / denom;
    let c2 = zeta * (xi2.powi((b - i0) as i32) - xi1.powi((b - i0) as i32)) / denom;
    Ok(VisitSolution {
        zeta,
        xi1,
        xi2,
        c1,
        c2,
        i0,
    })
}

/// Constants of the visit solution on `[0, ∞)` (non-degenerate regimes).
pub fn halfline_visit_solution(params: &WalkParams, i0: i64) -> Result<VisitSolution> {
    let roots = StableRoots::at(params, 1.0)?;
    let zeta = roots.zeta.ok_or(Error::InfiniteVisits)?;
    Ok(VisitSolution {
        zeta,
        xi1: roots.xi1,
        xi2: roots.xi2,
        c1: 0.0,
        c2: -zeta * roots.pow_xi1(-i0),
        i0,
    })
}

/// Expected number of visits to transient state `n` before absorption.
pub fn expected_visits(params: &WalkParams, domain: &DomainSpec, n: i64) -> Result<f64> {
    let i0 = domain.i0;
    match domain.kind {
        DomainKind::Interval { n: upper } => {
            if n <= 0 || n >= upper {
                return Err(Error::NonTransientState(n));
            }
            if i0 == 0 || i0 == upper {
                return Ok(0.0);
            }
            if params.regime() == Regime::DegenerateNull {
                // Green's function of the symmetric chain: holding at rate
                // 1-r = 2p turns the unit-rate solution into
                // min(i0,n) (N - max(i0,n)) / (p N).
                let lo = i0.min(n) as f64;
                let hi = i0.max(n) as f64;
                let nn = upper as f64;
                return Ok(lo * (nn - hi) / (params.p() * nn));
            }
            Ok(interval_visit_solution(params, upper, i0)?.eval(n))
        }
        DomainKind::HalfLine => {
            if n <= 0 {
                return Err(Error::NonTransientState(n));
            }
            if i0 == 0 {
                return Ok(0.0);
            }
            if params.regime() == Regime::DegenerateNull {
                return Err(Error::InfiniteVisits);
            }
            Ok(halfline_visit_solution(params, i0)?.eval(n))
        }
        DomainKind::Line => {
            if params.regime() != Regime::Strict {
                return Err(Error::InfiniteVisits);
            }
            let roots = StableRoots::at(params, 1.0)?;
            let zeta = roots.zeta.ok_or(Error::InfiniteVisits)?;
            Ok(if n <= i0 {
                zeta * roots.pow_xi1(n - i0)
            } else {
                zeta * roots.pow_xi2(n - i0)
            })
        }
    }
}
