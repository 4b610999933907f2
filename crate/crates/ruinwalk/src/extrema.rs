//! Distributions of the running maximum `M`, running minimum `m` and the
//! joint pair `(m, M)` of the walk up to absorption.
//!
//! Every entry is assembled from barrier-transform absorption calls:
//! `P(M >= b)` is the probability of absorption at `b` once `b` is turned
//! into a barrier, and similarly for the minimum.  On infinite domains the
//! support is enumerated outward from the start until the analytic tail
//! drops below the requested threshold; whatever is not enumerated is booked
//! to `escape_mass`, so total mass is conserved exactly.

use crate::absorption::{absorb_interval, absorb_leftline, gauge_f};
use crate::walk_core::{DomainKind, DomainSpec, StableRoots, WalkParams};
use crate::{Error, Result};

use std::collections::BTreeMap;

/// Hard cap on enumerated support points for one pmf.
const SUPPORT_CAP: u64 = 10_000_000;
/// A per-point mass below `eps * POINT_RULE_FACTOR` for `POINT_RULE_RUN`
/// consecutive points also terminates enumeration (defective laws never
/// reach cumulative `1 - eps`).
const POINT_RULE_FACTOR: f64 = 1e-3;
const POINT_RULE_RUN: u32 = 10;
/// Negative masses from cancellation are clamped to zero down to this.
const CLAMP_TOL: f64 = -1e-12;

/// A finitely-truncated, possibly defective pmf over integer extrema values.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtremaPmf {
    /// `(value, mass)` in increasing value order.
    pub entries: Vec<(i64, f64)>,
    /// Mass not captured by any enumerated value (e.g. `P(M = ∞)` plus the
    /// analytic tail beyond the truncation point).
    pub escape_mass: f64,
    pub truncation_eps: f64,
}

/// The joint law of `(m, M)` over integer pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct JointExtremaPmf {
    /// `((a, b), mass)` with `a <= i0 <= b`, lexicographically ordered.
    pub entries: Vec<((i64, i64), f64)>,
    pub escape_mass: f64,
    pub truncation_eps: f64,
}

impl ExtremaPmf {
    pub fn total_mass(&self) -> f64 {
        self.entries.iter().map(|(_, m)| m).sum::<f64>() + self.escape_mass
    }

    pub fn mass_at(&self, v: i64) -> f64 {
        self.entries
            .iter()
            .find(|(x, _)| *x == v)
            .map(|(_, m)| *m)
            .unwrap_or(0.0)
    }
}

impl JointExtremaPmf {
    pub fn total_mass(&self) -> f64 {
        self.entries.iter().map(|(_, m)| m).sum::<f64>() + self.escape_mass
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps <= 1e-3) {
        return Err(Error::InvalidArgument(format!(
            "tail eps {eps} outside (0, 1e-3]"
        )));
    }
    Ok(())
}

fn clamp(mass: f64) -> Result<f64> {
    if mass >= 0.0 {
        Ok(mass)
    } else if mass >= CLAMP_TOL {
        Ok(0.0)
    } else {
        Err(Error::Internal(format!("negative pmf mass {mass:e}")))
    }
}

/// `P(M >= b)` on a domain with lower barrier 0 (interval or half-line):
/// absorption at `b` once `[0, b]` is cut out.  `b > i0 >= 0`.
fn max_tail_from_zero(params: &WalkParams, b: i64, i0: i64) -> Result<f64> {
    if b <= i0 {
        return Ok(1.0);
    }
    Ok(absorb_interval(params, 0, b, i0)?.at_upper)
}

/// Distribution of the running maximum.
pub fn max_pmf(params: &WalkParams, domain: &DomainSpec, eps: f64) -> Result<ExtremaPmf> {
    check_eps(eps)?;
    let i0 = domain.i0;
    match domain.kind {
        DomainKind::Interval { n } => {
            if i0 == 0 || i0 == n {
                return Ok(ExtremaPmf {
                    entries: vec![(i0, 1.0)],
                    escape_mass: 0.0,
                    truncation_eps: eps,
                });
            }
            let mut entries = Vec::with_capacity((n - i0 + 1) as usize);
            let mut tail = 1.0;
            for b in i0..n {
                let next = max_tail_from_zero(params, b + 1, i0)?;
                entries.push((b, clamp(tail - next)?));
                tail = next;
            }
            entries.push((n, tail));
            Ok(ExtremaPmf {
                entries,
                escape_mass: 0.0,
                truncation_eps: eps,
            })
        }
        DomainKind::HalfLine => {
            if i0 == 0 {
                return Ok(ExtremaPmf {
                    entries: vec![(0, 1.0)],
                    escape_mass: 0.0,
                    truncation_eps: eps,
                });
            }
            enumerate_upward(eps, i0, |b| max_tail_from_zero(params, b, i0))
        }
        DomainKind::Line => {
            // P(M >= b) = xi2^{b - i0}
            enumerate_upward(eps, i0, |b| absorb_leftline(params, b, i0))
        }
    }
}

/// Distribution of the running minimum.
pub fn min_pmf(params: &WalkParams, domain: &DomainSpec, eps: f64) -> Result<ExtremaPmf> {
    check_eps(eps)?;
    let i0 = domain.i0;
    match domain.kind {
        DomainKind::Interval { n } => {
            if i0 == 0 || i0 == n {
                return Ok(ExtremaPmf {
                    entries: vec![(i0, 1.0)],
                    escape_mass: 0.0,
                    truncation_eps: eps,
                });
            }
            // P(m <= a) = lower-barrier absorption of [a, N]
            let mut entries = Vec::with_capacity((i0 + 1) as usize);
            let mut tail = 1.0; // P(m <= i0)
            for a in (1..=i0).rev() {
                let next = absorb_interval(params, a - 1, n, i0)?.at_lower;
                entries.push((a, clamp(tail - next)?));
                tail = next;
            }
            entries.push((0, tail));
            entries.reverse();
            Ok(ExtremaPmf {
                entries,
                escape_mass: 0.0,
                truncation_eps: eps,
            })
        }
        DomainKind::HalfLine => {
            // Support 0..=i0; always a proper distribution.
            let mut entries = Vec::with_capacity((i0 + 1) as usize);
            let mut tail = 1.0;
            for a in (1..=i0).rev() {
                let next = crate::absorption::absorb_halfline(params, a - 1, i0)?;
                entries.push((a, clamp(tail - next)?));
                tail = next;
            }
            entries.push((0, tail));
            entries.reverse();
            Ok(ExtremaPmf {
                entries,
                escape_mass: 0.0,
                truncation_eps: eps,
            })
        }
        DomainKind::Line => {
            // P(m <= a) = xi1^{a - i0}; enumerate downward.
            let pmf = enumerate_upward(eps, -i0, |neg_a| {
                let a = -neg_a;
                if a >= i0 {
                    return Ok(1.0);
                }
                let roots = StableRoots::at(params, 1.0)?;
                Ok(roots.pow_xi1(a - i0))
            })?;
            Ok(ExtremaPmf {
                entries: pmf
                    .entries
                    .into_iter()
                    .rev()
                    .map(|(neg_a, m)| (-neg_a, m))
                    .collect(),
                escape_mass: pmf.escape_mass,
                truncation_eps: eps,
            })
        }
    }
}

/// Enumerate `P(X = b) = tail(b) - tail(b+1)` for `b = start, start+1, ...`
/// where `tail` is nonincreasing with `tail(start) = 1`, applying the dual
/// stopping rule and booking the analytic remainder to `escape_mass`.
fn enumerate_upward(
    eps: f64,
    start: i64,
    tail: impl Fn(i64) -> Result<f64>,
) -> Result<ExtremaPmf> {
    let mut entries = Vec::new();
    let mut cur = 1.0f64;
    let mut small_run = 0u32;
    let mut b = start;
    loop {
        let next = tail(b + 1)?;
        let mass = clamp(cur - next)?;
        entries.push((b, mass));
        cur = next;
        if cur <= eps {
            break;
        }
        small_run = if mass < eps * POINT_RULE_FACTOR {
            small_run + 1
        } else {
            0
        };
        if small_run >= POINT_RULE_RUN {
            break;
        }
        if (b - start + 1) as u64 >= SUPPORT_CAP {
            return Err(Error::NonconvergentTail(SUPPORT_CAP));
        }
        b += 1;
    }
    // Trim trailing zero-mass points left by the consecutive-small rule.
    while let Some(&(_, m)) = entries.last() {
        if m == 0.0 {
            entries.pop();
        } else {
            break;
        }
    }
    Ok(ExtremaPmf {
        entries,
        escape_mass: cur,
        truncation_eps: eps,
    })
}

/// The joint law of `(m, M)`.
pub fn joint_extrema_pmf(
    params: &WalkParams,
    domain: &DomainSpec,
    eps: f64,
) -> Result<JointExtremaPmf> {
    check_eps(eps)?;
    let i0 = domain.i0;
    // Memoized gauge F_{a,b}; F = 1 whenever the start lies on a boundary.
    let mut cache: BTreeMap<(i64, i64), f64> = BTreeMap::new();
    fn f(
        params: &WalkParams,
        i0: i64,
        cache: &mut BTreeMap<(i64, i64), f64>,
        a: i64,
        b: i64,
    ) -> Result<f64> {
        if a >= i0 || b <= i0 {
            return Ok(1.0);
        }
        if let Some(v) = cache.get(&(a, b)) {
            return Ok(*v);
        }
        let v = gauge_f(params, a, b, i0)?;
        cache.insert((a, b), v);
        Ok(v)
    }
    // Second difference of the gauge: P(m = a and M = b) for cells with no
    // true barrier involved.
    let mut interior = |a: i64, b: i64| -> Result<f64> {
        clamp(
            f(params, i0, &mut cache, a, b + 1)? + f(params, i0, &mut cache, a - 1, b)?
                - f(params, i0, &mut cache, a - 1, b + 1)?
                - f(params, i0, &mut cache, a, b)?,
        )
    };

    match domain.kind {
        DomainKind::Interval { n } => {
            if i0 == 0 || i0 == n {
                return Ok(JointExtremaPmf {
                    entries: vec![((i0, i0), 1.0)],
                    escape_mass: 0.0,
                    truncation_eps: eps,
                });
            }
            let mut entries = Vec::new();
            for a in 0..=i0 {
                for b in i0..=n {
                    let mass = match (a == 0, b == n) {
                        // both extrema on the barriers: impossible, the walk
                        // stops at the first barrier it reaches
                        (true, true) => {
                            let p_m0 = absorb_interval(params, 0, n, i0)?.at_lower;
                            let p_mn = absorb_interval(params, 0, n, i0)?.at_upper;
                            clamp(p_m0 + p_mn - gauge_f(params, 0, n, i0)?)?
                        }
                        (true, false) => {
                            let hi = absorb_interval(params, 0, b + 1, i0)?.at_lower;
                            let lo = if b == i0 {
                                0.0
                            } else {
                                absorb_interval(params, 0, b, i0)?.at_lower
                            };
                            clamp(hi - lo)?
                        }
                        (false, true) => {
                            let hi = absorb_interval(params, a - 1, n, i0)?.at_upper;
                            let lo = if a == i0 {
                                0.0
                            } else {
                                absorb_interval(params, a, n, i0)?.at_upper
                            };
                            clamp(hi - lo)?
                        }
                        (false, false) => interior(a, b)?,
                    };
                    entries.push(((a, b), mass));
                }
            }
            Ok(JointExtremaPmf {
                entries,
                escape_mass: 0.0,
                truncation_eps: eps,
            })
        }
        DomainKind::HalfLine => {
            if i0 == 0 {
                return Ok(JointExtremaPmf {
                    entries: vec![((0, 0), 1.0)],
                    escape_mass: 0.0,
                    truncation_eps: eps,
                });
            }
            let max_support = max_pmf(params, domain, eps)?;
            let b_hi = max_support.entries.last().map(|&(b, _)| b).unwrap_or(i0);
            let mut entries = Vec::new();
            let mut total = 0.0;
            for a in 0..=i0 {
                for b in i0..=b_hi {
                    let mass = if a == 0 {
                        let hi = absorb_interval(params, 0, b + 1, i0)?.at_lower;
                        let lo = if b == i0 {
                            0.0
                        } else {
                            absorb_interval(params, 0, b, i0)?.at_lower
                        };
                        clamp(hi - lo)?
                    } else {
                        interior(a, b)?
                    };
                    total += mass;
                    entries.push(((a, b), mass));
                }
            }
            Ok(JointExtremaPmf {
                entries,
                escape_mass: clamp(1.0 - total).unwrap_or(0.0),
                truncation_eps: eps,
            })
        }
        DomainKind::Line => {
            let max_support = max_pmf(params, domain, eps)?;
            let min_support = min_pmf(params, domain, eps)?;
            let b_hi = max_support.entries.last().map(|&(b, _)| b).unwrap_or(i0);
            let a_lo = min_support.entries.first().map(|&(a, _)| a).unwrap_or(i0);
            let mut entries = Vec::new();
            let mut total = 0.0;
            for a in a_lo..=i0 {
                for b in i0..=b_hi {
                    let mass = interior(a, b)?;
                    total += mass;
                    entries.push(((a, b), mass));
                }
            }
            Ok(JointExtremaPmf {
                entries,
                escape_mass: clamp(1.0 - total).unwrap_or(0.0),
                truncation_eps: eps,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::validate_params;
    use crate::walk_core::DomainSpec;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn symmetric_interval_max() {
        // P(M = b) = i0 / (b (b+1)), P(M = N) = i0 / N.
        let w = validate_params(0.5, 0.5, 0.0, 0.0).unwrap();
        let d = DomainSpec::interval(10, 3).unwrap();
        let pmf = max_pmf(&w, &d, 1e-9).unwrap();
        assert!(close(pmf.mass_at(3), 0.25, 1e-13));
        assert!(close(pmf.mass_at(5), 0.1, 1e-13));
        assert!(close(pmf.mass_at(10), 0.3, 1e-13));
        assert!(close(pmf.total_mass(), 1.0, 1e-12));
    }

    #[test]
    fn symmetric_interval_min() {
        let w = validate_params(0.5, 0.5, 0.0, 0.0).unwrap();
        let d = DomainSpec::interval(10, 3).unwrap();
        let pmf = min_pmf(&w, &d, 1e-9).unwrap();
        assert!(close(pmf.mass_at(1), 7.0 / 90.0, 1e-13));
        assert!(close(pmf.mass_at(0), 0.7, 1e-13));
        assert!(close(pmf.total_mass(), 1.0, 1e-12));
    }

    #[test]
    fn symmetric_halfline_min_is_point_mass() {
        let w = validate_params(0.5, 0.5, 0.0, 0.0).unwrap();
        let d = DomainSpec::half_line(4).unwrap();
        let pmf = min_pmf(&w, &d, 1e-9).unwrap();
        assert!(close(pmf.mass_at(0), 1.0, 1e-12));
        assert_eq!(pmf.escape_mass, 0.0);
    }

    #[test]
    fn line_max_geometric() {
        // (p/q)^{b-i0} (1 - p/q) for the downward-drifting line walk.
        let w = validate_params(0.2, 0.4, 0.4, 0.0).unwrap();
        let d = DomainSpec::line(0);
        let pmf = max_pmf(&w, &d, 1e-9).unwrap();
        assert!(close(pmf.mass_at(2), 0.125, 1e-13));
        assert!(close(pmf.mass_at(0), 0.5, 1e-13));
        assert!(close(pmf.total_mass(), 1.0, 1e-9));
    }

    #[test]
    fn line_min_geometric() {
        let w = validate_params(0.6, 0.3, 0.1, 0.0).unwrap();
        let d = DomainSpec::line(0);
        let pmf = min_pmf(&w, &d, 1e-9).unwrap();
        assert!(close(pmf.mass_at(0), 0.5, 1e-13));
        assert!(close(pmf.mass_at(-1), 0.25, 1e-13));
        assert!(close(pmf.total_mass(), 1.0, 1e-9));
    }

    #[test]
    fn strict_line_max_sums_to_one() {
        let w = validate_params(0.3, 0.3, 0.2, 0.2).unwrap();
        let pmf = max_pmf(&w, &DomainSpec::line(5), 1e-10).unwrap();
        assert!(close(pmf.total_mass(), 1.0, 1e-10));
        assert!(pmf.escape_mass <= 1e-10);
    }

    #[test]
    fn drifting_halfline_escape_mass() {
        // p > q on the half-line: P(M = infinity) = 1 - (q/p)^{i0}.
        let w = validate_params(0.6, 0.3, 0.1, 0.0).unwrap();
        let d = DomainSpec::half_line(2).unwrap();
        let pmf = max_pmf(&w, &d, 1e-6).unwrap();
        assert!(close(pmf.escape_mass, 0.75, 1e-5));
        assert!(close(pmf.total_mass(), 1.0, 1e-12));
        let pmf = min_pmf(&w, &d, 1e-6).unwrap();
        assert!(close(pmf.total_mass(), 1.0, 1e-12));
        assert_eq!(pmf.escape_mass, 0.0);
        assert!(close(pmf.mass_at(0), 0.25, 1e-13));
        assert!(close(pmf.mass_at(1), 0.25, 1e-13));
        assert!(close(pmf.mass_at(2), 0.5, 1e-13));
    }

    #[test]
    fn degenerate_null_line_escapes_entirely() {
        let w = validate_params(0.5, 0.5, 0.0, 0.0).unwrap();
        let pmf = max_pmf(&w, &DomainSpec::line(0), 1e-6).unwrap();
        assert!(close(pmf.escape_mass, 1.0, 1e-12));
    }

    #[test]
    fn three_state_joint() {
        let w = validate_params(0.3, 0.3, 0.2, 0.2).unwrap();
        let d = DomainSpec::interval(2, 1).unwrap();
        let joint = joint_extrema_pmf(&w, &d, 1e-9).unwrap();
        let get = |a: i64, b: i64| {
            joint
                .entries
                .iter()
                .find(|((x, y), _)| (*x, *y) == (a, b))
                .map(|(_, m)| *m)
                .unwrap()
        };
        assert!(close(get(0, 1), 0.375, 1e-13)); // absorbed at 0
        assert!(close(get(1, 2), 0.375, 1e-13)); // absorbed at 2
        assert!(close(get(1, 1), 0.25, 1e-13)); // absorbed in place at 1
        assert!(close(get(0, 2), 0.0, 1e-13)); // both barriers: impossible
        assert!(close(joint.total_mass(), 1.0, 1e-12));
    }

    #[test]
    fn joint_marginals_match() {
        for (p, q, r, s) in [
            (0.3, 0.3, 0.2, 0.2),
            (0.25, 0.35, 0.2, 0.2),
            (0.5, 0.5, 0.0, 0.0),
            (0.2, 0.4, 0.4, 0.0),
        ] {
            let w = validate_params(p, q, r, s).unwrap();
            let d = DomainSpec::interval(8, 3).unwrap();
            let joint = joint_extrema_pmf(&w, &d, 1e-9).unwrap();
            let maxp = max_pmf(&w, &d, 1e-9).unwrap();
            let minp = min_pmf(&w, &d, 1e-9).unwrap();
            assert!(close(joint.total_mass(), 1.0, 1e-10));
            for &(b, mass) in &maxp.entries {
                let col: f64 = joint
                    .entries
                    .iter()
                    .filter(|((_, y), _)| *y == b)
                    .map(|(_, m)| m)
                    .sum();
                assert!(close(col, mass, 1e-10), "{p},{q},{r},{s} col {b}");
            }
            for &(a, mass) in &minp.entries {
                let row: f64 = joint
                    .entries
                    .iter()
                    .filter(|((x, _), _)| *x == a)
                    .map(|(_, m)| m)
                    .sum();
                assert!(close(row, mass, 1e-10), "{p},{q},{r},{s} row {a}");
            }
        }
    }

    #[test]
    fn joint_marginals_on_infinite_domains() {
        let w = validate_params(0.25, 0.4, 0.15, 0.2).unwrap();
        for d in [DomainSpec::half_line(3).unwrap(), DomainSpec::line(3)] {
            let joint = joint_extrema_pmf(&w, &d, 1e-8).unwrap();
            let minp = min_pmf(&w, &d, 1e-8).unwrap();
            assert!(close(joint.total_mass(), 1.0, 1e-10));
            // compare rows fully inside the joint truncation window
            let b_hi = joint.entries.iter().map(|((_, b), _)| *b).max().unwrap();
            for &(a, mass) in &minp.entries {
                if joint.entries.iter().any(|((x, _), _)| *x == a) {
                    let row: f64 = joint
                        .entries
                        .iter()
                        .filter(|((x, _), _)| *x == a)
                        .map(|(_, m)| m)
                        .sum();
                    // the row is truncated at b_hi; allow the analytic tail
                    assert!(
                        row <= mass + 1e-10,
                        "row {a} overshoots: {row} vs {mass} (b_hi={b_hi})"
                    );
                    assert!(mass - row < 1e-6, "row {a}: {row} vs {mass}");
                }
            }
        }
    }

    #[test]
    fn monotone_tails() {
        let w = validate_params(0.25, 0.35, 0.2, 0.2).unwrap();
        let i0 = 4;
        let mut prev = 1.0;
        for b in (i0 + 1)..30 {
            let t = max_tail_from_zero(&w, b, i0).unwrap();
            assert!(t <= prev + 1e-15);
            prev = t;
        }
    }

    #[test]
    fn rejects_bad_eps() {
        let w = validate_params(0.3, 0.3, 0.2, 0.2).unwrap();
        assert!(max_pmf(&w, &DomainSpec::line(0), 0.0).is_err());
        assert!(max_pmf(&w, &DomainSpec::line(0), 0.1).is_err());
    }
}
