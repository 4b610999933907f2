//! Expected time before absorption (at a barrier or in place) on each
//! domain, with per-regime branches.

use serde::{Deserialize, Serialize};

use crate::walk_core::{Regime, StableRoots, WalkParams};
use crate::{Error, Result};

/// An expected time which may genuinely be infinite.  Serialized as a
/// number or the string `"infinite"`, never as a float infinity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MeanTime {
    Finite(f64),
    Infinite(InfiniteTag),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InfiniteTag {
    #[serde(rename = "infinite")]
    Infinite,
}

pub const INFINITE: MeanTime = MeanTime::Infinite(InfiniteTag::Infinite);

impl MeanTime {
    pub fn finite(self) -> Option<f64> {
        match self {
            MeanTime::Finite(v) => Some(v),
            MeanTime::Infinite(_) => None,
        }
    }
    pub fn is_infinite(self) -> bool {
        matches!(self, MeanTime::Infinite(_))
    }
}

/// A mean-time value plus the branch that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanTimeReport {
    pub value: MeanTime,
    pub regime_used: &'static str,
}

/// Expected time before absorption on `[0, N]` starting from `i0`.
pub fn mean_time_interval(params: &WalkParams, n: i64, i0: i64) -> Result<MeanTimeReport> {
    if n < 2 {
        return Err(Error::InvalidInterval(0, n));
    }
    if i0 < 0 || i0 > n {
        return Err(Error::StartOutsideInterval(i0, 0, n));
    }
    if i0 == 0 || i0 == n {
        return Ok(MeanTimeReport {
            value: MeanTime::Finite(0.0),
            regime_used: "start-absorbed",
        });
    }
    let report = match params.regime() {
        Regime::Strict => {
            // m_i = (1/s)[(1 - xi1^{-i}) + rho^{N-i} xi1^{-i} (1 - xi2^i)
            //             - xi2^{N-i} (1 - rho^i)] / (1 - rho^N)
            // an exact rearrangement of the bracketed closed form that keeps
            // every factor in [0, 1].
            let roots = StableRoots::at(params, 1.0)?;
            let num = roots.one_m_xi1_neg_pow(i0)
                + roots.pow_rho(n - i0) * roots.pow_xi1(-i0) * roots.one_m_xi2_pow(i0)
                - roots.pow_xi2(n - i0) * roots.one_m_rho_pow(i0);
            let value = num / (params.s() * roots.one_m_rho_pow(n));
            MeanTimeReport {
                value: MeanTime::Finite(value),
                regime_used: "strict-interval",
            }
        }
        Regime::NullFree => {
            // m_i = i/(q-p) - N (1 - psi^i) / ((q-p)(1 - psi^N)), psi = q/p.
            let (p, q) = (params.p(), params.q());
            let psi = q / p;
            let ratio = if psi < 1.0 {
                (1.0 - psi.powi(i0 as i32)) / (1.0 - psi.powi(n as i32))
            } else {
                let inv = 1.0 / psi;
                inv.powi((n - i0) as i32) * (1.0 - inv.powi(i0 as i32))
                    / (1.0 - inv.powi(n as i32))
            };
            let value = (i0 as f64 - n as f64 * ratio) / (q - p);
            MeanTimeReport {
                value: MeanTime::Finite(value),
                regime_used: "null-free-interval",
            }
        }
        Regime::DegenerateNull => MeanTimeReport {
            value: MeanTime::Finite(i0 as f64 * (n - i0) as f64 / (2.0 * params.p())),
            regime_used: "degenerate-interval",
        },
    };
    Ok(report)
}

/// Expected time before absorption on `[0, ∞)` starting from `i0`.
pub fn mean_time_halfline(params: &WalkParams, i0: i64) -> Result<MeanTimeReport> {
    if i0 < 0 {
        return Err(Error::StartBelowBarrier(i0, 0));
    }
    if i0 == 0 {
        return Ok(MeanTimeReport {
            value: MeanTime::Finite(0.0),
            regime_used: "start-absorbed",
        });
    }
    let report = match params.regime() {
        Regime::Strict => {
            let roots = StableRoots::at(params, 1.0)?;
            MeanTimeReport {
                value: MeanTime::Finite(roots.one_m_xi1_neg_pow(i0) / params.s()),
                regime_used: "strict-halfline",
            }
        }
        Regime::NullFree if params.q() > params.p() => MeanTimeReport {
            value: MeanTime::Finite(i0 as f64 / (params.q() - params.p())),
            regime_used: "null-free-halfline",
        },
        _ => MeanTimeReport {
            value: INFINITE,
            regime_used: "no-finite-mean",
        },
    };
    Ok(report)
}

/// Expected time before absorption on the integer line: `1/s`, independent
/// of the start state; infinite when `s = 0`.
pub fn mean_time_line(params: &WalkParams) -> MeanTimeReport {
    if params.s() > 0.0 {
        MeanTimeReport {
            value: MeanTime::Finite(1.0 / params.s()),
            regime_used: "strict-line",
        }
    } else {
        MeanTimeReport {
            value: INFINITE,
            regime_used: "no-finite-mean",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::validate_params;

    #[test]
    fn classical_symmetric() {
        let w = validate_params(0.5, 0.5, 0.0, 0.0).unwrap();
        let m = mean_time_interval(&w, 10, 3).unwrap();
        assert_eq!(m.value, MeanTime::Finite(21.0));
    }

    #[test]
    fn three_state_geometric() {
        let w = validate_params(0.3, 0.3, 0.2, 0.2).unwrap();
        let m = mean_time_interval(&w, 2, 1).unwrap().value.finite().unwrap();
        assert!((m - 1.25).abs() < 1e-13);
    }

    #[test]
    fn null_free_interval_example() {
        // m_2 = 2/0.2 - 5(1 - 2^2)/(0.2 (1 - 2^5)) = 10 - 15/6.2
        let w = validate_params(0.2, 0.4, 0.4, 0.0).unwrap();
        let m = mean_time_interval(&w, 5, 2).unwrap().value.finite().unwrap();
        assert!((m - (10.0 - 15.0 / 6.2)).abs() < 1e-12);
    }

    #[test]
    fn halfline_values() {
        let w = validate_params(0.2, 0.4, 0.4, 0.0).unwrap();
        let m = mean_time_halfline(&w, 3).unwrap().value.finite().unwrap();
        assert!((m - 15.0).abs() < 1e-12);

        let w = validate_params(0.2, 0.4, 0.2, 0.2).unwrap();
        let m = mean_time_halfline(&w, 1).unwrap().value.finite().unwrap();
        assert!((m - 5.0 * (2f64.sqrt() - 1.0)).abs() < 1e-12);

        assert_eq!(
            mean_time_halfline(&w, 0).unwrap().value,
            MeanTime::Finite(0.0)
        );
    }

    #[test]
    fn infinite_cases() {
        let up = validate_params(0.6, 0.3, 0.1, 0.0).unwrap();
        assert!(mean_time_halfline(&up, 4).unwrap().value.is_infinite());
        let sym = validate_params(0.5, 0.5, 0.0, 0.0).unwrap();
        assert!(mean_time_halfline(&sym, 4).unwrap().value.is_infinite());
        assert!(mean_time_line(&sym).value.is_infinite());
    }

    #[test]
    fn line_value() {
        let w = validate_params(0.3, 0.3, 0.2, 0.2).unwrap();
        assert_eq!(mean_time_line(&w).value, MeanTime::Finite(5.0));
    }

    #[test]
    fn interval_limit_is_halfline() {
        let w = validate_params(0.2, 0.4, 0.2, 0.2).unwrap();
        let hl = mean_time_halfline(&w, 5).unwrap().value.finite().unwrap();
        let m = mean_time_interval(&w, 400, 5).unwrap().value.finite().unwrap();
        assert!((m - hl).abs() < 1e-9);
    }

    #[test]
    fn regime_seam_continuity() {
        for n in [10, 30, 50] {
            for i0 in [1, n / 2, n - 1] {
                let eps = 1e-8;
                let strict =
                    validate_params(0.25 * (1.0 - eps), 0.45 * (1.0 - eps), 0.3 * (1.0 - eps), eps)
                        .unwrap();
                let free = validate_params(0.25, 0.45, 0.3, 0.0).unwrap();
                let a = mean_time_interval(&strict, n, i0).unwrap().value.finite().unwrap();
                let b = mean_time_interval(&free, n, i0).unwrap().value.finite().unwrap();
                assert!(
                    ((a - b) / b).abs() < 1e-3,
                    "seam mismatch at N={n} i0={i0}: {a} vs {b}"
                );
            }
        }
    }

    #[test]
    fn monotone_in_n() {
        let w = validate_params(0.2, 0.4, 0.2, 0.2).unwrap();
        let mut prev = 0.0;
        for n in 4..40 {
            let m = mean_time_interval(&w, n, 3).unwrap().value.finite().unwrap();
            assert!(m >= prev - 1e-12);
            prev = m;
        }
    }

    #[test]
    fn serializes_infinite_flag() {
        let j = serde_json::to_string(&INFINITE).unwrap();
        assert_eq!(j, "\"infinite\"");
        let j = serde_json::to_string(&MeanTime::Finite(2.5)).unwrap();
        assert_eq!(j, "2.5");
    }
}
