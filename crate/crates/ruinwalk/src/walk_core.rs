//! Step-distribution validation, regime classification and the
//! characteristic-root machinery consumed by every other module.
//!
//! The walk's generating functions are built from the roots of
//! `qz ξ² − (1−rz) ξ + pz = 0`.  All closed forms downstream are ratios of
//! powers of those roots, so this module also exposes cancellation-safe
//! building blocks (`ξ1 − 1`, `1 − ξ2`, `ln ξ1`, `ln (ξ2/ξ1)`) that remain
//! accurate when `s → 0` and `p ≈ q`, where the naive quadratic formula
//! loses every significant digit.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Tolerance on `|p+q+r+s − 1|` before renormalization.
pub const SUM_TOL: f64 = 1e-12;
/// Below this, `|p − q|` with `s = 0` classifies as [`Regime::DegenerateNull`].
pub const PQ_EQ_TOL: f64 = 1e-14;

/// Which branch of the closed forms applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    /// `s > 0`: in-place absorption is possible.
    Strict,
    /// `s = 0`, `p ≠ q`: the drifting barrier-only walk.
    NullFree,
    /// `s = 0`, `p = q`: the symmetric barrier-only walk (l'Hospital limits).
    DegenerateNull,
}

/// A validated step distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WalkParams {
    p: f64,
    q: f64,
    r: f64,
    s: f64,
    regime: Regime,
}

impl WalkParams {
    pub fn p(&self) -> f64 {
        self.p
    }
    pub fn q(&self) -> f64 {
        self.q
    }
    pub fn r(&self) -> f64 {
        self.r
    }
    pub fn s(&self) -> f64 {
        self.s
    }
    pub fn regime(&self) -> Regime {
        self.regime
    }

    /// The ratio `ω = p/q` used throughout the `s = 0` closed forms.
    pub fn omega(&self) -> f64 {
        self.p / self.q
    }

    /// Mean one-step displacement `p − q`.
    pub fn drift(&self) -> f64 {
        self.p - self.q
    }

    /// The same walk with forward and backward steps exchanged.  Reflecting
    /// the state space maps results for one barrier onto the other.
    pub fn mirrored(&self) -> WalkParams {
        WalkParams {
            p: self.q,
            q: self.p,
            r: self.r,
            s: self.s,
            regime: self.regime,
        }
    }
}

/// Validates raw step probabilities, renormalizes, and classifies the regime.
pub fn validate_params(p: f64, q: f64, r: f64, s: f64) -> Result<WalkParams> {
    for (v, name) in [(p, "p"), (q, "q"), (r, "r"), (s, "s")] {
        if !v.is_finite() || v < 0.0 {
            return Err(Error::NegativeProbability(name));
        }
    }
    let sum = p + q + r + s;
    if (sum - 1.0).abs() > SUM_TOL {
        return Err(Error::SumNotOne(sum));
    }
    let (p, q, r, s) = (p / sum, q / sum, r / sum, s / sum);
    if p == 0.0 || q == 0.0 {
        return Err(Error::ZeroStepProbability);
    }
    let regime = if s > 0.0 {
        Regime::Strict
    } else if (p - q).abs() < PQ_EQ_TOL {
        Regime::DegenerateNull
    } else {
        Regime::NullFree
    };
    Ok(WalkParams { p, q, r, s, regime })
}

/// Where the walk lives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainKind {
    /// `[0, N]` with absorbing barriers at `0` and `N`.
    Interval { n: i64 },
    /// `[0, ∞)` with an absorbing barrier at `0`.
    HalfLine,
    /// The integer line, no barriers.
    Line,
}

/// A domain plus a starting state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DomainSpec {
    pub kind: DomainKind,
    pub i0: i64,
}

impl DomainSpec {
    pub fn interval(n: i64, i0: i64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidInterval(0, n));
        }
        if i0 < 0 || i0 > n {
            return Err(Error::StartOutsideInterval(i0, 0, n));
        }
        Ok(DomainSpec {
            kind: DomainKind::Interval { n },
            i0,
        })
    }

    pub fn half_line(i0: i64) -> Result<Self> {
        if i0 < 0 {
            return Err(Error::StartBelowBarrier(i0, 0));
        }
        Ok(DomainSpec {
            kind: DomainKind::HalfLine,
            i0,
        })
    }

    pub fn line(i0: i64) -> Self {
        DomainSpec {
            kind: DomainKind::Line,
            i0,
        }
    }
}

/// The characteristic roots at an evaluation point `z ∈ (0, 1]`.
///
/// `zeta` is `[(1−rz)² − 4pqz²]^{−1/2}`; it is `None` exactly at a double
/// root (`s = 0`, `p = q`, `z = 1`), where downstream formulas must branch
/// to their limit forms instead of consuming a large float.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootPair {
    pub z: f64,
    pub xi1: f64,
    pub xi2: f64,
    pub zeta: Option<f64>,
}

/// Roots plus the cancellation-safe derived quantities every closed form
/// is assembled from.
#[derive(Debug, Clone, Copy)]
pub struct StableRoots {
    pub z: f64,
    pub xi1: f64,
    pub xi2: f64,
    /// `None` means the discriminant vanished (double root).
    pub zeta: Option<f64>,
    /// `ξ1 − 1`, computed without cancellation.
    pub xi1_m1: f64,
    /// `1 − ξ2`, computed without cancellation.
    pub one_m_xi2: f64,
    /// `ξ1 − ξ2 = √disc / (qz)`.
    pub xi_diff: f64,
    pub sqrt_disc: f64,
    /// `ln ξ1 ≥ 0`.
    pub ln_xi1: f64,
    /// `ln ξ2 ≤ 0`.
    pub ln_xi2: f64,
    /// `ln (ξ2/ξ1) ≤ 0`.
    pub ln_rho: f64,
}

impl StableRoots {
    /// Evaluate the roots at `z ∈ (0, 1]`.
    pub fn at(params: &WalkParams, z: f64) -> Result<StableRoots> {
        if !(z > 0.0 && z <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "z = {z} outside (0, 1]"
            )));
        }
        let (p, q, r, s) = (params.p, params.q, params.r, params.s);
        let one_m_rz = 1.0 - r * z;
        let mut disc = one_m_rz * one_m_rz - 4.0 * p * q * z * z;
        if disc < 0.0 {
            // Cannot occur for valid parameters and z <= 1; tolerate rounding.
            if disc > -1e-15 {
                disc = 0.0;
            } else {
                return Err(Error::NegativeDiscriminant(z));
            }
        }
        let sqrt_disc = disc.sqrt();
        // c = 1 - (1-s)z >= 0 is the constant term of the shifted quadratic
        // q z d^2 + b1 d - c = 0 satisfied by d = xi1 - 1.
        let c = 1.0 - (1.0 - s) * z;
        let b1 = 2.0 * q * z - 1.0 + r * z;
        let xi1_m1 = if b1 > 0.0 {
            2.0 * c / (sqrt_disc + b1)
        } else {
            (sqrt_disc - b1) / (2.0 * q * z)
        };
        // q*xi1 - p, again branch on the sign that avoids cancellation.
        let b2 = 1.0 - r * z - 2.0 * p * z;
        let q_xi1_m_p = if b2 >= 0.0 {
            (b2 + sqrt_disc) / (2.0 * z)
        } else {
            2.0 * p * c / (sqrt_disc - b2)
        };
        let xi1 = 1.0 + xi1_m1;
        let xi2 = p / (q * xi1);
        let one_m_xi2 = q_xi1_m_p / (q * xi1);
        let xi_diff = sqrt_disc / (q * z);
        let ln_xi1 = xi1_m1.ln_1p();
        let ln_rho = if xi_diff == 0.0 {
            0.0
        } else {
            -(xi_diff / xi2).ln_1p()
        };
        let ln_xi2 = ln_xi1 + ln_rho;
        let zeta = if sqrt_disc == 0.0 {
            None
        } else {
            Some(1.0 / sqrt_disc)
        };
        Ok(StableRoots {
            z,
            xi1,
            xi2,
            zeta,
            xi1_m1,
            one_m_xi2,
            xi_diff,
            sqrt_disc,
            ln_xi1,
            ln_xi2,
            ln_rho,
        })
    }

    /// `ξ1^k` (negative `k` allowed; evaluated through `exp` so large
    /// exponents underflow gracefully instead of overflowing).
    pub fn pow_xi1(&self, k: i64) -> f64 {
        (k as f64 * self.ln_xi1).exp()
    }

    /// `ξ2^k`.
    pub fn pow_xi2(&self, k: i64) -> f64 {
        (k as f64 * self.ln_xi2).exp()
    }

    /// `ρ^k` with `ρ = ξ2/ξ1 ∈ (0, 1]`.
    pub fn pow_rho(&self, k: i64) -> f64 {
        (k as f64 * self.ln_rho).exp()
    }

    /// `1 − ρ^k`, accurate when `ρ` is close to 1.
    pub fn one_m_rho_pow(&self, k: i64) -> f64 {
        -(k as f64 * self.ln_rho).exp_m1()
    }

    /// `1 − ξ1^{−k}`, accurate when `ξ1` is close to 1.
    pub fn one_m_xi1_neg_pow(&self, k: i64) -> f64 {
        -(-(k as f64) * self.ln_xi1).exp_m1()
    }

    /// `1 − ξ2^k`.
    pub fn one_m_xi2_pow(&self, k: i64) -> f64 {
        -(k as f64 * self.ln_xi2).exp_m1()
    }

    pub fn root_pair(&self) -> RootPair {
        RootPair {
            z: self.z,
            xi1: self.xi1,
            xi2: self.xi2,
            zeta: self.zeta,
        }
    }
}

/// The characteristic roots `ξ1(z) ≥ ξ2(z)` and the amplitude `ζ_z`.
pub fn char_roots(params: &WalkParams, z: f64) -> Result<RootPair> {
    Ok(StableRoots::at(params, z)?.root_pair())
}

/// `(dξ1/dz, dξ2/dz)` by implicit differentiation of the characteristic
/// quadratic: `dξ_i/dz = (−1)^i ζ_z ξ_i(z)/z`.
pub fn root_derivative(params: &WalkParams, z: f64) -> Result<(f64, f64)> {
    let roots = StableRoots::at(params, z)?;
    match roots.zeta {
        None => Err(Error::DegenerateRoot(z)),
        Some(zeta) => Ok((-zeta * roots.xi1 / z, zeta * roots.xi2 / z)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
    }

    #[test]
    fn validates_and_classifies() {
        let w = validate_params(0.3, 0.3, 0.2, 0.2).unwrap();
        assert_eq!(w.regime(), Regime::Strict);
        let w = validate_params(0.5, 0.5, 0.0, 0.0).unwrap();
        assert_eq!(w.regime(), Regime::DegenerateNull);
        let w = validate_params(0.6, 0.3, 0.1, 0.0).unwrap();
        assert_eq!(w.regime(), Regime::NullFree);
        assert_eq!(
            validate_params(0.6, 0.0, 0.4, 0.0),
            Err(Error::ZeroStepProbability)
        );
        assert!(matches!(
            validate_params(0.6, 0.3, 0.2, 0.2),
            Err(Error::SumNotOne(_))
        ));
        assert!(matches!(
            validate_params(-0.1, 0.5, 0.4, 0.2),
            Err(Error::NegativeProbability("p"))
        ));
    }

    #[test]
    fn renormalizes_within_tolerance() {
        let w = validate_params(0.3 + 4e-13, 0.3, 0.2, 0.2).unwrap();
        let sum = w.p() + w.q() + w.r() + w.s();
        assert!((sum - 1.0).abs() < 1e-15);
    }

    #[test]
    fn hand_solved_roots() {
        // 0.4 xi^2 - 0.8 xi + 0.2 = 0  =>  xi = 1 ± sqrt(2)/2
        let w = validate_params(0.2, 0.4, 0.2, 0.2).unwrap();
        let rp = char_roots(&w, 1.0).unwrap();
        assert!(close(rp.xi1, 1.0 + 2f64.sqrt() / 2.0, 1e-14));
        assert!(close(rp.xi2, 1.0 - 2f64.sqrt() / 2.0, 1e-13));
        assert!(close(rp.zeta.unwrap(), 1.0 / 0.32f64.sqrt(), 1e-14));
    }

    #[test]
    fn double_root_is_flagged_infinite() {
        let w = validate_params(0.5, 0.5, 0.0, 0.0).unwrap();
        let rp = char_roots(&w, 1.0).unwrap();
        assert_eq!(rp.xi1, 1.0);
        assert_eq!(rp.xi2, 1.0);
        assert_eq!(rp.zeta, None);
        assert_eq!(root_derivative(&w, 1.0), Err(Error::DegenerateRoot(1.0)));
    }

    #[test]
    fn null_free_roots_are_exact() {
        let w = validate_params(0.6, 0.3, 0.1, 0.0).unwrap();
        let rp = char_roots(&w, 1.0).unwrap();
        assert!(close(rp.xi1, 2.0, 1e-15));
        assert!(close(rp.xi2, 1.0, 1e-15));
        let w = validate_params(0.3, 0.6, 0.1, 0.0).unwrap();
        let rp = char_roots(&w, 1.0).unwrap();
        assert_eq!(rp.xi1, 1.0);
        assert!(close(rp.xi2, 0.5, 1e-15));
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let w = validate_params(0.2, 0.4, 0.2, 0.2).unwrap();
        let (d1, d2) = root_derivative(&w, 1.0).unwrap();
        let zeta = 1.0 / 0.32f64.sqrt();
        assert!(close(d2, zeta * (1.0 - 2f64.sqrt() / 2.0), 1e-12));
        assert!(d1 < 0.0 && d2 > 0.0);

        let w = validate_params(0.3, 0.3, 0.2, 0.2).unwrap();
        let z = 0.9;
        let h = 1e-6;
        let f = |z: f64| char_roots(&w, z).unwrap();
        // one Richardson step on the central difference
        let cd = |h: f64| {
            let (a, b) = (f(z + h), f(z - h));
            ((a.xi1 - b.xi1) / (2.0 * h), (a.xi2 - b.xi2) / (2.0 * h))
        };
        let (c1, c2) = cd(h);
        let (d1h, d2h) = cd(h / 2.0);
        let fd1 = (4.0 * d1h - c1) / 3.0;
        let fd2 = (4.0 * d2h - c2) / 3.0;
        let (a1, a2) = root_derivative(&w, z).unwrap();
        assert!(close(a1, fd1, 1e-8));
        assert!(close(a2, fd2, 1e-8));
    }

    proptest! {
        #[test]
        fn root_invariants(
            raw_p in 0.05f64..1.0,
            raw_q in 0.05f64..1.0,
            raw_r in 0.0f64..1.0,
            raw_s in 0.0f64..1.0,
            z in 0.1f64..=1.0,
        ) {
            let sum = raw_p + raw_q + raw_r + raw_s;
            let w = validate_params(raw_p / sum, raw_q / sum, raw_r / sum, raw_s / sum).unwrap();
            let rp = char_roots(&w, z).unwrap();
            // product and sum of roots
            prop_assert!(close(rp.xi1 * rp.xi2, w.p() / w.q(), 1e-12));
            prop_assert!(close(rp.xi1 + rp.xi2, (1.0 - w.r() * z) / (w.q() * z), 1e-12));
            // ordering
            prop_assert!(rp.xi2 > 0.0);
            prop_assert!(rp.xi1 >= 1.0 - 1e-15);
            prop_assert!(rp.xi2 <= 1.0 + 1e-15);
            // residual of the quadratic at either root
            for xi in [rp.xi1, rp.xi2] {
                let res = w.q() * z * xi * xi - (1.0 - w.r() * z) * xi + w.p() * z;
                prop_assert!(res.abs() <= 1e-12 * xi.max(1.0) * xi.max(1.0));
            }
            // regime classification is total
            let _ = w.regime();
        }
    }
}
