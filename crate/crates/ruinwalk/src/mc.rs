//! Monte Carlo verification engine: exact path simulation with per-path
//! counter-based RNG streams, deterministic parallel aggregation, and
//! z-score comparison against analytic values.
//!
//! Each path index gets its own ChaCha stream derived from `(seed, index)`,
//! so results are bitwise identical regardless of how many worker threads
//! run the batch.  Partial sums are accumulated per fixed-size block and
//! merged in block order.

use std::collections::BTreeMap;
use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::walk_core::{DomainKind, DomainSpec, Regime, WalkParams};
use crate::{Error, Result};

pub const DEFAULT_STEP_CAP: u64 = 10_000_000;
const BLOCK: u64 = 4096;

/// Terminal state of one simulated path.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    AbsorbedLower,
    AbsorbedUpper,
    AbsorbedInPlace(i64),
    Censored,
}

/// One simulated path, reduced to the quantities the analytics predict.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathSummary {
    pub outcome: Outcome,
    /// Steps until absorption (the absorbing transition counts as a step).
    pub steps: u64,
    pub min: i64,
    pub max: i64,
}

/// Simulate one path of the walk on `domain` with the given RNG stream.
pub fn simulate_path(
    params: &WalkParams,
    domain: &DomainSpec,
    rng: &mut impl Rng,
    step_cap: u64,
) -> PathSummary {
    let (lower, upper) = barriers(domain);
    let mut pos = domain.i0;
    let (mut min, mut max) = (pos, pos);
    if Some(pos) == lower {
        return PathSummary {
            outcome: Outcome::AbsorbedLower,
            steps: 0,
            min,
            max,
        };
    }
    if Some(pos) == upper {
        return PathSummary {
            outcome: Outcome::AbsorbedUpper,
            steps: 0,
            min,
            max,
        };
    }
    let (p, pq, pqr) = (
        params.p(),
        params.p() + params.q(),
        params.p() + params.q() + params.r(),
    );
    for step in 1..=step_cap {
        let u: f64 = rng.gen();
        if u < p {
            pos += 1;
            max = max.max(pos);
        } else if u < pq {
            pos -= 1;
            min = min.min(pos);
        } else if u < pqr {
            // stay
        } else {
            return PathSummary {
                outcome: Outcome::AbsorbedInPlace(pos),
                steps: step,
                min,
                max,
            };
        }
        if Some(pos) == lower {
            return PathSummary {
                outcome: Outcome::AbsorbedLower,
                steps: step,
                min,
                max,
            };
        }
        if Some(pos) == upper {
            return PathSummary {
                outcome: Outcome::AbsorbedUpper,
                steps: step,
                min,
                max,
            };
        }
    }
    PathSummary {
        outcome: Outcome::Censored,
        steps: step_cap,
        min,
        max,
    }
}

fn barriers(domain: &DomainSpec) -> (Option<i64>, Option<i64>) {
    match domain.kind {
        DomainKind::Interval { n } => (Some(0), Some(n)),
        DomainKind::HalfLine => (Some(0), None),
        DomainKind::Line => (None, None),
    }
}

/// A point estimate with its standard error and effective sample size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub se: f64,
    pub n: u64,
}

/// Batched Monte Carlo estimates, keyed by quantity name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McEstimates {
    pub seed: u64,
    pub n_paths: u64,
    pub n_censored: u64,
    pub step_cap: u64,
    pub config_digest: String,
    pub quantities: BTreeMap<String, Estimate>,
}

#[derive(Default, Clone)]
struct Agg {
    n: u64,
    censored: u64,
    lower: u64,
    upper: u64,
    in_place: u64,
    sum_t: f64,
    sum_t_sq: f64,
    sum_t_lower: f64,
    sum_t_lower_sq: f64,
    sum_t_upper: f64,
    sum_t_upper_sq: f64,
    sum_t2f_lower: f64,
    sum_t2f_lower_sq: f64,
    max_hist: BTreeMap<i64, u64>,
    max_escape: u64,
    min_hist: BTreeMap<i64, u64>,
    min_escape: u64,
}

impl Agg {
    fn absorb(&mut self, path: &PathSummary, drift: f64) {
        self.n += 1;
        let t = path.steps as f64;
        match path.outcome {
            Outcome::AbsorbedLower => {
                self.lower += 1;
                self.sum_t_lower += t;
                self.sum_t_lower_sq += t * t;
                let t2f = t * (t - 1.0);
                self.sum_t2f_lower += t2f;
                self.sum_t2f_lower_sq += t2f * t2f;
            }
            Outcome::AbsorbedUpper => {
                self.upper += 1;
                self.sum_t_upper += t;
                self.sum_t_upper_sq += t * t;
            }
            Outcome::AbsorbedInPlace(_) => self.in_place += 1,
            Outcome::Censored => self.censored += 1,
        }
        if path.outcome != Outcome::Censored {
            self.sum_t += t;
            self.sum_t_sq += t * t;
            *self.max_hist.entry(path.max).or_insert(0) += 1;
            *self.min_hist.entry(path.min).or_insert(0) += 1;
        } else {
            // A censored extremum is final only if the drift pushes the walk
            // away from that side; otherwise it would keep growing.
            if drift >= 0.0 {
                self.max_escape += 1;
            } else {
                *self.max_hist.entry(path.max).or_insert(0) += 1;
            }
            if drift <= 0.0 {
                self.min_escape += 1;
            } else {
                *self.min_hist.entry(path.min).or_insert(0) += 1;
            }
        }
    }

    fn merge(&mut self, other: &Agg) {
        self.n += other.n;
        self.censored += other.censored;
        self.lower += other.lower;
        self.upper += other.upper;
        self.in_place += other.in_place;
        self.sum_t += other.sum_t;
        self.sum_t_sq += other.sum_t_sq;
        self.sum_t_lower += other.sum_t_lower;
        self.sum_t_lower_sq += other.sum_t_lower_sq;
        self.sum_t_upper += other.sum_t_upper;
        self.sum_t_upper_sq += other.sum_t_upper_sq;
        self.sum_t2f_lower += other.sum_t2f_lower;
        self.sum_t2f_lower_sq += other.sum_t2f_lower_sq;
        for (k, v) in &other.max_hist {
            *self.max_hist.entry(*k).or_insert(0) += v;
        }
        self.max_escape += other.max_escape;
        for (k, v) in &other.min_hist {
            *self.min_hist.entry(*k).or_insert(0) += v;
        }
        self.min_escape += other.min_escape;
    }
}

/// The RNG stream for one path index under a batch seed.
pub fn path_rng(seed: u64, path_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path_index);
    rng
}

/// Run `n_paths` simulations and aggregate every quantity the analytic
/// modules predict.  Deterministic for fixed `(seed, n_paths, step_cap)`
/// regardless of the rayon worker count.
pub fn estimate(
    params: &WalkParams,
    domain: &DomainSpec,
    n_paths: u64,
    seed: u64,
    step_cap: u64,
) -> Result<McEstimates> {
    if n_paths == 0 {
        return Err(Error::InvalidArgument("n_paths must be >= 1".into()));
    }
    let drift = params.drift();
    let n_blocks = n_paths.div_ceil(BLOCK);
    let partials: Vec<Agg> = (0..n_blocks)
        .into_par_iter()
        .map(|blk| {
            let mut agg = Agg::default();
            let start = blk * BLOCK;
            let end = (start + BLOCK).min(n_paths);
            for idx in start..end {
                let mut rng = path_rng(seed, idx);
                let path = simulate_path(params, domain, &mut rng, step_cap);
                agg.absorb(&path, drift);
            }
            agg
        })
        .collect();
    let mut agg = Agg::default();
    for part in &partials {
        agg.merge(part);
    }

    // Censoring must be negligible wherever absorption is almost sure.
    let absorbing_surely = match (params.regime(), domain.kind) {
        (Regime::Strict, _) => true,
        (Regime::NullFree, DomainKind::Interval { .. }) => true,
        (Regime::NullFree, DomainKind::HalfLine) => params.q() > params.p(),
        _ => false,
    };
    if absorbing_surely && agg.censored * 100 > n_paths {
        return Err(Error::ExcessiveCensoring(agg.censored, n_paths));
    }

    let nf = n_paths as f64;
    let prob = |count: u64| -> Estimate {
        let est = count as f64 / nf;
        Estimate {
            value: est,
            se: (est * (1.0 - est) / nf).sqrt(),
            n: n_paths,
        }
    };
    let mean_of_sums = |sum: f64, sum_sq: f64, n: u64| -> Estimate {
        let n_f = n as f64;
        let mean = sum / n_f;
        let var = (sum_sq / n_f - mean * mean).max(0.0);
        Estimate {
            value: mean,
            se: (var / n_f).sqrt(),
            n,
        }
    };

    let mut q: BTreeMap<String, Estimate> = BTreeMap::new();
    let (lower, upper) = barriers(domain);
    if lower.is_some() {
        q.insert("absorb.lower".into(), prob(agg.lower));
        q.insert(
            "t_partial.lower".into(),
            mean_of_sums(agg.sum_t_lower, agg.sum_t_lower_sq, n_paths),
        );
        q.insert(
            "t2fact_partial.lower".into(),
            mean_of_sums(agg.sum_t2f_lower, agg.sum_t2f_lower_sq, n_paths),
        );
    }
    if upper.is_some() {
        q.insert("absorb.upper".into(), prob(agg.upper));
        q.insert(
            "t_partial.upper".into(),
            mean_of_sums(agg.sum_t_upper, agg.sum_t_upper_sq, n_paths),
        );
    }
    if params.s() > 0.0 {
        q.insert("absorb.in_place".into(), prob(agg.in_place));
    }
    let n_completed = n_paths - agg.censored;
    if n_completed > 0 {
        // Censored paths are excluded from the mean and flagged via n.
        q.insert(
            "mean_time".into(),
            mean_of_sums(agg.sum_t, agg.sum_t_sq, n_completed),
        );
    }
    for (v, e) in &agg.max_hist {
        q.insert(format!("max[{v}]"), prob(*e));
    }
    q.insert("max.escape".into(), prob(agg.max_escape));
    for (v, e) in &agg.min_hist {
        q.insert(format!("min[{v}]"), prob(*e));
    }
    q.insert("min.escape".into(), prob(agg.min_escape));

    let mut hasher = DefaultHasher::new();
    (
        params.p().to_bits(),
        params.q().to_bits(),
        params.r().to_bits(),
        params.s().to_bits(),
        domain.kind,
        domain.i0,
        n_paths,
        seed,
        step_cap,
    )
        .hash(&mut hasher);
    Ok(McEstimates {
        seed,
        n_paths,
        n_censored: agg.censored,
        step_cap,
        config_digest: format!("{:016x}", hasher.finish()),
        quantities: q,
    })
}

/// One compared quantity in a verification report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationRow {
    pub name: String,
    pub analytic: f64,
    pub estimate: f64,
    pub se: f64,
    pub z: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub rows: Vec<VerificationRow>,
    pub z_threshold: f64,
    pub n_censored: u64,
    pub passed: bool,
}

/// Compare analytic values against Monte Carlo estimates by quantity name.
pub fn compare(
    analytic: &[(String, f64)],
    mc: &McEstimates,
    z_threshold: f64,
) -> Result<VerificationReport> {
    let mut rows = Vec::with_capacity(analytic.len());
    let mut passed = true;
    for (name, value) in analytic {
        let est = mc
            .quantities
            .get(name)
            .copied()
            // a value the simulation never observed is an estimate of zero
            .or_else(|| {
                if name.contains('[') || name.ends_with(".escape") {
                    Some(Estimate {
                        value: 0.0,
                        se: 0.0,
                        n: mc.n_paths,
                    })
                } else {
                    None
                }
            })
            .ok_or_else(|| Error::MissingQuantity(name.clone()))?;
        let diff = est.value - value;
        let z = if est.se > 0.0 {
            diff / est.se
        } else if diff.abs() <= 1e-12 {
            0.0
        } else {
            // zero spread but a real discrepancy: fall back to a binomial
            // floor so an all-zero histogram bin can still fail loudly
            let floor_se = (value.abs().max(1e-12) / mc.n_paths as f64).sqrt();
            diff / floor_se
        };
        let pass = z.abs() <= z_threshold;
        passed &= pass;
        rows.push(VerificationRow {
            name: name.clone(),
            analytic: *value,
            estimate: est.value,
            se: est.se,
            z,
            pass,
        });
    }
    Ok(VerificationReport {
        rows,
        z_threshold,
        n_censored: mc.n_censored,
        passed,
    })
}
