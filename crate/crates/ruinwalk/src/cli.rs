//! Command-line front end.  Every subcommand resolves its arguments into a
//! serializable [`RunConfig`], evaluates, and emits a uniform document:
//! `{"config": …, "results": [{"quantity", "indices", "value", "se"}],
//! "diagnostics": {…}}` as JSON or CSV.
//!
//! Exit codes: 0 success, 1 usage or validation error, 2 verification
//! failure (`verify` only), 3 internal invariant violation.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::absorption::{absorb_halfline, absorb_interval, absorb_leftline};
use crate::extrema::{joint_extrema_pmf, max_pmf, min_pmf};
use crate::mc::{compare, estimate, McEstimates, DEFAULT_STEP_CAP};
use crate::meantime::{mean_time_halfline, mean_time_interval, mean_time_line, MeanTime};
use crate::moments::{
    barrier_first_moment, halfline_time_moments, pgf_derivative_fd, Barrier, Method,
};
use crate::walk_core::{validate_params, DomainKind, DomainSpec, Regime, WalkParams};
use crate::{Error, Result};

const DEFAULT_TAIL_EPS: f64 = 1e-10;
/// Analytic quantities below this mass are skipped in `verify`: the Monte
/// Carlo standard error cannot resolve them at practical path counts.
const VERIFY_MIN_MASS: f64 = 1e-4;

#[derive(Parser, Debug)]
#[command(
    name = "ruinwalk",
    version,
    about = "Absorption analysis of the [pqrs] random walk",
    max_term_width = 100
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Barrier absorption probabilities.
    Absorb {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        domain: DomainArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Distribution of the running maximum and minimum.
    Extrema {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        domain: DomainArgs,
        /// Emit the joint law of (min, max) instead of the marginals.
        #[arg(long)]
        joint: bool,
        /// Truncation threshold for infinite supports.
        #[arg(long = "tail-eps", default_value_t = DEFAULT_TAIL_EPS)]
        tail_eps: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Partial factorial moments of the barrier absorption time.
    Moments {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        domain: DomainArgs,
        /// Which barrier's absorption time to analyze.
        #[arg(long, value_enum, default_value_t = BarrierArg::Lower)]
        barrier: BarrierArg,
        /// Factorial-moment order (1 is closed form; 2..=4 use finite
        /// differences of the generating function).
        #[arg(long, default_value_t = 1)]
        order: u32,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Expected time before absorption.
    Meantime {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        domain: DomainArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Monte Carlo estimation of every quantity the analytics predict.
    Simulate {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        domain: DomainArgs,
        #[command(flatten)]
        mc: McArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Compare analytic values against a Monte Carlo run; exit 2 on failure.
    Verify {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        domain: DomainArgs,
        #[command(flatten)]
        mc: McArgs,
        /// Maximum acceptable |z| per quantity.
        #[arg(long, default_value_t = 4.0)]
        z: f64,
        /// Truncation threshold for the analytic extrema tables.
        #[arg(long = "tail-eps", default_value_t = DEFAULT_TAIL_EPS)]
        tail_eps: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Args, Debug)]
struct ParamArgs {
    /// Probability of a forward step.
    #[arg(long)]
    p: f64,
    /// Probability of a backward step.
    #[arg(long)]
    q: f64,
    /// Probability of staying put.
    #[arg(long)]
    r: f64,
    /// Probability of in-place absorption.
    #[arg(long)]
    s: f64,
}

#[derive(Args, Debug)]
struct DomainArgs {
    /// Where the walk lives.
    #[arg(long, value_enum)]
    domain: DomainArg,
    /// Upper barrier of the interval domain.
    #[arg(long = "N")]
    n: Option<i64>,
    /// Starting state.
    #[arg(long)]
    i0: Option<i64>,
    /// Barrier position for the leftline domain.
    #[arg(long)]
    b: Option<i64>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum DomainArg {
    /// [0, N] with absorbing barriers at 0 and N.
    Interval,
    /// [0, ∞) with an absorbing barrier at 0.
    Halfline,
    /// (−∞, b] with an absorbing barrier at b (absorb only).
    Leftline,
    /// The integer line, no barriers.
    Line,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum BarrierArg {
    Lower,
    Upper,
}

#[derive(Args, Debug)]
struct McArgs {
    /// Number of simulated paths.
    #[arg(long, default_value_t = 100_000)]
    paths: u64,
    /// Base RNG seed; each path derives its own stream from it.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Per-path step budget before a path is censored.
    #[arg(long = "step-cap", default_value_t = DEFAULT_STEP_CAP)]
    step_cap: u64,
}

#[derive(Args, Debug)]
struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the document to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
}

/// The fully resolved configuration, echoed verbatim in every document so a
/// run can be reproduced from its own output.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub subcommand: String,
    pub p: f64,
    pub q: f64,
    pub r: f64,
    pub s: f64,
    pub domain: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub i0: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub joint: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub barrier: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub order: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tail_eps: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub paths: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step_cap: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z: Option<f64>,
    pub format: Format,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResultRow {
    pub quantity: String,
    pub indices: BTreeMap<String, Value>,
    pub value: MeanTime,
    pub se: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OutputDoc {
    pub config: RunConfig,
    pub results: Vec<ResultRow>,
    pub diagnostics: BTreeMap<String, Value>,
}

fn row(quantity: &str, indices: BTreeMap<String, Value>, value: f64, se: Option<f64>) -> ResultRow {
    ResultRow {
        quantity: quantity.to_string(),
        indices,
        value: MeanTime::Finite(value),
        se,
    }
}

fn idx(pairs: &[(&str, Value)]) -> BTreeMap<String, Value> {
    pairs
        .iter()
        .map(|(k, v)| (k.to_string(), v.clone()))
        .collect()
}

/// Run the CLI against `argv` (including the program name) and return the
/// process exit code.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are not errors.
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok((doc, format, out, code)) => match emit(&doc, format, out.as_deref()) {
            Ok(()) => code,
            Err(e) => {
                eprintln!("error: {e}");
                1
            }
        },
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Internal(_) => 3,
                _ => 1,
            }
        }
    }
}

fn emit(doc: &OutputDoc, format: Format, out: Option<&std::path::Path>) -> std::io::Result<()> {
    let text = match format {
        Format::Json => {
            let mut t = serde_json::to_string_pretty(doc).expect("document serializes");
            t.push('\n');
            t
        }
        Format::Csv => render_csv(doc),
    };
    match out {
        Some(path) => std::fs::write(path, text),
        None => std::io::stdout().write_all(text.as_bytes()),
    }
}

/// CSV with the same rows as the JSON document.  Values use 17 significant
/// digits so parsing the text recovers the exact double.
fn render_csv(doc: &OutputDoc) -> String {
    let mut out = String::from("quantity,indices,value,se\n");
    for r in &doc.results {
        let indices = r
            .indices
            .iter()
            .map(|(k, v)| match v {
                Value::String(s) => format!("{k}={s}"),
                other => format!("{k}={other}"),
            })
            .collect::<Vec<_>>()
            .join(";");
        let value = match r.value {
            MeanTime::Finite(v) => format!("{v:.16e}"),
            MeanTime::Infinite(_) => "infinite".to_string(),
        };
        let se = r.se.map(|s| format!("{s:.16e}")).unwrap_or_default();
        out.push_str(&format!("{},{indices},{value},{se}\n", r.quantity));
    }
    out
}

type Execution = (OutputDoc, Format, Option<PathBuf>, i32);

fn execute(cmd: Command) -> Result<Execution> {
    match cmd {
        Command::Absorb {
            params,
            domain,
            output,
        } => run_absorb(params, domain, output),
        Command::Extrema {
            params,
            domain,
            joint,
            tail_eps,
            output,
        } => run_extrema(params, domain, joint, tail_eps, output),
        Command::Moments {
            params,
            domain,
            barrier,
            order,
            output,
        } => run_moments(params, domain, barrier, order, output),
        Command::Meantime {
            params,
            domain,
            output,
        } => run_meantime(params, domain, output),
        Command::Simulate {
            params,
            domain,
            mc,
            output,
        } => run_simulate(params, domain, mc, output),
        Command::Verify {
            params,
            domain,
            mc,
            z,
            tail_eps,
            output,
        } => run_verify(params, domain, mc, z, tail_eps, output),
    }
}

fn build_params(a: &ParamArgs) -> Result<WalkParams> {
    validate_params(a.p, a.q, a.r, a.s)
}

fn regime_name(r: Regime) -> &'static str {
    match r {
        Regime::Strict => "strict",
        Regime::NullFree => "null-free",
        Regime::DegenerateNull => "degenerate-null",
    }
}

fn domain_name(d: DomainArg) -> &'static str {
    match d {
        DomainArg::Interval => "interval",
        DomainArg::Halfline => "halfline",
        DomainArg::Leftline => "leftline",
        DomainArg::Line => "line",
    }
}

fn require_i0(d: &DomainArgs) -> Result<i64> {
    d.i0
        .ok_or_else(|| Error::InvalidArgument("--i0 is required for this domain".into()))
}

/// Resolve `--domain/--N/--i0` into a walk domain; `leftline` is rejected
/// here because only `absorb` understands it.
fn build_domain(d: &DomainArgs) -> Result<DomainSpec> {
    match d.domain {
        DomainArg::Interval => {
            let n = d
                .n
                .ok_or_else(|| Error::InvalidArgument("--N is required for interval".into()))?;
            DomainSpec::interval(n, require_i0(d)?)
        }
        DomainArg::Halfline => DomainSpec::half_line(require_i0(d)?),
        DomainArg::Line => Ok(DomainSpec::line(d.i0.unwrap_or(0))),
        DomainArg::Leftline => Err(Error::InvalidArgument(
            "domain leftline is only supported by the absorb subcommand".into(),
        )),
    }
}

fn base_config(sub: &str, p: &ParamArgs, d: &DomainArgs, format: Format) -> RunConfig {
    RunConfig {
        subcommand: sub.to_string(),
        p: p.p,
        q: p.q,
        r: p.r,
        s: p.s,
        domain: domain_name(d.domain).to_string(),
        n: d.n,
        i0: d.i0,
        b: d.b,
        joint: None,
        barrier: None,
        order: None,
        tail_eps: None,
        paths: None,
        seed: None,
        step_cap: None,
        z: None,
        format,
    }
}

fn run_absorb(p: ParamArgs, d: DomainArgs, o: OutputArgs) -> Result<Execution> {
    let walk = build_params(&p)?;
    let mut results = Vec::new();
    match d.domain {
        DomainArg::Interval => {
            let spec = build_domain(&d)?;
            let DomainKind::Interval { n } = spec.kind else {
                unreachable!()
            };
            let probs = absorb_interval(&walk, 0, n, spec.i0)?;
            results.push(row(
                "absorb.lower",
                idx(&[("i", json!(0))]),
                probs.at_lower,
                None,
            ));
            results.push(row(
                "absorb.upper",
                idx(&[("i", json!(n))]),
                probs.at_upper,
                None,
            ));
            results.push(row("absorb.in_place", idx(&[]), probs.interior_mass, None));
        }
        DomainArg::Halfline => {
            let i0 = require_i0(&d)?;
            results.push(row(
                "absorb.lower",
                idx(&[("i", json!(0))]),
                absorb_halfline(&walk, 0, i0)?,
                None,
            ));
        }
        DomainArg::Leftline => {
            let b = d
                .b
                .ok_or_else(|| Error::InvalidArgument("--b is required for leftline".into()))?;
            let i0 = require_i0(&d)?;
            results.push(row(
                "absorb.upper",
                idx(&[("i", json!(b))]),
                absorb_leftline(&walk, b, i0)?,
                None,
            ));
        }
        DomainArg::Line => {
            return Err(Error::InvalidArgument(
                "domain line has no barrier to absorb at".into(),
            ))
        }
    }
    let config = base_config("absorb", &p, &d, o.format);
    let diagnostics = BTreeMap::from([(
        "regime".to_string(),
        json!(regime_name(walk.regime())),
    )]);
    Ok((
        OutputDoc {
            config,
            results,
            diagnostics,
        },
        o.format,
        o.out,
        0,
    ))
}

fn escape_value(v: f64) -> Value {
    json!(v)
}

fn run_extrema(
    p: ParamArgs,
    d: DomainArgs,
    joint: bool,
    tail_eps: f64,
    o: OutputArgs,
) -> Result<Execution> {
    let walk = build_params(&p)?;
    let spec = build_domain(&d)?;
    let mut results = Vec::new();
    let mut diagnostics = BTreeMap::from([(
        "regime".to_string(),
        json!(regime_name(walk.regime())),
    )]);
    if joint {
        let pmf = joint_extrema_pmf(&walk, &spec, tail_eps)?;
        for ((a, b), mass) in &pmf.entries {
            results.push(row(
                "joint",
                idx(&[("a", json!(a)), ("b", json!(b))]),
                *mass,
                None,
            ));
        }
        if pmf.escape_mass > 0.0 {
            results.push(row(
                "joint",
                idx(&[("a", json!("escape")), ("b", json!("escape"))]),
                pmf.escape_mass,
                None,
            ));
        }
        diagnostics.insert("total_mass".into(), escape_value(pmf.total_mass()));
    } else {
        let max = max_pmf(&walk, &spec, tail_eps)?;
        for (b, mass) in &max.entries {
            results.push(row("max", idx(&[("b", json!(b))]), *mass, None));
        }
        if max.escape_mass > 0.0 {
            results.push(row(
                "max",
                idx(&[("b", json!("escape"))]),
                max.escape_mass,
                None,
            ));
        }
        let min = min_pmf(&walk, &spec, tail_eps)?;
        for (a, mass) in &min.entries {
            results.push(row("min", idx(&[("a", json!(a))]), *mass, None));
        }
        if min.escape_mass > 0.0 {
            results.push(row(
                "min",
                idx(&[("a", json!("escape"))]),
                min.escape_mass,
                None,
            ));
        }
        diagnostics.insert("max_total_mass".into(), escape_value(max.total_mass()));
        diagnostics.insert("min_total_mass".into(), escape_value(min.total_mass()));
    }
    let mut config = base_config("extrema", &p, &d, o.format);
    config.joint = Some(joint);
    config.tail_eps = Some(tail_eps);
    Ok((
        OutputDoc {
            config,
            results,
            diagnostics,
        },
        o.format,
        o.out,
        0,
    ))
}

fn moment_quantity(order: u32, barrier: Barrier) -> String {
    let side = match barrier {
        Barrier::Lower => "lower",
        Barrier::Upper => "upper",
    };
    if order == 1 {
        format!("t_partial.{side}")
    } else {
        format!("t{order}fact_partial.{side}")
    }
}

fn run_moments(
    p: ParamArgs,
    d: DomainArgs,
    barrier: BarrierArg,
    order: u32,
    o: OutputArgs,
) -> Result<Execution> {
    let walk = build_params(&p)?;
    let barrier = match barrier {
        BarrierArg::Lower => Barrier::Lower,
        BarrierArg::Upper => Barrier::Upper,
    };
    let (value, method) = match d.domain {
        DomainArg::Interval => {
            let spec = build_domain(&d)?;
            let DomainKind::Interval { n } = spec.kind else {
                unreachable!()
            };
            let report = if order == 1 {
                barrier_first_moment(&walk, n, spec.i0, barrier)?
            } else {
                pgf_derivative_fd(&walk, n, spec.i0, barrier, order)?
            };
            (report.value, report.method)
        }
        DomainArg::Halfline => {
            if barrier != Barrier::Lower {
                return Err(Error::InvalidArgument(
                    "halfline has only a lower barrier".into(),
                ));
            }
            let i0 = require_i0(&d)?;
            let (et, et2) = halfline_time_moments(&walk, i0)?;
            let value = match order {
                1 => et,
                2 => et2,
                _ => {
                    return Err(Error::InvalidArgument(
                        "halfline moments are available for order 1 and 2".into(),
                    ))
                }
            };
            (value, Method::ClosedForm)
        }
        _ => {
            return Err(Error::InvalidArgument(
                "moments requires an interval or halfline domain".into(),
            ))
        }
    };
    let mut config = base_config("moments", &p, &d, o.format);
    config.barrier = Some(
        match barrier {
            Barrier::Lower => "lower",
            Barrier::Upper => "upper",
        }
        .to_string(),
    );
    config.order = Some(order);
    let results = vec![row(
        &moment_quantity(order, barrier),
        idx(&[("order", json!(order))]),
        value,
        None,
    )];
    let diagnostics = BTreeMap::from([
        ("regime".to_string(), json!(regime_name(walk.regime()))),
        (
            "method".to_string(),
            json!(match method {
                Method::ClosedForm => "closed_form",
                Method::FiniteDifference => "finite_difference",
            }),
        ),
    ]);
    Ok((
        OutputDoc {
            config,
            results,
            diagnostics,
        },
        o.format,
        o.out,
        0,
    ))
}

fn run_meantime(p: ParamArgs, d: DomainArgs, o: OutputArgs) -> Result<Execution> {
    let walk = build_params(&p)?;
    let report = match d.domain {
        DomainArg::Interval => {
            let spec = build_domain(&d)?;
            let DomainKind::Interval { n } = spec.kind else {
                unreachable!()
            };
            mean_time_interval(&walk, n, spec.i0)?
        }
        DomainArg::Halfline => mean_time_halfline(&walk, require_i0(&d)?)?,
        DomainArg::Line => mean_time_line(&walk),
        DomainArg::Leftline => {
            return Err(Error::InvalidArgument(
                "domain leftline is only supported by the absorb subcommand".into(),
            ))
        }
    };
    let config = base_config("meantime", &p, &d, o.format);
    let results = vec![ResultRow {
        quantity: "mean_time".into(),
        indices: idx(&[]),
        value: report.value,
        se: None,
    }];
    let diagnostics = BTreeMap::from([
        ("regime".to_string(), json!(regime_name(walk.regime()))),
        ("branch".to_string(), json!(report.regime_used)),
    ]);
    Ok((
        OutputDoc {
            config,
            results,
            diagnostics,
        },
        o.format,
        o.out,
        0,
    ))
}

/// Turn an estimator quantity name like `max[3]` into a row with structured
/// indices.
fn mc_row(name: &str, value: f64, se: f64) -> ResultRow {
    if let Some((head, rest)) = name.split_once('[') {
        let inner = rest.trim_end_matches(']');
        let key = if head == "max" { "b" } else { "a" };
        let v: i64 = inner.parse().expect("histogram index is an integer");
        return row(head, idx(&[(key, json!(v))]), value, Some(se));
    }
    if let Some(head) = name.strip_suffix(".escape") {
        let key = if head == "max" { "b" } else { "a" };
        return row(head, idx(&[(key, json!("escape"))]), value, Some(se));
    }
    row(name, idx(&[]), value, Some(se))
}

fn mc_diagnostics(mc: &McEstimates, regime: Regime) -> BTreeMap<String, Value> {
    BTreeMap::from([
        ("regime".to_string(), json!(regime_name(regime))),
        ("n_censored".to_string(), json!(mc.n_censored)),
        ("config_digest".to_string(), json!(mc.config_digest)),
    ])
}

fn run_simulate(p: ParamArgs, d: DomainArgs, m: McArgs, o: OutputArgs) -> Result<Execution> {
    let walk = build_params(&p)?;
    let spec = build_domain(&d)?;
    let mc = estimate(&walk, &spec, m.paths, m.seed, m.step_cap)?;
    let results = mc
        .quantities
        .iter()
        .map(|(name, e)| mc_row(name, e.value, e.se))
        .collect();
    let mut config = base_config("simulate", &p, &d, o.format);
    config.paths = Some(m.paths);
    config.seed = Some(m.seed);
    config.step_cap = Some(m.step_cap);
    let diagnostics = mc_diagnostics(&mc, walk.regime());
    Ok((
        OutputDoc {
            config,
            results,
            diagnostics,
        },
        o.format,
        o.out,
        0,
    ))
}

/// Build the list of analytic quantities that the Monte Carlo estimator also
/// reports, skipping anything too small for the simulation to resolve.
pub fn analytic_quantities(
    walk: &WalkParams,
    spec: &DomainSpec,
    tail_eps: f64,
) -> Result<Vec<(String, f64)>> {
    let mut out: Vec<(String, f64)> = Vec::new();
    let i0 = spec.i0;
    let mut push = |name: String, value: f64| {
        if value >= VERIFY_MIN_MASS || name.starts_with("t_partial") || name == "mean_time" {
            out.push((name, value));
        }
    };
    match spec.kind {
        DomainKind::Interval { n } => {
            let probs = absorb_interval(walk, 0, n, i0)?;
            push("absorb.lower".into(), probs.at_lower);
            push("absorb.upper".into(), probs.at_upper);
            if walk.s() > 0.0 {
                push("absorb.in_place".into(), probs.interior_mass);
            }
            push(
                "t_partial.lower".into(),
                barrier_first_moment(walk, n, i0, Barrier::Lower)?.value,
            );
            push(
                "t_partial.upper".into(),
                barrier_first_moment(walk, n, i0, Barrier::Upper)?.value,
            );
            if let Some(m) = mean_time_interval(walk, n, i0)?.value.finite() {
                push("mean_time".into(), m);
            }
        }
        DomainKind::HalfLine => {
            push("absorb.lower".into(), absorb_halfline(walk, 0, i0)?);
            if walk.s() > 0.0 {
                push(
                    "absorb.in_place".into(),
                    1.0 - absorb_halfline(walk, 0, i0)?,
                );
            }
            if let Ok((et, et2)) = halfline_time_moments(walk, i0) {
                push("t_partial.lower".into(), et);
                push("t2fact_partial.lower".into(), et2);
            }
            if let Some(m) = mean_time_halfline(walk, i0)?.value.finite() {
                push("mean_time".into(), m);
            }
        }
        DomainKind::Line => {
            if walk.s() > 0.0 {
                push("absorb.in_place".into(), 1.0);
                push(
                    "mean_time".into(),
                    mean_time_line(walk).value.finite().expect("s > 0"),
                );
            }
        }
    }
    let max = max_pmf(walk, spec, tail_eps)?;
    for (b, mass) in &max.entries {
        if *mass >= VERIFY_MIN_MASS {
            out.push((format!("max[{b}]"), *mass));
        }
    }
    if max.escape_mass >= VERIFY_MIN_MASS {
        out.push(("max.escape".into(), max.escape_mass));
    }
    let min = min_pmf(walk, spec, tail_eps)?;
    for (a, mass) in &min.entries {
        if *mass >= VERIFY_MIN_MASS {
            out.push((format!("min[{a}]"), *mass));
        }
    }
    if min.escape_mass >= VERIFY_MIN_MASS {
        out.push(("min.escape".into(), min.escape_mass));
    }
    Ok(out)
}

fn run_verify(
    p: ParamArgs,
    d: DomainArgs,
    m: McArgs,
    z: f64,
    tail_eps: f64,
    o: OutputArgs,
) -> Result<Execution> {
    let walk = build_params(&p)?;
    let spec = build_domain(&d)?;
    let analytic = analytic_quantities(&walk, &spec, tail_eps)?;
    let mc = estimate(&walk, &spec, m.paths, m.seed, m.step_cap)?;
    let report = compare(&analytic, &mc, z)?;
    let results = report
        .rows
        .iter()
        .map(|r| ResultRow {
            quantity: r.name.clone(),
            indices: idx(&[
                ("analytic", json!(r.analytic)),
                ("z", json!(r.z)),
                ("pass", json!(r.pass)),
            ]),
            value: MeanTime::Finite(r.estimate),
            se: Some(r.se),
        })
        .collect();
    let mut config = base_config("verify", &p, &d, o.format);
    config.paths = Some(m.paths);
    config.seed = Some(m.seed);
    config.step_cap = Some(m.step_cap);
    config.z = Some(z);
    config.tail_eps = Some(tail_eps);
    let mut diagnostics = mc_diagnostics(&mc, walk.regime());
    diagnostics.insert("z_threshold".into(), json!(report.z_threshold));
    diagnostics.insert("passed".into(), json!(report.passed));
    let code = if report.passed { 0 } else { 2 };
    Ok((
        OutputDoc {
            config,
            results,
            diagnostics,
        },
        o.format,
        o.out,
        code,
    ))
}
