//! Subcommand definitions and their implementations.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use apd_core::apstats::rho_scan;
use apd_core::construction::{
    hoeffding_threshold, level1, extend_level, plan_lower_schedule_log, report_from_scan, round_to_set,
    stability_from_rho, verify_function, ConstructionParams, FivePropertyReport, HSelection, IndependenceMode,
    LevelDescriptor,
};
use apd_core::fourier::{average_over, dft, idft};
use apd_core::increment::{plan_upper_bound, run_increment, upper_height, EtaSchedule, IncrementBudget, Termination};
use apd_core::regularity::{verify_counting, weak_regular_subspace};
use apd_core::Error as CoreError;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::expr;
use crate::format::{self, FunctionFormat, PointSet};
use crate::report::Reporter;

#[derive(Debug, Parser)]
#[command(name = "apd", version, about = "3-AP statistics and constructions over F_p^n")]
pub struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "APD_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fourier transform of a function file, or the inverse of a spectrum file.
    Transform(TransformArgs),
    /// Per-difference 3-AP densities.
    Scan(ScanArgs),
    /// A weakly regular subspace with its certificate.
    Regularize(RegularizeArgs),
    /// Iterated mean-cube-density increment.
    Increment(IncrementArgs),
    /// The multi-level construction, verified level by level.
    Construct(ConstructArgs),
    /// Random rounding of a weighted set to a set.
    Round(RoundArgs),
    /// Tower-height planners.
    Plan(PlanArgs),
    /// Five-property report for any function file.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct ReportArg {
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TransformArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Read a spectrum and write the function it transforms from.
    #[arg(long)]
    pub inverse: bool,
    #[command(flatten)]
    pub report: ReportArg,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Skip the per-difference records.
    #[arg(long)]
    pub summary_only: bool,
    #[command(flatten)]
    pub report: ReportArg,
}

#[derive(Debug, Args)]
pub struct RegularizeArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub delta: f64,
    /// Pad the codimension up to min(⌊δ⁻²⌋, n).
    #[arg(long)]
    pub pad: bool,
    #[command(flatten)]
    pub report: ReportArg,
}

#[derive(Debug, Args)]
pub struct IncrementArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Gap below α³ the precondition demands; products of powers allowed.
    #[arg(long)]
    pub epsilon: String,
    /// Regularity parameter: a number, a comma list (one per step, the last
    /// repeats) or `doubling` for ε/12.
    #[arg(long)]
    pub eta: String,
    #[arg(long, default_value_t = 64)]
    pub max_steps: usize,
    #[command(flatten)]
    pub report: ReportArg,
}

#[derive(Debug, Args)]
pub struct ConstructArgs {
    #[arg(long)]
    pub p: u32,
    #[arg(long)]
    pub alpha: f64,
    #[arg(long)]
    pub eta: f64,
    /// m_1,m_2,…
    #[arg(long, value_delimiter = ',', required = true)]
    pub dims: Vec<u32>,
    /// mu_2,… (fractions such as 4/9 allowed)
    #[arg(long, value_delimiter = ',')]
    pub mus: Vec<String>,
    #[arg(long)]
    pub seed: u64,
    /// Output function file (binary for .fpnb/.bin).
    #[arg(long)]
    pub out: PathBuf,
    /// Added to the direction threshold ζ³ − 1/125.
    #[arg(long, default_value_t = 0.0)]
    pub slack: f64,
    #[arg(long, default_value_t = 100_000)]
    pub max_attempts: u64,
    /// Require independence over all triples of the previous space.
    #[arg(long)]
    pub strict: bool,
    /// Choose H_i at random instead of lowest indices.
    #[arg(long)]
    pub random_h: bool,
    /// ε for property 4.
    #[arg(long, default_value = "0")]
    pub epsilon: String,
    #[command(flatten)]
    pub report: ReportArg,
}

#[derive(Debug, Args)]
pub struct RoundArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Allowed deviation (default 2·√(ln(12N)/N)).
    #[arg(long)]
    pub eps_star: Option<f64>,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 10)]
    pub retries: u32,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub report: ReportArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PlanMode {
    Upper,
    Lower,
}

#[derive(Debug, Args)]
pub struct PlanArgs {
    #[arg(long, value_enum)]
    pub mode: PlanMode,
    #[arg(long)]
    pub p: u32,
    /// Products of powers allowed, e.g. 2^-160*3^-8.
    #[arg(long, allow_hyphen_values = true)]
    pub epsilon: String,
    /// Density for the upper bound.
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,
    #[command(flatten)]
    pub report: ReportArg,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, default_value = "0")]
    pub epsilon: String,
    /// The previous level, for the stability check.
    #[arg(long)]
    pub previous: Option<PathBuf>,
    #[command(flatten)]
    pub report: ReportArg,
}

/// `0` or a product of powers.
fn nonnegative(text: &str) -> Result<f64> {
    if text.trim().parse::<f64>() == Ok(0.0) {
        return Ok(0.0);
    }
    expr::parse_value(text)
}

fn point_or_null(p: Option<apd_core::Point>) -> Value {
    p.map_or(Value::Null, |p| json!(p.0))
}

/// Runs a command inside a pool of the requested size.
pub fn run(cli: Cli) -> Result<()> {
    match cli.threads {
        Some(0) => bail!("--threads must be positive"),
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(t).build()?;
            pool.install(|| dispatch(cli.command))
        }
        None => dispatch(cli.command),
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Transform(a) => transform(a),
        Command::Scan(a) => scan(a),
        Command::Regularize(a) => regularize(a),
        Command::Increment(a) => increment(a),
        Command::Construct(a) => construct(a),
        Command::Round(a) => round(a),
        Command::Plan(a) => plan(a),
        Command::Verify(a) => verify(a),
    }
}

fn reporter(arg: &ReportArg) -> Result<Reporter> {
    Reporter::open(arg.report.as_deref())
}

fn transform(a: TransformArgs) -> Result<()> {
    let mut r = reporter(&a.report)?;
    if a.inverse {
        let s = format::read_spectrum(&a.input)?;
        let f = idft(&s)?;
        format::write_function(&a.out, &f, FunctionFormat::from_path(&a.out))?;
        r.summary(json!({
            "direction": "inverse",
            "p": f.space().p(),
            "n": f.space().n(),
            "density": f.density(),
            "signed": f.is_signed(),
        }))
    } else {
        let f = format::read_function(&a.input)?;
        let s = dft(&f);
        format::write_spectrum(&a.out, &s)?;
        let (sup, witness) = s.sup_norm();
        r.summary(json!({
            "direction": "forward",
            "p": f.space().p(),
            "n": f.space().n(),
            "energy": s.energy(),
            "sup_norm": sup,
            "sup_witness": witness.0,
        }))
    }
}

fn scan(a: ScanArgs) -> Result<()> {
    let f = format::read_function(&a.input)?;
    let report = rho_scan(&f)?;
    let mut r = reporter(&a.report)?;
    if !a.summary_only {
        for (d, &value) in report.rho.iter().enumerate() {
            r.record("rho", json!({"d": d, "value": value}))?;
        }
    }
    r.summary(json!({
        "alpha": report.alpha,
        "lambda": report.lambda,
        "z": report.z,
        "max_nonzero_rho": report.max_nonzero.map(|m| m.1),
        "argmax_d": point_or_null(report.max_nonzero.map(|m| m.0)),
        "min_nonzero_rho": report.min_nonzero.map(|m| m.1),
        "argmin_d": point_or_null(report.min_nonzero.map(|m| m.0)),
        "margin": report.margin(0.0),
        "effective_epsilon": report.effective_epsilon(),
    }))
}

fn regularize(a: RegularizeArgs) -> Result<()> {
    let f = format::read_function(&a.input)?;
    let cert = weak_regular_subspace(&f, a.delta, a.pad)?;
    let averaged = average_over(&f, &cert.subspace)?;
    let counting = verify_counting(&f, &averaged)?;
    let mut r = reporter(&a.report)?;
    r.record(
        "certificate",
        json!({
            "delta": cert.delta,
            "codim_requested": cert.codim_requested,
            "codim_actual": cert.codim_actual,
            "achieved_gap": cert.achieved_gap,
            "gap_witness": cert.gap_witness.0,
            "large_spectrum": cert.large_spectrum.iter().map(|t| t.0).collect::<Vec<_>>(),
            "constraints": cert.subspace.constraints().iter().map(|t| t.0).collect::<Vec<_>>(),
        }),
    )?;
    r.record(
        "counting",
        json!({
            "gap": counting.gap,
            "sup_gap": counting.delta,
            "bound": counting.bound,
            "holds": counting.holds(),
        }),
    )?;
    r.summary(json!({
        "consistent": cert.is_consistent(),
        "codim": cert.codim_actual,
        "achieved_gap": cert.achieved_gap,
        "counting_holds": counting.holds(),
    }))
}

fn eta_schedule(text: &str) -> Result<EtaSchedule> {
    if text.trim().eq_ignore_ascii_case("doubling") {
        return Ok(EtaSchedule::Doubling);
    }
    let values = text
        .split(',')
        .map(expr::parse_value)
        .collect::<Result<Vec<_>>>()
        .context("parsing --eta")?;
    Ok(match values.as_slice() {
        [single] => EtaSchedule::Constant(*single),
        _ => EtaSchedule::List(values),
    })
}

fn termination_json(t: &Termination) -> Value {
    match t {
        Termination::SmallSubspace { size, threshold } => {
            json!({"kind": "small_subspace", "size": size, "threshold": threshold})
        }
        Termination::PreconditionFailed { mean_lambda, threshold } => {
            json!({"kind": "precondition_failed", "mean_lambda": mean_lambda, "threshold": threshold})
        }
        Termination::Budget { reason } => json!({"kind": "budget", "reason": reason}),
    }
}

fn increment(a: IncrementArgs) -> Result<()> {
    let f = format::read_function(&a.input)?;
    let epsilon = expr::parse_value(&a.epsilon).context("parsing --epsilon")?;
    let schedule = eta_schedule(&a.eta)?;
    let budget = IncrementBudget {
        max_steps: a.max_steps,
        ..Default::default()
    };
    let trace = run_increment(&f, epsilon, &schedule, budget)?;
    let mut r = reporter(&a.report)?;
    for (k, s) in trace.steps.iter().enumerate() {
        r.record(
            "trace_step",
            json!({
                "step": k + 1,
                "codim_before": s.codim_before,
                "codim": s.codim_after,
                "b_before": s.b_before,
                "b": s.b_after,
                "mean_lambda": s.mean_lambda,
                "eta": s.eta,
                "guaranteed": s.guaranteed,
                "inequality_holds": s.inequality_holds(),
                "codim_bound": s.codim_bound.to_string(),
                "codim_bound_holds": s.codim_bound_holds(),
            }),
        )?;
    }
    r.summary(json!({
        "alpha": trace.alpha,
        "epsilon": trace.epsilon,
        "steps": trace.steps.len(),
        "termination": termination_json(&trace.termination),
        "final_codim": trace.final_subspace.codim(),
        "final_b": trace.final_b,
        "monotone": trace.is_monotone(),
        "within_ceiling": trace.within_ceiling(),
    }))
}

fn property_records(r: &mut Reporter, report: &FivePropertyReport) -> Result<()> {
    for c in &report.checks {
        r.record(
            "property",
            json!({
                "level": report.level,
                "id": c.index,
                "name": c.name,
                "pass": c.passed,
                "measured": c.measured,
                "bound": c.bound,
            }),
        )?;
    }
    Ok(())
}

fn construct(a: ConstructArgs) -> Result<()> {
    let mus = a
        .mus
        .iter()
        .map(|m| nonnegative(m))
        .collect::<Result<Vec<_>>>()
        .context("parsing --mus")?;
    let epsilon = nonnegative(&a.epsilon).context("parsing --epsilon")?;
    let mut params = ConstructionParams::new(a.p, a.alpha, a.eta, a.dims.clone(), mus, a.seed);
    params.options.sampling.slack = a.slack;
    params.options.sampling.max_attempts = a.max_attempts;
    if a.strict {
        params.options.sampling.mode = IndependenceMode::Strict;
    }
    if a.random_h {
        params.options.selection = HSelection::Random;
    }
    params.validate()?;
    let regime = params.regime();

    let mut r = reporter(&a.report)?;
    let mut state = level1(&params)?;
    let mut previous_rho: Option<Vec<f64>> = None;
    let mut all_pass = true;
    let mut last = None;
    for level in 1..=params.dims.len() {
        if level > 1 {
            state = extend_level(&state, params.dims[level - 1], params.mus[level - 2], &params.options, params.seed)?;
        }
        let scan = rho_scan(&state.f)?;
        let report = report_from_scan(&state.f, &state.descriptor, epsilon, &scan);
        let stability = previous_rho.as_ref().map(|prev| stability_from_rho(&scan.rho, prev));
        let within = regime[level - 1].within;
        r.record(
            "level",
            json!({
                "level": level,
                "n": state.space().n(),
                "h_size": state.h_points.len(),
                "direction_attempts": state.directions.as_ref().map(|d| d.attempts),
                "max_mean_h": state.directions.as_ref().map(|d| d.max_mean_h),
                "threshold": state.directions.as_ref().map(|d| d.threshold),
                "z": report.z,
                "z_predicted": report.z_predicted,
                "z_asymptotic_bound": report.z_asymptotic_bound,
                "max_nonzero_rho": report.max_rho,
                "argmax_d": point_or_null(report.argmax_d),
                "margin": report.margin,
                "effective_epsilon": report.effective_epsilon,
                "stability_deviation": stability,
                "predicted_worst_rho": regime[level - 1].worst_rho,
                "in_regime": within,
            }),
        )?;
        property_records(&mut r, &report)?;
        all_pass &= report.all_pass();
        previous_rho = Some(scan.rho);
        last = Some(report);
    }
    let last = last.expect("at least one level");
    format::write_function(&a.out, &state.f, FunctionFormat::from_path(&a.out))?;
    r.summary(json!({
        "levels": params.dims.len(),
        "n": state.space().n(),
        "all_pass": all_pass,
        "in_regime": params.in_regime(),
        "alpha": a.alpha,
        "margin": last.margin,
        "effective_epsilon": last.effective_epsilon,
        "z": last.z,
        "out": a.out.display().to_string(),
    }))
}

fn round(a: RoundArgs) -> Result<()> {
    let f = format::read_function(&a.input)?;
    let threshold = hoeffding_threshold(f.space().size());
    let eps_star = a.eps_star.unwrap_or(threshold);
    if eps_star < threshold {
        eprintln!(
            "warning: eps* = {eps_star} is below 2*sqrt(ln(12N)/N) = {threshold}; proceeding best-effort"
        );
    }
    let mut r = reporter(&a.report)?;
    let (outcome, failure) = match round_to_set(&f, eps_star, a.seed, a.retries) {
        Ok(o) => (o, None),
        Err(CoreError::RetriesExhausted(best)) => {
            let message = CoreError::RetriesExhausted(best.clone()).to_string();
            (*best, Some(message))
        }
        Err(e) => return Err(e.into()),
    };
    if failure.is_none() {
        let set = PointSet {
            space: f.space(),
            points: outcome.set.clone(),
        };
        format::write_set(&a.out, &set)?;
    }
    r.summary(json!({
        "accepted": outcome.accepted,
        "attempts": outcome.attempts,
        "size": outcome.set.len(),
        "density_deviation": outcome.density_deviation,
        "max_rho_deviation": outcome.max_rho_deviation,
        "worst_d": point_or_null(outcome.worst_d),
        "eps_star": eps_star,
        "hoeffding_threshold": threshold,
        "below_hypothesis": outcome.below_hypothesis,
    }))?;
    match failure {
        Some(message) => bail!(message),
        None => Ok(()),
    }
}

fn plan(a: PlanArgs) -> Result<()> {
    let ln_epsilon = expr::parse_ln(&a.epsilon).context("parsing --epsilon")?;
    let mut r = reporter(&a.report)?;
    match a.mode {
        PlanMode::Lower => {
            let plan = plan_lower_schedule_log(a.p, ln_epsilon)?;
            let levels: Vec<Value> = plan
                .dims
                .iter()
                .zip(&plan.partial_sums)
                .zip(&plan.ln_mus)
                .enumerate()
                .map(|(i, ((m, n), ln_mu))| {
                    json!({
                        "i": i + 1,
                        "m": m.to_string(),
                        "m_value": m.as_f64(),
                        "n": n.to_string(),
                        "mu": ln_mu.exp(),
                        "ln_mu": ln_mu,
                    })
                })
                .collect();
            r.record(
                "schedule",
                json!({
                    "mode": "lower",
                    "p": plan.p,
                    "ln_epsilon": plan.ln_epsilon,
                    "s": plan.s,
                    "m1": plan.m1,
                    "sigma": plan.sigma,
                    "levels": levels,
                    "height": plan.height,
                    "height_bound": plan.height_bound,
                    "in_regime": plan.in_regime,
                }),
            )?;
            for c in &plan.checks {
                r.record(
                    "check",
                    json!({
                        "name": c.name,
                        "level": c.level,
                        "holds": c.holds,
                        "enforced": c.enforced,
                        "detail": c.detail,
                    }),
                )?;
            }
            r.summary(json!({
                "mode": "lower",
                "s": plan.s,
                "m1": plan.m1,
                "in_regime": plan.in_regime,
                "all_pass": plan.all_checks_pass(),
                "height": plan.height,
                "height_bound": plan.height_bound,
            }))
        }
        PlanMode::Upper => {
            let epsilon = ln_epsilon.exp();
            if !(epsilon > 0.0) {
                bail!("epsilon underflows double precision; the upper planner needs it as a number");
            }
            let plan = plan_upper_bound(a.p, epsilon, a.alpha)?;
            r.record(
                "schedule",
                json!({
                    "mode": "upper",
                    "p": plan.p,
                    "alpha": plan.alpha,
                    "epsilon": plan.epsilon,
                    "height": plan.height,
                    "bound": plan.bound.to_string(),
                    "max_steps": plan.max_steps,
                }),
            )?;
            for c in &plan.chain {
                r.record(
                    "check",
                    json!({
                        "step": c.step,
                        "codim": c.codim.to_string(),
                        "recursion_ok": c.recursion_ok,
                        "tower_ok": c.tower_ok,
                    }),
                )?;
            }
            r.summary(json!({
                "mode": "upper",
                "height": plan.height,
                "closed_form_height": upper_height(a.alpha, epsilon)?,
                "bound": plan.bound.to_string(),
                "all_pass": plan.all_checks_pass(),
            }))
        }
    }
}

fn verify(a: VerifyArgs) -> Result<()> {
    let f = format::read_function(&a.input)?;
    let epsilon = nonnegative(&a.epsilon).context("parsing --epsilon")?;
    let descriptor = LevelDescriptor::infer(&f)?;
    let stability = match &a.previous {
        Some(path) => Some(stability_against(&f, path)?),
        None => None,
    };
    let report = verify_function(&f, &descriptor, epsilon)?;
    let mut r = reporter(&a.report)?;
    r.record(
        "descriptor",
        json!({
            "p": descriptor.p,
            "alpha": descriptor.alpha,
            "eta": descriptor.eta,
            "n1": descriptor.n1,
            "mu_sum": descriptor.mu_sum(),
            "low": descriptor.low(),
            "base": descriptor.base(),
            "high": descriptor.high(),
        }),
    )?;
    property_records(&mut r, &report)?;
    r.summary(json!({
        "all_pass": report.all_pass(),
        "margin": report.margin,
        "effective_epsilon": report.effective_epsilon,
        "max_nonzero_rho": report.max_rho,
        "argmax_d": point_or_null(report.argmax_d),
        "z": report.z,
        "z_predicted": report.z_predicted,
        "stability_deviation": stability,
    }))
}

fn stability_against(f: &apd_core::GFunction, previous: &Path) -> Result<f64> {
    let prev = format::read_function(previous)?;
    let (big, small) = (f.space(), prev.space());
    if big.p() != small.p() || big.n() < small.n() {
        bail!("--previous must live in a subspace of coordinates of the input");
    }
    let now = rho_scan(f)?;
    let before = rho_scan(&prev)?;
    Ok(stability_from_rho(&now.rho, &before.rho))
}
