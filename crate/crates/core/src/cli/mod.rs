//! Command-line front end: argument parsing, dispatch to the library and
//! rendering of reports.
//!
//! Exit codes: 0 success, 2 usage or specification error, 3 tolerance not
//! reached (best estimates are still printed), 4 verification failure.

mod report;
mod table;

pub use report::{Field, Report, Row};

use std::ffi::OsString;
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::sync::{Mutex, PoisonError};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::aggregation::{
    self, andness_average_numeric, format_rational, global_idempotency, global_orness, idempotency_average_numeric, orness_average_numeric,
    AggregationError, Bounded, ConjunctiveFunction, DisjunctiveFunction, InternalFunction, SetFunction,
};
use crate::expr::{self, Compiled, EvalError};
use crate::oracle;
use crate::probability::{self, Distribution, DistributionSpec, ProbabilityError};
use crate::quadrature::{Interval, QuadError, QuadResult, Tolerance};
use crate::reduction::{self, InnerStrategy, ReductionError, SymmetricFullIntegrand, MAX_GRID_DIMENSION};

pub const EXIT_OK: u8 = 0;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_NOT_CONVERGED: u8 = 3;
pub const EXIT_VERIFY_FAILED: u8 = 4;

/// `verify` passes when the reduced value is within this many oracle
/// standard errors.
pub const VERIFY_SIGMA: f64 = 4.0;
pub const DEFAULT_VERIFY_SAMPLES: usize = 1_000_000;
/// Per-node sample count when an inner integral is above the grid limit.
pub const DEFAULT_INNER_SAMPLES: usize = 20_000;

#[derive(Debug, Parser)]
#[command(name = "minmax", version, about = "Integrals over [a,b]^n of functions of the minimum and maximum, reduced to two dimensions")]
pub struct Cli {
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integral over [a,b]^n of a kernel g(u, v) of the minimum u and maximum v,
    /// or of a symmetric integrand that also uses x1..x(n-2)
    Integrate(Job),
    /// Orness and andness averages and global orness of an internal function
    Orness(Job),
    /// Idempotency average and global idempotency of a conjunctive or disjunctive function
    Idempotency(Job),
    /// E[g(min, max)] for independent draws from the given distribution(s)
    Expect(DistJob),
    /// P(g(min, max) <= z) for iid draws
    Cdf(CdfJob),
    /// Reduced quadrature side by side with Monte Carlo on the full cube
    Verify(Job),
    /// Closed forms against their numeric reductions
    Table,
}

#[derive(Debug, Clone, Args)]
pub struct Job {
    /// Number of variables
    #[arg(long)]
    pub n: Option<usize>,
    /// Domain [A, B] of every coordinate (default 0 1)
    #[arg(long, num_args = 2, value_names = ["A", "B"], allow_negative_numbers = true)]
    pub domain: Option<Vec<f64>>,
    #[command(flatten)]
    pub source: Source,
    #[command(flatten)]
    pub numeric: Numeric,
}

/// Exactly one integrand source.
#[derive(Debug, Clone, Args)]
#[group(multiple = false)]
pub struct Source {
    /// Expression in u (minimum), v (maximum), n and x1..x(n-2) (the other coordinates)
    #[arg(long, visible_alias = "g")]
    pub kernel: Option<String>,
    #[arg(long, value_enum)]
    pub builtin: Option<Builtin>,
    /// Set-function JSON file defining a Choquet integral
    #[arg(long, value_name = "FILE")]
    pub choquet: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct Numeric {
    #[arg(long, default_value_t = 1e-10)]
    pub rel_tol: f64,
    #[arg(long, default_value_t = 1e-12)]
    pub abs_tol: f64,
    #[arg(long, default_value_t = 50_000_000)]
    pub max_evals: usize,
    /// Gauss-Legendre points per axis for inner integrals of dimension <= 4
    #[arg(long)]
    pub points: Option<usize>,
    /// Monte Carlo samples: per inner integral above dimension 4, or for the `verify` oracle
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct DistJob {
    /// Expression in u (minimum), v (maximum) and n
    #[arg(long, visible_alias = "kernel")]
    pub g: String,
    /// Number of iid draws; with several --dist, must equal their count
    #[arg(long)]
    pub n: Option<usize>,
    /// kind:params, e.g. uniform:0,1 or exp:2; repeat for independent, non-identical draws
    #[arg(long, conflicts_with = "dist_file")]
    pub dist: Vec<String>,
    /// JSON distribution, or a JSON array of them
    #[arg(long, value_name = "FILE")]
    pub dist_file: Option<PathBuf>,
    #[command(flatten)]
    pub numeric: Numeric,
}

#[derive(Debug, Clone, Args)]
pub struct CdfJob {
    #[command(flatten)]
    pub job: DistJob,
    #[arg(long, allow_negative_numbers = true)]
    pub z: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Builtin {
    Geometric,
    Arithmetic,
    Min,
    Max,
    Product,
    ProbabilisticSum,
    VarianceRange,
}

impl Builtin {
    fn name(self) -> String {
        self.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Failure {
    Spec(String),
    NotConverged(Report),
    /// The report and the reason it failed.
    VerifyFailed(Report, String),
}

/// Exit code and the text destined for stdout and stderr.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: u8,
    pub stdout: String,
    pub stderr: String,
}

pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome { code: EXIT_USAGE, stdout: String::new(), stderr: text }
            } else {
                Outcome { code: EXIT_OK, stdout: text, stderr: String::new() }
            };
        }
    };
    let render = |r: &Report| match cli.format {
        Format::Text => r.to_text(),
        Format::Json => r.to_json() + "\n",
    };
    match execute(&cli) {
        Ok(r) => Outcome { code: EXIT_OK, stdout: render(&r), stderr: String::new() },
        Err(Failure::Spec(msg)) => Outcome { code: EXIT_USAGE, stdout: String::new(), stderr: format!("error: {msg}\n") },
        Err(Failure::NotConverged(r)) => Outcome {
            code: EXIT_NOT_CONVERGED,
            stdout: render(&r),
            stderr: "error: tolerance not reached; printed values are best estimates\n".into(),
        },
        Err(Failure::VerifyFailed(r, reason)) => Outcome { code: EXIT_VERIFY_FAILED, stdout: render(&r), stderr: format!("error: {reason}\n") },
    }
}

pub fn execute(cli: &Cli) -> Result<Report, Failure> {
    match &cli.command {
        Command::Integrate(job) => integrate(job),
        Command::Orness(job) => orness(job),
        Command::Idempotency(job) => idempotency(job),
        Command::Expect(job) => expect(job),
        Command::Cdf(job) => cdf(job),
        Command::Verify(job) => verify(job),
        Command::Table => table::run(),
    }
}

fn spec(e: impl Display) -> Failure {
    Failure::Spec(e.to_string())
}

/// Errors that may carry the best estimate of a non-converged run.
trait Estimate: Display {
    fn best(&self) -> Option<QuadResult>;
}

impl Estimate for QuadError {
    fn best(&self) -> Option<QuadResult> {
        match self {
            QuadError::ToleranceNotReached { best } => Some(*best),
            _ => None,
        }
    }
}

impl Estimate for ReductionError {
    fn best(&self) -> Option<QuadResult> {
        self.best_estimate()
    }
}

impl Estimate for AggregationError {
    fn best(&self) -> Option<QuadResult> {
        self.best_estimate()
    }
}

impl Estimate for ProbabilityError {
    fn best(&self) -> Option<QuadResult> {
        self.best_estimate()
    }
}

// An expression error explains any failure that follows it; otherwise a
// non-converged run yields its best estimate.
fn settle<E: Estimate>(r: Result<QuadResult, E>, user: Option<&UserFn>) -> Result<QuadResult, Failure> {
    if let Some(e) = user.and_then(UserFn::take_error) {
        return Err(Failure::Spec(format!("expression evaluation failed: {e}")));
    }
    match r {
        Ok(q) => Ok(q),
        Err(e) => e.best().map(|b| QuadResult { converged: false, ..b }).ok_or_else(|| spec(e)),
    }
}

fn finish(report: Report, results: &[QuadResult]) -> Result<Report, Failure> {
    if results.iter().all(|r| r.converged) {
        Ok(report)
    } else {
        Err(Failure::NotConverged(report))
    }
}

fn combined(report: Report, results: &[QuadResult]) -> Report {
    report
        .with("abs_error", results.iter().map(|r| r.abs_error).fold(0.0, f64::max))
        .with("evaluations", results.iter().map(|r| r.evaluations).sum::<usize>())
        .with("converged", results.iter().all(|r| r.converged))
}

fn tolerance(o: &Numeric) -> Result<Tolerance, Failure> {
    Tolerance::new(o.rel_tol, o.abs_tol, o.max_evals).map_err(spec)
}

fn domain_of(domain: &Option<Vec<f64>>) -> Result<Interval, Failure> {
    match domain.as_deref() {
        None => Ok(Interval::unit()),
        Some([a, b]) => Interval::new(*a, *b).map_err(spec),
        Some(_) => Err(spec("--domain takes two values")),
    }
}

fn require_n(n: Option<usize>, min: usize) -> Result<usize, Failure> {
    match n {
        None => Err(spec("--n is required")),
        Some(n) if n < min => Err(spec(format!("need --n >= {min}, got {n}"))),
        Some(n) if n > reduction::MAX_DIMENSION => Err(spec(format!("--n must be at most {}", reduction::MAX_DIMENSION))),
        Some(n) => Ok(n),
    }
}

fn default_points(m: usize) -> usize {
    match m {
        0 | 1 => 32,
        2 => 24,
        3 => 16,
        _ => 10,
    }
}

/// Grid for inner dimension `m <= 4`, Monte Carlo above.
fn strategy(o: &Numeric, m: usize) -> InnerStrategy {
    if m <= MAX_GRID_DIMENSION {
        InnerStrategy::TensorGrid { points_per_axis: o.points.unwrap_or(default_points(m)) }
    } else {
        InnerStrategy::MonteCarlo { samples: o.samples.unwrap_or(DEFAULT_INNER_SAMPLES), seed: o.seed }
    }
}

/// A user expression compiled against fixed slot names. The first
/// evaluation error is kept and the integrator sees NaN.
struct UserFn {
    compiled: Compiled,
    error: Mutex<Option<EvalError>>,
}

impl UserFn {
    /// `slots` lists every admissible variable; `hint` explains them.
    fn new(text: &str, slots: &[&str], hint: &str) -> Result<Self, Failure> {
        let e = expr::parse(text).map_err(|e| spec(format!("in '{text}': {e}")))?;
        if let Some(bad) = e.free_vars().into_iter().find(|v| !slots.contains(&v.as_str())) {
            return Err(spec(format!("unknown variable '{bad}' in '{text}' ({hint})")));
        }
        let compiled = e.compile(slots).map_err(spec)?;
        Ok(Self { compiled, error: Mutex::new(None) })
    }

    fn call(&self, args: &[f64]) -> f64 {
        match self.compiled.eval(args) {
            Ok(x) => x,
            Err(e) => {
                self.error.lock().unwrap_or_else(PoisonError::into_inner).get_or_insert(e);
                f64::NAN
            }
        }
    }

    fn take_error(&self) -> Option<EvalError> {
        self.error.lock().unwrap_or_else(PoisonError::into_inner).take()
    }
}

/// Integrand of `integrate` and `verify`.
enum Integrand {
    /// `g(u, v)`.
    Pair(UserFn),
    /// `f(x1.., u, v)` with the free coordinates after `u, v, n`.
    Full(UserFn),
    VarianceRange,
}

impl Integrand {
    fn from_job(job: &Job, n: usize) -> Result<Self, Failure> {
        let s = &job.source;
        match (&s.kernel, s.builtin, &s.choquet) {
            (Some(text), None, None) => {
                let e = expr::parse(text).map_err(|e| spec(format!("in '{text}': {e}")))?;
                let free: Vec<String> = (1..=n - 2).map(|k| format!("x{k}")).collect();
                let uses_free = e.free_vars().iter().any(|v| v.starts_with('x'));
                let mut slots = vec!["u", "v", "n"];
                if uses_free {
                    slots.extend(free.iter().map(String::as_str));
                }
                let hint = match n {
                    2 => "use u, v and n".to_string(),
                    3 => "use u, v, n and x1".to_string(),
                    _ => format!("use u, v, n and x1..x{}", n - 2),
                };
                let f = UserFn::new(text, &slots, &hint)?;
                Ok(if uses_free { Integrand::Full(f) } else { Integrand::Pair(f) })
            }
            (None, Some(Builtin::VarianceRange), None) => Ok(Integrand::VarianceRange),
            (None, Some(b), None) => Err(spec(format!("builtin '{}' has no integrand here; use variance-range or --kernel", b.name()))),
            (None, None, Some(_)) => Err(spec("--choquet is not an integrand; use it with orness")),
            _ => Err(spec("need --kernel or --builtin")),
        }
    }

    fn user(&self) -> Option<&UserFn> {
        match self {
            Integrand::Pair(f) | Integrand::Full(f) => Some(f),
            Integrand::VarianceRange => None,
        }
    }

    fn reduce(&self, n: usize, domain: Interval, tol: &Tolerance, o: &Numeric) -> Result<QuadResult, ReductionError> {
        let nf = n as f64;
        let m = n - 2;
        match self {
            Integrand::Pair(g) => reduction::integrate_minmax_pair(|u, v| g.call(&[u, v, nf]), n, domain, tol),
            Integrand::Full(g) => {
                let f = SymmetricFullIntegrand::new(n, |free: &[f64], u: f64, v: f64| {
                    let mut args = Vec::with_capacity(m + 3);
                    args.extend([u, v, nf]);
                    args.extend_from_slice(free);
                    g.call(&args)
                });
                reduction::integrate_minmax_full(&f, domain, tol, &strategy(o, m))
            }
            Integrand::VarianceRange => reduction::integrate_minmax_full(&reduction::variance_range_integrand(n), domain, tol, &strategy(o, m)),
        }
    }

    /// The integrand at a full point `x` with minimum `lo` and maximum `hi`.
    fn at(&self, x: &[f64], lo: f64, hi: f64) -> f64 {
        let n = x.len();
        match self {
            Integrand::Pair(g) => g.call(&[lo, hi, n as f64]),
            Integrand::Full(g) => {
                let jmin = x.iter().position(|&t| t == lo).unwrap_or(0);
                let jmax = x.iter().enumerate().position(|(i, &t)| t == hi && i != jmin).unwrap_or((jmin + 1) % n);
                let mut args = Vec::with_capacity(n + 1);
                args.extend([lo, hi, n as f64]);
                args.extend(x.iter().enumerate().filter(|&(i, _)| i != jmin && i != jmax).map(|(_, &t)| t));
                g.call(&args)
            }
            Integrand::VarianceRange => reduction::sample_variance(x) / (hi - lo),
        }
    }
}

fn integrate(job: &Job) -> Result<Report, Failure> {
    let n = require_n(job.n, 2)?;
    let domain = domain_of(&job.domain)?;
    let tol = tolerance(&job.numeric)?;
    let f = Integrand::from_job(job, n)?;
    let q = settle(f.reduce(n, domain, &tol, &job.numeric), f.user())?;
    finish(Report::quad(&q), &[q])
}

fn verify(job: &Job) -> Result<Report, Failure> {
    let n = require_n(job.n, 2)?;
    let domain = domain_of(&job.domain)?;
    let tol = tolerance(&job.numeric)?;
    let f = Integrand::from_job(job, n)?;
    let samples = job.numeric.samples.unwrap_or(DEFAULT_VERIFY_SAMPLES);

    let start = Instant::now();
    let reduced = settle(f.reduce(n, domain, &tol, &job.numeric), f.user())?;
    let reduced_seconds = start.elapsed().as_secs_f64();

    let start = Instant::now();
    let mc = oracle::mc_cube(|x, lo, hi| f.at(x, lo, hi), n, domain, samples, job.numeric.seed);
    let oracle_seconds = start.elapsed().as_secs_f64();
    if let Some(e) = f.user().and_then(UserFn::take_error) {
        return Err(Failure::Spec(format!("expression evaluation failed: {e}")));
    }
    let mc = mc.map_err(spec)?;

    // A zero-variance oracle is exact; compare within the quadrature tolerance.
    let diff = (reduced.value - mc.mean).abs();
    let gap = if mc.std_error > 0.0 {
        diff / mc.std_error
    } else if diff <= reduced.abs_error.max(tol.abs).max(tol.rel * mc.mean.abs()) {
        0.0
    } else {
        f64::INFINITY
    };
    let passed = gap <= VERIFY_SIGMA;
    let report = Report::new()
        .with("reduced", reduced.value)
        .with("reduced_abs_error", reduced.abs_error)
        .with("reduced_evaluations", reduced.evaluations)
        .with("reduced_seconds", reduced_seconds)
        .with("oracle_mean", mc.mean)
        .with("oracle_std_error", mc.std_error)
        .with("oracle_samples", mc.samples)
        .with("oracle_seconds", oracle_seconds)
        .with("seed", mc.seed as usize)
        .with("sigma_gap", gap)
        .with("passed", passed)
        .with("converged", reduced.converged);
    if !reduced.converged {
        Err(Failure::NotConverged(report))
    } else if !passed {
        Err(Failure::VerifyFailed(report, format!("reduced value and oracle differ by more than {VERIFY_SIGMA} standard errors")))
    } else {
        Ok(report)
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| spec(format!("cannot read {}: {e}", path.display())))
}

fn orness(job: &Job) -> Result<Report, Failure> {
    let domain = domain_of(&job.domain)?;
    let tol = tolerance(&job.numeric)?;
    let s = &job.source;
    let (f, closed_form) = match (&s.kernel, s.builtin, &s.choquet) {
        (None, Some(b), None) => {
            let n = require_n(job.n, 2)?;
            let unit = domain == Interval::unit();
            let (f, closed) = match b {
                Builtin::Geometric => {
                    let closed = if unit { Some(aggregation::orness_average_geometric(n).map_err(spec)?.to_string()) } else { None };
                    (InternalFunction::geometric_mean(n, domain), closed)
                }
                Builtin::Arithmetic => (InternalFunction::arithmetic_mean(n, domain), Some("1/2".to_string())),
                Builtin::Min => (InternalFunction::minimum(n, domain), Some("0".to_string())),
                Builtin::Max => (InternalFunction::maximum(n, domain), Some("1".to_string())),
                other => {
                    return Err(spec(format!(
                        "'{}' is not an internal function; orness takes geometric, arithmetic, min, max or --choquet",
                        other.name()
                    )))
                }
            };
            (f.map_err(spec)?, closed)
        }
        (None, None, Some(path)) => {
            let a = SetFunction::from_json(&read(path)?).map_err(spec)?;
            if let Some(n) = job.n.filter(|&n| n != a.n()) {
                return Err(spec(format!("--n {n} does not match the set function's n = {}", a.n())));
            }
            let closed = format_rational(&aggregation::orness_average_choquet(&a).map_err(spec)?);
            (InternalFunction::choquet(&a, domain).map_err(spec)?, Some(closed))
        }
        (Some(_), None, None) => return Err(spec("orness takes --builtin or --choquet, not an expression")),
        _ => return Err(spec("need --builtin or --choquet")),
    };
    let strategy = strategy(&job.numeric, f.n() - 2);
    let o = settle(orness_average_numeric(&f, domain, &tol, &strategy), None)?;
    let a = settle(andness_average_numeric(&f, domain, &tol, &strategy), None)?;
    let g = settle(global_orness(&f, domain, &tol, &strategy), None)?;
    let report = Report::new()
        .with("orness_average", o.value)
        .with("andness_average", a.value)
        .with("global_orness", g.value)
        .with("closed_form", closed_form);
    finish(combined(report, &[o, a, g]), &[o, a, g])
}

fn idempotency(job: &Job) -> Result<Report, Failure> {
    let domain = domain_of(&job.domain)?;
    let tol = tolerance(&job.numeric)?;
    let s = &job.source;
    let b = match (&s.kernel, s.builtin, &s.choquet) {
        (None, Some(b), None) => b,
        _ => return Err(spec("idempotency takes --builtin product, min, max or probabilistic-sum")),
    };
    let n = require_n(job.n, 1)?;
    let unit = domain == Interval::unit();
    let product_like = |unit: bool| {
        if unit {
            let avg = aggregation::idempotency_average_product(n).map_err(spec)?;
            let global = aggregation::global_idempotency_product(n).map_err(spec)?;
            Ok::<_, Failure>((Some(format_rational(&avg)), Some(format_rational(&global))))
        } else {
            Ok((None, None))
        }
    };
    let conj;
    let disj;
    let (f, average_strategy, (exact_average, exact_global)): (Bounded, InnerStrategy, _) = match b {
        Builtin::Product => {
            conj = ConjunctiveFunction::product(n, domain).map_err(spec)?;
            ((&conj).into(), aggregation::product_idf_kernel(n, domain), product_like(unit)?)
        }
        Builtin::Min => {
            conj = ConjunctiveFunction::minimum(n, domain).map_err(spec)?;
            ((&conj).into(), strategy(&job.numeric, n - 1), (Some("1".into()), Some("1".into())))
        }
        Builtin::Max => {
            disj = DisjunctiveFunction::maximum(n, domain).map_err(spec)?;
            ((&disj).into(), strategy(&job.numeric, n - 1), (Some("1".into()), Some("1".into())))
        }
        Builtin::ProbabilisticSum => {
            disj = DisjunctiveFunction::probabilistic_sum(n, domain).map_err(spec)?;
            ((&disj).into(), strategy(&job.numeric, n - 1), product_like(unit)?)
        }
        other => {
            return Err(spec(format!(
                "'{}' is neither conjunctive nor disjunctive; idempotency takes product, min, max or probabilistic-sum",
                other.name()
            )))
        }
    };
    let global_strategy = strategy(&job.numeric, n.saturating_sub(2));
    let avg = settle(idempotency_average_numeric(f, domain, &tol, &average_strategy), None)?;
    let global = settle(global_idempotency(f, domain, &tol, &global_strategy), None)?;
    let report = Report::new()
        .with("idempotency_average", avg.value)
        .with("global_idempotency", global.value)
        .with("closed_form_average", exact_average)
        .with("closed_form_global", exact_global);
    finish(combined(report, &[avg, global]), &[avg, global])
}

fn distributions(job: &DistJob) -> Result<Vec<Distribution>, Failure> {
    let specs: Vec<DistributionSpec> = match &job.dist_file {
        Some(path) => {
            let text = read(path)?;
            if text.trim_start().starts_with('[') {
                serde_json::from_str(&text).map_err(|e| spec(format!("{}: {e}", path.display())))?
            } else {
                vec![DistributionSpec::from_json(&text).map_err(spec)?]
            }
        }
        None => job.dist.iter().map(|d| DistributionSpec::parse_flat(d)).collect::<Result<_, _>>().map_err(spec)?,
    };
    if specs.is_empty() {
        return Err(spec("need --dist or --dist-file"));
    }
    specs.iter().map(|s| s.build().map_err(spec)).collect()
}

const DIST_VARS: &str = "use u (minimum), v (maximum) and n";

fn expect(job: &DistJob) -> Result<Report, Failure> {
    let dists = distributions(job)?;
    let tol = tolerance(&job.numeric)?;
    let g = UserFn::new(&job.g, &["u", "v", "n"], DIST_VARS)?;
    let r = if let [dist] = dists.as_slice() {
        let n = require_n(job.n, 2)?;
        let nf = n as f64;
        probability::expect_minmax_iid(|u, v| g.call(&[u, v, nf]), dist, n, &tol)
    } else {
        let n = dists.len();
        if let Some(k) = job.n.filter(|&k| k != n) {
            return Err(spec(format!("--n {k} does not match the {n} distributions given")));
        }
        let nf = n as f64;
        probability::expect_minmax_hetero(|u, v| g.call(&[u, v, nf]), &dists, &tol)
    };
    let q = settle(r, Some(&g))?;
    finish(Report::quad(&q), &[q])
}

fn cdf(job: &CdfJob) -> Result<Report, Failure> {
    let dists = distributions(&job.job)?;
    let [dist] = dists.as_slice() else {
        return Err(spec("cdf takes a single distribution (iid draws)"));
    };
    if !job.z.is_finite() {
        return Err(spec("--z must be finite"));
    }
    let tol = tolerance(&job.job.numeric)?;
    let g = UserFn::new(&job.job.g, &["u", "v", "n"], DIST_VARS)?;
    let n = require_n(job.job.n, 2)?;
    let nf = n as f64;
    let r = probability::cdf_of_functional(|u, v| g.call(&[u, v, nf]), dist, n, job.z, &tol);
    let q = settle(r, Some(&g))?;
    finish(Report::quad(&q), &[q])
}
