//! Command-line front end: loads a model, computes certified constants and
//! prints them as a JSON report or a CSV/text table.
//!
//! Exit codes: 0 success, 2 usage error, 3 model error (unreadable or
//! invalid model file, bad `--expr`), 4 computation error. Diagnostics go to
//! standard error only.

mod report;
pub mod source;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::time::{Duration, Instant};

use clap::{Parser, Subcommand, ValueEnum};
use ndscert::baselines::{sample_max, SampleMethod};
use ndscert::bnb::{maximize, minimize, BnBConfig, BnBError, BnBResult, ExprObjective};
use ndscert::expr::{grad_sq_norm, parse, Expr, ExprError, ModelDef, ModelError};
use ndscert::params::{
    jacobian_bounds, lipschitz_case1, lipschitz_case2, osl, qb, qib, qib_distributed, LipschitzResult, OslEstimator,
    ParamError, RunStats,
};
use ndscert::{IBox, Interval};
use thiserror::Error;

pub use report::{emit_table, fixed4, sci, ConfigEcho, ConstantResult, Format, ModelInfo, RunReport, Sense, SCHEMA_VERSION};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Model(String),
    #[error("{0}")]
    Compute(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Model(_) => 3,
            CliError::Compute(_) => 4,
        }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        CliError::Model(e.to_string())
    }
}

impl From<ParamError> for CliError {
    fn from(e: ParamError) -> Self {
        match e {
            ParamError::Model(m) => m.into(),
            e => CliError::Compute(e.to_string()),
        }
    }
}

impl From<BnBError> for CliError {
    fn from(e: BnBError) -> Self {
        CliError::Compute(e.to_string())
    }
}

impl From<ExprError> for CliError {
    fn from(e: ExprError) -> Self {
        CliError::Compute(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "ndscert", version, about = "Certified bounding constants for nonlinear dynamic systems")]
struct Cli {
    /// Model text file, or `builtin:traffic:S` / `builtin:moving_object[:R]`.
    #[arg(long, global = true)]
    model: Option<String>,
    /// Stop a search once its upper and lower bounds are this close.
    #[arg(long, global = true, default_value_t = 1e-4)]
    eps_h: f64,
    /// Boxes no wider than this are not split.
    #[arg(long, global = true, default_value_t = 1e-7)]
    eps_om: f64,
    /// Slabs per dimension in refined interval enclosures.
    #[arg(long, global = true, default_value_t = 10)]
    segments: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Worker threads; defaults to the available parallelism, capped at the
    /// number of independent subproblems.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Report `null` wall times so repeated runs print identical bytes.
    #[arg(long, global = true)]
    no_timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Estimator {
    Frobenius,
    Gershgorin,
    Zeta,
}

impl Estimator {
    fn core(self) -> OslEstimator {
        match self {
            Estimator::Frobenius => OslEstimator::Frobenius,
            Estimator::Gershgorin => OslEstimator::Gershgorin,
            Estimator::Zeta => OslEstimator::Zeta,
        }
    }

    fn constant_name(self) -> &'static str {
        match self {
            Estimator::Frobenius => "gamma_s1",
            Estimator::Gershgorin => "gamma_s2",
            Estimator::Zeta => "gamma_s3",
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Lipschitz constant: case 1 maximizes the whole sum of squared
    /// gradients, case 2 each component separately.
    Lipschitz {
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
        case: u8,
    },
    /// One-sided Lipschitz constant.
    Osl {
        #[arg(long, value_enum, default_value_t = Estimator::Gershgorin)]
        estimator: Estimator,
    },
    /// Quadratic inner-boundedness constants for the given epsilons.
    Qib {
        #[arg(long, allow_negative_numbers = true)]
        eps1: f64,
        #[arg(long, allow_negative_numbers = true)]
        eps2: f64,
        #[arg(long, value_enum, default_value_t = Estimator::Gershgorin)]
        estimator: Estimator,
        /// Bound the gradient term row by row instead of as one sum.
        #[arg(long)]
        distributed: bool,
    },
    /// Diagonal quadratic-boundedness matrix.
    Qb,
    /// Enclosures of every partial derivative of f over the operating region.
    Jacobian,
    /// Certified maximum (or minimum) of an expression over a box.
    Maximize {
        #[arg(long)]
        expr: String,
        /// `x=[0,1]`; repeat the flag or separate entries with `;`. Variables
        /// without an entry take their bounds from `--model`.
        #[arg(long)]
        bounds: Vec<String>,
        #[arg(long)]
        minimize: bool,
    },
    /// Sampling estimate (from below) of the case-1 Lipschitz constant, or
    /// of the maximum of `--expr`.
    Baseline {
        #[arg(long, value_parser = parse_method)]
        method: SampleMethod,
        #[arg(long, default_value_t = 10_000)]
        count: usize,
        #[arg(long)]
        expr: Option<String>,
        #[arg(long)]
        bounds: Vec<String>,
    },
    /// Lipschitz constants of the traffic model for several section counts.
    TrafficTable {
        #[arg(long, value_delimiter = ',', default_values_t = [5, 10])]
        sections: Vec<usize>,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
        case: u8,
    },
    /// Print a built-in model in the model text format.
    ModelExport {
        /// `traffic:S`, `moving_object` or `moving_object:R`.
        spec: String,
    },
}

fn parse_method(s: &str) -> Result<SampleMethod, String> {
    s.parse()
}

/// Runs the command line `argv` (program name first), writing the report to
/// `out` and diagnostics to `err`. Returns the process exit code.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let sink: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(sink, "{}", e.render());
            return code;
        }
    };
    let echo = argv.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    match execute(&cli, echo) {
        Ok(text) => match out.write_all(text.as_bytes()) {
            Ok(()) => 0,
            Err(e) => {
                let _ = writeln!(err, "error: cannot write report: {e}");
                4
            }
        },
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: &Cli, echo: Vec<String>) -> Result<String, CliError> {
    let cfg = BnBConfig { eps_h: cli.eps_h, eps_om: cli.eps_om, segments: cli.segments, ..BnBConfig::default() };
    cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    if cli.workers == Some(0) {
        return Err(CliError::Usage("--workers must be at least 1".into()));
    }
    if let Command::ModelExport { spec } = &cli.command {
        return Ok(source::builtin(spec)?.to_text());
    }
    let model = cli.model.as_deref().map(source::load).transpose()?;
    let ctx = Ctx { cli, cfg, echo };
    let threads = ctx.workers(model.as_ref());
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Compute(format!("cannot start worker pool: {e}")))?;
    let reports = pool.install(|| ctx.reports(model.as_ref()))?;
    for r in &reports {
        r.validate().map_err(|e| CliError::Compute(format!("non-finite result: {e}")))?;
    }
    Ok(emit_table(&reports, cli.format))
}

struct Ctx<'a> {
    cli: &'a Cli,
    cfg: BnBConfig,
    echo: Vec<String>,
}

impl Ctx<'_> {
    /// Requested workers, or the available parallelism capped at the number
    /// of independent searches the command starts.
    fn workers(&self, model: Option<&ModelDef>) -> usize {
        if let Some(w) = self.cli.workers {
            return w;
        }
        let (g, n) = model.map_or((1, 1), |m| (m.g_len(), m.n()));
        let jobs = match &self.cli.command {
            Command::Lipschitz { case: 2 } => g,
            Command::Osl { .. } | Command::Qib { .. } => g * n,
            Command::Qb => n,
            Command::Jacobian => 2 * g * n,
            Command::TrafficTable { sections, case: 2 } => sections.iter().map(|&s| 6 * s + 1).max().unwrap_or(1),
            Command::Baseline { count, .. } => *count,
            _ => 1,
        };
        let avail = std::thread::available_parallelism().map_or(1, |p| p.get());
        avail.min(jobs.max(1))
    }

    fn require<'m>(&self, model: Option<&'m ModelDef>) -> Result<&'m ModelDef, CliError> {
        model.ok_or_else(|| CliError::Usage("this command needs --model".into()))
    }

    fn report(&self, model: Option<&ModelDef>, source: Option<&str>, n: usize, results: Vec<ConstantResult>) -> RunReport {
        let info = model.map(|m| ModelInfo {
            source: source.or(self.cli.model.as_deref()).unwrap_or_default().to_string(),
            fingerprint: source::fingerprint(m),
            states: m.n(),
            inputs: m.m(),
        });
        RunReport {
            schema: SCHEMA_VERSION,
            command: self.echo.clone(),
            config: ConfigEcho { eps_h: self.cfg.eps_h, eps_om: self.cfg.eps_om, segments: self.cfg.segments },
            model: info,
            n,
            results,
        }
    }

    fn row(&self, name: impl Into<String>, sense: Sense, value: f64, lower: f64, gap: f64, eps_optimal: bool) -> ConstantResult {
        ConstantResult {
            name: name.into(),
            sense,
            value,
            lower,
            gap,
            eps_optimal,
            subproblems: 0,
            evals: 0,
            wall_time_ms: None,
            detail: BTreeMap::new(),
        }
    }

    fn with_stats(&self, mut r: ConstantResult, stats: &RunStats) -> ConstantResult {
        r.subproblems = stats.runs;
        r.evals = stats.interval_evals + stats.point_evals;
        r.wall_time_ms = self.time(stats.wall_time);
        r.detail.insert("cover".into(), stats.subproblems as f64);
        r.detail.insert("splits".into(), stats.splits as f64);
        r
    }

    fn time(&self, d: Duration) -> Option<f64> {
        (!self.cli.no_timing).then(|| d.as_secs_f64() * 1e3)
    }

    fn lipschitz_row(&self, r: &LipschitzResult, case: u8) -> ConstantResult {
        let mut row = self.row(format!("gamma_l{case}"), Sense::Max, r.gamma, r.lower, r.gap, r.eps_optimal);
        if case == 2 {
            row.detail.insert("components".into(), r.subproblems.iter().map(|s| s.count).sum::<usize>() as f64);
        }
        self.with_stats(row, &r.stats)
    }

    fn lipschitz(&self, m: &ModelDef, case: u8) -> Result<ConstantResult, CliError> {
        let r = if case == 1 { lipschitz_case1(m, &self.cfg)? } else { lipschitz_case2(m, &self.cfg)? };
        Ok(self.lipschitz_row(&r, case))
    }

    fn reports(&self, model: Option<&ModelDef>) -> Result<Vec<RunReport>, CliError> {
        let cfg = &self.cfg;
        let single = |results: Vec<ConstantResult>| -> Result<Vec<RunReport>, CliError> {
            let m = self.require(model)?;
            Ok(vec![self.report(Some(m), None, m.n(), results)])
        };
        match &self.cli.command {
            Command::Lipschitz { case } => single(vec![self.lipschitz(self.require(model)?, *case)?]),
            Command::Osl { estimator } => {
                let r = osl(self.require(model)?, cfg, estimator.core())?;
                let mut rows = vec![self.with_stats(
                    self.row(estimator.constant_name(), Sense::Max, r.gamma_s, r.lower, r.gap, r.eps_optimal),
                    &r.stats,
                )];
                if let Some(g) = r.lower_gamma {
                    let under = self.row("gamma_under", Sense::Min, g.lower, g.upper, g.gap(), g.eps_optimal);
                    rows.push(self.with_stats(under, &r.stats));
                }
                single(rows)
            }
            Command::Qib { eps1, eps2, estimator, distributed } => {
                let m = self.require(model)?;
                let r = if *distributed {
                    qib_distributed(m, cfg, *eps1, *eps2, estimator.core())?
                } else {
                    qib(m, cfg, *eps1, *eps2, estimator.core())?
                };
                let mut q1 = self.with_stats(self.row("gamma_q1", Sense::Max, r.gamma_q1, r.lower, r.gap, r.eps_optimal), &r.stats);
                for (k, v) in [
                    ("eps1", r.eps1),
                    ("eps2", r.eps2),
                    ("gamma_bar", r.gamma_bar),
                    ("gamma_under", r.gamma_under),
                    ("gamma_m", r.gamma_m),
                ] {
                    q1.detail.insert(k.into(), v);
                }
                let q2 = self.row("gamma_q2", Sense::Max, r.gamma_q2, r.gamma_q2, 0.0, true);
                single(vec![q1, q2])
            }
            Command::Qb => {
                let m = self.require(model)?;
                let r = qb(m, cfg)?;
                let rows = m
                    .states()
                    .iter()
                    .enumerate()
                    .map(|(j, s)| {
                        let row = self.row(format!("Gamma[{}]", s.name), Sense::Max, r.gamma[j], r.lower[j], r.gap, r.eps_optimal);
                        self.with_stats(row, &r.stats)
                    })
                    .collect();
                single(rows)
            }
            Command::Jacobian => {
                let m = self.require(model)?;
                let r = jacobian_bounds(m, cfg)?;
                let mut rows = Vec::new();
                for (i, f) in m.f_names().iter().enumerate() {
                    for (j, x) in m.states().iter().enumerate() {
                        let (mx, mn) = r.extrema[i][j];
                        let name = format!("d{f}/d{}", x.name);
                        let hi = self.row(format!("{name}.max"), Sense::Max, mx.upper, mx.lower, mx.gap(), mx.eps_optimal);
                        let lo = self.row(format!("{name}.min"), Sense::Min, mn.lower, mn.upper, mn.gap(), mn.eps_optimal);
                        rows.push(self.with_stats(hi, &r.stats));
                        rows.push(self.with_stats(lo, &r.stats));
                    }
                }
                single(rows)
            }
            Command::Maximize { expr, bounds, minimize: min } => {
                let (e, domain) = objective(expr, bounds, model)?;
                let obj = ExprObjective::on_box(&e, &domain, cfg.segments)?;
                let r = if *min { minimize(&obj, &domain, cfg)? } else { maximize(&obj, &domain, cfg)? };
                let row = self.search_row(&r, &domain, *min);
                Ok(vec![self.report(model, None, domain.len(), vec![row])])
            }
            Command::Baseline { method, count, expr, bounds } => {
                let (e, domain, root) = match expr {
                    Some(s) => {
                        let (e, d) = objective(s, bounds, model)?;
                        (e, d, false)
                    }
                    None => {
                        let m = self.require(model)?;
                        let h = Expr::sum((0..m.g_len()).map(|i| grad_sq_norm(m, i)).collect::<Result<Vec<_>, _>>()?);
                        let d = m.reduced_box(&h).ok_or_else(|| {
                            CliError::Compute("the Lipschitz objective is constant; nothing to sample".into())
                        })?;
                        (h, d, true)
                    }
                };
                let obj = ExprObjective::on_box(&e, &domain, cfg.segments)?;
                let start = Instant::now();
                let rep = sample_max(&obj, &domain, *count, *method);
                if !rep.best_value.is_finite() {
                    return Err(CliError::Compute("no sample point could be evaluated".into()));
                }
                let (name, v) = if root { ("gamma_l1_sampled", rep.best_value.max(0.0).sqrt()) } else { ("sampled_max", rep.best_value) };
                let mut row = self.row(name, Sense::Max, v, v, 0.0, false);
                row.evals = rep.samples as u64;
                row.wall_time_ms = self.time(start.elapsed());
                for (label, x) in domain.labels().iter().zip(&rep.best_point) {
                    row.detail.insert(format!("at.{label}"), *x);
                }
                let n = model.map_or(domain.len(), ModelDef::n);
                Ok(vec![self.report(model, None, n, vec![row])])
            }
            Command::TrafficTable { sections, case } => sections
                .iter()
                .map(|&s| {
                    let src = format!("builtin:traffic:{s}");
                    let m = source::load(&src)?;
                    let row = self.lipschitz(&m, *case)?;
                    Ok(self.report(Some(&m), Some(&src), m.n(), vec![row]))
                })
                .collect(),
            Command::ModelExport { .. } => unreachable!("handled before the model is loaded"),
        }
    }

    fn search_row(&self, r: &BnBResult, domain: &IBox, min: bool) -> ConstantResult {
        let mut row = if min {
            self.row("min", Sense::Min, r.lower, r.upper, r.gap(), r.eps_optimal)
        } else {
            self.row("max", Sense::Max, r.upper, r.lower, r.gap(), r.eps_optimal)
        };
        row.subproblems = 1;
        row.evals = r.stats.interval_evals + r.stats.point_evals;
        row.wall_time_ms = self.time(r.stats.wall_time);
        row.detail.insert("cover".into(), r.final_cover.len() as f64);
        row.detail.insert("splits".into(), r.stats.splits as f64);
        for (label, x) in domain.labels().iter().zip(&r.best_point) {
            row.detail.insert(format!("at.{label}"), *x);
        }
        row
    }
}

/// Parses `x=[0,1]` entries, several per string when separated by `;`.
pub fn parse_bounds(specs: &[String]) -> Result<Vec<(String, Interval)>, CliError> {
    let mut out: Vec<(String, Interval)> = Vec::new();
    for entry in specs.iter().flat_map(|s| s.split(';')).map(str::trim).filter(|s| !s.is_empty()) {
        let bad = || CliError::Usage(format!("bad bounds `{entry}`; expected NAME=[LO,HI]"));
        let (name, rest) = entry.split_once('=').ok_or_else(bad)?;
        let inner = rest.trim().strip_prefix('[').and_then(|r| r.strip_suffix(']')).ok_or_else(bad)?;
        let (lo, hi) = inner.split_once(',').ok_or_else(bad)?;
        let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
        let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
        let iv = Interval::new(lo, hi).map_err(|_| bad())?;
        let name = name.trim().to_string();
        if out.iter().any(|(n, _)| *n == name) {
            return Err(CliError::Usage(format!("bounds for `{name}` given twice")));
        }
        out.push((name, iv));
    }
    Ok(out)
}

/// The expression and a box over its variables (in sorted order), bounds
/// from `--bounds` first and the model second.
fn objective(expr: &str, bounds: &[String], model: Option<&ModelDef>) -> Result<(Expr, IBox), CliError> {
    let e = parse(expr).map_err(|e| CliError::Model(format!("--expr: {e}")))?;
    let given = parse_bounds(bounds)?;
    let vars = e.free_vars();
    if vars.is_empty() {
        return Err(CliError::Usage("--expr has no variables".into()));
    }
    if let Some((name, _)) = given.iter().find(|(n, _)| !vars.contains(n)) {
        return Err(CliError::Usage(format!("--bounds names `{name}`, which the expression does not use")));
    }
    let mut dims = Vec::with_capacity(vars.len());
    for v in &vars {
        let iv = given
            .iter()
            .find(|(n, _)| n == v)
            .map(|(_, iv)| *iv)
            .or_else(|| model.and_then(|m| m.bounds_of(v)))
            .ok_or_else(|| CliError::Usage(format!("no bounds for `{v}`")))?;
        dims.push(iv);
    }
    let domain = IBox::new(vars.into_iter().collect(), dims).map_err(|e| CliError::Usage(e.to_string()))?;
    Ok((e, domain))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bounds_syntax() {
        let b = parse_bounds(&["x=[0,1]; y = [-2.5, 3]".into(), "z=[1e-3,1e-3]".into()]).unwrap();
        assert_eq!(b.len(), 3);
        assert_eq!(b[1].0, "y");
        assert_eq!(b[1].1, Interval::new(-2.5, 3.0).unwrap());
        for bad in ["x=0,1", "x=[1,0]", "x=[0;1]", "=[0,1", "x=[a,1]"] {
            assert!(parse_bounds(&[bad.into()]).is_err(), "{bad}");
        }
        assert!(parse_bounds(&["x=[0,1]".into(), "x=[0,2]".into()]).is_err());
    }

    #[test]
    fn objective_takes_missing_bounds_from_model() {
        let m = source::builtin("moving_object").unwrap();
        let (_, d) = objective("x1*x2", &["x2=[0,1]".into()], Some(&m)).unwrap();
        assert_eq!(d.dims(), &[Interval::new(-5.0, 5.0).unwrap(), Interval::new(0.0, 1.0).unwrap()]);
        assert!(matches!(objective("x1*q", &[], Some(&m)), Err(CliError::Usage(_))));
        assert!(matches!(objective("x1*", &[], Some(&m)), Err(CliError::Model(_))));
    }

    #[test]
    fn error_kinds_map_to_exit_codes() {
        assert_eq!(CliError::from(ParamError::Model(ModelError::Empty)).exit_code(), 3);
        assert_eq!(CliError::from(ParamError::InvalidDimension(1)).exit_code(), 4);
        assert_eq!(CliError::Usage(String::new()).exit_code(), 2);
    }
}
