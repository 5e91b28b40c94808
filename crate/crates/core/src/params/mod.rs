//! Certified constants for the five function classes of a model: bounded
//! Jacobian, Lipschitz, one-sided Lipschitz, quadratic inner-bounded and
//! quadratic bounded.
//!
//! Every constant is assembled from branch-and-bound runs on closed-form
//! objectives over the operating region, each run on the reduced box of the
//! variables its objective actually uses. Independent runs execute on the
//! current rayon pool; results are stored by index, so the outcome does not
//! depend on completion order.

mod jacobian;
mod lipschitz;
mod osl;
mod quadratic;

use std::time::{Duration, Instant};

use rayon::prelude::*;
use thiserror::Error;

use crate::bnb::{self, BnBConfig, BnBError, BnBResult, ExprObjective, Objective};
use crate::expr::{Compiled, EvalError, Expr, ExprError, ModelDef, ModelError};
use crate::interval::{IBox, Interval};

pub use jacobian::{jacobian_bounds, JacobianBounds};
pub use lipschitz::{lipschitz_case1, lipschitz_case2, LipschitzCase, LipschitzResult, UniqueSubproblem};
pub use osl::{
    build_psi, build_xi, osl, osl_frobenius, osl_gershgorin, osl_zeta, psi_eigen_sampled, zeta, EigenSample,
    OslEstimator, OslResult,
};
pub use quadratic::{qb, qib, qib_distributed, qib_to_lipschitz, QbResult, QibResult};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    BnB(#[from] BnBError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("dimension {0} is not supported (need at least 2)")]
    InvalidDimension(usize),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("2*gamma_q1 + gamma_q2^2 = {value} < 0: no QIB function has these constants")]
    NecessaryConditionViolated { value: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

/// Work done for one constant, summed over its branch-and-bound runs.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunStats {
    pub runs: usize,
    pub splits: u64,
    pub interval_evals: u64,
    pub point_evals: u64,
    /// Total size of the final covers.
    pub subproblems: usize,
    /// Elapsed time of the whole computation (not the sum over runs).
    pub wall_time: Duration,
}

impl RunStats {
    fn absorb(&mut self, r: &BnBResult) {
        self.runs += 1;
        self.splits += r.stats.splits;
        self.interval_evals += r.stats.interval_evals;
        self.point_evals += r.stats.point_evals;
        self.subproblems += r.final_cover.len();
    }

    fn merge(&mut self, o: &RunStats) {
        self.runs += o.runs;
        self.splits += o.splits;
        self.interval_evals += o.interval_evals;
        self.point_evals += o.point_evals;
        self.subproblems += o.subproblems;
    }
}

/// Certified enclosure `[lower, upper]` of an extremum.
///
/// For a maximum, `upper` is the certified bound and `lower` a certified
/// value attained somewhere; for a minimum the roles swap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extremum {
    pub lower: f64,
    pub upper: f64,
    pub eps_optimal: bool,
}

impl Extremum {
    pub fn gap(&self) -> f64 {
        self.upper - self.lower
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Sense {
    Max,
    Min,
}

/// An objective together with the box it lives on.
pub(crate) enum Job {
    Expr(Expr, Sense),
    Custom(Box<dyn Objective + Send>, IBox, Sense),
}

impl Job {
    pub(crate) fn max(e: Expr) -> Job {
        Job::Expr(e, Sense::Max)
    }

    pub(crate) fn min(e: Expr) -> Job {
        Job::Expr(e, Sense::Min)
    }
}

fn from_result(r: &BnBResult) -> Extremum {
    Extremum { lower: r.lower, upper: r.upper, eps_optimal: r.eps_optimal }
}

/// Extremum of `e` over the model's operating region.
fn solve_expr(model: &ModelDef, e: &Expr, sense: Sense, cfg: &BnBConfig) -> Result<(Extremum, RunStats), ParamError> {
    match model.reduced_box(e) {
        None => {
            // No free variables: the enclosure is the answer.
            let v = Compiled::new(e, &[])?.eval_interval(&[])?;
            Ok((Extremum { lower: v.lo(), upper: v.hi(), eps_optimal: v.width() <= cfg.eps_h }, RunStats::default()))
        }
        Some(domain) => {
            let obj = ExprObjective::on_box(e, &domain, cfg.segments)?;
            solve_objective(&obj, &domain, sense, cfg)
        }
    }
}

fn solve_objective<O: Objective + ?Sized>(
    obj: &O,
    domain: &IBox,
    sense: Sense,
    cfg: &BnBConfig,
) -> Result<(Extremum, RunStats), ParamError> {
    let r = match sense {
        Sense::Max => bnb::maximize(obj, domain, cfg)?,
        Sense::Min => bnb::minimize(obj, domain, cfg)?,
    };
    let mut stats = RunStats::default();
    stats.absorb(&r);
    Ok((from_result(&r), stats))
}

/// Run independent jobs concurrently. Results come back in job order and the
/// first failing job (by index) determines the error.
pub(crate) fn solve_all(model: &ModelDef, jobs: Vec<Job>, cfg: &BnBConfig) -> Result<(Vec<Extremum>, RunStats), ParamError> {
    let results: Vec<Result<(Extremum, RunStats), ParamError>> = jobs
        .into_par_iter()
        .map(|job| match job {
            Job::Expr(e, sense) => solve_expr(model, &e, sense, cfg),
            Job::Custom(obj, domain, sense) => solve_objective(obj.as_ref(), &domain, sense, cfg),
        })
        .collect();
    let mut out = Vec::with_capacity(results.len());
    let mut stats = RunStats::default();
    for r in results {
        let (x, s) = r?;
        stats.merge(&s);
        out.push(x);
    }
    Ok((out, stats))
}

/// Timer for [`RunStats::wall_time`].
pub(crate) struct Clock(Instant);

impl Clock {
    pub(crate) fn start() -> Clock {
        Clock(Instant::now())
    }

    pub(crate) fn stamp(&self, mut stats: RunStats) -> RunStats {
        stats.wall_time = self.0.elapsed();
        stats
    }
}

/// Enclosure of a constant expression (one without variables).
pub(crate) fn const_enclosure(e: &Expr) -> Result<Option<Interval>, ParamError> {
    if !e.free_vars().is_empty() {
        return Ok(None);
    }
    Ok(Some(Compiled::new(e, &[])?.eval_interval(&[])?))
}
