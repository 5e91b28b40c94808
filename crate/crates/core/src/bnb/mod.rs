//! Interval branch-and-bound global maximizer.
//!
//! Three phases, each running only while `u - l > eps_h`:
//!
//! 1. split the subproblem of maximal upper bound while it is wider than
//!    `eps_om`, which drives `u` down;
//! 2. split the splittable subproblem of maximal lower bound, which drives `l`
//!    up;
//! 3. evaluate both extreme corners of every subproblem, in descending order
//!    of upper bound, pruning after each and stopping once `u - l <= eps_h`.
//!
//! On return `h* ∈ [l, u]`, `u` is the upper bound of some subproblem of the
//! final cover and every maximizer lies in a box of that cover.

mod cover;
mod objective;

use std::time::{Duration, Instant};

use thiserror::Error;

use crate::expr::{EvalError, Expr, ExprError};
use crate::interval::IBox;

pub use cover::{opt_bnb_step, Cover, StepOutcome, SubId, Subproblem};
pub use objective::{ExprObjective, FnObjective, Negated, Objective};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BnBConfig {
    /// Stop once `u - l <= eps_h`.
    pub eps_h: f64,
    /// Boxes no wider than this are not split.
    pub eps_om: f64,
    /// Slabs used by the refined enclosure of expression objectives.
    pub segments: usize,
    /// Cap on the number of splits.
    pub max_steps: u64,
    /// Keep `(l, u)` after every update.
    pub record_trace: bool,
    /// Domains with at most this many dimensions have every corner probed
    /// before the first split (0 disables). Objectives that are flat in some
    /// variables at the maximum otherwise force the search to tile a whole
    /// face of near-optimal boxes.
    pub corner_seed_dims: usize,
}

impl Default for BnBConfig {
    fn default() -> Self {
        BnBConfig { eps_h: 1e-4, eps_om: 1e-7, segments: 10, max_steps: 10_000_000, record_trace: false, corner_seed_dims: 10 }
    }
}

impl BnBConfig {
    pub fn validate(&self) -> Result<(), BnBError> {
        let ok = self.eps_h > 0.0
            && self.eps_h.is_finite()
            && self.eps_om > 0.0
            && self.eps_om.is_finite()
            && self.segments >= 1
            && self.max_steps >= 1;
        if ok {
            Ok(())
        } else {
            Err(BnBError::InvalidConfig(format!("{self:?}")))
        }
    }

    pub fn with_eps_h(mut self, eps_h: f64) -> Self {
        self.eps_h = eps_h;
        self
    }

    pub fn with_trace(mut self) -> Self {
        self.record_trace = true;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// `u - l <= eps_h`.
    EpsOptimal,
    /// No splittable subproblem left and the corner phase did not close the gap.
    Exhausted,
    /// `max_steps` splits performed.
    StepLimit,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct BnBStats {
    pub splits: u64,
    pub interval_evals: u64,
    pub point_evals: u64,
    pub pruned: u64,
    pub max_cover: usize,
    pub wall_time: Duration,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracePoint {
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BnBResult {
    /// Certified lower bound `l` of the optimum.
    pub lower: f64,
    /// Certified upper bound `u` of the optimum.
    pub upper: f64,
    pub eps_optimal: bool,
    pub termination: Termination,
    /// Point whose certified value gave `lower` (for a minimization, `upper`).
    pub best_point: Vec<f64>,
    pub final_cover: Vec<Subproblem>,
    pub stats: BnBStats,
    pub trace: Vec<TracePoint>,
}

impl BnBResult {
    pub fn gap(&self) -> f64 {
        self.upper - self.lower
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BnBError {
    #[error("invalid configuration {0}")]
    InvalidConfig(String),
    #[error("objective has {objective} variables but the domain has {domain}")]
    DimensionMismatch { objective: usize, domain: usize },
    #[error("cannot split dimension {dim}: no representable interior point")]
    DegenerateSplit { dim: usize },
    #[error("subproblem is not in the cover")]
    UnknownSubproblem,
    #[error("cover became empty; the interval extension is not sound")]
    EmptyCover,
    #[error("evaluation failed: {source}")]
    Evaluation {
        source: EvalError,
        /// State at the point of failure. Its bounds are not a valid sandwich.
        partial: Option<Box<BnBResult>>,
    },
    #[error(transparent)]
    Expr(#[from] ExprError),
}

impl BnBError {
    fn eval(source: EvalError) -> BnBError {
        BnBError::Evaluation { source, partial: None }
    }
}

struct Run<'a, O: ?Sized> {
    obj: &'a O,
    cfg: BnBConfig,
    cover: Cover,
    l: f64,
    u: f64,
    top: SubId,
    stats: BnBStats,
    trace: Vec<TracePoint>,
    start: Instant,
}

impl<O: Objective + ?Sized> Run<'_, O> {
    fn gap_open(&self) -> bool {
        self.u - self.l > self.cfg.eps_h
    }

    fn record(&mut self) {
        if self.cfg.record_trace {
            self.trace.push(TracePoint { lower: self.l, upper: self.u });
        }
    }

    fn out_of_steps(&self) -> bool {
        self.stats.splits >= self.cfg.max_steps
    }

    fn split(&mut self, chosen: SubId) -> Result<(), BnBError> {
        let out = self.cover.step(self.obj, chosen, self.l)?;
        self.stats.splits += 1;
        self.stats.pruned += out.pruned as u64;
        self.stats.max_cover = self.stats.max_cover.max(self.cover.len());
        self.l = out.lower;
        self.u = out.upper;
        self.top = out.top;
        self.record();
        Ok(())
    }

    fn run(&mut self) -> Result<Termination, BnBError> {
        // Phase 1.
        while self.gap_open() && self.cover.splittable(self.top, self.cfg.eps_om) {
            if self.out_of_steps() {
                return Ok(Termination::StepLimit);
            }
            self.split(self.top)?;
        }
        // Phase 2.
        while self.gap_open() {
            let Some(chosen) = self.cover.argmax_lo_splittable(self.cfg.eps_om) else { break };
            if self.out_of_steps() {
                return Ok(Termination::StepLimit);
            }
            self.split(chosen)?;
        }
        // Phase 3.
        if self.gap_open() {
            for id in self.cover.ids_by_hi_desc() {
                let Some(dims) = self.cover.node_dims(id) else { continue };
                let lo: Vec<f64> = dims.iter().map(|d| d.lo()).collect();
                let hi: Vec<f64> = dims.iter().map(|d| d.hi()).collect();
                let mut l = self.l;
                self.cover.probe(self.obj, lo, &mut l)?;
                self.cover.probe(self.obj, hi, &mut l)?;
                if l > self.l {
                    self.l = l;
                    self.stats.pruned += self.cover.prune(l) as u64;
                    self.record();
                }
                if !self.gap_open() {
                    break;
                }
            }
        }
        Ok(if self.gap_open() { Termination::Exhausted } else { Termination::EpsOptimal })
    }

    fn finish(mut self, termination: Termination) -> BnBResult {
        self.stats.interval_evals = self.cover.interval_evals;
        self.stats.point_evals = self.cover.point_evals;
        self.stats.wall_time = self.start.elapsed();
        BnBResult {
            lower: self.l,
            upper: self.u,
            eps_optimal: self.u - self.l <= self.cfg.eps_h,
            termination,
            best_point: self.cover.best_point.clone().unwrap_or_default(),
            final_cover: self.cover.subproblems(),
            stats: self.stats,
            trace: self.trace,
        }
    }
}

/// Maximize `obj` over `domain`.
pub fn maximize<O: Objective + ?Sized>(obj: &O, domain: &IBox, cfg: &BnBConfig) -> Result<BnBResult, BnBError> {
    maximize_seeded(obj, domain, cfg, &[])
}

/// As [`maximize`], with extra points of `domain` used to raise the initial
/// lower bound before the first split. Points outside `domain` are ignored.
pub fn maximize_seeded<O: Objective + ?Sized>(
    obj: &O,
    domain: &IBox,
    cfg: &BnBConfig,
    seeds: &[Vec<f64>],
) -> Result<BnBResult, BnBError> {
    cfg.validate()?;
    let start = Instant::now();
    let mut cover = Cover::new(obj, domain)?;
    let top = cover.argmax_hi().ok_or(BnBError::EmptyCover)?;
    let u = cover.get(top).expect("live").hi_bound();
    let mut l = f64::NEG_INFINITY;
    cover.probe(obj, domain.midpoint(), &mut l)?;
    for s in seeds.iter().filter(|s| domain.contains_point(s)) {
        cover.probe(obj, s.clone(), &mut l)?;
    }
    if domain.len() <= cfg.corner_seed_dims {
        // Best effort: a corner where the objective is undefined is skipped.
        for mask in 0..1u64 << domain.len() {
            let _ = cover.probe(obj, domain.corner_by_mask(mask), &mut l);
        }
    }
    let mut run = Run {
        obj,
        cfg: *cfg,
        cover,
        l,
        u,
        top,
        stats: BnBStats { max_cover: 1, ..BnBStats::default() },
        trace: Vec::new(),
        start,
    };
    run.record();
    match run.run() {
        Ok(t) => Ok(run.finish(t)),
        Err(BnBError::Evaluation { source, .. }) => {
            let mut partial = run.finish(Termination::Exhausted);
            partial.eps_optimal = false;
            Err(BnBError::Evaluation { source, partial: Some(Box::new(partial)) })
        }
        Err(e) => Err(e),
    }
}

/// Minimize `obj` by maximizing `-obj`. `lower` is the certified lower bound
/// of the minimum; bounds, trace and cover are mapped back to `obj`.
pub fn minimize<O: Objective + ?Sized>(obj: &O, domain: &IBox, cfg: &BnBConfig) -> Result<BnBResult, BnBError> {
    let r = maximize(&Negated(obj), domain, cfg)?;
    Ok(BnBResult {
        lower: -r.upper,
        upper: -r.lower,
        final_cover: r
            .final_cover
            .into_iter()
            .map(|s| Subproblem { region: s.region, bounds: -s.bounds })
            .collect(),
        trace: r.trace.into_iter().map(|t| TracePoint { lower: -t.upper, upper: -t.lower }).collect(),
        ..r
    })
}

/// Maximize an expression whose variables are the labels of `domain`.
pub fn maximize_expr(e: &Expr, domain: &IBox, cfg: &BnBConfig) -> Result<BnBResult, BnBError> {
    let obj = ExprObjective::on_box(e, domain, cfg.segments)?;
    maximize(&obj, domain, cfg)
}

pub fn minimize_expr(e: &Expr, domain: &IBox, cfg: &BnBConfig) -> Result<BnBResult, BnBError> {
    let obj = ExprObjective::on_box(e, domain, cfg.segments)?;
    minimize(&obj, domain, cfg)
}
