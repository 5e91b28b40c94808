use super::{solve_all, Clock, Extremum, Job, ParamError, RunStats};
use crate::bnb::BnBConfig;
use crate::expr::{differentiate_on, ModelDef};
use crate::interval::Interval;

/// Certified constant bounds on every partial derivative of f with respect
/// to the states.
#[derive(Debug, Clone, PartialEq)]
pub struct JacobianBounds {
    /// `entries[i][j]` encloses `∂f_i/∂x_j` over the operating region.
    pub entries: Vec<Vec<Interval>>,
    /// `extrema[i][j]` holds the enclosures of the maximum and the minimum
    /// of `∂f_i/∂x_j`; `entries[i][j]` spans their certified ends.
    pub extrema: Vec<Vec<(Extremum, Extremum)>>,
    /// Largest `u - l` over the underlying runs.
    pub gap: f64,
    pub eps_optimal: bool,
    pub stats: RunStats,
}

impl JacobianBounds {
    pub fn get(&self, i: usize, j: usize) -> Interval {
        self.entries[i][j]
    }
}

/// Bounds of each `∂f_i/∂x_j` from one maximization and one minimization on
/// the reduced box of the derivative. Derivatives without variables need no
/// search.
pub fn jacobian_bounds(model: &ModelDef, cfg: &BnBConfig) -> Result<JacobianBounds, ParamError> {
    cfg.validate()?;
    let clock = Clock::start();
    let domain = model.domain();
    let (g, n) = (model.g_len(), model.n());
    let mut jobs = Vec::new();
    let mut slots = vec![vec![None; n]; g];
    for (i, f) in model.f().iter().enumerate() {
        for (j, s) in model.states().iter().enumerate() {
            let d = differentiate_on(f, &s.name, Some(&domain))?;
            if let Some(c) = super::const_enclosure(&d)? {
                slots[i][j] = Some(c);
                continue;
            }
            jobs.push(Job::max(d.clone()));
            jobs.push(Job::min(d));
        }
    }
    let (res, stats) = solve_all(model, jobs, cfg)?;
    let mut it = res.chunks(2);
    let mut gap: f64 = 0.0;
    let mut eps_optimal = true;
    let mut entries = Vec::with_capacity(g);
    let mut extrema = Vec::with_capacity(g);
    for row in slots {
        let mut out = Vec::with_capacity(n);
        let mut ext = Vec::with_capacity(n);
        for slot in row {
            match slot {
                Some(c) => {
                    let e = Extremum { lower: c.lo(), upper: c.hi(), eps_optimal: true };
                    out.push(c);
                    ext.push((e, e));
                }
                None => {
                    let pair = it.next().expect("one pair per searched entry");
                    let (mx, mn) = (pair[0], pair[1]);
                    gap = gap.max(mx.gap()).max(mn.gap());
                    eps_optimal &= mx.eps_optimal && mn.eps_optimal;
                    out.push(Interval::new(mn.lower, mx.upper).map_err(|e| ParamError::Expr(e.into()))?);
                    ext.push((mx, mn));
                }
            }
        }
        entries.push(out);
        extrema.push(ext);
    }
    Ok(JacobianBounds { entries, extrema, gap, eps_optimal, stats: clock.stamp(stats) })
}
