use crate::expr::{Compiled, EvalError, Expr, ExprError};
use crate::interval::{IBox, Interval};

/// A function to maximize together with an interval extension of it.
///
/// `enclose` must contain the range of `point` over every box it is given.
/// The engine raises its lower bound only through `point_lower`, so the
/// default (lower end of the enclosure of a degenerate box) keeps `l`
/// certified even though `point` itself is rounded to nearest.
pub trait Objective: Sync {
    fn dim(&self) -> usize;

    fn point(&self, x: &[f64]) -> Result<f64, EvalError>;

    fn enclose(&self, dims: &[Interval]) -> Result<Interval, EvalError>;

    fn point_lower(&self, x: &[f64]) -> Result<f64, EvalError> {
        let dims: Vec<Interval> = x.iter().map(|&v| Interval::point(v)).collect();
        Ok(self.enclose(&dims)?.lo())
    }

    /// Dimensions the objective depends on; `None` means all. The engine
    /// never splits the others, since a flat direction would otherwise be
    /// tiled by boxes that all share the optimum.
    fn active_dims(&self) -> Option<Vec<bool>> {
        None
    }
}

/// An expression bound to an ordered variable list, enclosed by refined
/// evaluation over `segments` slabs.
#[derive(Debug, Clone)]
pub struct ExprObjective {
    compiled: Compiled,
    segments: usize,
}

impl ExprObjective {
    pub fn new(e: &Expr, vars: &[String], segments: usize) -> Result<Self, ExprError> {
        Ok(ExprObjective { compiled: Compiled::new(e, vars)?, segments: segments.max(1) })
    }

    /// Variables taken from the labels of `domain`.
    pub fn on_box(e: &Expr, domain: &IBox, segments: usize) -> Result<Self, ExprError> {
        Self::new(e, domain.labels(), segments)
    }

    pub fn with_trig_degree(mut self, degree: u32) -> Self {
        self.compiled = self.compiled.with_trig_degree(degree);
        self
    }

    pub fn compiled(&self) -> &Compiled {
        &self.compiled
    }
}

impl Objective for ExprObjective {
    fn dim(&self) -> usize {
        self.compiled.vars().len()
    }

    fn point(&self, x: &[f64]) -> Result<f64, EvalError> {
        self.compiled.eval_real(x)
    }

    fn enclose(&self, dims: &[Interval]) -> Result<Interval, EvalError> {
        self.compiled.eval_refined(dims, self.segments)
    }

    fn point_lower(&self, x: &[f64]) -> Result<f64, EvalError> {
        self.compiled.eval_point_lower(x)
    }

    fn active_dims(&self) -> Option<Vec<bool>> {
        Some(self.compiled.uses().to_vec())
    }
}

/// Objective given by a pair of closures.
pub struct FnObjective<P, I> {
    dim: usize,
    point: P,
    interval: I,
}

impl<P, I> FnObjective<P, I>
where
    P: Fn(&[f64]) -> Result<f64, EvalError> + Sync,
    I: Fn(&[Interval]) -> Result<Interval, EvalError> + Sync,
{
    pub fn new(dim: usize, point: P, interval: I) -> Self {
        FnObjective { dim, point, interval }
    }
}

impl<P, I> Objective for FnObjective<P, I>
where
    P: Fn(&[f64]) -> Result<f64, EvalError> + Sync,
    I: Fn(&[Interval]) -> Result<Interval, EvalError> + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn point(&self, x: &[f64]) -> Result<f64, EvalError> {
        (self.point)(x)
    }

    fn enclose(&self, dims: &[Interval]) -> Result<Interval, EvalError> {
        (self.interval)(dims)
    }
}

/// `-h`, used to minimize through the maximizer.
pub struct Negated<'a, O: ?Sized>(pub &'a O);

impl<O: Objective + ?Sized> Objective for Negated<'_, O> {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn point(&self, x: &[f64]) -> Result<f64, EvalError> {
        Ok(-self.0.point(x)?)
    }

    fn enclose(&self, dims: &[Interval]) -> Result<Interval, EvalError> {
        Ok(-self.0.enclose(dims)?)
    }

    fn point_lower(&self, x: &[f64]) -> Result<f64, EvalError> {
        // -h(x) >= -(upper end of the enclosure of h at x).
        let dims: Vec<Interval> = x.iter().map(|&v| Interval::point(v)).collect();
        Ok(-self.0.enclose(&dims)?.hi())
    }

    fn active_dims(&self) -> Option<Vec<bool>> {
        self.0.active_dims()
    }
}
