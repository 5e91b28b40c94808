//! Point and interval evaluation.
//!
//! `Compiled` flattens a tree into a tape with shared subexpressions stored
//! once; variables are bound to positions of a caller-chosen ordering.

use std::collections::HashMap;

use thiserror::Error;

use super::{BinaryOp, Expr, ExprError, UnaryOp};
use crate::interval::{refined_eval_masked, Interval, IntervalError, DEFAULT_TRIG_DEGREE};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("division by an interval containing zero")]
    DivisionByZero,
    #[error("{0} outside its domain")]
    Domain(&'static str),
    #[error("result is not finite")]
    NonFinite,
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
}

impl From<IntervalError> for EvalError {
    fn from(e: IntervalError) -> Self {
        match e {
            IntervalError::DivisionByZeroInterval { .. } => EvalError::DivisionByZero,
            IntervalError::DomainError { op, .. } => EvalError::Domain(op),
            IntervalError::Invalid { .. } => EvalError::NonFinite,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Op {
    Const(f64),
    Var(usize),
    Un(UnaryOp, usize),
    Bin(BinaryOp, usize, usize),
}

#[derive(Hash, PartialEq, Eq)]
enum OpKey {
    Const(u64),
    Var(usize),
    Un(UnaryOp, usize),
    Bin(BinaryOp, usize, usize),
}

#[derive(Debug, Clone)]
pub struct Compiled {
    ops: Vec<Op>,
    vars: Vec<String>,
    /// `uses[i]`: the expression depends on `vars[i]`.
    uses: Vec<bool>,
    trig_degree: u32,
}

struct Builder<'a> {
    ops: Vec<Op>,
    seen: HashMap<OpKey, usize>,
    index: &'a HashMap<&'a str, usize>,
}

impl Builder<'_> {
    fn intern(&mut self, key: OpKey, op: Op) -> usize {
        if let Some(&i) = self.seen.get(&key) {
            return i;
        }
        self.ops.push(op);
        let i = self.ops.len() - 1;
        self.seen.insert(key, i);
        i
    }

    fn emit(&mut self, e: &Expr) -> Result<usize, ExprError> {
        Ok(match e {
            Expr::Const(c) => self.intern(OpKey::Const(c.to_bits()), Op::Const(*c)),
            Expr::Var(v) => {
                let k = *self.index.get(v.as_str()).ok_or_else(|| ExprError::UnboundVariable(v.clone()))?;
                self.intern(OpKey::Var(k), Op::Var(k))
            }
            Expr::Unary(op, a) => {
                let a = self.emit(a)?;
                self.intern(OpKey::Un(*op, a), Op::Un(*op, a))
            }
            Expr::Binary(op, a, b) => {
                let a = self.emit(a)?;
                let b = self.emit(b)?;
                self.intern(OpKey::Bin(*op, a, b), Op::Bin(*op, a, b))
            }
        })
    }
}

impl Compiled {
    /// Bind the free variables of `e` to positions in `vars`.
    pub fn new(e: &Expr, vars: &[String]) -> Result<Self, ExprError> {
        let index: HashMap<&str, usize> = vars.iter().enumerate().map(|(i, v)| (v.as_str(), i)).collect();
        let mut b = Builder { ops: Vec::new(), seen: HashMap::new(), index: &index };
        b.emit(e)?;
        let free = e.free_vars();
        let uses = vars.iter().map(|v| free.contains(v)).collect();
        Ok(Compiled { ops: b.ops, vars: vars.to_vec(), uses, trig_degree: DEFAULT_TRIG_DEGREE })
    }

    pub fn with_trig_degree(mut self, degree: u32) -> Self {
        self.trig_degree = degree.max(1);
        self
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    /// Which of [`Compiled::vars`] the expression depends on.
    pub fn uses(&self) -> &[bool] {
        &self.uses
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn eval_real(&self, x: &[f64]) -> Result<f64, EvalError> {
        let mut slots = Vec::with_capacity(self.ops.len());
        for op in &self.ops {
            let v = match *op {
                Op::Const(c) => c,
                Op::Var(k) => x[k],
                Op::Un(u, a) => real_unary(u, slots[a])?,
                Op::Bin(b, l, r) => real_binary(b, slots[l], slots[r])?,
            };
            if !v.is_finite() {
                return Err(EvalError::NonFinite);
            }
            slots.push(v);
        }
        Ok(*slots.last().expect("non-empty tape"))
    }

    pub fn eval_interval(&self, x: &[Interval]) -> Result<Interval, EvalError> {
        let mut slots: Vec<Interval> = Vec::with_capacity(self.ops.len());
        for op in &self.ops {
            let v = match *op {
                Op::Const(c) => Interval::point(c),
                Op::Var(k) => x[k],
                Op::Un(u, a) => {
                    let a = slots[a];
                    match u {
                        UnaryOp::Neg => -a,
                        UnaryOp::Abs => a.abs(),
                        UnaryOp::Sqr => a.sqr(),
                        UnaryOp::Sqrt => a.sqrt()?,
                        UnaryOp::Sin => a.sin(self.trig_degree),
                        UnaryOp::Cos => a.cos(self.trig_degree),
                        UnaryOp::Exp => a.exp(),
                        UnaryOp::Pow(k) => a.pow_int(k),
                    }
                }
                Op::Bin(b, l, r) => {
                    let (l, r) = (slots[l], slots[r]);
                    match b {
                        BinaryOp::Add => l + r,
                        BinaryOp::Sub => l - r,
                        BinaryOp::Mul => l * r,
                        BinaryOp::Div => l.div(r)?,
                    }
                }
            };
            if !v.is_finite() {
                return Err(EvalError::NonFinite);
            }
            slots.push(v);
        }
        Ok(*slots.last().expect("non-empty tape"))
    }

    /// Lower end of the enclosure at a point: a certified lower bound on the
    /// true value there.
    pub fn eval_point_lower(&self, x: &[f64]) -> Result<f64, EvalError> {
        let dims: Vec<Interval> = x.iter().map(|&v| Interval::point(v)).collect();
        Ok(self.eval_interval(&dims)?.lo())
    }

    pub fn eval_refined(&self, x: &[Interval], segments: usize) -> Result<Interval, EvalError> {
        refined_eval_masked(|d: &[Interval]| self.eval_interval(d), x, segments, Some(&self.uses))
    }
}

fn real_unary(u: UnaryOp, a: f64) -> Result<f64, EvalError> {
    Ok(match u {
        UnaryOp::Neg => -a,
        UnaryOp::Abs => a.abs(),
        UnaryOp::Sqr => a * a,
        UnaryOp::Sqrt => {
            if a < 0.0 {
                return Err(EvalError::Domain("sqrt"));
            }
            a.sqrt()
        }
        UnaryOp::Sin => a.sin(),
        UnaryOp::Cos => a.cos(),
        UnaryOp::Exp => a.exp(),
        UnaryOp::Pow(k) => a.powi(k as i32),
    })
}

fn real_binary(b: BinaryOp, l: f64, r: f64) -> Result<f64, EvalError> {
    Ok(match b {
        BinaryOp::Add => l + r,
        BinaryOp::Sub => l - r,
        BinaryOp::Mul => l * r,
        BinaryOp::Div => {
            if r == 0.0 {
                return Err(EvalError::DivisionByZero);
            }
            l / r
        }
    })
}

pub(super) fn eval_real_tree(e: &Expr, lookup: &dyn Fn(&str) -> Option<f64>) -> Result<f64, ExprError> {
    let v = match e {
        Expr::Const(c) => *c,
        Expr::Var(n) => lookup(n).ok_or_else(|| ExprError::UnboundVariable(n.clone()))?,
        Expr::Unary(u, a) => real_unary(*u, eval_real_tree(a, lookup)?)?,
        Expr::Binary(b, l, r) => real_binary(*b, eval_real_tree(l, lookup)?, eval_real_tree(r, lookup)?)?,
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(EvalError::NonFinite.into())
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse;
    use super::*;
    use crate::interval::IBox;

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    fn iv(lo: f64, hi: f64) -> Interval {
        Interval::new(lo, hi).unwrap()
    }

    #[test]
    fn real_and_interval_examples() {
        let e = parse("x1^2 - x2^2").unwrap();
        let c = Compiled::new(&e, &names(&["x1", "x2"])).unwrap();
        assert_eq!(c.eval_real(&[3.0, 1.0]).unwrap(), 8.0);
        let e = parse("x1^2").unwrap();
        let c = Compiled::new(&e, &names(&["x1"])).unwrap();
        assert_eq!(c.eval_interval(&[iv(-2.0, 1.0)]).unwrap(), iv(0.0, 4.0));
    }

    #[test]
    fn traffic_gradient_example() {
        // 4 delta^2 (a^2 + b^2 + c^2) peaks at 12 delta^2 rho^2 on [0, rho]^3.
        let delta = 1.18113;
        let rho = 0.0265;
        let e = parse(&format!("4*{delta}^2*(a^2 + b^2 + c^2)")).unwrap();
        let b = IBox::new(names(&["a", "b", "c"]), vec![iv(0.0, rho); 3]).unwrap();
        let r = e.eval_interval(&b, 1).unwrap();
        let exact = 12.0 * delta * delta * rho * rho;
        assert!(r.contains(exact));
        // Tight to the closed form up to rounding; 0.011758 is only a 4-digit rounding of it.
        assert!((r.hi() - exact).abs() < 1e-15, "{r:?}");
        assert!((r.hi() - 0.011_758).abs() < 5e-6);
    }

    #[test]
    fn unbound_variable_is_reported() {
        let e = parse("x + y").unwrap();
        assert_eq!(
            Compiled::new(&e, &names(&["x"])).unwrap_err(),
            ExprError::UnboundVariable("y".into())
        );
        assert!(matches!(e.eval_real(&|_| None), Err(ExprError::UnboundVariable(_))));
    }

    #[test]
    fn shared_subexpressions_are_stored_once() {
        let e = parse("sin(x*y) + sin(x*y)").unwrap();
        let c = Compiled::new(&e, &names(&["x", "y"])).unwrap();
        // x, y, x*y, sin, +
        assert_eq!(c.len(), 5);
    }

    #[test]
    fn domain_errors() {
        let e = parse("sqrt(x)").unwrap();
        let c = Compiled::new(&e, &names(&["x"])).unwrap();
        assert_eq!(c.eval_interval(&[iv(-1.0, 1.0)]), Err(EvalError::Domain("sqrt")));
        assert_eq!(c.eval_real(&[-1.0]), Err(EvalError::Domain("sqrt")));
        let e = parse("1/x").unwrap();
        let c = Compiled::new(&e, &names(&["x"])).unwrap();
        assert_eq!(c.eval_interval(&[iv(-1.0, 1.0)]), Err(EvalError::DivisionByZero));
        let e = parse("exp(x)").unwrap();
        let c = Compiled::new(&e, &names(&["x"])).unwrap();
        assert_eq!(c.eval_interval(&[iv(0.0, 1000.0)]), Err(EvalError::NonFinite));
    }
}
