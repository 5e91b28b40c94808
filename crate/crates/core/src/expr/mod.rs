//! Expression language over named real variables.
//!
//! Trees built through the associated constructors (`Expr::add`, `Expr::mul`,
//! ...) are simplified conservatively: constants are folded only when the
//! result is exact in binary64, additive and multiplicative identities are
//! dropped, constant factors of a product are gathered in front and repeated
//! factors become powers. Division is never reassociated. The parser builds
//! the tree as written, folding only negated literals.

mod diff;
mod eval;
mod key;
mod model;
mod parse;
mod print;

use std::collections::BTreeSet;

use thiserror::Error;

use crate::interval::{Interval, IntervalError};

pub use diff::{differentiate, differentiate_on, grad_sq_norm};
pub use eval::{Compiled, EvalError};
pub use key::{named_key, structural_key, structural_signature};
pub use model::{ModelDef, ModelError, VarDecl};
pub use parse::{parse, parse_with_constants, ParseError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum UnaryOp {
    Neg,
    Abs,
    Sqr,
    Sqrt,
    Sin,
    Cos,
    Exp,
    /// Exponent is at least 1.
    Pow(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(String),
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("not differentiable: {0}")]
    NonDifferentiable(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

impl From<IntervalError> for ExprError {
    fn from(e: IntervalError) -> Self {
        ExprError::Eval(EvalError::from(e))
    }
}

/// Exact result of a constant operation, if binary64 represents it.
fn exact(iv: Interval) -> Option<f64> {
    (iv.lo() == iv.hi() && iv.lo().is_finite()).then(|| iv.lo())
}

impl Expr {
    pub fn constant(c: f64) -> Expr {
        Expr::Const(c)
    }

    pub fn var(name: impl Into<String>) -> Expr {
        Expr::Var(name.into())
    }

    pub fn as_const(&self) -> Option<f64> {
        match self {
            Expr::Const(c) => Some(*c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_const() == Some(0.0)
    }

    pub fn is_one(&self) -> bool {
        self.as_const() == Some(1.0)
    }

    pub fn add(a: Expr, b: Expr) -> Expr {
        if let (Some(x), Some(y)) = (a.as_const(), b.as_const()) {
            if let Some(v) = exact(Interval::point(x) + Interval::point(y)) {
                return Expr::Const(v);
            }
        }
        if a.is_zero() {
            return b;
        }
        if b.is_zero() {
            return a;
        }
        match b {
            Expr::Const(c) if c < 0.0 => Expr::Binary(BinaryOp::Sub, a.into(), Expr::Const(-c).into()),
            Expr::Unary(UnaryOp::Neg, x) => Expr::Binary(BinaryOp::Sub, a.into(), x),
            b => Expr::Binary(BinaryOp::Add, a.into(), b.into()),
        }
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        if let (Some(x), Some(y)) = (a.as_const(), b.as_const()) {
            if let Some(v) = exact(Interval::point(x) - Interval::point(y)) {
                return Expr::Const(v);
            }
        }
        if b.is_zero() {
            return a;
        }
        if a.is_zero() {
            return Expr::neg(b);
        }
        match b {
            Expr::Const(c) if c < 0.0 => Expr::Binary(BinaryOp::Add, a.into(), Expr::Const(-c).into()),
            Expr::Unary(UnaryOp::Neg, x) => Expr::Binary(BinaryOp::Add, a.into(), x),
            b => Expr::Binary(BinaryOp::Sub, a.into(), b.into()),
        }
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        let mut p = Product::default();
        p.absorb(a);
        p.absorb(b);
        p.build()
    }

    pub fn div(a: Expr, b: Expr) -> Expr {
        if b.is_one() {
            return a;
        }
        if let (Some(x), Some(y)) = (a.as_const(), b.as_const()) {
            if y != 0.0 {
                let q = x / y;
                if q.is_finite() && (x == 0.0 || q.mul_add(y, -x) == 0.0) && q.abs() > 1e-290 {
                    return Expr::Const(q);
                }
            }
        }
        Expr::Binary(BinaryOp::Div, a.into(), b.into())
    }

    pub fn neg(a: Expr) -> Expr {
        match a {
            Expr::Const(c) => Expr::Const(-c),
            Expr::Unary(UnaryOp::Neg, x) => *x,
            a => Expr::Unary(UnaryOp::Neg, a.into()),
        }
    }

    pub fn pow(a: Expr, k: u32) -> Expr {
        assert!(k >= 1, "exponent must be at least 1");
        match k {
            1 => a,
            2 => Expr::sqr(a),
            _ => {
                if let Some(v) = a.as_const().and_then(|c| exact(Interval::point(c).pow_int(k))) {
                    return Expr::Const(v);
                }
                Expr::Unary(UnaryOp::Pow(k), a.into())
            }
        }
    }

    pub fn sqr(a: Expr) -> Expr {
        if let Some(v) = a.as_const().and_then(|c| exact(Interval::point(c).sqr())) {
            return Expr::Const(v);
        }
        match a {
            Expr::Unary(UnaryOp::Neg | UnaryOp::Abs, x) => Expr::sqr(*x),
            a => Expr::Unary(UnaryOp::Sqr, a.into()),
        }
    }

    pub fn abs(a: Expr) -> Expr {
        if let Some(c) = a.as_const() {
            return Expr::Const(c.abs());
        }
        if a.is_structurally_nonneg() {
            return a;
        }
        match a {
            Expr::Unary(UnaryOp::Neg, x) => Expr::abs(*x),
            a => Expr::Unary(UnaryOp::Abs, a.into()),
        }
    }

    pub fn sqrt(a: Expr) -> Expr {
        if let Some(c) = a.as_const() {
            if c >= 0.0 {
                if let Some(v) = Interval::point(c).sqrt().ok().and_then(exact) {
                    return Expr::Const(v);
                }
            }
        }
        Expr::Unary(UnaryOp::Sqrt, a.into())
    }

    pub fn sin(a: Expr) -> Expr {
        if a.is_zero() {
            return Expr::Const(0.0);
        }
        Expr::Unary(UnaryOp::Sin, a.into())
    }

    pub fn cos(a: Expr) -> Expr {
        if a.is_zero() {
            return Expr::Const(1.0);
        }
        Expr::Unary(UnaryOp::Cos, a.into())
    }

    pub fn exp(a: Expr) -> Expr {
        if a.is_zero() {
            return Expr::Const(1.0);
        }
        Expr::Unary(UnaryOp::Exp, a.into())
    }

    pub fn unary(op: UnaryOp, a: Expr) -> Expr {
        match op {
            UnaryOp::Neg => Expr::neg(a),
            UnaryOp::Abs => Expr::abs(a),
            UnaryOp::Sqr => Expr::sqr(a),
            UnaryOp::Sqrt => Expr::sqrt(a),
            UnaryOp::Sin => Expr::sin(a),
            UnaryOp::Cos => Expr::cos(a),
            UnaryOp::Exp => Expr::exp(a),
            UnaryOp::Pow(k) => Expr::pow(a, k),
        }
    }

    pub fn binary(op: BinaryOp, a: Expr, b: Expr) -> Expr {
        match op {
            BinaryOp::Add => Expr::add(a, b),
            BinaryOp::Sub => Expr::sub(a, b),
            BinaryOp::Mul => Expr::mul(a, b),
            BinaryOp::Div => Expr::div(a, b),
        }
    }

    /// Left-associated sum; zero for an empty iterator.
    pub fn sum<I: IntoIterator<Item = Expr>>(terms: I) -> Expr {
        terms.into_iter().fold(Expr::Const(0.0), Expr::add)
    }

    /// Rebuild bottom-up through the simplifying constructors.
    pub fn simplify(&self) -> Expr {
        match self {
            Expr::Const(_) | Expr::Var(_) => self.clone(),
            Expr::Unary(op, a) => Expr::unary(*op, a.simplify()),
            Expr::Binary(op, a, b) => Expr::binary(*op, a.simplify(), b.simplify()),
        }
    }

    /// Nonnegative for every assignment, judged from the top node alone.
    pub fn is_structurally_nonneg(&self) -> bool {
        match self {
            Expr::Const(c) => *c >= 0.0,
            Expr::Unary(UnaryOp::Abs | UnaryOp::Sqr | UnaryOp::Sqrt | UnaryOp::Exp, _) => true,
            Expr::Unary(UnaryOp::Pow(k), _) => k % 2 == 0,
            _ => false,
        }
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit_vars(&mut |v| {
            out.insert(v.to_string());
        });
        out
    }

    pub fn depends_on(&self, name: &str) -> bool {
        let mut hit = false;
        self.visit_vars(&mut |v| hit |= v == name);
        hit
    }

    fn visit_vars<'a>(&'a self, f: &mut impl FnMut(&'a str)) {
        match self {
            Expr::Const(_) => {}
            Expr::Var(v) => f(v),
            Expr::Unary(_, a) => a.visit_vars(f),
            Expr::Binary(_, a, b) => {
                a.visit_vars(f);
                b.visit_vars(f);
            }
        }
    }

    /// Replace every variable named in `map` by the mapped variable name.
    pub fn rename(&self, map: &dyn Fn(&str) -> Option<String>) -> Expr {
        match self {
            Expr::Const(_) => self.clone(),
            Expr::Var(v) => Expr::Var(map(v).unwrap_or_else(|| v.clone())),
            Expr::Unary(op, a) => Expr::Unary(*op, a.rename(map).into()),
            Expr::Binary(op, a, b) => Expr::Binary(*op, a.rename(map).into(), b.rename(map).into()),
        }
    }

    pub fn node_count(&self) -> usize {
        match self {
            Expr::Const(_) | Expr::Var(_) => 1,
            Expr::Unary(_, a) => 1 + a.node_count(),
            Expr::Binary(_, a, b) => 1 + a.node_count() + b.node_count(),
        }
    }

    /// Point evaluation with variables looked up by name.
    pub fn eval_real(&self, lookup: &dyn Fn(&str) -> Option<f64>) -> Result<f64, ExprError> {
        eval::eval_real_tree(self, lookup)
    }

    /// Interval evaluation over named bounds, refined over `segments` slabs.
    pub fn eval_interval(
        &self,
        bounds: &crate::interval::IBox,
        segments: usize,
    ) -> Result<Interval, ExprError> {
        let names: Vec<String> = bounds.labels().to_vec();
        let c = Compiled::new(self, &names)?;
        Ok(c.eval_refined(bounds.dims(), segments)?)
    }

    /// Canonical form used by the printer round trip: negated literals folded.
    pub fn canonical(&self) -> Expr {
        match self {
            Expr::Const(_) | Expr::Var(_) => self.clone(),
            Expr::Unary(UnaryOp::Neg, a) => match a.canonical() {
                Expr::Const(c) => Expr::Const(-c),
                other => Expr::Unary(UnaryOp::Neg, other.into()),
            },
            Expr::Unary(op, a) => Expr::Unary(*op, a.canonical().into()),
            Expr::Binary(op, a, b) => Expr::Binary(*op, a.canonical().into(), b.canonical().into()),
        }
    }
}

/// Flattened product: constant factors, then the other factors with
/// multiplicities, in order of first appearance.
#[derive(Default)]
struct Product {
    consts: Vec<f64>,
    factors: Vec<(Expr, u32)>,
    zero: bool,
}

impl Product {
    fn absorb(&mut self, e: Expr) {
        match e {
            Expr::Const(c) => {
                if c == 0.0 {
                    self.zero = true;
                }
                self.push_const(c);
            }
            Expr::Unary(UnaryOp::Neg, a) => {
                self.push_const(-1.0);
                self.absorb(*a);
            }
            Expr::Binary(BinaryOp::Mul, a, b) => {
                self.absorb(*a);
                self.absorb(*b);
            }
            Expr::Unary(UnaryOp::Sqr, a) => self.push_factor(*a, 2),
            Expr::Unary(UnaryOp::Pow(k), a) => self.push_factor(*a, k),
            other => self.push_factor(other, 1),
        }
    }

    fn push_const(&mut self, c: f64) {
        for slot in self.consts.iter_mut() {
            if let Some(v) = exact(Interval::point(*slot) * Interval::point(c)) {
                *slot = v;
                return;
            }
        }
        self.consts.push(c);
    }

    fn push_factor(&mut self, e: Expr, k: u32) {
        if let Some(slot) = self.factors.iter_mut().find(|(f, _)| *f == e) {
            slot.1 += k;
        } else {
            self.factors.push((e, k));
        }
    }

    fn build(mut self) -> Expr {
        if self.zero {
            return Expr::Const(0.0);
        }
        self.consts.retain(|&c| c != 1.0);
        let mut negate = false;
        if let Some(i) = self.consts.iter().position(|&c| c == -1.0) {
            if self.consts.len() > 1 || !self.factors.is_empty() {
                self.consts.remove(i);
                negate = true;
            }
        }
        let mut out: Option<Expr> = None;
        let mut push = |e: Expr| {
            out = Some(match out.take() {
                None => e,
                Some(acc) => Expr::Binary(BinaryOp::Mul, acc.into(), e.into()),
            });
        };
        for c in self.consts {
            push(Expr::Const(c));
        }
        for (f, k) in self.factors {
            push(match k {
                1 => f,
                2 => Expr::Unary(UnaryOp::Sqr, f.into()),
                k => Expr::Unary(UnaryOp::Pow(k), f.into()),
            });
        }
        let e = out.unwrap_or(Expr::Const(1.0));
        if negate {
            Expr::neg(e)
        } else {
            e
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(n: &str) -> Expr {
        Expr::var(n)
    }

    #[test]
    fn identities_fold() {
        assert_eq!(Expr::add(v("x"), Expr::Const(0.0)), v("x"));
        assert_eq!(Expr::mul(Expr::Const(1.0), v("x")), v("x"));
        assert_eq!(Expr::mul(Expr::Const(0.0), v("x")), Expr::Const(0.0));
        assert_eq!(Expr::sub(Expr::Const(0.0), v("x")), Expr::neg(v("x")));
        assert_eq!(Expr::div(v("x"), Expr::Const(1.0)), v("x"));
        assert_eq!(Expr::neg(Expr::neg(v("x"))), v("x"));
    }

    #[test]
    fn repeated_factor_becomes_square() {
        assert_eq!(Expr::mul(v("x"), v("x")), Expr::sqr(v("x")));
        let e = Expr::mul(Expr::mul(Expr::Const(2.0), v("x")), Expr::mul(Expr::Const(3.0), v("x")));
        assert_eq!(e, Expr::mul(Expr::Const(6.0), Expr::sqr(v("x"))));
        let e = Expr::mul(Expr::neg(v("x")), Expr::mul(Expr::Const(2.0), v("y")));
        assert_eq!(e.to_string(), "(-2)*x*y");
    }

    #[test]
    fn inexact_constants_are_kept_apart() {
        let e = Expr::add(Expr::Const(0.1), Expr::Const(0.2));
        assert!(matches!(e, Expr::Binary(BinaryOp::Add, _, _)));
        let e = Expr::mul(Expr::Const(0.1), Expr::Const(3.0));
        assert!(e.as_const().is_none());
        assert_eq!(Expr::mul(Expr::Const(0.5), Expr::Const(3.0)), Expr::Const(1.5));
        assert!(Expr::div(Expr::Const(1.0), Expr::Const(3.0)).as_const().is_none());
        assert_eq!(Expr::div(Expr::Const(1.0), Expr::Const(4.0)), Expr::Const(0.25));
    }

    #[test]
    fn free_vars_are_the_reachable_names() {
        let e = parse("x1*sin(x2) + 3 - x1").unwrap();
        let fv: Vec<_> = e.free_vars().into_iter().collect();
        assert_eq!(fv, vec!["x1".to_string(), "x2".to_string()]);
        assert!(Expr::Const(2.0).free_vars().is_empty());
    }

    #[test]
    fn abs_of_nonnegative_is_dropped() {
        assert_eq!(Expr::abs(Expr::sqr(v("x"))), Expr::sqr(v("x")));
        assert_eq!(Expr::abs(Expr::neg(v("x"))), Expr::abs(v("x")));
    }
}
