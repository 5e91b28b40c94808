//! Symbolic differentiation through the simplifying constructors.

use super::{BinaryOp, Compiled, Expr, ExprError, ModelDef, UnaryOp};
use crate::interval::{IBox, Interval};

pub fn differentiate(e: &Expr, v: &str) -> Result<Expr, ExprError> {
    differentiate_on(e, v, None)
}

/// As [`differentiate`], using `domain` to prove the sign of `abs` and `sqrt`
/// arguments. Without a domain only structurally signed arguments pass.
pub fn differentiate_on(e: &Expr, v: &str, domain: Option<&IBox>) -> Result<Expr, ExprError> {
    Ok(match e {
        Expr::Const(_) => Expr::Const(0.0),
        Expr::Var(n) => Expr::Const(if n == v { 1.0 } else { 0.0 }),
        _ if !e.depends_on(v) => Expr::Const(0.0),
        Expr::Unary(op, a) => {
            let da = differentiate_on(a, v, domain)?;
            match op {
                UnaryOp::Neg => Expr::neg(da),
                UnaryOp::Abs => match sign_on(a, domain) {
                    Some(s) if s >= 0.0 => da,
                    Some(_) => Expr::neg(da),
                    None => {
                        return Err(ExprError::NonDifferentiable(format!(
                            "abs({a}) may change sign on the domain"
                        )))
                    }
                },
                UnaryOp::Sqr => Expr::mul(Expr::mul(Expr::Const(2.0), (**a).clone()), da),
                UnaryOp::Pow(1) => da,
                UnaryOp::Pow(k) => Expr::mul(
                    Expr::mul(Expr::Const(f64::from(*k)), Expr::pow((**a).clone(), k - 1)),
                    da,
                ),
                UnaryOp::Sqrt => {
                    if !strictly_positive_on(a, domain) {
                        return Err(ExprError::NonDifferentiable(format!(
                            "sqrt({a}) argument may reach zero on the domain"
                        )));
                    }
                    Expr::div(da, Expr::mul(Expr::Const(2.0), Expr::sqrt((**a).clone())))
                }
                UnaryOp::Sin => Expr::mul(Expr::cos((**a).clone()), da),
                UnaryOp::Cos => Expr::neg(Expr::mul(Expr::sin((**a).clone()), da)),
                UnaryOp::Exp => Expr::mul(Expr::exp((**a).clone()), da),
            }
        }
        Expr::Binary(op, a, b) => {
            let da = differentiate_on(a, v, domain)?;
            let db = differentiate_on(b, v, domain)?;
            let (a, b) = ((**a).clone(), (**b).clone());
            match op {
                BinaryOp::Add => Expr::add(da, db),
                BinaryOp::Sub => Expr::sub(da, db),
                BinaryOp::Mul => Expr::add(Expr::mul(da, b), Expr::mul(a, db)),
                BinaryOp::Div => {
                    if db.is_zero() {
                        Expr::div(da, b)
                    } else {
                        Expr::sub(Expr::div(da, b.clone()), Expr::div(Expr::mul(a, db), Expr::sqr(b)))
                    }
                }
            }
        }
    })
}

fn enclose_on(e: &Expr, domain: Option<&IBox>) -> Option<Interval> {
    let d = domain?;
    let c = Compiled::new(e, d.labels()).ok()?;
    c.eval_refined(d.dims(), 10).ok()
}

/// +1 when provably nonnegative, -1 when provably nonpositive.
fn sign_on(e: &Expr, domain: Option<&IBox>) -> Option<f64> {
    if e.is_structurally_nonneg() {
        return Some(1.0);
    }
    let r = enclose_on(e, domain)?;
    if r.lo() >= 0.0 {
        Some(1.0)
    } else if r.hi() <= 0.0 {
        Some(-1.0)
    } else {
        None
    }
}

fn strictly_positive_on(e: &Expr, domain: Option<&IBox>) -> bool {
    match e {
        Expr::Const(c) => *c > 0.0,
        Expr::Unary(UnaryOp::Exp, _) => true,
        _ => enclose_on(e, domain).is_some_and(|r| r.lo() > 0.0),
    }
}

/// Sum over state variables of the squared partial derivatives of `f_i`
/// (0-based). Inputs are never differentiated.
pub fn grad_sq_norm(model: &ModelDef, i: usize) -> Result<Expr, ExprError> {
    let f = &model.f()[i];
    let domain = model.domain();
    let mut terms = Vec::new();
    for s in model.states() {
        let d = differentiate_on(f, &s.name, Some(&domain))?;
        if !d.is_zero() {
            terms.push(Expr::sqr(d));
        }
    }
    Ok(Expr::sum(terms))
}
