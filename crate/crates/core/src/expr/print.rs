//! Printer emitting the parser's grammar with the fewest parentheses that
//! preserve the tree shape.

use std::fmt;

use super::{BinaryOp, Expr, UnaryOp};

const P_SUM: u8 = 1;
const P_PROD: u8 = 2;
const P_NEG: u8 = 3;
const P_POW: u8 = 4;
const P_ATOM: u8 = 5;

fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Const(_) | Expr::Var(_) => P_ATOM,
        Expr::Unary(UnaryOp::Neg, _) => P_NEG,
        Expr::Unary(UnaryOp::Pow(_), _) => P_POW,
        Expr::Unary(_, _) => P_ATOM,
        Expr::Binary(BinaryOp::Add | BinaryOp::Sub, _, _) => P_SUM,
        Expr::Binary(BinaryOp::Mul | BinaryOp::Div, _, _) => P_PROD,
    }
}

pub(crate) fn fmt_number(c: f64) -> String {
    if c.fract() == 0.0 && c.abs() < 1e15 {
        format!("{c}")
    } else {
        format!("{c:?}")
    }
}

fn write_child(f: &mut fmt::Formatter<'_>, e: &Expr, parens: bool) -> fmt::Result {
    if parens {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) if *c < 0.0 || (*c == 0.0 && c.is_sign_negative()) => {
                write!(f, "(-{})", fmt_number(-c))
            }
            Expr::Const(c) => write!(f, "{}", fmt_number(*c)),
            Expr::Var(v) => write!(f, "{v}"),
            Expr::Unary(UnaryOp::Neg, a) => {
                write!(f, "-")?;
                write_child(f, a, prec(a) < P_NEG)
            }
            Expr::Unary(UnaryOp::Pow(k), a) => {
                write_child(f, a, prec(a) < P_ATOM)?;
                write!(f, "^{k}")
            }
            Expr::Unary(op, a) => {
                let name = match op {
                    UnaryOp::Abs => "abs",
                    UnaryOp::Sqr => "sqr",
                    UnaryOp::Sqrt => "sqrt",
                    UnaryOp::Sin => "sin",
                    UnaryOp::Cos => "cos",
                    UnaryOp::Exp => "exp",
                    UnaryOp::Neg | UnaryOp::Pow(_) => unreachable!(),
                };
                write!(f, "{name}({a})")
            }
            Expr::Binary(op, a, b) => {
                let (p, sym) = match op {
                    BinaryOp::Add => (P_SUM, " + "),
                    BinaryOp::Sub => (P_SUM, " - "),
                    BinaryOp::Mul => (P_PROD, "*"),
                    BinaryOp::Div => (P_PROD, "/"),
                };
                write_child(f, a, prec(a) < p)?;
                write!(f, "{sym}")?;
                write_child(f, b, prec(b) <= p)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse;
    use super::*;

    #[test]
    fn prints_minimal_parentheses() {
        for s in ["x1^2 - x2^2", "-x1*x2", "a - (b - c)", "(a + b)*c", "-x^2", "(-x)^2", "sin(x)/(y*z)"] {
            let e = parse(s).unwrap();
            assert_eq!(e.to_string(), s);
        }
        assert_eq!(parse("-2*x1*x2").unwrap().to_string(), "(-2)*x1*x2");
    }

    #[test]
    fn negative_constants_are_bracketed() {
        assert_eq!(Expr::Const(-2.5).to_string(), "(-2.5)");
        assert_eq!(parse("(-2.5)").unwrap(), Expr::Const(-2.5));
    }

    #[test]
    fn numbers_round_trip() {
        for c in [0.1, 1e-7, 1e300, 1.181_132_075_471_698, 31.3 / 26.5, 2.0, 1e16] {
            let e = Expr::Const(c);
            assert_eq!(parse(&e.to_string()).unwrap(), e, "{c}");
        }
    }
}
