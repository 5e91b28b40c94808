//! Canonical keys for deduplicating objectives.
//!
//! Sums and products are flattened into multisets (a difference becomes a sum
//! with a negated term), children are ordered by their variable-blind shape,
//! and variables are then numbered by first appearance in that order. Equal
//! keys imply the expressions agree up to a renaming of variables; the
//! converse can fail only for shape ties that share variables in crossed
//! patterns, which costs a missed merge, never a wrong one.

use super::{BinaryOp, Expr, UnaryOp};

enum Kind {
    Const(u64),
    Var(String),
    Un(Box<Node>),
    Sum(Vec<Node>),
    Prod(Vec<Node>),
    Div(Box<Node>, Box<Node>),
}

struct Node {
    shape: String,
    kind: Kind,
}

fn unary_tag(op: UnaryOp) -> &'static str {
    match op {
        UnaryOp::Neg => "neg",
        UnaryOp::Abs => "abs",
        UnaryOp::Sqr | UnaryOp::Pow(2) => "pow2",
        UnaryOp::Sqrt => "sqrt",
        UnaryOp::Sin => "sin",
        UnaryOp::Cos => "cos",
        UnaryOp::Exp => "exp",
        UnaryOp::Pow(_) => "pow",
    }
}

fn collect_sum(e: &Expr, negate: bool, named: bool, out: &mut Vec<Node>) {
    match e {
        Expr::Binary(BinaryOp::Add, a, b) => {
            collect_sum(a, negate, named, out);
            collect_sum(b, negate, named, out);
        }
        Expr::Binary(BinaryOp::Sub, a, b) => {
            collect_sum(a, negate, named, out);
            collect_sum(b, !negate, named, out);
        }
        _ => {
            let n = build(e, named);
            out.push(if negate { un("neg", n) } else { n });
        }
    }
}

fn collect_prod(e: &Expr, named: bool, out: &mut Vec<Node>) {
    match e {
        Expr::Binary(BinaryOp::Mul, a, b) => {
            collect_prod(a, named, out);
            collect_prod(b, named, out);
        }
        _ => out.push(build(e, named)),
    }
}

fn un(tag: &'static str, n: Node) -> Node {
    Node { shape: format!("{tag}({})", n.shape), kind: Kind::Un(Box::new(n)) }
}

fn multiset(tag: char, mut items: Vec<Node>) -> (String, Vec<Node>) {
    items.sort_by(|a, b| a.shape.cmp(&b.shape));
    let inner: Vec<&str> = items.iter().map(|n| n.shape.as_str()).collect();
    (format!("{tag}[{}]", inner.join(",")), items)
}

/// With `named`, variable names are part of the shape, so equal shapes mean
/// equal expressions up to reordering of sums and products.
fn build(e: &Expr, named: bool) -> Node {
    match e {
        Expr::Const(c) => {
            // -0 and +0 behave identically.
            let bits = if *c == 0.0 { 0 } else { c.to_bits() };
            Node { shape: format!("c{bits:016x}"), kind: Kind::Const(bits) }
        }
        Expr::Var(v) => {
            let shape = if named { format!("v:{v}") } else { "v".into() };
            Node { shape, kind: Kind::Var(v.clone()) }
        }
        Expr::Unary(UnaryOp::Pow(k), a) if *k != 2 => {
            let n = build(a, named);
            Node { shape: format!("pow{k}({})", n.shape), kind: Kind::Un(Box::new(n)) }
        }
        Expr::Unary(op, a) => un(unary_tag(*op), build(a, named)),
        Expr::Binary(BinaryOp::Add | BinaryOp::Sub, _, _) => {
            let mut items = Vec::new();
            collect_sum(e, false, named, &mut items);
            let (shape, items) = multiset('+', items);
            Node { shape, kind: Kind::Sum(items) }
        }
        Expr::Binary(BinaryOp::Mul, _, _) => {
            let mut items = Vec::new();
            collect_prod(e, named, &mut items);
            let (shape, items) = multiset('*', items);
            Node { shape, kind: Kind::Prod(items) }
        }
        Expr::Binary(BinaryOp::Div, a, b) => {
            let (a, b) = (build(a, named), build(b, named));
            Node { shape: format!("/({},{})", a.shape, b.shape), kind: Kind::Div(Box::new(a), Box::new(b)) }
        }
    }
}

fn emit(n: &Node, order: &mut Vec<String>, out: &mut String) {
    match &n.kind {
        Kind::Const(bits) => out.push_str(&format!("c{bits:016x}")),
        Kind::Var(v) => {
            let k = match order.iter().position(|o| o == v) {
                Some(k) => k,
                None => {
                    order.push(v.clone());
                    order.len() - 1
                }
            };
            out.push_str(&format!("v{k}"));
        }
        Kind::Un(a) => {
            // The shape carries the operator tag and any exponent.
            let head = &n.shape[..n.shape.find('(').expect("unary shape")];
            out.push_str(head);
            out.push('(');
            emit(a, order, out);
            out.push(')');
        }
        Kind::Sum(items) | Kind::Prod(items) => {
            out.push(if matches!(n.kind, Kind::Sum(_)) { '+' } else { '*' });
            out.push('[');
            for (i, c) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                emit(c, order, out);
            }
            out.push(']');
        }
        Kind::Div(a, b) => {
            out.push_str("/(");
            emit(a, order, out);
            out.push(',');
            emit(b, order, out);
            out.push(')');
        }
    }
}

/// Canonical key and the original variable names in canonical order.
pub fn structural_signature(e: &Expr) -> (String, Vec<String>) {
    let root = build(e, false);
    let mut order = Vec::new();
    let mut out = String::new();
    emit(&root, &mut order, &mut out);
    (out, order)
}

pub fn structural_key(e: &Expr) -> String {
    structural_signature(e).0
}

/// Key that keeps variable names: equal keys mean the expressions differ at
/// most in the order of terms and factors.
pub fn named_key(e: &Expr) -> String {
    build(e, true).shape
}

#[cfg(test)]
mod tests {
    use super::super::parse;
    use super::*;

    fn key(s: &str) -> String {
        structural_key(&parse(s).unwrap())
    }

    #[test]
    fn renaming_and_commutativity() {
        assert_eq!(key("1.18*(x5^2 - x4^2)"), key("1.18*(x11^2 - x10^2)"));
        assert_ne!(key("x1^2"), key("x1^2 + x2^2"));
        assert_eq!(key("x1 + x2"), key("x2 + x1"));
        assert_eq!(key("a*b*c"), key("c*(b*a)"));
        assert_eq!(key("a - b + c"), key("c + a - b"));
    }

    #[test]
    fn coincidence_patterns_are_preserved() {
        assert_ne!(key("x*x"), key("x*y"));
        assert_ne!(key("sin(x) + x"), key("sin(x) + y"));
        assert_eq!(key("sin(x) + x"), key("y + sin(y)"));
    }

    #[test]
    fn constants_and_operators_matter() {
        assert_ne!(key("2*x"), key("3*x"));
        assert_ne!(key("x - y"), key("x + y"));
        assert_ne!(key("x/y"), key("y/x*1"));
        assert_ne!(key("x^3"), key("x^4"));
        assert_eq!(key("sqr(x)"), key("x^2"));
    }

    #[test]
    fn named_keys_keep_variables() {
        let nk = |s: &str| named_key(&parse(s).unwrap());
        assert_eq!(nk("(-2*x1)*x2"), nk("(-2*x2)*x1"));
        assert_ne!(nk("x1^2"), nk("x2^2"));
        assert_eq!(nk("a - b + c"), nk("c + a - b"));
    }

    #[test]
    fn signature_reports_variable_order() {
        let (k1, o1) = structural_signature(&parse("x5^2 - x4^2").unwrap());
        let (k2, o2) = structural_signature(&parse("x11^2 - x10^2").unwrap());
        assert_eq!(k1, k2);
        // The negated term sorts first.
        assert_eq!(o1, vec!["x4", "x5"]);
        assert_eq!(o2, vec!["x10", "x11"]);
    }
}
