//! Test corpus shared by the integration suites: small models, expressions
//! with their boxes, and a seeded polynomial generator.
#![allow(dead_code)]

use ndscert::expr::{parse, ModelDef, VarDecl};
use ndscert::models::{
    build_generator, build_moving_object, build_traffic, GeneratorAlphas, GeneratorConfig, MovingObjectConfig,
    TrafficConfig,
};
use ndscert::{Expr, IBox, Interval};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn model(states: &[(&str, f64, f64)], inputs: &[(&str, f64, f64)], f: &[&str]) -> ModelDef {
    let decl = |v: &[(&str, f64, f64)]| v.iter().map(|s| VarDecl::new(s.0, s.1, s.2).unwrap()).collect();
    ModelDef::new(
        decl(states),
        decl(inputs),
        f.iter().enumerate().map(|(i, s)| (format!("f{}", i + 1), parse(s).unwrap())).collect(),
        None,
    )
    .unwrap()
}

pub fn generator() -> ModelDef {
    build_generator(&GeneratorConfig {
        alphas: Some(GeneratorAlphas { a1: 0.2, a3: 0.6, a4: 0.3, a6: 0.1, a8: 0.8, a10: 0.5 }),
        // Ranges kept off zero: |Ψ_ij| kinks inside the box multiply the
        // Gershgorin search time roughly tenfold.
        state_bounds: Some([(0.2, 0.6), (0.95, 1.05), (0.8, 1.2), (0.1, 0.3)]),
        input_bounds: Some([(0.0, 1.0), (1.0, 1.5), (0.2, 0.6), (0.2, 0.6)]),
    })
    .unwrap()
}

/// Corpus models: the three built-in families at small size plus a few
/// classic low-dimensional systems.
pub fn models() -> Vec<(&'static str, ModelDef)> {
    vec![
        ("traffic_s1", build_traffic(&TrafficConfig::with_sections(1)).unwrap().0),
        ("moving_object", build_moving_object(&MovingObjectConfig::default()).unwrap()),
        ("generator", generator()),
        ("pendulum", model(&[("x1", -2.0, 2.0), ("x2", -1.0, 1.0)], &[], &["x2", "-sin(x1) - 0.5*x2"])),
        (
            "van_der_pol",
            model(&[("x1", -1.5, 1.5), ("x2", -1.5, 1.5)], &[], &["x2", "(1 - x1^2)*x2 - x1"]),
        ),
        (
            "forced_duffing",
            model(&[("x1", -1.0, 1.0), ("x2", -1.0, 1.0)], &[("u", -0.5, 0.5)], &["x2", "x1 - x1^3 - 0.2*x2 + u*cos(x1)"]),
        ),
    ]
}

/// Models with `f(0) = 0`, no inputs and 0 inside every state range.
pub fn qb_models() -> Vec<(&'static str, ModelDef)> {
    models().into_iter().filter(|(name, _)| matches!(*name, "traffic_s1" | "moving_object" | "pendulum" | "van_der_pol")).collect()
}

fn labelled(vars: &[(&str, f64, f64)]) -> IBox {
    IBox::new(
        vars.iter().map(|v| v.0.to_string()).collect(),
        vars.iter().map(|v| Interval::new(v.1, v.2).unwrap()).collect(),
    )
    .unwrap()
}

/// Expressions with the box they are evaluated on. Includes every model
/// component over its model's operating region.
pub fn expressions() -> Vec<(Expr, IBox)> {
    let xy = |lo: f64, hi: f64| labelled(&[("x", lo, hi), ("y", lo, hi)]);
    let mut out: Vec<(Expr, IBox)> = [
        ("x*exp(-y^2)", xy(-2.0, 2.0)),
        ("sqrt(x^2 + 1) - y", xy(-3.0, 3.0)),
        ("abs(x - y)*sin(3*x)", xy(-4.0, 4.0)),
        ("x/(y + 3)", xy(-1.0, 1.0)),
        ("cos(x)*cos(y) - sin(x*y)", xy(-5.0, 5.0)),
        ("(x - 1)^4 - 2*x^3 + y^5", xy(-1.5, 2.5)),
        ("x^2*y - x*y^2 + 3*x*y - 7", xy(-10.0, 10.0)),
        ("sin(x)^2 + cos(x)^2", xy(-20.0, 20.0)),
        ("exp(x - y)/(1 + x^2)", xy(-2.0, 1.0)),
        ("-(x^2 + y^2)*x", xy(-5.0, 5.0)),
    ]
    .into_iter()
    .map(|(s, b)| (parse(s).unwrap(), b))
    .collect();
    for (_, m) in models() {
        for f in m.f() {
            out.push((f.clone(), m.domain()));
        }
    }
    out
}

/// Random polynomial of total degree at most `degree` in `vars` variables
/// named `x1..`, with integer-valued coefficients in [-5, 5].
pub fn random_polynomial(rng: &mut ChaCha8Rng, vars: usize, degree: u32) -> Expr {
    let terms = rng.gen_range(2..=6);
    Expr::sum((0..terms).map(|_| {
        let c = rng.gen_range(-5i32..=5) as f64;
        let mut t = Expr::Const(if c == 0.0 { 1.0 } else { c });
        let mut left = rng.gen_range(0..=degree);
        while left > 0 {
            let k = rng.gen_range(1..=left);
            t = Expr::mul(t, Expr::pow(Expr::var(format!("x{}", rng.gen_range(1..=vars))), k));
            left -= k;
        }
        t
    }))
}

pub fn unit_box(vars: usize, lo: f64, hi: f64) -> IBox {
    IBox::new((1..=vars).map(|i| format!("x{i}")).collect(), vec![Interval::new(lo, hi).unwrap(); vars]).unwrap()
}

pub fn uniform_point(rng: &mut ChaCha8Rng, b: &IBox) -> Vec<f64> {
    b.dims().iter().map(|d| if d.width() == 0.0 { d.lo() } else { rng.gen_range(d.lo()..=d.hi()) }).collect()
}
