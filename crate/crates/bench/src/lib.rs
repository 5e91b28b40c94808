//! Fixtures shared by the criterion benchmarks in `benches/`.

use ndscert::expr::{grad_sq_norm, Compiled, Expr, ModelDef};
use ndscert::models::{build_moving_object, build_traffic, MovingObjectConfig, TrafficConfig};
use ndscert::{IBox, Interval};

pub fn traffic(sections: usize) -> ModelDef {
    build_traffic(&TrafficConfig::with_sections(sections)).expect("sections >= 1").0
}

pub fn moving_object() -> ModelDef {
    build_moving_object(&MovingObjectConfig::default()).expect("default radius is valid")
}

/// The case-1 Lipschitz objective of `model` with its reduced box.
pub fn lipschitz_objective(model: &ModelDef) -> (Expr, IBox) {
    let h = Expr::sum((0..model.g_len()).map(|i| grad_sq_norm(model, i).expect("model components differentiate")));
    let b = model.reduced_box(&h).expect("objective has variables");
    (h, b)
}

pub fn compile(e: &Expr, b: &IBox) -> Compiled {
    Compiled::new(e, b.labels()).expect("box covers the expression")
}

/// `k` sub-boxes along the diagonal, each `1/k` of the box in every
/// dimension.
pub fn sub_boxes(b: &IBox, k: usize) -> Vec<Vec<Interval>> {
    (0..k)
        .map(|i| {
            b.dims()
                .iter()
                .map(|d| {
                    let w = d.width() / k as f64;
                    let lo = d.lo() + w * i as f64;
                    Interval::new(lo, (lo + w).min(d.hi())).expect("slab inside the box")
                })
                .collect()
        })
        .collect()
}
