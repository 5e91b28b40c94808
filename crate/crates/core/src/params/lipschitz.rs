use std::collections::HashMap;

use super::{solve_all, Clock, Job, ParamError, RunStats};
use crate::bnb::BnBConfig;
use crate::expr::{grad_sq_norm, structural_signature, Expr, ModelDef};
use crate::interval::round::{add_down, add_up, mul_down, mul_up, sqrt_down, sqrt_up};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LipschitzCase {
    /// One maximization of `Σ_i ‖∇_x f_i‖²`.
    One,
    /// Sum of the per-component maxima of `‖∇_x f_i‖²`.
    Two,
}

/// One deduplicated per-component problem of the second case.
#[derive(Debug, Clone, PartialEq)]
pub struct UniqueSubproblem {
    /// Index of the first component with this objective.
    pub representative: usize,
    /// Number of components sharing it.
    pub count: usize,
    pub upper: f64,
    pub lower: f64,
    pub eps_optimal: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LipschitzResult {
    /// Certified Lipschitz constant.
    pub gamma: f64,
    /// `√max(l, 0)`: no constant below this can be certified by the same
    /// objective.
    pub lower: f64,
    /// `u - l` of the objective; for the second case the largest gap over
    /// the deduplicated problems.
    pub gap: f64,
    pub eps_optimal: bool,
    pub case: LipschitzCase,
    /// Empty for the first case.
    pub subproblems: Vec<UniqueSubproblem>,
    pub stats: RunStats,
}

fn check_components(model: &ModelDef) -> Result<(), ParamError> {
    if model.g_len() == 0 {
        return Err(ParamError::PreconditionViolated("f has no components".into()));
    }
    Ok(())
}

/// Lipschitz constant from a single maximization of the squared Frobenius
/// norm of the state Jacobian.
pub fn lipschitz_case1(model: &ModelDef, cfg: &BnBConfig) -> Result<LipschitzResult, ParamError> {
    cfg.validate()?;
    check_components(model)?;
    let clock = Clock::start();
    let terms = (0..model.g_len()).map(|i| grad_sq_norm(model, i)).collect::<Result<Vec<_>, _>>()?;
    let h = Expr::sum(terms);
    let (res, stats) = solve_all(model, vec![Job::max(h)], cfg)?;
    let r = res[0];
    Ok(LipschitzResult {
        gamma: sqrt_up(r.upper.max(0.0)),
        lower: sqrt_down(r.lower.max(0.0)),
        gap: r.gap(),
        eps_optimal: r.eps_optimal,
        case: LipschitzCase::One,
        subproblems: Vec::new(),
        stats: clock.stamp(stats),
    })
}

/// Dedup key: the variable-blind structure plus the bounds of the variables
/// in canonical order. Equal keys mean equal maxima.
fn dedup_key(model: &ModelDef, h: &Expr) -> String {
    let (key, order) = structural_signature(h);
    let mut k = key;
    for v in order {
        let b = model.bounds_of(&v).expect("objective variables are model variables");
        k.push_str(&format!("|{:016x}:{:016x}", b.lo().to_bits(), b.hi().to_bits()));
    }
    k
}

/// Lipschitz constant from per-component maxima, each structurally distinct
/// problem solved once and weighted by its multiplicity.
pub fn lipschitz_case2(model: &ModelDef, cfg: &BnBConfig) -> Result<LipschitzResult, ParamError> {
    cfg.validate()?;
    check_components(model)?;
    let clock = Clock::start();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut reps: Vec<(usize, usize, Expr)> = Vec::new();
    for i in 0..model.g_len() {
        let h = grad_sq_norm(model, i)?;
        let key = dedup_key(model, &h);
        match index.get(&key) {
            Some(&z) => reps[z].1 += 1,
            None => {
                index.insert(key, reps.len());
                reps.push((i, 1, h));
            }
        }
    }
    let jobs = reps.iter().map(|(_, _, h)| Job::max(h.clone())).collect();
    let (res, stats) = solve_all(model, jobs, cfg)?;
    let mut upper = 0.0;
    let mut lower = 0.0;
    let mut gap: f64 = 0.0;
    let mut eps_optimal = true;
    let mut subproblems = Vec::with_capacity(reps.len());
    for ((rep, count, _), r) in reps.into_iter().zip(res) {
        let c = count as f64;
        upper = add_up(upper, mul_up(c, r.upper.max(0.0)));
        lower = add_down(lower, mul_down(c, r.lower.max(0.0)));
        gap = gap.max(r.gap());
        eps_optimal &= r.eps_optimal;
        subproblems.push(UniqueSubproblem {
            representative: rep,
            count,
            upper: r.upper,
            lower: r.lower,
            eps_optimal: r.eps_optimal,
        });
    }
    Ok(LipschitzResult {
        gamma: sqrt_up(upper),
        lower: sqrt_down(lower),
        gap,
        eps_optimal,
        case: LipschitzCase::Two,
        subproblems,
        stats: clock.stamp(stats),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, VarDecl};

    fn model(states: &[(&str, f64, f64)], f: &[&str]) -> ModelDef {
        ModelDef::new(
            states.iter().map(|s| VarDecl::new(s.0, s.1, s.2).unwrap()).collect(),
            vec![],
            f.iter().enumerate().map(|(i, s)| (format!("f{}", i + 1), parse(s).unwrap())).collect(),
            None,
        )
        .unwrap()
    }

    #[test]
    fn identity_map_is_sqrt_n() {
        let m = model(&[("a", -1.0, 2.0), ("b", 0.0, 1.0), ("c", 3.0, 4.0)], &["a", "b", "c"]);
        for r in [lipschitz_case1(&m, &BnBConfig::default()).unwrap(), lipschitz_case2(&m, &BnBConfig::default()).unwrap()] {
            assert!((r.gamma - 3f64.sqrt()).abs() < 1e-15, "{r:?}");
            assert!(r.lower <= r.gamma && r.eps_optimal);
        }
    }

    #[test]
    fn moving_object_case1() {
        let m = model(&[("x1", -5.0, 5.0), ("x2", -5.0, 5.0)], &["-x1*(x1^2+x2^2)", "-x2*(x1^2+x2^2)"]);
        let r = lipschitz_case1(&m, &BnBConfig::default()).unwrap();
        assert!((r.gamma - 25000f64.sqrt()).abs() < 1e-2, "{r:?}");
        assert!(r.gamma >= 25000f64.sqrt());
    }

    #[test]
    fn single_component_cases_agree() {
        let m = model(&[("x", -1.0, 2.0), ("y", 0.0, 1.0)], &["x^2*y - sin(y)"]);
        let cfg = BnBConfig::default();
        let (a, b) = (lipschitz_case1(&m, &cfg).unwrap(), lipschitz_case2(&m, &cfg).unwrap());
        assert!((a.gamma - b.gamma).abs() < 1e-9, "{a:?} {b:?}");
    }

    #[test]
    fn dedup_counts_shared_structure() {
        let m = model(
            &[("x1", 0.0, 1.0), ("x2", 0.0, 1.0), ("x3", 0.0, 1.0), ("x4", 0.0, 2.0)],
            &["x2^2 - x1^2", "x3^2 - x2^2", "x4^2 - x3^2", "x1^2"],
        );
        let r = lipschitz_case2(&m, &BnBConfig::default()).unwrap();
        let counts: Vec<usize> = r.subproblems.iter().map(|s| s.count).collect();
        // The third component differs only in a bound, which keeps it apart.
        assert_eq!(counts, vec![2, 1, 1]);
        assert_eq!(r.stats.runs, 3);
        // 2·8 + 20 + 4
        assert!((r.gamma - 40f64.sqrt()).abs() < 1e-3, "{r:?}");
        let c1 = lipschitz_case1(&m, &BnBConfig::default()).unwrap();
        assert!(c1.gamma <= r.gamma + 1e-9);
    }
}
