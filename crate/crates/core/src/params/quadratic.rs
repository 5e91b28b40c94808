use super::osl::{build_xi, gershgorin_parts, osl, OslEstimator};
use super::{solve_all, Clock, Extremum, Job, ParamError, RunStats};
use crate::bnb::BnBConfig;
use crate::expr::{differentiate_on, Expr, ModelDef};
use crate::interval::round::{add_down, add_up, mul_down, mul_up, sqrt_down, sqrt_up, sub_down, sub_up};

/// Absolute tolerance on `‖f(0)‖` for the quadratic-boundedness precondition.
pub const QB_ZERO_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct QibResult {
    pub gamma_q1: f64,
    pub gamma_q2: f64,
    pub eps1: f64,
    pub eps2: f64,
    /// Certified upper bound `γ̄` of the inner product ratio.
    pub gamma_bar: f64,
    /// Certified lower bound `γ̲` of the inner product ratio.
    pub gamma_under: f64,
    /// Certified upper bound of `max Σ_i ‖∇_x ξ_i‖²` (or of the sum of
    /// per-row maxima for the distributed variant).
    pub gamma_m: f64,
    /// `gamma_q1` assembled from the other ends of the three enclosures.
    pub lower: f64,
    pub gap: f64,
    pub eps_optimal: bool,
    pub estimator: OslEstimator,
    pub distributed: bool,
    pub stats: RunStats,
}

fn check_eps(eps1: f64, eps2: f64) -> Result<(), ParamError> {
    if !(eps1 >= 0.0 && eps2 >= 0.0 && eps1.is_finite() && eps2.is_finite()) {
        return Err(ParamError::InvalidArgument(format!("eps1 = {eps1}, eps2 = {eps2} must be finite and >= 0")));
    }
    Ok(())
}

/// `eps_h` for a bound that enters the result multiplied by `scale`, so the
/// scaled bound is still resolved to `eps_h`.
fn scaled(cfg: &BnBConfig, scale: f64) -> BnBConfig {
    BnBConfig { eps_h: cfg.eps_h / scale.max(1.0), ..*cfg }
}

/// Quadratic inner-boundedness constants for the given weights:
/// `γ_q2 = ε2 - ε1` and `γ_q1 = ε1 γ̄ - ε2 γ̲ + max Σ_i ‖∇_x ξ_i‖²`
/// with `ξ_i = Σ_j G_ij f_j`. `γ̄` comes from `estimator`, `γ̲` from the
/// Gershgorin lower bound.
pub fn qib(model: &ModelDef, cfg: &BnBConfig, eps1: f64, eps2: f64, estimator: OslEstimator) -> Result<QibResult, ParamError> {
    qib_impl(model, cfg, eps1, eps2, estimator, false)
}

/// As [`qib`], with the last term replaced by `Σ_i max ‖∇_x ξ_i‖²`, which is
/// larger but splits into independent per-row problems.
pub fn qib_distributed(
    model: &ModelDef,
    cfg: &BnBConfig,
    eps1: f64,
    eps2: f64,
    estimator: OslEstimator,
) -> Result<QibResult, ParamError> {
    qib_impl(model, cfg, eps1, eps2, estimator, true)
}

fn qib_impl(
    model: &ModelDef,
    cfg: &BnBConfig,
    eps1: f64,
    eps2: f64,
    estimator: OslEstimator,
    distributed: bool,
) -> Result<QibResult, ParamError> {
    cfg.validate()?;
    check_eps(eps1, eps2)?;
    let clock = Clock::start();
    let mut stats = RunStats::default();

    let bar = osl(model, &scaled(cfg, eps1), estimator)?;
    stats.merge(&bar.stats);
    let (_, under, s) = gershgorin_parts(model, &scaled(cfg, eps2), false, true)?;
    stats.merge(&s);
    let under = under.expect("requested");

    // ∂ξ_i/∂x_j is Ξ_ij, so Σ_i ‖∇_x ξ_i‖² = Σ_ij Ξ_ij².
    let xi = build_xi(model)?;
    let row = |r: Vec<Expr>| Expr::sum(r.into_iter().filter(|e| !e.is_zero()).map(Expr::sqr));
    let m = if distributed {
        let jobs = xi.into_iter().map(|r| Job::max(row(r))).collect();
        let (res, s) = solve_all(model, jobs, cfg)?;
        stats.merge(&s);
        Extremum {
            upper: res.iter().fold(0.0, |a, r| add_up(a, r.upper)),
            lower: res.iter().fold(0.0, |a, r| add_down(a, r.lower)),
            eps_optimal: res.iter().all(|r| r.eps_optimal),
        }
    } else {
        let h = Expr::sum(xi.into_iter().map(row));
        let (res, s) = solve_all(model, vec![Job::max(h)], cfg)?;
        stats.merge(&s);
        res[0]
    };

    let gamma_q2 = eps2 - eps1;
    // The bound holds for any real weights with ε2 - ε1 = γ_q2. When the
    // subtraction rounded, ε1 is replaced by the end of the enclosure of
    // ε2 - γ_q2 that makes ε1 γ̄ largest.
    let e1 = if bar.gamma_s >= 0.0 { sub_up(eps2, gamma_q2) } else { sub_down(eps2, gamma_q2) }.max(0.0);
    let gamma_q1 = add_up(add_up(mul_up(e1, bar.gamma_s), mul_up(eps2, -under.lower)), m.upper);
    let e1_lo = if bar.lower >= 0.0 { sub_down(eps2, gamma_q2) } else { sub_up(eps2, gamma_q2) }.max(0.0);
    let lower = add_down(add_down(mul_down(e1_lo, bar.lower), mul_down(eps2, -under.upper)), m.lower);
    Ok(QibResult {
        gamma_q1,
        gamma_q2,
        eps1,
        eps2,
        gamma_bar: bar.gamma_s,
        gamma_under: under.lower,
        gamma_m: m.upper,
        lower,
        gap: gamma_q1 - lower,
        eps_optimal: bar.eps_optimal && under.eps_optimal && m.eps_optimal,
        estimator,
        distributed,
        stats: clock.stamp(stats),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct QbResult {
    /// Diagonal of Γ.
    pub gamma: Vec<f64>,
    /// Certified attained values of the per-column objectives, square-rooted.
    pub lower: Vec<f64>,
    /// Largest `u - l` over the per-column objectives.
    pub gap: f64,
    pub eps_optimal: bool,
    pub stats: RunStats,
}

/// Diagonal Γ with `Γ_jj = √(max n Σ_i (∂f_i/∂x_j)²)`, so that
/// `⟨f(x), f(x)⟩ ≤ xᵀΓᵀΓx` on the operating region.
pub fn qb(model: &ModelDef, cfg: &BnBConfig) -> Result<QbResult, ParamError> {
    cfg.validate()?;
    if model.m() > 0 {
        return Err(ParamError::PreconditionViolated("f depends on input variables".into()));
    }
    if let Some(s) = model.states().iter().find(|s| !s.bounds.contains(0.0)) {
        return Err(ParamError::PreconditionViolated(format!("the region does not contain 0 (state `{}`)", s.name)));
    }
    let f0 = model.eval_f(&vec![0.0; model.n()])?;
    let norm = f0.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !(norm <= QB_ZERO_TOL) {
        return Err(ParamError::PreconditionViolated(format!("|f(0)| = {norm:e} exceeds {QB_ZERO_TOL:e}")));
    }
    let clock = Clock::start();
    let domain = model.domain();
    let n = model.n() as f64;
    let mut jobs = Vec::with_capacity(model.n());
    for s in model.states() {
        let mut terms = Vec::new();
        for f in model.f() {
            let d = differentiate_on(f, &s.name, Some(&domain))?;
            if !d.is_zero() {
                terms.push(Expr::sqr(d));
            }
        }
        jobs.push(Job::max(Expr::mul(Expr::Const(n), Expr::sum(terms))));
    }
    let (res, stats) = solve_all(model, jobs, cfg)?;
    Ok(QbResult {
        gamma: res.iter().map(|r| sqrt_up(r.upper.max(0.0))).collect(),
        lower: res.iter().map(|r| sqrt_down(r.lower.max(0.0))).collect(),
        gap: res.iter().map(Extremum::gap).fold(0.0, f64::max),
        eps_optimal: res.iter().all(|r| r.eps_optimal),
        stats: clock.stamp(stats),
    })
}

/// Lipschitz constant `√(2γ_q1 + γ_q2²)` implied by quadratic inner-bounded
/// constants. Fails when `2γ_q1 + γ_q2² < 0`, in which case no function
/// satisfies the QIB inequality with these constants.
pub fn qib_to_lipschitz(gamma_q1: f64, gamma_q2: f64) -> Result<f64, ParamError> {
    if !(gamma_q1.is_finite() && gamma_q2.is_finite()) {
        return Err(ParamError::InvalidArgument(format!("({gamma_q1}, {gamma_q2})")));
    }
    let hi = add_up(mul_up(2.0, gamma_q1), mul_up(gamma_q2, gamma_q2));
    if hi < 0.0 {
        return Err(ParamError::NecessaryConditionViolated { value: hi });
    }
    Ok(sqrt_up(hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, VarDecl};

    fn model(states: &[(&str, f64, f64)], inputs: &[(&str, f64, f64)], f: &[&str]) -> ModelDef {
        ModelDef::new(
            states.iter().map(|s| VarDecl::new(s.0, s.1, s.2).unwrap()).collect(),
            inputs.iter().map(|s| VarDecl::new(s.0, s.1, s.2).unwrap()).collect(),
            f.iter().enumerate().map(|(i, s)| (format!("f{}", i + 1), parse(s).unwrap())).collect(),
            None,
        )
        .unwrap()
    }

    fn moving_object(r: f64) -> ModelDef {
        model(&[("x1", -r, r), ("x2", -r, r)], &[], &["-x1*(x1^2+x2^2)", "-x2*(x1^2+x2^2)"])
    }

    #[test]
    fn moving_object_qib() {
        let cfg = BnBConfig::default();
        let m = moving_object(5.0);
        for eps1 in [0.0, 1e4, 1e5] {
            let r = qib(&m, &cfg, eps1, 0.1, OslEstimator::Gershgorin).unwrap();
            assert!((r.gamma_q1 - 25015.0).abs() < 0.2, "{r:?}");
            assert_eq!(r.gamma_q2, 0.1 - eps1);
            assert!((r.gamma_m - 25000.0).abs() < 0.1 && (r.gamma_under + 150.0).abs() < 1e-3);
        }
        let d = qib_distributed(&m, &cfg, 1e4, 0.1, OslEstimator::Gershgorin).unwrap();
        // Both rows peak at the same corner.
        assert!((d.gamma_q1 - 25015.0).abs() < 0.2, "{d:?}");
    }

    #[test]
    fn zero_weights_leave_gamma_m() {
        let m = moving_object(1.0);
        let r = qib(&m, &BnBConfig::default(), 0.0, 0.0, OslEstimator::Frobenius).unwrap();
        assert_eq!(r.gamma_q2, 0.0);
        assert_eq!(r.gamma_q1, r.gamma_m);
        assert!(qib(&m, &BnBConfig::default(), -1.0, 0.0, OslEstimator::Frobenius).is_err());
    }

    #[test]
    fn qb_examples() {
        let cfg = BnBConfig::default();
        let r = qb(&model(&[("x", -1.0, 1.0)], &[], &["x^2"]), &cfg).unwrap();
        assert!((r.gamma[0] - 2.0).abs() < 1e-4 && r.gamma[0] >= 2.0, "{r:?}");
        let r = qb(&moving_object(1.0), &cfg).unwrap();
        assert!((r.gamma[0] - 40f64.sqrt()).abs() < 1e-3, "{r:?}");
        assert!((r.gamma[1] - 40f64.sqrt()).abs() < 1e-3);
    }

    #[test]
    fn qb_preconditions() {
        let cfg = BnBConfig::default();
        let with_input = model(&[("x", -1.0, 1.0)], &[("u", 0.0, 1.0)], &["x*u"]);
        assert!(matches!(qb(&with_input, &cfg), Err(ParamError::PreconditionViolated(_))));
        let offset = model(&[("x", -1.0, 1.0)], &[], &["x + 1"]);
        assert!(matches!(qb(&offset, &cfg), Err(ParamError::PreconditionViolated(_))));
        let away = model(&[("x", 1.0, 2.0)], &[], &["x"]);
        assert!(matches!(qb(&away, &cfg), Err(ParamError::PreconditionViolated(_))));
    }

    #[test]
    fn qib_to_lipschitz_examples() {
        assert_eq!(qib_to_lipschitz(2.0, 0.0).unwrap(), 2.0);
        let gl: f64 = 3.0;
        assert_eq!(qib_to_lipschitz(gl * gl / 2.0, 0.0).unwrap(), gl);
        assert!(matches!(qib_to_lipschitz(-1.0, 1.0), Err(ParamError::NecessaryConditionViolated { .. })));
    }
}
