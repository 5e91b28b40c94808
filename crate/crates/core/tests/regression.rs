//! Frozen values for the built-in models, each checked against an
//! independent closed form.

use ndscert::bnb::BnBConfig;
use ndscert::models::{build_moving_object, build_traffic, MovingObjectConfig, TrafficConfig};
use ndscert::params::{jacobian_bounds, lipschitz_case1, lipschitz_case2, qb, qib_to_lipschitz};

/// Every traffic component is a signed sum of `c x_k²` terms over
/// `[0, ρ_c]`, so `max ‖∇f_i‖² = Σ (2 c ρ_c)²` and the maxima add up by type.
/// With `u0 = (2 δ ρ_c)²` the types weigh a: 1, b: 3, c: 2, d: 2 + α²,
/// e: α².
fn traffic_gamma_sq(cfg: &TrafficConfig) -> f64 {
    let (_, counts) = build_traffic(cfg).unwrap();
    let u0 = (2.0 * cfg.delta() * cfg.rho_c()).powi(2);
    let a2 = cfg.alpha * cfg.alpha;
    let w = [1.0, 3.0, 2.0, 2.0 + a2, a2];
    counts.as_array().iter().zip(w).map(|(&c, w)| c as f64 * w).sum::<f64>() * u0
}

#[test]
fn traffic_closed_form() {
    let cfg = TrafficConfig::default();
    let u0 = (2.0 * cfg.delta() * cfg.rho_c()).powi(2);
    // 2 δ ρ_c = v_f / l exactly.
    assert!((2.0 * cfg.delta() * cfg.rho_c() - 0.0626).abs() < 1e-15);
    assert!((traffic_gamma_sq(&cfg) - (10.5 * 5.0 + 1.0) * u0).abs() < 1e-15);
}

#[test]
fn traffic_cases_match_closed_form() {
    let bnb = BnBConfig::default();
    for s in 1..=5 {
        let cfg = TrafficConfig::with_sections(s);
        let (m, _) = build_traffic(&cfg).unwrap();
        let want = traffic_gamma_sq(&cfg).sqrt();
        let c1 = lipschitz_case1(&m, &bnb).unwrap();
        let c2 = lipschitz_case2(&m, &bnb).unwrap();
        for r in [&c1, &c2] {
            assert!(r.gamma >= want && r.gamma - want < 1e-4, "s={s}: {} vs {want}", r.gamma);
            assert!(r.lower <= want);
        }
        assert!((c1.gamma - c2.gamma).abs() < 1e-9);
    }
}

#[test]
fn traffic_jacobian_entries() {
    let cfg = TrafficConfig::with_sections(1);
    let (m, _) = build_traffic(&cfg).unwrap();
    let jb = jacobian_bounds(&m, &BnBConfig::default()).unwrap();
    let top = 2.0 * cfg.delta() * cfg.rho_c();
    // f2 = δ (x2² - x1²)
    assert!(jb.get(1, 1).lo() <= 0.0 && (jb.get(1, 1).hi() - top).abs() < 1e-6);
    assert!((jb.get(1, 0).lo() + top).abs() < 1e-6 && jb.get(1, 0).hi() >= 0.0);
    assert_eq!(jb.get(1, 2), ndscert::Interval::point(0.0));
}

#[test]
fn moving_object_qb_and_conversion() {
    let m = build_moving_object(&MovingObjectConfig { r: 1.0 }).unwrap();
    let r = qb(&m, &BnBConfig::default()).unwrap();
    // n Σ_i (∂f_i/∂x_1)² = 2 ((3x1² + x2²)² + 4 x1² x2²), largest at (1, 1).
    for g in &r.gamma {
        assert!((g - 40f64.sqrt()).abs() < 1e-3, "{r:?}");
    }
    let l = qib_to_lipschitz(25015.0, -0.1).unwrap();
    assert!(l * l >= 2.0 * 25015.0 + 0.01);
}
