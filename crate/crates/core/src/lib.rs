//! Certified bounding constants for nonlinear dynamic systems
//! `ẋ = f(x, u)`.
//!
//! Every constant (Lipschitz, one-sided Lipschitz, quadratic
//! inner-boundedness, quadratic boundedness, Jacobian bounds) is reduced to
//! one or more global maximizations over a box. These are solved by an
//! interval branch-and-bound whose bounds are outward rounded, so the
//! reported upper bound is a rigorous over-approximation and the reported
//! lower bound is attained up to a certified margin.

pub mod baselines;
pub mod bnb;
pub mod expr;
pub mod interval;
pub mod linalg;
pub mod models;
pub mod params;

pub use baselines::{halton, sample_max, SampleMethod, SampleReport};
pub use bnb::{maximize, maximize_expr, minimize, minimize_expr, BnBConfig, BnBError, BnBResult, Objective};
pub use expr::{parse, Expr, ExprError, ModelDef, ModelError, VarDecl};
pub use interval::{IBox, Interval, IntervalError};
pub use models::{build_generator, build_moving_object, build_traffic, GeneratorConfig, MovingObjectConfig, TrafficConfig};
pub use params::{
    jacobian_bounds, lipschitz_case1, lipschitz_case2, osl, qb, qib, qib_distributed, JacobianBounds, LipschitzCase,
    LipschitzResult, OslEstimator, OslResult, ParamError, QbResult, QibResult, RunStats,
};
