use super::{solve_all, Clock, Extremum, Job, ParamError, RunStats, Sense};
use crate::baselines::halton;
use crate::bnb::{BnBConfig, Objective};
use crate::expr::{differentiate_on, named_key, Compiled, EvalError, Expr, ModelDef};
use crate::interval::round::{sqrt_down, sqrt_up};
use crate::interval::{refined_eval, IBox, Interval};
use crate::linalg::jacobi_eigenvalues;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OslEstimator {
    /// `√max Σ_ij Ξ_ij²`, always nonnegative.
    Frobenius,
    /// `max_i max (Ψ_ii + Σ_{j≠i} |Ψ_ij|)`.
    Gershgorin,
    /// `max_i max (Ψ_ii + ζ_n max_{j≠i} |Ψ_ij|)`.
    Zeta,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OslResult {
    /// Certified one-sided Lipschitz constant; may be negative.
    pub gamma_s: f64,
    /// Certified value the estimator attains; `gamma_s` cannot be pushed
    /// below it with the same estimator.
    pub lower: f64,
    pub gap: f64,
    pub eps_optimal: bool,
    pub estimator: OslEstimator,
    /// Enclosure of the Gershgorin lower bound `γ̲` of the inner product
    /// (only computed by the Gershgorin estimator). Its `lower` end is the
    /// certified value.
    pub lower_gamma: Option<Extremum>,
    pub stats: RunStats,
}

/// `Ξ_ij = Σ_k G_ik ∂f_k/∂x_j`, an n×n matrix of expressions.
pub fn build_xi(model: &ModelDef) -> Result<Vec<Vec<Expr>>, ParamError> {
    let g = model.g_matrix()?;
    let (n, gl) = (model.n(), model.g_len());
    if g.len() != n || g.iter().any(|row| row.len() != gl) {
        return Err(ParamError::Model(crate::expr::ModelError::DimensionMismatch(format!(
            "G must be {n}x{gl}"
        ))));
    }
    let domain = model.domain();
    let mut d = Vec::with_capacity(gl);
    for f in model.f() {
        let row = model
            .states()
            .iter()
            .map(|s| differentiate_on(f, &s.name, Some(&domain)))
            .collect::<Result<Vec<_>, _>>()?;
        d.push(row);
    }
    Ok((0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    Expr::sum((0..gl).filter(|&k| g[i][k] != 0.0 && !d[k][j].is_zero()).map(|k| {
                        if g[i][k] == 1.0 {
                            d[k][j].clone()
                        } else {
                            Expr::mul(Expr::Const(g[i][k]), d[k][j].clone())
                        }
                    }))
                })
                .collect()
        })
        .collect())
}

/// `Ψ = (Ξ + Ξᵀ)/2`. Pairs equal up to the order of terms and factors are
/// kept as they are.
pub fn build_psi(model: &ModelDef) -> Result<Vec<Vec<Expr>>, ParamError> {
    Ok(symmetrize(&build_xi(model)?))
}

fn symmetrize(xi: &[Vec<Expr>]) -> Vec<Vec<Expr>> {
    let n = xi.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j || named_key(&xi[i][j]) == named_key(&xi[j][i]) {
                        xi[i][j].clone()
                    } else {
                        Expr::mul(Expr::Const(0.5), Expr::add(xi[i][j].clone(), xi[j][i].clone()))
                    }
                })
                .collect()
        })
        .collect()
}

pub fn osl(model: &ModelDef, cfg: &BnBConfig, estimator: OslEstimator) -> Result<OslResult, ParamError> {
    match estimator {
        OslEstimator::Frobenius => osl_frobenius(model, cfg),
        OslEstimator::Gershgorin => osl_gershgorin(model, cfg),
        OslEstimator::Zeta => osl_zeta(model, cfg),
    }
}

/// `γ_s1 = √(max Σ_ij Ξ_ij²)`.
pub fn osl_frobenius(model: &ModelDef, cfg: &BnBConfig) -> Result<OslResult, ParamError> {
    cfg.validate()?;
    let clock = Clock::start();
    let xi = build_xi(model)?;
    let h = Expr::sum(xi.into_iter().flatten().filter(|e| !e.is_zero()).map(Expr::sqr));
    let (res, stats) = solve_all(model, vec![Job::max(h)], cfg)?;
    let r = res[0];
    Ok(OslResult {
        gamma_s: sqrt_up(r.upper.max(0.0)),
        lower: sqrt_down(r.lower.max(0.0)),
        gap: r.gap(),
        eps_optimal: r.eps_optimal,
        estimator: OslEstimator::Frobenius,
        lower_gamma: None,
        stats: clock.stamp(stats),
    })
}

/// Sum of `|Ψ_ij|` over the off-diagonal entries of row `i` that are not
/// identically zero.
fn off_diagonal_abs_sum(psi: &[Vec<Expr>], i: usize) -> Expr {
    Expr::sum((0..psi.len()).filter(|&j| j != i && !psi[i][j].is_zero()).map(|j| Expr::abs(psi[i][j].clone())))
}

/// Maximum over rows of per-row maxima: `u = max_i u_i`, `l = max_i l_i`.
fn max_over_rows(rows: &[Extremum], eps_h: f64) -> Extremum {
    let upper = rows.iter().map(|r| r.upper).fold(f64::NEG_INFINITY, f64::max);
    let lower = rows.iter().map(|r| r.lower).fold(f64::NEG_INFINITY, f64::max);
    Extremum { lower, upper, eps_optimal: upper - lower <= eps_h }
}

/// Row-wise Gershgorin problems: the maximum of `max_i (Ψ_ii + Σ_{j≠i} |Ψ_ij|)`
/// and the minimum of `min_i (Ψ_ii - Σ_{j≠i} |Ψ_ij|)`, each only if asked.
pub(crate) fn gershgorin_parts(
    model: &ModelDef,
    cfg: &BnBConfig,
    upper: bool,
    lower: bool,
) -> Result<(Option<Extremum>, Option<Extremum>, RunStats), ParamError> {
    let psi = build_psi(model)?;
    let n = psi.len();
    let mut jobs = Vec::with_capacity(2 * n);
    for i in 0..n {
        let r = off_diagonal_abs_sum(&psi, i);
        if upper {
            jobs.push(Job::max(Expr::add(psi[i][i].clone(), r.clone())));
        }
        if lower {
            jobs.push(Job::min(Expr::sub(psi[i][i].clone(), r)));
        }
    }
    let (res, stats) = solve_all(model, jobs, cfg)?;
    let per_row = usize::from(upper) + usize::from(lower);
    let top = upper.then(|| max_over_rows(&res.iter().step_by(per_row).copied().collect::<Vec<_>>(), cfg.eps_h));
    let bottom = lower.then(|| {
        let rows: Vec<Extremum> = res.iter().skip(usize::from(upper)).step_by(per_row).copied().collect();
        Extremum {
            lower: rows.iter().map(|r| r.lower).fold(f64::INFINITY, f64::min),
            upper: rows.iter().map(|r| r.upper).fold(f64::INFINITY, f64::min),
            eps_optimal: rows.iter().all(|r| r.eps_optimal),
        }
    });
    Ok((top, bottom, stats))
}

/// `γ_s2` from the Gershgorin discs of Ψ, together with the lower bound
/// `γ̲ = min_i min (Ψ_ii - Σ_{j≠i} |Ψ_ij|)` of the inner product.
pub fn osl_gershgorin(model: &ModelDef, cfg: &BnBConfig) -> Result<OslResult, ParamError> {
    cfg.validate()?;
    let clock = Clock::start();
    let (top, bottom, stats) = gershgorin_parts(model, cfg, true, true)?;
    let top = top.expect("requested");
    Ok(OslResult {
        gamma_s: top.upper,
        lower: top.lower,
        gap: top.gap(),
        eps_optimal: top.eps_optimal,
        estimator: OslEstimator::Gershgorin,
        lower_gamma: bottom,
        stats: clock.stamp(stats),
    })
}

/// The constant of the row-max eigenvalue bound for dimension `n`:
/// `ζ_n = 1/v* - 1` with `v* = min v_i` subject to `v_i + Σ_{j≠i} w_j = 1`
/// and `0 ≤ w_j ≤ v_i`.
pub fn zeta(n: usize) -> Result<f64, ParamError> {
    if n < 2 {
        return Err(ParamError::InvalidDimension(n));
    }
    // The program has n unknowns (v_i and the n-1 w_j). A vertex needs n
    // active constraints: the equality and n-1 bounds. A bound v_i >= 0 can
    // only be active with every w_j = 0, which breaks the equality, so each
    // vertex has every w_j at 0 or at v_i. With k of them at v_i the
    // equality gives v_i = 1/(1+k). The minimum over the vertices is taken
    // on the denominators, so the result is exact.
    let best_den = (0..n).map(|k| 1 + k).max().expect("n >= 2");
    Ok((best_den - 1) as f64)
}

/// `Ψ_ii + ζ max_{j≠i} |Ψ_ij|` over a reduced box, with the inner maximum
/// enclosed by the hull `[max lo, max hi]` of the absolute values.
struct RowMax {
    diag: Compiled,
    off: Vec<Compiled>,
    zeta: f64,
    segments: usize,
}

impl RowMax {
    fn eval(&self, d: &[Interval]) -> Result<Interval, EvalError> {
        let mut lo = 0.0f64;
        let mut hi = 0.0f64;
        for c in &self.off {
            let a = c.eval_interval(d)?.abs();
            lo = lo.max(a.lo());
            hi = hi.max(a.hi());
        }
        let m = Interval::new(lo, hi)?;
        Ok(self.diag.eval_interval(d)? + Interval::point(self.zeta) * m)
    }
}

impl Objective for RowMax {
    fn dim(&self) -> usize {
        self.diag.vars().len()
    }

    fn point(&self, x: &[f64]) -> Result<f64, EvalError> {
        let mut m = 0.0f64;
        for c in &self.off {
            m = m.max(c.eval_real(x)?.abs());
        }
        Ok(self.diag.eval_real(x)? + self.zeta * m)
    }

    fn enclose(&self, dims: &[Interval]) -> Result<Interval, EvalError> {
        refined_eval(|d| self.eval(d), dims, self.segments)
    }
}

/// Box over the free variables of `exprs`, in declaration order.
fn joint_box(model: &ModelDef, exprs: &[&Expr]) -> Option<IBox> {
    let vars: Vec<Expr> = exprs
        .iter()
        .flat_map(|e| e.free_vars())
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .map(Expr::var)
        .collect();
    model.reduced_box(&Expr::sum(vars))
}

/// `γ_s3` from the row-max bound with the dimension constant `ζ_n`.
pub fn osl_zeta(model: &ModelDef, cfg: &BnBConfig) -> Result<OslResult, ParamError> {
    cfg.validate()?;
    let clock = Clock::start();
    let psi = build_psi(model)?;
    let n = psi.len();
    let z = zeta(n)?;
    let mut jobs = Vec::with_capacity(n);
    for i in 0..n {
        let row: Vec<&Expr> = (0..n).map(|j| &psi[i][j]).collect();
        let b = joint_box(model, &row);
        let vars: Vec<String> = b.as_ref().map(|b| b.labels().to_vec()).unwrap_or_default();
        let obj = RowMax {
            diag: Compiled::new(&psi[i][i], &vars)?,
            off: (0..n).filter(|&j| j != i).map(|j| Compiled::new(&psi[i][j], &vars)).collect::<Result<_, _>>()?,
            zeta: z,
            segments: cfg.segments,
        };
        match b {
            Some(b) => jobs.push(Job::Custom(Box::new(obj), b, Sense::Max)),
            None => {
                // Constant row: its enclosure is exact up to rounding.
                let v = obj.eval(&[])?;
                jobs.push(Job::max(Expr::Const(v.hi())));
            }
        }
    }
    let (res, stats) = solve_all(model, jobs, cfg)?;
    let top = max_over_rows(&res, cfg.eps_h);
    Ok(OslResult {
        gamma_s: top.upper,
        lower: top.lower,
        gap: top.gap(),
        eps_optimal: top.eps_optimal,
        estimator: OslEstimator::Zeta,
        lower_gamma: None,
        stats: clock.stamp(stats),
    })
}

/// Sampled extreme eigenvalues of Ψ over the operating region. Not a
/// certified bound: the exact eigenvalue objectives have no closed form.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSample {
    pub max_lambda_max: f64,
    pub min_lambda_min: f64,
    pub samples: usize,
}

pub fn psi_eigen_sampled(model: &ModelDef, count: usize) -> Result<EigenSample, ParamError> {
    let psi = build_psi(model)?;
    let names = model.var_names();
    let compiled: Vec<Vec<Compiled>> = psi
        .iter()
        .map(|row| row.iter().map(|e| Compiled::new(e, &names)).collect::<Result<Vec<_>, _>>())
        .collect::<Result<_, _>>()?;
    let domain = model.domain();
    let mut out = EigenSample { max_lambda_max: f64::NEG_INFINITY, min_lambda_min: f64::INFINITY, samples: 0 };
    for u in halton(domain.len(), count.max(1)) {
        let x = domain.map_unit(&u);
        let m: Vec<Vec<f64>> = compiled
            .iter()
            .map(|row| row.iter().map(|c| c.eval_real(&x)).collect::<Result<Vec<_>, _>>())
            .collect::<Result<_, _>>()?;
        let ev = jacobi_eigenvalues(&m);
        out.max_lambda_max = out.max_lambda_max.max(*ev.last().expect("n >= 1"));
        out.min_lambda_min = out.min_lambda_min.min(ev[0]);
        out.samples += 1;
    }
    Ok(out)
}
