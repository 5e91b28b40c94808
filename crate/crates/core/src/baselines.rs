//! Point-sampling estimates of a maximum. They only ever under-approximate
//! and serve as comparison numbers and as warm starts for the maximizer.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::bnb::Objective;
use crate::expr::{differentiate_on, Compiled, ExprError, ModelDef};
use crate::interval::IBox;
use crate::linalg::spectral_norm;

/// Most corners enumerated by [`SampleMethod::Corners`].
pub const MAX_CORNERS: u64 = 1 << 20;
/// Starting points of [`SampleMethod::MultistartLocal`].
pub const MULTISTART_STARTS: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SampleMethod {
    Halton,
    Corners,
    Midpoint,
    MultistartLocal,
}

impl SampleMethod {
    pub fn name(self) -> &'static str {
        match self {
            SampleMethod::Halton => "halton",
            SampleMethod::Corners => "corners",
            SampleMethod::Midpoint => "midpoint",
            SampleMethod::MultistartLocal => "multistart_local",
        }
    }
}

impl fmt::Display for SampleMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SampleMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "halton" => Ok(SampleMethod::Halton),
            "corners" => Ok(SampleMethod::Corners),
            "midpoint" => Ok(SampleMethod::Midpoint),
            "multistart_local" | "multistart" => Ok(SampleMethod::MultistartLocal),
            _ => Err(format!("unknown sampling method `{s}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleReport {
    /// Largest value seen; `-inf` if no point could be evaluated.
    pub best_value: f64,
    pub best_point: Vec<f64>,
    /// Number of objective evaluations.
    pub samples: usize,
    pub method: SampleMethod,
}

fn first_primes(k: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(k);
    let mut c = 2u64;
    while out.len() < k {
        if out.iter().take_while(|&&p| p * p <= c).all(|&p| c % p != 0) {
            out.push(c);
        }
        c += 1;
    }
    out
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += (i % base) as f64 * f;
        i /= base;
        f *= inv;
    }
    r
}

/// Halton sequence in `[0,1]^dim` with the first `dim` primes as bases,
/// starting at index 1.
#[derive(Debug, Clone)]
pub struct Halton {
    bases: Vec<u64>,
    index: u64,
}

impl Halton {
    pub fn new(dim: usize) -> Halton {
        Halton { bases: first_primes(dim), index: 1 }
    }

    /// The point with sequence index `i` (1-based).
    pub fn point(&self, i: u64) -> Vec<f64> {
        self.bases.iter().map(|&b| radical_inverse(i, b)).collect()
    }
}

impl Iterator for Halton {
    type Item = Vec<f64>;

    fn next(&mut self) -> Option<Vec<f64>> {
        let p = self.point(self.index);
        self.index += 1;
        Some(p)
    }
}

/// The first `count` Halton points in dimension `dim`.
pub fn halton(dim: usize, count: usize) -> Vec<Vec<f64>> {
    Halton::new(dim).take(count).collect()
}

/// Best of already generated points, ties going to the earliest.
fn best_of<O: Objective + ?Sized>(obj: &O, points: Vec<Vec<f64>>, method: SampleMethod) -> SampleReport {
    let samples = points.len();
    let values: Vec<Option<f64>> = points.par_iter().map(|x| obj.point(x).ok().filter(|v| !v.is_nan())).collect();
    let mut best: Option<usize> = None;
    for (i, v) in values.iter().enumerate() {
        if let Some(v) = v {
            if best.is_none_or(|b| *v > values[b].expect("evaluated")) {
                best = Some(i);
            }
        }
    }
    match best {
        Some(i) => SampleReport { best_value: values[i].expect("evaluated"), best_point: points[i].clone(), samples, method },
        None => SampleReport { best_value: f64::NEG_INFINITY, best_point: Vec::new(), samples, method },
    }
}

/// Largest value of `obj` over points of `domain` chosen by `method`.
///
/// `count` is the number of Halton points, and the evaluation budget of the
/// multistart search. Corners are enumerated up to [`MAX_CORNERS`] and the
/// midpoint is a single evaluation, whatever `count`.
pub fn sample_max<O: Objective + ?Sized>(obj: &O, domain: &IBox, count: usize, method: SampleMethod) -> SampleReport {
    let count = count.max(1);
    match method {
        SampleMethod::Halton => {
            let pts = Halton::new(domain.len()).take(count).map(|u| domain.map_unit(&u)).collect();
            best_of(obj, pts, method)
        }
        SampleMethod::Corners => {
            let total = if domain.len() >= 64 { MAX_CORNERS } else { (1u64 << domain.len()).min(MAX_CORNERS) };
            let pts = (0..total).map(|mask| domain.corner_by_mask(mask)).collect();
            best_of(obj, pts, method)
        }
        SampleMethod::Midpoint => best_of(obj, vec![domain.midpoint()], method),
        SampleMethod::MultistartLocal => multistart(obj, domain, count),
    }
}

/// Coordinate pattern search from Halton starts. Steps start at a quarter of
/// each width and halve after a sweep without improvement.
fn multistart<O: Objective + ?Sized>(obj: &O, domain: &IBox, budget: usize) -> SampleReport {
    let starts = MULTISTART_STARTS.min(budget);
    let per_start = (budget / starts).max(1);
    let runs: Vec<(f64, Vec<f64>, usize)> = Halton::new(domain.len())
        .take(starts)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|u| pattern_search(obj, domain, domain.map_unit(&u), per_start))
        .collect();
    let samples = runs.iter().map(|r| r.2).sum();
    let mut best: Option<&(f64, Vec<f64>, usize)> = None;
    for r in &runs {
        if r.0 > f64::NEG_INFINITY && best.is_none_or(|b| r.0 > b.0) {
            best = Some(r);
        }
    }
    match best {
        Some(b) => SampleReport { best_value: b.0, best_point: b.1.clone(), samples, method: SampleMethod::MultistartLocal },
        None => SampleReport {
            best_value: f64::NEG_INFINITY,
            best_point: Vec::new(),
            samples,
            method: SampleMethod::MultistartLocal,
        },
    }
}

fn pattern_search<O: Objective + ?Sized>(obj: &O, domain: &IBox, mut x: Vec<f64>, budget: usize) -> (f64, Vec<f64>, usize) {
    let eval = |x: &[f64]| obj.point(x).ok().filter(|v| !v.is_nan()).unwrap_or(f64::NEG_INFINITY);
    let mut fx = eval(&x);
    let mut used = 1;
    let mut step: Vec<f64> = domain.dims().iter().map(|d| d.width() / 4.0).collect();
    let min_step: Vec<f64> = domain.dims().iter().map(|d| d.width() * 1e-9).collect();
    while used < budget && step.iter().zip(&min_step).any(|(s, m)| s > m) {
        let mut improved = false;
        for k in 0..x.len() {
            for dir in [1.0, -1.0] {
                if used >= budget {
                    break;
                }
                let d = domain.dims()[k];
                let cand = (x[k] + dir * step[k]).clamp(d.lo(), d.hi());
                if cand == x[k] {
                    continue;
                }
                let mut y = x.clone();
                y[k] = cand;
                let fy = eval(&y);
                used += 1;
                if fy > fx {
                    x = y;
                    fx = fy;
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            step.iter_mut().for_each(|s| *s /= 2.0);
        }
    }
    (fx, x, used)
}

/// Jacobian of f with respect to the states at a point over states then
/// inputs.
pub fn jacobian_at(model: &ModelDef, point: &[f64]) -> Result<Vec<Vec<f64>>, ExprError> {
    JacobianEvaluator::new(model)?.at(point)
}

struct JacobianEvaluator {
    entries: Vec<Vec<Compiled>>,
}

impl JacobianEvaluator {
    fn new(model: &ModelDef) -> Result<Self, ExprError> {
        let names = model.var_names();
        let domain = model.domain();
        let entries = model
            .f()
            .iter()
            .map(|f| {
                model
                    .states()
                    .iter()
                    .map(|s| Compiled::new(&differentiate_on(f, &s.name, Some(&domain))?, &names))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<_, _>>()?;
        Ok(JacobianEvaluator { entries })
    }

    fn at(&self, x: &[f64]) -> Result<Vec<Vec<f64>>, ExprError> {
        Ok(self
            .entries
            .iter()
            .map(|row| row.iter().map(|c| c.eval_real(x)).collect::<Result<Vec<_>, _>>())
            .collect::<Result<_, _>>()?)
    }
}

/// Largest spectral norm of the state Jacobian over `count` Halton points of
/// `domain` (states then inputs). A reference estimate of the Lipschitz
/// constant, not a bound.
pub fn jacobian_norm_sampled(model: &ModelDef, domain: &IBox, count: usize) -> Result<SampleReport, ExprError> {
    let jac = JacobianEvaluator::new(model)?;
    let pts: Vec<Vec<f64>> = Halton::new(domain.len()).take(count.max(1)).map(|u| domain.map_unit(&u)).collect();
    let values: Vec<Option<f64>> =
        pts.par_iter().map(|x| jac.at(x).ok().map(|j| spectral_norm(&j)).filter(|v| !v.is_nan())).collect();
    let mut best: Option<usize> = None;
    for (i, v) in values.iter().enumerate() {
        if let Some(v) = v {
            if best.is_none_or(|b| *v > values[b].expect("evaluated")) {
                best = Some(i);
            }
        }
    }
    let samples = pts.len();
    Ok(match best {
        Some(i) => SampleReport {
            best_value: values[i].expect("evaluated"),
            best_point: pts[i].clone(),
            samples,
            method: SampleMethod::Halton,
        },
        None => SampleReport { best_value: f64::NEG_INFINITY, best_point: Vec::new(), samples, method: SampleMethod::Halton },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bnb::{maximize, BnBConfig, ExprObjective};
    use crate::expr::{parse, VarDecl};
    use crate::interval::Interval;

    fn line(lo: f64, hi: f64) -> IBox {
        IBox::new(vec!["x".into()], vec![Interval::new(lo, hi).unwrap()]).unwrap()
    }

    #[test]
    fn halton_prefixes() {
        assert_eq!(halton(1, 3), vec![vec![0.5], vec![0.25], vec![0.75]]);
        let p = halton(2, 1);
        assert_eq!(p[0][0], 0.5);
        assert!((p[0][1] - 1.0 / 3.0).abs() < 1e-16);
        assert!(halton(7, 200).iter().flatten().all(|&u| (0.0..1.0).contains(&u)));
        assert_eq!(first_primes(6), vec![2, 3, 5, 7, 11, 13]);
    }

    #[test]
    fn corners_of_square() {
        let b = line(-1.0, 1.0);
        let obj = ExprObjective::on_box(&parse("x^2").unwrap(), &b, 1).unwrap();
        let r = sample_max(&obj, &b, 10, SampleMethod::Corners);
        assert_eq!(r.best_value, 1.0);
        assert_eq!(r.samples, 2);
        assert_eq!(r.best_point.len(), 1);
        assert_eq!(r.best_point[0].abs(), 1.0);
        let r = sample_max(&obj, &b, 10, SampleMethod::Midpoint);
        assert_eq!((r.best_value, r.samples), (0.0, 1));
    }

    #[test]
    fn samplers_stay_below_certified_upper_bound() {
        let b = IBox::new(
            vec!["x".into(), "y".into()],
            vec![Interval::new(-2.0, 1.0).unwrap(), Interval::new(0.0, 3.0).unwrap()],
        )
        .unwrap();
        let e = parse("sin(3*x)*y - (x - 0.3)^2 + 0.1*x*y^2").unwrap();
        let obj = ExprObjective::on_box(&e, &b, 10).unwrap();
        let u = maximize(&obj, &b, &BnBConfig::default()).unwrap().upper;
        for m in [SampleMethod::Halton, SampleMethod::Corners, SampleMethod::Midpoint, SampleMethod::MultistartLocal] {
            let r = sample_max(&obj, &b, 2000, m);
            assert!(r.best_value <= u + 1e-9, "{m}: {} > {u}", r.best_value);
            assert_eq!(r, sample_max(&obj, &b, 2000, m), "deterministic");
        }
        let local = sample_max(&obj, &b, 4000, SampleMethod::MultistartLocal);
        assert!(u - local.best_value < 1e-3, "{} vs {u}", local.best_value);
    }

    #[test]
    fn jacobian_norms() {
        let m = ModelDef::new(
            vec![VarDecl::new("a", -1.0, 1.0).unwrap(), VarDecl::new("b", -1.0, 1.0).unwrap()],
            vec![],
            vec![("f1".into(), parse("b").unwrap()), ("f2".into(), parse("0").unwrap())],
            None,
        )
        .unwrap();
        let r = jacobian_norm_sampled(&m, &m.domain(), 50).unwrap();
        assert_eq!(r.best_value, 1.0);
        let mo = ModelDef::new(
            vec![VarDecl::new("x1", -5.0, 5.0).unwrap(), VarDecl::new("x2", -5.0, 5.0).unwrap()],
            vec![],
            vec![("f1".into(), parse("-x1*(x1^2+x2^2)").unwrap()), ("f2".into(), parse("-x2*(x1^2+x2^2)").unwrap())],
            None,
        )
        .unwrap();
        let j = jacobian_at(&mo, &[5.0, 5.0]).unwrap();
        assert!((spectral_norm(&j) - 150.0).abs() < 1e-9);
    }

    #[test]
    fn method_names_round_trip() {
        for m in [SampleMethod::Halton, SampleMethod::Corners, SampleMethod::Midpoint, SampleMethod::MultistartLocal] {
            assert_eq!(m.name().parse::<SampleMethod>().unwrap(), m);
        }
        assert!("sobol".parse::<SampleMethod>().is_err());
    }
}
