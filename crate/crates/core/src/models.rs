//! Built-in models: a highway traffic network, a synchronous generator and a
//! moving object in the plane. Each factory returns an ordinary
//! [`ModelDef`], so `to_text` exports it in the model-file format.

use std::collections::HashMap;

use crate::expr::{parse_with_constants, Expr, ModelDef, ModelError, VarDecl};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrafficConfig {
    /// Number of highway sections; the model has `6s + 1` states.
    pub sections: usize,
    /// Free-flow speed (m/s).
    pub v_f: f64,
    /// Maximum density (vehicles/m).
    pub rho_m: f64,
    /// Segment length (m).
    pub seg_len: f64,
    /// Off-ramp splitting ratio.
    pub alpha: f64,
}

impl Default for TrafficConfig {
    fn default() -> Self {
        TrafficConfig { sections: 5, v_f: 31.3, rho_m: 0.053, seg_len: 500.0, alpha: 0.5 }
    }
}

impl TrafficConfig {
    pub fn with_sections(sections: usize) -> Self {
        TrafficConfig { sections, ..TrafficConfig::default() }
    }

    pub fn delta(&self) -> f64 {
        self.v_f / (self.seg_len * self.rho_m)
    }

    /// Critical density, the upper end of every state's range.
    pub fn rho_c(&self) -> f64 {
        self.rho_m / 2.0
    }

    pub fn n(&self) -> usize {
        6 * self.sections + 1
    }
}

/// How many components of each nonlinearity type a traffic model has.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TypeCounts {
    /// `δ x_i²`
    pub a: usize,
    /// `δ (x_i² - x_{i-1}² - x_j²)`
    pub b: usize,
    /// `δ (x_i² - x_{i-1}²)`
    pub c: usize,
    /// `δ (x_i² - x_{i-1}² + α x_j²)`
    pub d: usize,
    /// `-δ α x_i²`
    pub e: usize,
}

impl TypeCounts {
    pub fn as_array(&self) -> [usize; 5] {
        [self.a, self.b, self.c, self.d, self.e]
    }
}

/// Traffic network of `s` sections behind one upstream segment.
///
/// State `x1` is the upstream segment (type a). Each section then adds six
/// states in this order, with `p` the last mainline state before it:
///
/// | state | role              | type | f                          |
/// |-------|-------------------|------|----------------------------|
/// | m1    | mainline          | c    | `δ (m1² - p²)`             |
/// | m2    | mainline, on-ramp | d    | `δ (m2² - m1² + α q²)`     |
/// | q     | on-ramp           | a    | `δ q²`                     |
/// | m3    | mainline, off-ramp| b    | `δ (m3² - m2² - o²)`       |
/// | o     | off-ramp          | e    | `-δ α o²`                  |
/// | m4    | mainline          | c    | `δ (m4² - m3²)`            |
///
/// so the counts are `(s+1, s, 2s, s, s)`. All states range over
/// `[0, ρ_c]`.
pub fn build_traffic(cfg: &TrafficConfig) -> Result<(ModelDef, TypeCounts), ModelError> {
    if cfg.sections == 0 {
        return Err(ModelError::Empty);
    }
    let delta = cfg.delta();
    let (d, alpha) = (Expr::Const(delta), Expr::Const(cfg.alpha));
    let sq = |k: usize| Expr::sqr(Expr::var(format!("x{k}")));
    let n = cfg.n();
    let mut f: Vec<Expr> = Vec::with_capacity(n);
    let mut counts = TypeCounts::default();

    f.push(Expr::mul(d.clone(), sq(1)));
    counts.a += 1;
    let mut prev = 1;
    for sec in 0..cfg.sections {
        let base = 2 + 6 * sec;
        let (m1, m2, q, m3, o, m4) = (base, base + 1, base + 2, base + 3, base + 4, base + 5);
        f.push(Expr::mul(d.clone(), Expr::sub(sq(m1), sq(prev))));
        f.push(Expr::mul(d.clone(), Expr::add(Expr::sub(sq(m2), sq(m1)), Expr::mul(alpha.clone(), sq(q)))));
        f.push(Expr::mul(d.clone(), sq(q)));
        f.push(Expr::mul(d.clone(), Expr::sub(Expr::sub(sq(m3), sq(m2)), sq(o))));
        f.push(Expr::neg(Expr::mul(d.clone(), Expr::mul(alpha.clone(), sq(o)))));
        f.push(Expr::mul(d.clone(), Expr::sub(sq(m4), sq(m3))));
        counts.c += 2;
        counts.d += 1;
        counts.a += 1;
        counts.b += 1;
        counts.e += 1;
        prev = m4;
    }
    let states =
        (1..=n).map(|k| VarDecl::new(format!("x{k}"), 0.0, cfg.rho_c())).collect::<Result<Vec<_>, _>>()?;
    let f = f.into_iter().enumerate().map(|(i, e)| (format!("f{}", i + 1), e)).collect();
    Ok((ModelDef::new(states, vec![], f, None)?, counts))
}

/// Constants of the generator model: `α1, α3, α4, α6, α8, α10`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratorAlphas {
    pub a1: f64,
    pub a3: f64,
    pub a4: f64,
    pub a6: f64,
    pub a8: f64,
    pub a10: f64,
}

impl GeneratorAlphas {
    /// All ones. The machine constants are not part of the model definition
    /// and have to be supplied for any real machine.
    pub const PLACEHOLDER: GeneratorAlphas = GeneratorAlphas { a1: 1.0, a3: 1.0, a4: 1.0, a6: 1.0, a8: 1.0, a10: 1.0 };
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct GeneratorConfig {
    /// `None` selects [`GeneratorAlphas::PLACEHOLDER`] with a warning.
    pub alphas: Option<GeneratorAlphas>,
    /// Ranges of rotor angle, speed and the two transient voltages.
    pub state_bounds: Option<[(f64, f64); 4]>,
    /// Ranges of mechanical torque, field voltage and the two currents.
    pub input_bounds: Option<[(f64, f64); 4]>,
}

const GENERATOR_F: [&str; 4] = [
    "-a1",
    "a3*x4*u4*cos(x1) - a3*x3*u4*sin(x1) - a3*x4*u3*sin(x1) - a3*x3*u3*cos(x1) \
     + a4*u3*u4*cos(2*x1) + 0.5*a4*(u4^2 - u3^2)*sin(2*x1) + a6",
    "a8*u4*cos(x1) - a8*u3*sin(x1)",
    "a10*u3*cos(x1) + a10*u4*sin(x1)",
];

/// Fourth-order synchronous generator with states (rotor angle, speed, q-
/// and d-axis transient voltages) and inputs (torque, field voltage, real
/// and imaginary current).
pub fn build_generator(cfg: &GeneratorConfig) -> Result<ModelDef, ModelError> {
    let sb = cfg.state_bounds.ok_or_else(|| ModelError::MissingBounds("generator states".into()))?;
    let ib = cfg.input_bounds.ok_or_else(|| ModelError::MissingBounds("generator inputs".into()))?;
    let a = cfg.alphas.unwrap_or_else(|| {
        log::warn!("generator constants not given; using placeholder value 1.0 for every alpha");
        GeneratorAlphas::PLACEHOLDER
    });
    let constants: HashMap<String, f64> =
        [("a1", a.a1), ("a3", a.a3), ("a4", a.a4), ("a6", a.a6), ("a8", a.a8), ("a10", a.a10)]
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect();
    let states = (0..4).map(|k| VarDecl::new(format!("x{}", k + 1), sb[k].0, sb[k].1)).collect::<Result<Vec<_>, _>>()?;
    let inputs = (0..4).map(|k| VarDecl::new(format!("u{}", k + 1), ib[k].0, ib[k].1)).collect::<Result<Vec<_>, _>>()?;
    let f = GENERATOR_F
        .iter()
        .enumerate()
        .map(|(i, src)| {
            parse_with_constants(src, &constants)
                .map(|e| (format!("f{}", i + 1), e))
                .map_err(|source| ModelError::Parse { line: i + 1, source })
        })
        .collect::<Result<Vec<_>, _>>()?;
    ModelDef::new(states, inputs, f, None)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MovingObjectConfig {
    /// Half-width of the square region.
    pub r: f64,
}

impl Default for MovingObjectConfig {
    fn default() -> Self {
        MovingObjectConfig { r: 5.0 }
    }
}

/// `f(x) = -(x1² + x2²) x` on `[-r, r]²` with `G = I`.
pub fn build_moving_object(cfg: &MovingObjectConfig) -> Result<ModelDef, ModelError> {
    let r = cfg.r;
    if !(r > 0.0 && r.is_finite()) {
        return Err(ModelError::InvalidBounds("r".into()));
    }
    let norm = || Expr::add(Expr::sqr(Expr::var("x1")), Expr::sqr(Expr::var("x2")));
    let f = vec![
        ("f1".to_string(), Expr::neg(Expr::mul(Expr::var("x1"), norm()))),
        ("f2".to_string(), Expr::neg(Expr::mul(Expr::var("x2"), norm()))),
    ];
    ModelDef::new(vec![VarDecl::new("x1", -r, r)?, VarDecl::new("x2", -r, r)?], vec![], f, None)
}
