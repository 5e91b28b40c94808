//! System definitions and the model text format.
//!
//! ```text
//! # comment
//! [constants]
//! delta = 1.1811320754716981
//! [states]
//! x1 = [0, 0.0265]
//! [inputs]
//! u1 = [-1, 1]
//! [f]
//! f1 = "delta*x1^2"
//! [G]
//! 1
//! ```
//!
//! Constants are substituted into expressions and bounds; they may appear in
//! any order relative to the sections that use them. `[G]` holds one row per
//! line, entries separated by whitespace or commas.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use thiserror::Error;

use super::print::fmt_number;
use super::{parse_with_constants, Compiled, EvalError, Expr, ParseError};
use crate::interval::{IBox, Interval};

#[derive(Debug, Clone, PartialEq)]
pub struct VarDecl {
    pub name: String,
    pub bounds: Interval,
}

impl VarDecl {
    pub fn new(name: impl Into<String>, lo: f64, hi: f64) -> Result<Self, ModelError> {
        let name = name.into();
        let bounds = Interval::new(lo, hi).map_err(|_| ModelError::InvalidBounds(name.clone()))?;
        Ok(VarDecl { name, bounds })
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: {source}")]
    Parse { line: usize, source: ParseError },
    #[error("component `{component}` uses undeclared variable `{name}`")]
    UnboundVariable { component: String, name: String },
    #[error("name `{0}` declared twice")]
    DuplicateName(String),
    #[error("bounds of `{0}` are not a finite interval with lo <= hi")]
    InvalidBounds(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("model needs at least one state and one component of f")]
    Empty,
    #[error("missing bounds for `{0}`")]
    MissingBounds(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelDef {
    states: Vec<VarDecl>,
    inputs: Vec<VarDecl>,
    f_names: Vec<String>,
    f: Vec<Expr>,
    g: Option<Vec<Vec<f64>>>,
}

impl ModelDef {
    /// `f` pairs component names with expressions; `g` is n x (len f) when given.
    pub fn new(
        states: Vec<VarDecl>,
        inputs: Vec<VarDecl>,
        f: Vec<(String, Expr)>,
        g: Option<Vec<Vec<f64>>>,
    ) -> Result<Self, ModelError> {
        if states.is_empty() || f.is_empty() {
            return Err(ModelError::Empty);
        }
        let mut seen = HashSet::new();
        for v in states.iter().chain(&inputs) {
            if !seen.insert(v.name.as_str()) {
                return Err(ModelError::DuplicateName(v.name.clone()));
            }
        }
        let mut fseen = HashSet::new();
        for (name, e) in &f {
            if !fseen.insert(name.as_str()) {
                return Err(ModelError::DuplicateName(name.clone()));
            }
            if let Some(bad) = e.free_vars().into_iter().find(|v| !seen.contains(v.as_str())) {
                return Err(ModelError::UnboundVariable { component: name.clone(), name: bad });
            }
        }
        if let Some(g) = &g {
            if g.len() != states.len() || g.iter().any(|r| r.len() != f.len()) {
                return Err(ModelError::DimensionMismatch(format!(
                    "G must be {}x{}",
                    states.len(),
                    f.len()
                )));
            }
            if g.iter().flatten().any(|x| !x.is_finite()) {
                return Err(ModelError::DimensionMismatch("G entries must be finite".into()));
            }
        }
        let (f_names, f) = f.into_iter().unzip();
        Ok(ModelDef { states, inputs, f_names, f, g })
    }

    pub fn states(&self) -> &[VarDecl] {
        &self.states
    }

    pub fn inputs(&self) -> &[VarDecl] {
        &self.inputs
    }

    pub fn f(&self) -> &[Expr] {
        &self.f
    }

    pub fn f_names(&self) -> &[String] {
        &self.f_names
    }

    /// Number of states.
    pub fn n(&self) -> usize {
        self.states.len()
    }

    /// Number of inputs.
    pub fn m(&self) -> usize {
        self.inputs.len()
    }

    /// Number of components of f.
    pub fn g_len(&self) -> usize {
        self.f.len()
    }

    pub fn explicit_g(&self) -> Option<&Vec<Vec<f64>>> {
        self.g.as_ref()
    }

    /// G, defaulting to the identity (which needs as many components as states).
    pub fn g_matrix(&self) -> Result<Vec<Vec<f64>>, ModelError> {
        match &self.g {
            Some(g) => Ok(g.clone()),
            None if self.f.len() == self.states.len() => Ok((0..self.n())
                .map(|i| (0..self.n()).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
                .collect()),
            None => Err(ModelError::DimensionMismatch(format!(
                "identity G needs {} components of f, found {}",
                self.n(),
                self.f.len()
            ))),
        }
    }

    /// States followed by inputs.
    pub fn var_names(&self) -> Vec<String> {
        self.states.iter().chain(&self.inputs).map(|v| v.name.clone()).collect()
    }

    pub fn state_names(&self) -> Vec<String> {
        self.states.iter().map(|v| v.name.clone()).collect()
    }

    /// The operating region over states then inputs.
    pub fn domain(&self) -> IBox {
        let vars: Vec<&VarDecl> = self.states.iter().chain(&self.inputs).collect();
        IBox::new(vars.iter().map(|v| v.name.clone()).collect(), vars.iter().map(|v| v.bounds).collect())
            .expect("model has at least one state")
    }

    pub fn bounds_of(&self, name: &str) -> Option<Interval> {
        self.states.iter().chain(&self.inputs).find(|v| v.name == name).map(|v| v.bounds)
    }

    /// Reduced box over the free variables of `e`, in declaration order.
    /// `None` when `e` is constant.
    pub fn reduced_box(&self, e: &Expr) -> Option<IBox> {
        let fv = e.free_vars();
        let vars: Vec<&VarDecl> = self.states.iter().chain(&self.inputs).filter(|v| fv.contains(&v.name)).collect();
        if vars.is_empty() {
            return None;
        }
        IBox::new(vars.iter().map(|v| v.name.clone()).collect(), vars.iter().map(|v| v.bounds).collect()).ok()
    }

    /// f evaluated at a point given over states then inputs.
    pub fn eval_f(&self, point: &[f64]) -> Result<Vec<f64>, EvalError> {
        let names = self.var_names();
        self.f
            .iter()
            .map(|e| {
                Compiled::new(e, &names)
                    .map_err(|_| EvalError::UnboundVariable(e.to_string()))?
                    .eval_real(point)
            })
            .collect()
    }

    pub fn parse_text(text: &str) -> Result<ModelDef, ModelError> {
        parse_model(text)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let bounds = |s: &mut String, vars: &[VarDecl]| {
            for v in vars {
                let _ = writeln!(s, "{} = [{}, {}]", v.name, fmt_number(v.bounds.lo()), fmt_number(v.bounds.hi()));
            }
        };
        s.push_str("[states]\n");
        bounds(&mut s, &self.states);
        if !self.inputs.is_empty() {
            s.push_str("[inputs]\n");
            bounds(&mut s, &self.inputs);
        }
        s.push_str("[f]\n");
        for (n, e) in self.f_names.iter().zip(&self.f) {
            let _ = writeln!(s, "{n} = \"{e}\"");
        }
        if let Some(g) = &self.g {
            s.push_str("[G]\n");
            for row in g {
                let cells: Vec<String> = row.iter().map(|&x| fmt_number(x)).collect();
                let _ = writeln!(s, "{}", cells.join(" "));
            }
        }
        s
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    None,
    Constants,
    States,
    Inputs,
    F,
    G,
}

fn strip_comment(line: &str) -> &str {
    let mut quoted = false;
    for (i, c) in line.char_indices() {
        match c {
            '"' => quoted = !quoted,
            '#' if !quoted => return &line[..i],
            _ => {}
        }
    }
    line
}

fn syntax(line: usize, message: impl Into<String>) -> ModelError {
    ModelError::Syntax { line, message: message.into() }
}

fn parse_real(tok: &str, constants: &HashMap<String, f64>, line: usize) -> Result<f64, ModelError> {
    let tok = tok.trim();
    let (neg, body) = match tok.strip_prefix('-') {
        Some(rest) => (true, rest.trim()),
        None => (false, tok),
    };
    let v = match constants.get(body) {
        Some(&c) => c,
        None => body.parse::<f64>().map_err(|_| syntax(line, format!("expected a real number, found `{tok}`")))?,
    };
    let v = if neg { -v } else { v };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(syntax(line, format!("`{tok}` is not finite")))
    }
}

fn split_assignment(body: &str, line: usize) -> Result<(String, String), ModelError> {
    let (k, v) = body.split_once('=').ok_or_else(|| syntax(line, "expected `name = value`"))?;
    let k = k.trim();
    if k.is_empty() || !k.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') || k.starts_with(|c: char| c.is_ascii_digit()) {
        return Err(syntax(line, format!("invalid name `{k}`")));
    }
    Ok((k.to_string(), v.trim().to_string()))
}

fn parse_model(text: &str) -> Result<ModelDef, ModelError> {
    let mut section = Section::None;
    let mut constants: HashMap<String, f64> = HashMap::new();
    let mut raw_states = Vec::new();
    let mut raw_inputs = Vec::new();
    let mut raw_f = Vec::new();
    let mut g_rows: Vec<(usize, String)> = Vec::new();
    let mut has_g = false;

    // Constants first, so every other section can refer to them.
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = strip_comment(raw).trim();
        if body.is_empty() {
            continue;
        }
        if let Some(name) = body.strip_prefix('[').and_then(|b| b.strip_suffix(']')).filter(|_| section_name(body)) {
            section = match name.trim() {
                "constants" => Section::Constants,
                "states" => Section::States,
                "inputs" => Section::Inputs,
                "f" => Section::F,
                "G" | "g" => {
                    has_g = true;
                    Section::G
                }
                other => return Err(syntax(line, format!("unknown section `[{other}]`"))),
            };
            continue;
        }
        match section {
            Section::None => return Err(syntax(line, "content before the first section header")),
            Section::Constants => {
                let (k, v) = split_assignment(body, line)?;
                let c = parse_real(&v, &constants, line)?;
                if constants.insert(k.clone(), c).is_some() {
                    return Err(ModelError::DuplicateName(k));
                }
            }
            Section::States => raw_states.push((line, body.to_string())),
            Section::Inputs => raw_inputs.push((line, body.to_string())),
            Section::F => raw_f.push((line, body.to_string())),
            Section::G => g_rows.push((line, body.to_string())),
        }
    }

    let decls = |raw: &[(usize, String)]| -> Result<Vec<VarDecl>, ModelError> {
        raw.iter()
            .map(|(line, body)| {
                let (k, v) = split_assignment(body, *line)?;
                if constants.contains_key(&k) {
                    return Err(ModelError::DuplicateName(k));
                }
                let inner = v
                    .strip_prefix('[')
                    .and_then(|x| x.strip_suffix(']'))
                    .ok_or_else(|| syntax(*line, "bounds must look like `[lo, hi]`"))?;
                let (lo, hi) = inner.split_once(',').ok_or_else(|| syntax(*line, "bounds need two values"))?;
                let lo = parse_real(lo, &constants, *line)?;
                let hi = parse_real(hi, &constants, *line)?;
                VarDecl::new(k, lo, hi)
            })
            .collect()
    };
    let states = decls(&raw_states)?;
    let inputs = decls(&raw_inputs)?;

    let mut f = Vec::new();
    for (line, body) in &raw_f {
        let (k, v) = split_assignment(body, *line)?;
        let src = v
            .strip_prefix('"')
            .and_then(|x| x.strip_suffix('"'))
            .unwrap_or(v.as_str());
        let e = parse_with_constants(src, &constants).map_err(|source| ModelError::Parse { line: *line, source })?;
        f.push((k, e));
    }

    let g = if has_g {
        let mut rows = Vec::new();
        for (line, body) in &g_rows {
            let body = body.trim_start_matches('[').trim_end_matches(']');
            let row = body
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|t| !t.is_empty())
                .map(|t| parse_real(t, &constants, *line))
                .collect::<Result<Vec<_>, _>>()?;
            rows.push(row);
        }
        Some(rows)
    } else {
        None
    };
    ModelDef::new(states, inputs, f, g)
}

fn section_name(body: &str) -> bool {
    body.len() > 2 && body[1..body.len() - 1].chars().all(|c| c.is_ascii_alphabetic())
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
# two-state toy
[constants]
k = 2.5
[states]
x1 = [-1, 1]
x2 = [0, k]   # bound from a constant
[inputs]
u = [-0.5, 0.5]
[f]
f1 = "k*x1*x2"
f2 = "-x2 + u"
[G]
1 0
0, 1
"#;

    #[test]
    fn parses_all_sections() {
        let m = ModelDef::parse_text(SAMPLE).unwrap();
        assert_eq!(m.n(), 2);
        assert_eq!(m.m(), 1);
        assert_eq!(m.g_len(), 2);
        assert_eq!(m.bounds_of("x2").unwrap(), Interval::new(0.0, 2.5).unwrap());
        assert_eq!(m.f()[0].to_string(), "2.5*x1*x2");
        assert_eq!(m.g_matrix().unwrap(), vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        assert_eq!(m.eval_f(&[1.0, 2.0, 0.25]).unwrap(), vec![5.0, -1.75]);
    }

    #[test]
    fn text_round_trip_is_stable() {
        let m = ModelDef::parse_text(SAMPLE).unwrap();
        let t = m.to_text();
        let m2 = ModelDef::parse_text(&t).unwrap();
        assert_eq!(m, m2);
        assert_eq!(t, m2.to_text());
    }

    #[test]
    fn errors() {
        let unbound = "[states]\nx = [0, 1]\n[f]\nf1 = \"x + y\"\n";
        assert!(matches!(ModelDef::parse_text(unbound), Err(ModelError::UnboundVariable { .. })));
        let bad_bounds = "[states]\nx = [1, 0]\n[f]\nf1 = \"x\"\n";
        assert!(matches!(ModelDef::parse_text(bad_bounds), Err(ModelError::InvalidBounds(_))));
        let bad_expr = "[states]\nx = [0, 1]\n[f]\nf1 = \"sin(x\"\n";
        assert!(matches!(ModelDef::parse_text(bad_expr), Err(ModelError::Parse { line: 4, .. })));
        let bad_g = "[states]\nx = [0, 1]\n[f]\nf1 = \"x\"\n[G]\n1 2\n";
        assert!(matches!(ModelDef::parse_text(bad_g), Err(ModelError::DimensionMismatch(_))));
        let dup = "[states]\nx = [0, 1]\nx = [0, 2]\n[f]\nf1 = \"x\"\n";
        assert!(matches!(ModelDef::parse_text(dup), Err(ModelError::DuplicateName(_))));
        assert!(matches!(ModelDef::parse_text("x = [0, 1]"), Err(ModelError::Syntax { line: 1, .. })));
        assert!(matches!(ModelDef::parse_text("[states]\nx = [0, 1]\n"), Err(ModelError::Empty)));
    }

    #[test]
    fn identity_g_needs_square_f() {
        let t = "[states]\nx = [0, 1]\ny = [0, 1]\n[f]\nf1 = \"x*y\"\n";
        let m = ModelDef::parse_text(t).unwrap();
        assert!(matches!(m.g_matrix(), Err(ModelError::DimensionMismatch(_))));
    }

    #[test]
    fn reduced_box_keeps_declaration_order() {
        let m = ModelDef::parse_text(SAMPLE).unwrap();
        let b = m.reduced_box(&m.f()[1]).unwrap();
        assert_eq!(b.labels(), &["x2".to_string(), "u".to_string()]);
        assert!(m.reduced_box(&Expr::Const(1.0)).is_none());
    }
}
