//! The JSON report schema and its CSV/text table rendering.
//!
//! Schema version 1. A run prints a JSON array of [`RunReport`] objects
//! (one per model; `traffic-table` produces several):
//!
//! ```text
//! {
//!   "schema": 1,
//!   "command": ["lipschitz", "--case", "2", ...],   argv without the program
//!   "config": {"eps_h": 1e-4, "eps_om": 1e-7, "segments": 10},
//!   "model": {"source": "...", "fingerprint": "<sha256 hex>", "states": 31, "inputs": 0} | null,
//!   "n": 31,                                         dimension of the problem
//!   "results": [{
//!     "name": "gamma_l2",
//!     "sense": "max" | "min",
//!     "value": 0.4579,           certified bound
//!     "lower": 0.4578,           certified attained end of the enclosure
//!     "gap": 9.85e-5,            |value - lower| in the squared or raw objective
//!     "eps_optimal": true,
//!     "subproblems": 5,          branch-and-bound runs behind the constant
//!     "evals": 123456,           interval plus point evaluations
//!     "wall_time_ms": 12.5 | null,
//!     "detail": {"gamma_m": 25000.0, ...}
//!   }]
//! }
//! ```
//!
//! For `sense = "max"` the true extremum lies in `[lower, value]`; for
//! `"min"` it lies in `[value, lower]`. No number is ever NaN or infinite:
//! [`RunReport::validate`] rejects such reports before anything is printed.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Max,
    Min,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub eps_h: f64,
    pub eps_om: f64,
    pub segments: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelInfo {
    /// `--model` argument as given.
    pub source: String,
    /// SHA-256 of the canonical model text, lowercase hex.
    pub fingerprint: String,
    pub states: usize,
    pub inputs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantResult {
    pub name: String,
    pub sense: Sense,
    pub value: f64,
    pub lower: f64,
    pub gap: f64,
    pub eps_optimal: bool,
    pub subproblems: usize,
    pub evals: u64,
    pub wall_time_ms: Option<f64>,
    #[serde(default)]
    pub detail: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema: u32,
    pub command: Vec<String>,
    pub config: ConfigEcho,
    pub model: Option<ModelInfo>,
    pub n: usize,
    pub results: Vec<ConstantResult>,
}

impl RunReport {
    /// Name of the first non-finite number, if any.
    pub fn validate(&self) -> Result<(), String> {
        let cfg = [("config.eps_h", self.config.eps_h), ("config.eps_om", self.config.eps_om)];
        for (name, v) in cfg {
            if !v.is_finite() {
                return Err(format!("{name} is {v}"));
            }
        }
        for r in &self.results {
            let fixed = [("value", r.value), ("lower", r.lower), ("gap", r.gap)];
            let timing = r.wall_time_ms.map(|t| ("wall_time_ms", t));
            for (field, v) in fixed.into_iter().chain(timing) {
                if !v.is_finite() {
                    return Err(format!("{}.{field} is {v}", r.name));
                }
            }
            if let Some((k, v)) = r.detail.iter().find(|(_, v)| !v.is_finite()) {
                return Err(format!("{}.detail.{k} is {v}", r.name));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

pub const COLUMNS: [&str; 7] = ["n", "value", "lower", "gap", "eps_optimal", "wall_time_ms", "constant"];

/// `9.85e-05` style: two mantissa decimals, signed two-digit exponent.
pub fn sci(v: f64) -> String {
    let s = format!("{v:.2e}");
    let (mant, exp) = s.split_once('e').expect("`e` formatting has an exponent");
    let exp: i32 = exp.parse().expect("exponent is an integer");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mant}e{sign}{:02}", exp.abs())
}

/// Four decimals; values that round to zero print without a sign.
pub fn fixed4(v: f64) -> String {
    let s = format!("{v:.4}");
    if s == "-0.0000" { s[1..].to_string() } else { s }
}

fn cells(rep: &RunReport, r: &ConstantResult) -> [String; 7] {
    [
        rep.n.to_string(),
        fixed4(r.value),
        fixed4(r.lower),
        sci(r.gap),
        r.eps_optimal.to_string(),
        r.wall_time_ms.map_or_else(|| "-".to_string(), |t| format!("{t:.1}")),
        r.name.clone(),
    ]
}

/// Renders reports: JSON is the array of reports, CSV and text have one line
/// per constant under a fixed header. An empty input gives the header only
/// (`[]` for JSON).
pub fn emit_table(reports: &[RunReport], format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(reports).expect("reports serialize");
            s.push('\n');
            s
        }
        Format::Csv => {
            let mut s = COLUMNS.join(",");
            s.push('\n');
            for rep in reports {
                for r in &rep.results {
                    s.push_str(&cells(rep, r).join(","));
                    s.push('\n');
                }
            }
            s
        }
        Format::Text => {
            let rows: Vec<[String; 7]> =
                reports.iter().flat_map(|rep| rep.results.iter().map(move |r| cells(rep, r))).collect();
            let mut width = COLUMNS.map(str::len);
            for row in &rows {
                for (w, c) in width.iter_mut().zip(row) {
                    *w = (*w).max(c.len());
                }
            }
            let mut s = String::new();
            let header = COLUMNS.map(String::from);
            for row in std::iter::once(&header).chain(&rows) {
                let line: Vec<String> = row.iter().zip(width).map(|(c, w)| format!("{c:>w$}")).collect();
                let _ = writeln!(s, "{}", line.join("  ").trim_end());
            }
            s
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report() -> RunReport {
        RunReport {
            schema: SCHEMA_VERSION,
            command: vec!["lipschitz".into()],
            config: ConfigEcho { eps_h: 1e-4, eps_om: 1e-7, segments: 10 },
            model: None,
            n: 31,
            results: vec![ConstantResult {
                name: "gamma_l1".into(),
                sense: Sense::Max,
                value: 0.45791,
                lower: 0.45780,
                gap: 9.85e-5,
                eps_optimal: true,
                subproblems: 1,
                evals: 10,
                wall_time_ms: None,
                detail: BTreeMap::new(),
            }],
        }
    }

    #[test]
    fn scientific_gap() {
        assert_eq!(sci(9.85e-5), "9.85e-05");
        assert_eq!(sci(0.0), "0.00e+00");
        assert_eq!(sci(1234.0), "1.23e+03");
    }

    #[test]
    fn fixed_decimals() {
        assert_eq!(fixed4(-0.0), "0.0000");
        assert_eq!(fixed4(-3e-6), "0.0000");
        assert_eq!(fixed4(-150.0), "-150.0000");
        assert_eq!(fixed4(0.45786), "0.4579");
    }

    #[test]
    fn csv_row_layout() {
        let out = emit_table(&[report()], Format::Csv);
        let lines: Vec<&str> = out.lines().collect();
        assert_eq!(lines[0], "n,value,lower,gap,eps_optimal,wall_time_ms,constant");
        assert_eq!(lines[1], "31,0.4579,0.4578,9.85e-05,true,-,gamma_l1");
    }

    #[test]
    fn empty_input_is_header_only() {
        assert_eq!(emit_table(&[], Format::Csv), format!("{}\n", COLUMNS.join(",")));
        assert_eq!(emit_table(&[], Format::Text).lines().count(), 1);
        assert_eq!(emit_table(&[], Format::Json).trim(), "[]");
    }

    #[test]
    fn json_round_trips() {
        let mut r = report();
        r.results[0].detail.insert("gamma_m".into(), 0.1 + 0.2);
        r.results[0].wall_time_ms = Some(1.0 / 3.0);
        let back: Vec<RunReport> = serde_json::from_str(&emit_table(&[r.clone()], Format::Json)).unwrap();
        assert_eq!(back, vec![r]);
    }

    #[test]
    fn non_finite_numbers_are_rejected() {
        let mut r = report();
        assert!(r.validate().is_ok());
        r.results[0].gap = f64::NAN;
        assert!(r.validate().unwrap_err().contains("gap"));
        let mut r = report();
        r.results[0].detail.insert("x".into(), f64::INFINITY);
        assert!(r.validate().is_err());
    }
}
