//! Where a model comes from: a model text file or a built-in family.

use std::fs;

use ndscert::models::{build_moving_object, build_traffic, MovingObjectConfig, TrafficConfig};
use ndscert::ModelDef;
use sha2::{Digest, Sha256};

use crate::CliError;

/// Built-in families accepted by `--model builtin:SPEC` and `model-export`.
pub const BUILTINS: &str = "traffic:S (S sections), moving_object or moving_object:R (box [-R, R]^2)";

/// Builds a built-in model from `traffic:5`, `moving_object` or
/// `moving_object:2.5`.
pub fn builtin(spec: &str) -> Result<ModelDef, CliError> {
    let (name, arg) = match spec.split_once(':') {
        Some((n, a)) => (n, Some(a)),
        None => (spec, None),
    };
    let bad_arg = |a: &str| CliError::Usage(format!("bad argument `{a}` for built-in model `{name}`"));
    match (name, arg) {
        ("traffic", Some(a)) => {
            let sections = a.parse().map_err(|_| bad_arg(a))?;
            Ok(build_traffic(&TrafficConfig::with_sections(sections))?.0)
        }
        ("moving_object", None) => Ok(build_moving_object(&MovingObjectConfig::default())?),
        ("moving_object", Some(a)) => {
            let r = a.parse().map_err(|_| bad_arg(a))?;
            Ok(build_moving_object(&MovingObjectConfig { r })?)
        }
        _ => Err(CliError::Usage(format!("unknown built-in model `{spec}`; known: {BUILTINS}"))),
    }
}

/// Loads `--model`: `builtin:SPEC` or a path to a model text file.
pub fn load(source: &str) -> Result<ModelDef, CliError> {
    if let Some(spec) = source.strip_prefix("builtin:") {
        return builtin(spec);
    }
    let text = fs::read_to_string(source).map_err(|e| CliError::Model(format!("cannot read `{source}`: {e}")))?;
    ModelDef::parse_text(&text).map_err(|e| CliError::Model(format!("{source}: {e}")))
}

/// SHA-256 of the canonical text form, so equivalent files written with
/// different comments or spacing share a fingerprint.
pub fn fingerprint(model: &ModelDef) -> String {
    Sha256::digest(model.to_text().as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_parse() {
        assert_eq!(builtin("traffic:5").unwrap().n(), 31);
        assert_eq!(builtin("moving_object").unwrap().n(), 2);
        let m = builtin("moving_object:2").unwrap();
        assert_eq!(m.states()[0].bounds.hi(), 2.0);
        assert!(matches!(builtin("traffic"), Err(CliError::Usage(_))));
        assert!(matches!(builtin("traffic:x"), Err(CliError::Usage(_))));
        assert!(matches!(builtin("traffic:0"), Err(CliError::Model(_))));
        assert!(matches!(builtin("moving_object:-1"), Err(CliError::Model(_))));
    }

    #[test]
    fn fingerprint_ignores_formatting() {
        let m = builtin("moving_object").unwrap();
        let text = format!("# a comment\n\n{}", m.to_text());
        let again = ModelDef::parse_text(&text).unwrap();
        assert_eq!(fingerprint(&m), fingerprint(&again));
        assert_eq!(fingerprint(&m).len(), 64);
        assert_ne!(fingerprint(&m), fingerprint(&builtin("moving_object:4").unwrap()));
    }
}
