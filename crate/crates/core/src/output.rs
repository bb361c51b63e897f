//! Deterministic text output shared by the CLI and the exporters.

use serde::Serialize;

use crate::error::{Error, Result};

/// 17 significant digits in scientific notation; enough to round-trip any f64.
pub fn sci(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn ensure_finite(values: impl IntoIterator<Item = f64>, what: &str) -> Result<()> {
    if values.into_iter().all(f64::is_finite) {
        Ok(())
    } else {
        Err(Error::Numerical(format!(
            "{what} contains non-finite values"
        )))
    }
}

/// Pretty JSON with a trailing newline. Non-finite numbers, which serde_json
/// would silently turn into `null`, are rejected.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let v = serde_json::to_value(value)?;
    check_json(&v)?;
    let mut s = serde_json::to_string_pretty(&v)?;
    s.push('\n');
    Ok(s)
}

fn check_json(v: &serde_json::Value) -> Result<()> {
    match v {
        serde_json::Value::Null => Err(Error::Numerical("non-finite value in JSON output".into())),
        serde_json::Value::Array(items) => items.iter().try_for_each(check_json),
        serde_json::Value::Object(map) => map.values().try_for_each(check_json),
        _ => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sci_round_trips() {
        for x in [0.1, 1.0 / 3.0, 2.0f64.sqrt() * 1e-300, 6.02214076e23] {
            assert_eq!(sci(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn json_rejects_nan() {
        assert!(to_json(&vec![1.0, f64::NAN]).is_err());
        assert_eq!(to_json(&vec![0.5]).unwrap(), "[\n  0.5\n]\n");
    }
}
