//! Fixed 17-significant-digit float formatting for result files.

use serde::Serializer;
use serde_json::value::RawValue;

/// `{:.16e}`, which round-trips every finite `f64`.
pub fn sci(v: f64) -> String {
    format!("{v:.16e}")
}

fn raw<S: Serializer>(v: f64, s: S) -> Result<S::Ok, S::Error> {
    if !v.is_finite() {
        return s.serialize_none();
    }
    let raw = RawValue::from_string(sci(v)).map_err(serde::ser::Error::custom)?;
    serde::Serialize::serialize(&raw, s)
}

/// Serializes an `f64` as a JSON number with 17 significant digits; non-finite values become `null`.
pub fn json_f64<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    raw(*v, s)
}

pub fn json_opt_f64<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some(v) => raw(*v, s),
        None => s.serialize_none(),
    }
}
