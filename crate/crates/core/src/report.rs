//! Stable serialization: JSON with floats rounded to 12 significant digits
//! and CSV tables.

use serde::{Serialize, Serializer};
use serde_json::Value;

use crate::error::{Error, Result};

/// Rounds to 12 significant digits.
pub fn sig12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

/// A float that may be infinite; infinities serialize as "inf"/"-inf".
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Real(pub f64);

impl Serialize for Real {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let v = self.0;
        if v.is_finite() {
            s.serialize_f64(sig12(v))
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }
}

fn round_numbers(v: &mut Value) {
    match v {
        Value::Number(n) => {
            if n.is_f64() {
                if let Some(r) = n.as_f64().and_then(|x| serde_json::Number::from_f64(sig12(x))) {
                    *n = r;
                }
            }
        }
        Value::Array(a) => a.iter_mut().for_each(round_numbers),
        Value::Object(o) => o.values_mut().for_each(round_numbers),
        _ => {}
    }
}

/// Pretty JSON with sorted keys and rounded floats.
pub fn stable_json<T: Serialize>(value: &T) -> Result<String> {
    let mut v = serde_json::to_value(value).map_err(|e| Error::Numerical(e.to_string()))?;
    round_numbers(&mut v);
    let mut s = serde_json::to_string_pretty(&v).map_err(|e| Error::Numerical(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// Writes rows of already formatted fields as CSV.
pub fn csv_string(header: &[&str], rows: &[Vec<String>]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(|e| Error::Numerical(e.to_string()))?;
    for r in rows {
        w.write_record(r).map_err(|e| Error::Numerical(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Numerical(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Numerical(e.to_string()))
}

/// Float formatted for CSV with 12 significant digits.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{}", sig12(x))
    } else if x > 0.0 {
        "inf".into()
    } else if x < 0.0 {
        "-inf".into()
    } else {
        "nan".into()
    }
}

/// serde helper for f64 fields that may be infinite.
pub fn real<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    Real(*x).serialize(s)
}

/// serde helper for optional f64 fields that may be infinite.
pub fn opt_real<S: Serializer>(x: &Option<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    x.map(Real).serialize(s)
}
