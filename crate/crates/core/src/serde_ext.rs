//! JSON helpers for values JSON cannot represent natively.

use serde::Serializer;

/// Writes finite floats as numbers and non-finite ones as `"inf"`, `"-inf"`
/// or `"nan"`.
pub fn extended_f64<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else if v.is_nan() {
        s.serialize_str("nan")
    } else if *v > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_str("-inf")
    }
}

pub fn extended_opt_f64<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some(x) => extended_f64(x, s),
        None => s.serialize_none(),
    }
}
