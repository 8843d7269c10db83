//! Serialization helpers shared by the report types.

use num_bigint::BigUint;
use serde::Serializer;

/// Big integers go out as decimal strings; JSON numbers would lose digits.
pub fn ser_big<S: Serializer>(x: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&x.to_string())
}

pub fn ser_opt_big<S: Serializer>(x: &Option<BigUint>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match x {
        Some(v) => s.serialize_str(&v.to_string()),
        None => s.serialize_none(),
    }
}
