//! Serde helpers rendering exact values as strings: integers in decimal,
//! rationals as `"num/den"`.

use num_bigint::BigUint;
use num_rational::BigRational;
use serde::Serializer;

use crate::exact::ratio_string;

pub fn count<S: Serializer>(value: &BigUint, ser: S) -> Result<S::Ok, S::Error> {
    ser.serialize_str(&value.to_string())
}

pub fn ratio<S: Serializer>(value: &BigRational, ser: S) -> Result<S::Ok, S::Error> {
    ser.serialize_str(&ratio_string(value))
}

pub fn opt_count<S: Serializer>(value: &Option<BigUint>, ser: S) -> Result<S::Ok, S::Error> {
    match value {
        Some(v) => ser.serialize_some(&v.to_string()),
        None => ser.serialize_none(),
    }
}

pub fn u64_str<S: Serializer>(value: &u64, ser: S) -> Result<S::Ok, S::Error> {
    ser.serialize_str(&value.to_string())
}
