//! Serialization of exact rationals as `{num, den, value}`.

use num_rational::Ratio;
use serde::ser::SerializeStruct;
use serde::Serializer;

pub fn serialize<S: Serializer>(r: &Ratio<u64>, ser: S) -> Result<S::Ok, S::Error> {
    let mut s = ser.serialize_struct("Ratio", 3)?;
    s.serialize_field("num", r.numer())?;
    s.serialize_field("den", r.denom())?;
    s.serialize_field("value", &(*r.numer() as f64 / *r.denom() as f64))?;
    s.end()
}

pub fn to_f64(r: &Ratio<u64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}
