//! Lossless JSON encodings of the exact types.

use fusion_lab::scalar::fmt_rational;
use fusion_lab::{IntMatrix, Scalar};
use num_bigint::BigInt;
use num_rational::BigRational;
use serde_json::{json, Value};

pub fn rational(r: &BigRational) -> Value {
    Value::String(fmt_rational(r))
}

pub fn int(n: &BigInt) -> Value {
    Value::String(n.to_string())
}

pub fn scalar(s: &Scalar) -> Value {
    json!({ "rat": fmt_rational(s.rational_part()), "phi": fmt_rational(s.phi_part()) })
}

pub fn scalars(xs: &[Scalar]) -> Value {
    Value::Array(xs.iter().map(scalar).collect())
}

pub fn rationals(xs: &[BigRational]) -> Value {
    Value::Array(xs.iter().map(rational).collect())
}

pub fn matrix(m: &IntMatrix) -> Value {
    Value::Array(
        (0..m.rows())
            .map(|i| Value::Array(m.row(i).iter().map(int).collect()))
            .collect(),
    )
}

pub fn bools(rows: &[Vec<bool>]) -> Value {
    json!(rows)
}
