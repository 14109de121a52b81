//! Arithmetic in unramified extensions Q_q of Q_p at finite precision.

mod field;
pub(crate) mod fp;
mod scalar;

pub use field::FieldSpec;
pub use scalar::{parse_rational, PadicScalar, Valuation};

use std::sync::Arc;

use serde_json::{json, Value};

use crate::error::{Error, Result};

/// `{"p": .., "f": .., "N": ..}`. A missing `"N"` falls back to `default_prec`.
pub fn field_spec_from_json(v: &Value, default_prec: u32) -> Result<Arc<FieldSpec>> {
    let p =
        v.get("p").and_then(Value::as_u64).ok_or_else(|| Error::Malformed("field spec needs integer \"p\"".into()))?;
    let f = v.get("f").and_then(Value::as_u64).unwrap_or(1) as usize;
    let n = match v.get("N") {
        Some(n) => n.as_u64().ok_or_else(|| Error::Malformed("\"N\" must be a positive integer".into()))? as u32,
        None => default_prec,
    };
    FieldSpec::new(p, f, n)
}

pub fn field_spec_to_json(spec: &FieldSpec) -> Value {
    json!({"p": spec.p(), "f": spec.degree(), "N": spec.precision()})
}
