#![allow(dead_code)]

pub mod fixtures;
pub mod oracles;
pub mod series;

use std::sync::Arc;

use isolab::{FieldSpec, Mat, PadicScalar};
use num_rational::Rational64;

pub fn field(p: u64, f: usize, n: u32) -> Arc<FieldSpec> {
    FieldSpec::new(p, f, n).unwrap()
}

pub fn q(spec: &Arc<FieldSpec>, a: i64, b: i64) -> PadicScalar {
    PadicScalar::from_ratio(spec, a, b)
}

pub fn r(a: i64, b: i64) -> Rational64 {
    Rational64::new(a, b)
}

/// Matrix from rational entries given as (num, den).
pub fn mat(spec: &Arc<FieldSpec>, rows: &[&[(i64, i64)]]) -> Mat {
    Mat::from_i64_ratios(spec, rows)
}

/// Matrix from integer entries.
pub fn imat(spec: &Arc<FieldSpec>, rows: &[&[i64]]) -> Mat {
    Mat::from_fn(spec, rows.len(), rows[0].len(), |i, j| PadicScalar::from_int(spec, rows[i][j]))
}
