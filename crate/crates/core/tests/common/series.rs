//! Perfected-series fixtures.

use std::sync::Arc;

use isolab::perfected::{FiniteField, PerfectedSeries};
use num_rational::Rational64;
use rand::Rng;

/// Σ_{i=1..16} X^{i + 1/2^i} over F_2 at degree bound `bound`.
pub fn bad_series(bound: i64) -> PerfectedSeries {
    let field = FiniteField::new(2, 1).unwrap();
    let terms = (1..=16).map(|i| (vec![Rational64::new((i << i) + 1, 1 << i)], field.one()));
    PerfectedSeries::new(&field, 1, Rational64::from_integer(bound), terms).unwrap()
}

pub fn xpow(field: &Arc<FiniteField>, bound: i64, num: i64, den: i64) -> PerfectedSeries {
    PerfectedSeries::variable_power(field, 1, Rational64::from_integer(bound), 0, Rational64::new(num, den)).unwrap()
}

/// Random series with exponents num/p^e, e ≤ max_pexp, all within `bound`.
pub fn random_series<R: Rng>(
    field: &Arc<FiniteField>,
    nvars: usize,
    bound: i64,
    max_pexp: u32,
    terms: usize,
    rng: &mut R,
) -> PerfectedSeries {
    let p = field.p() as i64;
    let mut out = Vec::with_capacity(terms);
    for _ in 0..terms {
        let exp: Vec<Rational64> = (0..nvars)
            .map(|_| {
                let den = p.pow(rng.gen_range(0..=max_pexp));
                Rational64::new(rng.gen_range(0..=bound * den), den)
            })
            .collect();
        let coeff = (0..field.k()).map(|_| rng.gen_range(0..field.p())).collect();
        out.push((exp, coeff));
    }
    PerfectedSeries::new(field, nvars, Rational64::from_integer(bound), out).unwrap()
}
