//! Solution spaces of Q_p-linear conditions on unknowns in Q_q.
//!
//! Conditions involving σ are only Q_p-linear, so every unknown is expanded
//! over the basis 1, t, ..., t^{f-1} with Q_p coefficients.

use std::sync::Arc;

use crate::error::Result;
use crate::linalg::{Mat, Vector};
use crate::padic::{FieldSpec, PadicScalar};

/// Basis over Q_p of `{x in Q_q^m : cond(x) = 0}` for a Q_p-linear `cond`.
pub fn solve_qp_linear(
    spec: &Arc<FieldSpec>,
    m: usize,
    cond: impl Fn(&[PadicScalar]) -> Vec<PadicScalar>,
) -> Result<Vec<Vector>> {
    let f = spec.degree();
    let base = spec.prime_subfield();
    let t = PadicScalar::generator(spec);
    let mut columns: Vec<Vector> = Vec::with_capacity(m * f);
    for u in 0..m {
        let mut tb = PadicScalar::one(spec);
        for _ in 0..f {
            let mut x = vec![PadicScalar::zero(spec); m];
            x[u] = tb.clone();
            let out = cond(&x);
            columns.push(out.iter().flat_map(|y| y.coordinates(&base)).collect());
            tb = tb.mul(&t);
        }
    }
    let rows = columns.first().map_or(0, Vec::len);
    if rows == 0 {
        // no conditions: the whole space
        return Ok((0..m * f).map(|idx| unit_vector(spec, m, idx / f, idx % f)).collect());
    }
    let system = Mat::from_cols(&base, rows, &columns);
    let kernel = system.kernel();
    Ok((0..kernel.cols())
        .map(|c| {
            let k = kernel.col(c);
            (0..m).map(|u| PadicScalar::from_coordinates(spec, &k[u * f..(u + 1) * f])).collect()
        })
        .collect())
}

fn unit_vector(spec: &Arc<FieldSpec>, m: usize, u: usize, b: usize) -> Vector {
    let mut x = vec![PadicScalar::zero(spec); m];
    x[u] = PadicScalar::generator(spec).pow(b as u32);
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigma_fixed_elements_of_qq() {
        // x - sigma(x) = 0 cuts Q_p out of Q_q
        let spec = FieldSpec::new(3, 2, 10).unwrap();
        let sol = solve_qp_linear(&spec, 1, |x| vec![x[0].sub(&x[0].sigma())]).unwrap();
        assert_eq!(sol.len(), 1);
        assert!(sol[0][0].is_sigma_fixed());
    }
}
