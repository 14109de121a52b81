//! Newton polygons of polynomials over Q_q and Hensel splitting along a
//! polygon vertex. Polynomials are coefficient vectors, low degree first.

use std::sync::Arc;

use num_rational::Rational64;

use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::padic::{FieldSpec, PadicScalar, Valuation};

pub type Poly = Vec<PadicScalar>;

/// Root valuations of a monic polynomial with nonzero constant term, as
/// `(valuation, multiplicity)` in increasing order of valuation.
///
/// Coefficients known only as "zero to precision b" are accepted when b is
/// at least the height of the polygon at that index; otherwise the polygon
/// cannot be certified.
pub fn root_valuations(coeffs: &[PadicScalar]) -> Result<Vec<(Rational64, usize)>> {
    let n = coeffs.len() - 1;
    if n == 0 {
        return Ok(Vec::new());
    }
    let Valuation::Exact(_) = coeffs[0].valuation() else {
        return Err(Error::precision("constant coefficient is not certified nonzero"));
    };
    let mut pts: Vec<(i64, i64)> = Vec::new();
    for (i, c) in coeffs.iter().enumerate() {
        if let Valuation::Exact(v) = c.valuation() {
            pts.push((i as i64, v));
        }
    }
    if pts.last().map(|p| p.0) != Some(n as i64) {
        return Err(Error::precision("leading coefficient is not certified"));
    }
    let hull = lower_hull(&pts);
    for (i, c) in coeffs.iter().enumerate() {
        if let Valuation::AtLeast(b) = c.valuation() {
            let h = hull_height(&hull, i as i64);
            if Rational64::from_integer(b) < h {
                return Err(Error::precision(format!(
                    "coefficient {i} is zero only to p^{b}, below the polygon height {h}"
                )));
            }
        }
    }
    let mut out: Vec<(Rational64, usize)> = hull
        .windows(2)
        .map(|w| {
            let (i1, v1) = w[0];
            let (i2, v2) = w[1];
            (-Rational64::new(v2 - v1, i2 - i1), (i2 - i1) as usize)
        })
        .collect();
    out.sort();
    Ok(out)
}

fn cross(o: (i64, i64), a: (i64, i64), b: (i64, i64)) -> i128 {
    (a.0 - o.0) as i128 * (b.1 - o.1) as i128 - (a.1 - o.1) as i128 * (b.0 - o.0) as i128
}

fn lower_hull(pts: &[(i64, i64)]) -> Vec<(i64, i64)> {
    let mut hull: Vec<(i64, i64)> = Vec::new();
    for &p in pts {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0 {
            hull.pop();
        }
        hull.push(p);
    }
    hull
}

fn hull_height(hull: &[(i64, i64)], x: i64) -> Rational64 {
    for w in hull.windows(2) {
        let (i1, v1) = w[0];
        let (i2, v2) = w[1];
        if i1 <= x && x <= i2 {
            return Rational64::from_integer(v1) + Rational64::new((v2 - v1) * (x - i1), i2 - i1);
        }
    }
    Rational64::from_integer(hull[0].1)
}

pub fn poly_mul(a: &[PadicScalar], b: &[PadicScalar]) -> Poly {
    let spec = a[0].spec();
    let mut out = vec![PadicScalar::zero(spec); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] = out[i + j].add(&x.mul(y));
        }
    }
    out
}

pub fn poly_sub(a: &[PadicScalar], b: &[PadicScalar]) -> Poly {
    let spec = a.first().or(b.first()).expect("nonempty").spec().clone();
    let n = a.len().max(b.len());
    (0..n)
        .map(|i| {
            let x = a.get(i).cloned().unwrap_or_else(|| PadicScalar::zero(&spec));
            let y = b.get(i).cloned().unwrap_or_else(|| PadicScalar::zero(&spec));
            x.sub(&y)
        })
        .collect()
}

/// Horner evaluation of a polynomial at a square matrix.
pub fn eval_at_matrix(poly: &[PadicScalar], m: &Mat) -> Mat {
    let spec = m.spec().clone();
    let n = m.rows();
    let mut acc = Mat::zeros(&spec, n, n);
    for c in poly.iter().rev() {
        acc = acc.mul(m).add(&Mat::identity(&spec, n).scale(c));
    }
    acc
}

/// Splits a polynomial `q` that is congruent to `gamma * T^k` mod p (with
/// `gamma` a unit, all coefficients integral) as `q = A * B`, where `A` is
/// monic of degree k with `A = T^k` mod p and `B = gamma` mod p. The roots of
/// `A` are those of positive valuation.
pub fn hensel_split_at(q: &[PadicScalar], k: usize, spec: &Arc<FieldSpec>) -> Result<(Poly, Poly)> {
    let gamma = q[k].clone();
    if gamma.valuation() != Valuation::Exact(0) {
        return Err(Error::InvariantViolated("Hensel split needs a unit at the vertex".into()));
    }
    let gamma_inv = gamma.inv()?;
    let zero = PadicScalar::zero(spec);
    let mut a: Poly = vec![zero.clone(); k + 1];
    a[k] = PadicScalar::one(spec);
    let mut b: Poly = q[k..].to_vec();
    let limit = 4 * spec.precision() as usize + 16;
    for _ in 0..limit {
        let e = poly_sub(q, &poly_mul(&a, &b));
        if e.iter().all(PadicScalar::is_zero) {
            return Ok((a, b));
        }
        for i in 0..k {
            a[i] = a[i].add(&e[i].mul(&gamma_inv));
        }
        for (j, bj) in b.iter_mut().enumerate() {
            if let Some(x) = e.get(k + j) {
                *bj = bj.add(x);
            }
        }
    }
    Err(Error::precision("Hensel lifting did not converge"))
}
