//! Independent reference computations used by the test suites.

use std::collections::BTreeMap;

use isolab::bch::FreeLieElement;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;

pub type Q = BigRational;
pub type QMat = Vec<Vec<Q>>;

pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qm_zero(n: usize) -> QMat {
    vec![vec![Q::zero(); n]; n]
}

pub fn qm_identity(n: usize) -> QMat {
    let mut m = qm_zero(n);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = Q::one();
    }
    m
}

pub fn qm_add(a: &QMat, b: &QMat) -> QMat {
    a.iter().zip(b).map(|(r, s)| r.iter().zip(s).map(|(x, y)| x + y).collect()).collect()
}

pub fn qm_scale(a: &QMat, c: &Q) -> QMat {
    a.iter().map(|r| r.iter().map(|x| x * c).collect()).collect()
}

pub fn qm_mul(a: &QMat, b: &QMat) -> QMat {
    let n = a.len();
    let m = b[0].len();
    let mut out = vec![vec![Q::zero(); m]; n];
    for i in 0..n {
        for k in 0..b.len() {
            if a[i][k].is_zero() {
                continue;
            }
            for j in 0..m {
                out[i][j] += &a[i][k] * &b[k][j];
            }
        }
    }
    out
}

pub fn qm_commutator(a: &QMat, b: &QMat) -> QMat {
    qm_add(&qm_mul(a, b), &qm_scale(&qm_mul(b, a), &qi(-1)))
}

/// exp of a nilpotent matrix, summed until the powers vanish.
pub fn qm_exp(a: &QMat) -> QMat {
    let n = a.len();
    let mut out = qm_identity(n);
    let mut term = qm_identity(n);
    for k in 1..=n {
        term = qm_scale(&qm_mul(&term, a), &Q::new(BigInt::one(), BigInt::from(k)));
        out = qm_add(&out, &term);
    }
    out
}

/// log of a unipotent matrix.
pub fn qm_log(u: &QMat) -> QMat {
    let n = u.len();
    let x = qm_add(u, &qm_scale(&qm_identity(n), &qi(-1)));
    let mut out = qm_zero(n);
    let mut power = qm_identity(n);
    for k in 1..=n {
        power = qm_mul(&power, &x);
        let sign = if k % 2 == 1 { 1 } else { -1 };
        out = qm_add(&out, &qm_scale(&power, &Q::new(BigInt::from(sign), BigInt::from(k))));
    }
    out
}

/// Strictly upper-triangular matrix with integer entries in [-5, 5].
pub fn random_strict_upper<R: Rng>(n: usize, rng: &mut R) -> QMat {
    let mut m = qm_zero(n);
    for (i, row) in m.iter_mut().enumerate() {
        for x in &mut row[i + 1..] {
            *x = qi(rng.gen_range(-5..=5));
        }
    }
    m
}

/// Degree components Z_1..Z_c of log(exp A · exp B) for strictly
/// upper-triangular (c+1)×(c+1) matrices, separated by evaluating at sA, sB
/// for s = 1..c and inverting the Vandermonde system.
pub fn matrix_bch_components(a: &QMat, b: &QMat, c: usize) -> Vec<QMat> {
    let n = a.len();
    assert_eq!(n, c + 1, "nilpotency must cut the series after degree c");
    let values: Vec<QMat> = (1..=c)
        .map(|s| {
            let sq = qi(s as i64);
            qm_log(&qm_mul(&qm_exp(&qm_scale(a, &sq)), &qm_exp(&qm_scale(b, &sq))))
        })
        .collect();
    // V[s][k] = s^(k+1); solve V · Z = values entrywise
    let mut v: Vec<Vec<Q>> =
        (1..=c).map(|s| (1..=c).map(|k| Q::from_integer(BigInt::from(s).pow(k as u32))).collect()).collect();
    let mut rhs = values;
    for col in 0..c {
        let piv = (col..c).find(|&r| !v[r][col].is_zero()).unwrap();
        v.swap(col, piv);
        rhs.swap(col, piv);
        let inv = Q::one() / &v[col][col];
        v[col] = v[col].iter().map(|x| x * &inv).collect();
        rhs[col] = qm_scale(&rhs[col], &inv);
        for r in 0..c {
            if r != col && !v[r][col].is_zero() {
                let f = v[r][col].clone();
                v[r] = v[r].iter().zip(&v[col]).map(|(x, y)| x - &f * y).collect();
                rhs[r] = qm_add(&rhs[r], &qm_scale(&rhs[col], &-f));
            }
        }
    }
    rhs
}

/// The Lie element evaluated on matrices with the commutator bracket.
pub fn evaluate_on_matrices(z: &FreeLieElement, a: &QMat, b: &QMat) -> QMat {
    let n = a.len();
    z.evaluate(a, b, qm_commutator, |parts| parts.iter().fold(qm_zero(n), |acc, (c, m)| qm_add(&acc, &qm_scale(m, c))))
}

pub type WordPoly = BTreeMap<Vec<u8>, Q>;

fn wp_add(acc: &mut WordPoly, p: &WordPoly, c: &Q) {
    for (w, x) in p {
        *acc.entry(w.clone()).or_insert_with(Q::zero) += x * c;
    }
    acc.retain(|_, x| !x.is_zero());
}

fn wp_bracket(a: &WordPoly, b: &WordPoly) -> WordPoly {
    let mut out = WordPoly::new();
    for (u, x) in a {
        for (v, y) in b {
            let uv: Vec<u8> = u.iter().chain(v).copied().collect();
            let vu: Vec<u8> = v.iter().chain(u).copied().collect();
            *out.entry(uv).or_insert_with(Q::zero) += x * y;
            *out.entry(vu).or_insert_with(Q::zero) -= x * y;
        }
    }
    out.retain(|_, x| !x.is_zero());
    out
}

fn letter(g: u8) -> WordPoly {
    WordPoly::from([(vec![g], Q::one())])
}

fn is_lyndon_word(w: &[u8]) -> bool {
    (1..w.len()).all(|i| {
        let rot: Vec<u8> = w[i..].iter().chain(&w[..i]).copied().collect();
        w < &rot[..]
    })
}

/// Word expansion of a Lyndon-basis element, using its own standard
/// bracketing (split off the longest proper Lyndon suffix).
pub fn expand_lyndon_element(z: &FreeLieElement) -> WordPoly {
    fn expand(w: &[u8]) -> WordPoly {
        if w.len() == 1 {
            return letter(w[0]);
        }
        let i = (1..w.len()).find(|&i| is_lyndon_word(&w[i..])).unwrap();
        wp_bracket(&expand(&w[..i]), &expand(&w[i..]))
    }
    let mut out = WordPoly::new();
    for (w, c) in z.terms() {
        wp_add(&mut out, &expand(w), c);
    }
    out
}

fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

/// Dynkin's explicit formula for log(exp X · exp Y) up to degree c, as a
/// polynomial in words.
pub fn dynkin_words(c: usize) -> WordPoly {
    let mut out = WordPoly::new();
    for m in 1..=c {
        // all sequences (r_1, s_1, ..., r_m, s_m) with r_i + s_i > 0 and total ≤ c
        let mut stack: Vec<Vec<(usize, usize)>> = vec![vec![]];
        while let Some(seq) = stack.pop() {
            let total: usize = seq.iter().map(|&(r, s)| r + s).sum();
            if seq.len() == m {
                let letters: Vec<u8> = seq
                    .iter()
                    .flat_map(|&(r, s)| std::iter::repeat_n(0u8, r).chain(std::iter::repeat_n(1u8, s)))
                    .collect();
                // right-normed bracket [a_1, [a_2, ..., a_n]]
                let mut acc = letter(*letters.last().unwrap());
                for &g in letters.iter().rev().skip(1) {
                    acc = wp_bracket(&letter(g), &acc);
                }
                let denom = seq.iter().fold(BigInt::from(total * m), |d, &(r, s)| d * factorial(r) * factorial(s));
                let sign = if m % 2 == 1 { 1 } else { -1 };
                wp_add(&mut out, &acc, &Q::new(BigInt::from(sign), denom));
                continue;
            }
            for r in 0..=c - total {
                for s in 0..=c - total - r {
                    if r + s == 0 {
                        continue;
                    }
                    let mut next = seq.clone();
                    next.push((r, s));
                    stack.push(next);
                }
            }
        }
    }
    out
}
