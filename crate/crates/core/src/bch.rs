//! The Baker-Campbell-Hausdorff series in the Lyndon basis of the free Lie
//! algebra on X < Y, and the group law it induces on nilpotent
//! Dieudonné-Lie algebras.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use serde_json::{json, Value};

use crate::dieudonne::DieudonneLieAlgebra;
use crate::error::{Error, Result};
use crate::isocrystal::SlopePredicate;
use crate::lattice::Lattice;
use crate::linalg::{vec_add, vec_scale, vec_sub, vec_to_json, Mat, Vector};
use crate::padic::PadicScalar;

/// Largest supported truncation degree.
pub const MAX_DEGREE: usize = 8;

/// A word in the generators, 0 = X and 1 = Y.
pub type Word = Vec<u8>;

pub fn word_to_string(w: &[u8]) -> String {
    w.iter().map(|&c| if c == 0 { 'X' } else { 'Y' }).collect()
}

pub fn parse_word(s: &str) -> Result<Word> {
    s.chars()
        .map(|c| match c {
            'X' => Ok(0),
            'Y' => Ok(1),
            _ => Err(Error::Malformed(format!("word {s:?} must use only X and Y"))),
        })
        .collect()
}

/// Strictly smaller than each of its proper rotations.
pub fn is_lyndon(w: &[u8]) -> bool {
    if w.is_empty() {
        return false;
    }
    (1..w.len()).all(|i| {
        let rot: Vec<u8> = w[i..].iter().chain(&w[..i]).copied().collect();
        w < rot.as_slice()
    })
}

/// All Lyndon words of length 1..=max_len, ordered by length, then
/// lexicographically.
pub fn lyndon_words(max_len: usize) -> Vec<Word> {
    // Duval's generation in lexicographic order
    let mut out = Vec::new();
    if max_len == 0 {
        return out;
    }
    let mut w: Vec<u8> = vec![0];
    loop {
        out.push(w.clone());
        let m = w.len();
        while w.len() < max_len {
            let c = w[w.len() - m];
            w.push(c);
        }
        while w.last() == Some(&1) {
            w.pop();
        }
        match w.last_mut() {
            None => break,
            Some(c) => *c += 1,
        }
    }
    out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    out
}

/// w = uv with v the longest proper Lyndon suffix; `None` for letters.
pub fn standard_factorization(w: &[u8]) -> Option<(Word, Word)> {
    if w.len() < 2 {
        return None;
    }
    (1..w.len()).find(|&i| is_lyndon(&w[i..])).map(|i| (w[..i].to_vec(), w[i..].to_vec()))
}

/// The standard bracketing of a Lyndon word, e.g. "[X,[X,Y]]".
pub fn bracketing(w: &[u8]) -> String {
    match standard_factorization(w) {
        None => word_to_string(w),
        Some((u, v)) => format!("[{},{}]", bracketing(&u), bracketing(&v)),
    }
}

/// Evaluates the standard bracketing of a Lyndon word at X = x, Y = y.
pub fn eval_lyndon<T: Clone>(w: &[u8], x: &T, y: &T, bracket: &impl Fn(&T, &T) -> T, memo: &mut HashMap<Word, T>) -> T {
    if let Some(v) = memo.get(w) {
        return v.clone();
    }
    let out = match standard_factorization(w) {
        None => {
            if w[0] == 0 {
                x.clone()
            } else {
                y.clone()
            }
        }
        Some((u, v)) => {
            let a = eval_lyndon(&u, x, y, bracket, memo);
            let b = eval_lyndon(&v, x, y, bracket, memo);
            bracket(&a, &b)
        }
    };
    memo.insert(w.to_vec(), out.clone());
    out
}

/// A Lie polynomial in X, Y written in the Lyndon basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FreeLieElement {
    /// Sorted by degree, then word; no zero coefficients.
    terms: Vec<(Word, BigRational)>,
}

impl FreeLieElement {
    pub fn terms(&self) -> &[(Word, BigRational)] {
        &self.terms
    }

    pub fn coefficient(&self, w: &[u8]) -> BigRational {
        self.terms.iter().find(|(u, _)| u.as_slice() == w).map_or_else(BigRational::zero, |t| t.1.clone())
    }

    pub fn degree(&self) -> usize {
        self.terms.iter().map(|t| t.0.len()).max().unwrap_or(0)
    }

    pub fn truncated(&self, c: usize) -> FreeLieElement {
        FreeLieElement { terms: self.terms.iter().filter(|t| t.0.len() <= c).cloned().collect() }
    }

    pub fn degree_part(&self, k: usize) -> FreeLieElement {
        FreeLieElement { terms: self.terms.iter().filter(|t| t.0.len() == k).cloned().collect() }
    }

    /// Evaluates at X = x, Y = y given a bracket and a way to form rational
    /// linear combinations.
    pub fn evaluate<T: Clone>(
        &self,
        x: &T,
        y: &T,
        bracket: impl Fn(&T, &T) -> T,
        combine: impl Fn(&[(BigRational, T)]) -> T,
    ) -> T {
        let mut memo = HashMap::new();
        let parts: Vec<(BigRational, T)> =
            self.terms.iter().map(|(w, c)| (c.clone(), eval_lyndon(w, x, y, &bracket, &mut memo))).collect();
        combine(&parts)
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            self.terms.iter().map(|(w, c)| json!({"word": word_to_string(w), "coeff": c.to_string()})).collect(),
        )
    }

    pub fn from_json(v: &Value) -> Result<FreeLieElement> {
        let arr = v.as_array().ok_or_else(|| Error::Malformed("Lie element must be an array".into()))?;
        let mut terms = Vec::new();
        for t in arr {
            let w = parse_word(
                t.get("word").and_then(Value::as_str).ok_or_else(|| Error::Malformed("term needs \"word\"".into()))?,
            )?;
            if !is_lyndon(&w) {
                return Err(Error::Malformed(format!("{} is not a Lyndon word", word_to_string(&w))));
            }
            let c = crate::padic::parse_rational(
                t.get("coeff")
                    .and_then(Value::as_str)
                    .ok_or_else(|| Error::Malformed("term needs string \"coeff\"".into()))?,
            )?;
            if !c.is_zero() {
                terms.push((w, c));
            }
        }
        terms.sort_by(|a, b| a.0.len().cmp(&b.0.len()).then_with(|| a.0.cmp(&b.0)));
        Ok(FreeLieElement { terms })
    }
}

type AssocPoly = BTreeMap<Word, BigRational>;

fn assoc_add_scaled(acc: &mut AssocPoly, p: &AssocPoly, c: &BigRational) {
    for (w, x) in p {
        let e = acc.entry(w.clone()).or_insert_with(BigRational::zero);
        *e += x * c;
        if e.is_zero() {
            acc.remove(w);
        }
    }
}

fn assoc_mul(a: &AssocPoly, b: &AssocPoly, max_deg: usize) -> AssocPoly {
    let mut out = AssocPoly::new();
    for (u, x) in a {
        for (v, y) in b {
            if u.len() + v.len() > max_deg {
                continue;
            }
            let w: Word = u.iter().chain(v).copied().collect();
            let e = out.entry(w).or_insert_with(BigRational::zero);
            *e += x * y;
        }
    }
    out.retain(|_, c| !c.is_zero());
    out
}

fn exp_letter(g: u8, max_deg: usize) -> AssocPoly {
    let mut out = AssocPoly::new();
    let mut fact = BigInt::one();
    for k in 0..=max_deg {
        if k > 0 {
            fact *= BigInt::from(k);
        }
        out.insert(vec![g; k], BigRational::new(BigInt::one(), fact.clone()));
    }
    out
}

/// Expansion of the standard bracketing of a Lyndon word into words.
fn lyndon_expansion(w: &[u8], memo: &mut HashMap<Word, AssocPoly>) -> AssocPoly {
    if let Some(p) = memo.get(w) {
        return p.clone();
    }
    let out = match standard_factorization(w) {
        None => AssocPoly::from([(w.to_vec(), BigRational::one())]),
        Some((u, v)) => {
            let a = lyndon_expansion(&u, memo);
            let b = lyndon_expansion(&v, memo);
            let mut ab = assoc_mul(&a, &b, usize::MAX);
            assoc_add_scaled(&mut ab, &assoc_mul(&b, &a, usize::MAX), &-BigRational::one());
            ab
        }
    };
    memo.insert(w.to_vec(), out.clone());
    out
}

fn compute_bch(c: usize) -> Result<FreeLieElement> {
    let px = exp_letter(0, c);
    let py = exp_letter(1, c);
    let mut q = assoc_mul(&px, &py, c);
    q.remove(&Vec::new());
    let mut z = AssocPoly::new();
    let mut power = q.clone();
    for m in 1..=c {
        if m > 1 {
            power = assoc_mul(&power, &q, c);
        }
        let sign = if m % 2 == 1 { BigInt::one() } else { -BigInt::one() };
        assoc_add_scaled(&mut z, &power, &BigRational::new(sign, BigInt::from(m)));
    }
    // triangular projection: P_w = w + (lexicographically larger words)
    let mut memo = HashMap::new();
    let mut terms = Vec::new();
    for w in lyndon_words(c) {
        let a = z.get(&w).cloned().unwrap_or_else(BigRational::zero);
        if a.is_zero() {
            continue;
        }
        let pw = lyndon_expansion(&w, &mut memo);
        assoc_add_scaled(&mut z, &pw, &-a.clone());
        terms.push((w, a));
    }
    if !z.is_empty() {
        return Err(Error::InvariantViolated("BCH series is not a Lie element".into()));
    }
    Ok(FreeLieElement { terms })
}

static BCH_TABLE: OnceLock<FreeLieElement> = OnceLock::new();

/// log(exp X · exp Y) truncated after degree c.
pub fn bch_series(c: usize) -> Result<FreeLieElement> {
    if c == 0 {
        return Err(Error::Precondition("truncation degree must be at least 1".into()));
    }
    if c > MAX_DEGREE {
        return Err(Error::DegreeTooLarge { requested: c, bound: MAX_DEGREE });
    }
    let table = match BCH_TABLE.get() {
        Some(t) => t,
        None => {
            let t = compute_bch(MAX_DEGREE)?;
            BCH_TABLE.get_or_init(|| t)
        }
    };
    Ok(table.truncated(c))
}

fn prime_factors(n: &BigInt) -> Vec<u64> {
    let mut n = n.abs().to_u64().expect("BCH denominators fit in u64");
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Primes dividing a coefficient denominator of the series up to degree c.
pub fn denominator_profile(c: usize) -> Result<BTreeSet<u64>> {
    let z = bch_series(c)?;
    let mut out = BTreeSet::new();
    for (_, q) in z.terms() {
        out.extend(prime_factors(q.denom()));
    }
    if let Some(&big) = out.iter().find(|&&p| p > c as u64) {
        return Err(Error::InvariantViolated(format!("prime {big} exceeds degree {c}")));
    }
    Ok(out)
}

/// Whether every coefficient up to degree c is p-integral.
pub fn is_p_integral(c: usize, p: u64) -> Result<bool> {
    let z = bch_series(c)?;
    let pb = BigInt::from(p);
    Ok(z.terms().iter().all(|(_, q)| !q.denom().is_multiple_of(&pb)))
}

/// BCH product x·y in a nilpotent algebra (exact: the series terminates).
pub fn group_mul(a: &DieudonneLieAlgebra, x: &[PadicScalar], y: &[PadicScalar]) -> Result<Vector> {
    let class = a.nilpotency_class()?;
    group_mul_with_class(a, class, x, y)
}

fn group_mul_with_class(a: &DieudonneLieAlgebra, class: usize, x: &[PadicScalar], y: &[PadicScalar]) -> Result<Vector> {
    if class == 0 {
        return Ok(vec_add(x, y));
    }
    let z = bch_series(class)?;
    let spec = a.spec().clone();
    Ok(z.evaluate(
        &x.to_vec(),
        &y.to_vec(),
        |u, v| a.bracket(u, v),
        |parts| {
            let mut acc = vec![PadicScalar::zero(&spec); a.rank()];
            for (c, v) in parts {
                acc = vec_add(&acc, &vec_scale(v, &PadicScalar::from_rational(&spec, c)));
            }
            acc
        },
    ))
}

pub fn group_inverse(x: &[PadicScalar]) -> Vector {
    x.iter().map(PadicScalar::neg).collect()
}

#[derive(Clone, Debug)]
pub struct ClosureReport {
    pub p: u64,
    pub class: usize,
    pub p_gt_class: bool,
    pub closed: bool,
    pub pairs_checked: usize,
    /// (x, y, x·y) with x·y outside the lattice.
    pub witness: Option<(Vector, Vector, Vector)>,
}

impl ClosureReport {
    pub fn to_json(&self) -> Value {
        json!({
            "p": self.p,
            "class": self.class,
            "p_gt_class": self.p_gt_class,
            "closed": self.closed,
            "pairs_checked": self.pairs_checked,
            "witness": self.witness.as_ref().map(|(x, y, z)| json!({
                "x": vec_to_json(x), "y": vec_to_json(y), "product": vec_to_json(z)
            })),
        })
    }
}

/// Random Z-combinations (coefficients in [-bound, bound]) of the lattice basis.
pub fn random_lattice_vector<R: Rng>(lattice: &Lattice, bound: i64, rng: &mut R) -> Vector {
    let spec = lattice.spec().clone();
    let coeffs: Vector =
        (0..lattice.rank()).map(|_| PadicScalar::from_int(&spec, rng.gen_range(-bound..=bound))).collect();
    lattice.basis().mul_vec(&coeffs)
}

/// Tests whether the lattice is closed under the BCH product: pairs of
/// lattice basis vectors first, then the given samples. Stops at the first
/// counterexample.
pub fn lattice_closure_check(a: &DieudonneLieAlgebra, samples: &[(Vector, Vector)]) -> Result<ClosureReport> {
    let lat = a.lattice().ok_or(Error::MissingLattice)?;
    let class = a.nilpotency_class()?;
    let p = a.spec().p();
    let basis = lat.basis().columns();
    let mut pairs: Vec<(Vector, Vector)> = Vec::new();
    for u in &basis {
        for v in &basis {
            pairs.push((u.clone(), v.clone()));
        }
    }
    pairs.extend(samples.iter().cloned());
    let mut checked = 0;
    for (x, y) in pairs {
        let prod = group_mul_with_class(a, class, &x, &y)?;
        checked += 1;
        let m = Mat::from_cols(a.spec(), a.rank(), std::slice::from_ref(&prod));
        if !lat.contains(&m)? {
            return Ok(ClosureReport {
                p,
                class,
                p_gt_class: p as usize > class,
                closed: false,
                pairs_checked: checked,
                witness: Some((x, y, prod)),
            });
        }
    }
    Ok(ClosureReport { p, class, p_gt_class: p as usize > class, closed: true, pairs_checked: checked, witness: None })
}

/// The splitting 𝔞 = 𝔟 ⊕ 𝔠 with 𝔟 the minimal-slope part and 𝔠 the sum of
/// the other slope parts, together with 𝔟⁺ = 𝔞⁺ ∩ 𝔟.
#[derive(Clone, Debug)]
pub struct MinimalSlopeSplitting {
    pub b_basis: Mat,
    pub c_basis: Mat,
    pub b_lattice: Lattice,
    pub c_lattice: Lattice,
    /// Inverse of [b_basis | c_basis].
    change: Mat,
}

impl MinimalSlopeSplitting {
    pub fn new(a: &DieudonneLieAlgebra) -> Result<MinimalSlopeSplitting> {
        let lat = a.lattice().ok_or(Error::MissingLattice)?;
        let to_split = |e: Error| match e {
            Error::InsufficientPrecision(m) => Error::SplitUnavailable(m),
            other => other,
        };
        let slopes = a.iso().newton_slopes().map_err(to_split)?;
        let mu = slopes.min_slope().ok_or_else(|| Error::SplitUnavailable("zero algebra".into()))?;
        let (_, b_basis) = a.iso().slope_part(SlopePredicate::Equal(mu)).map_err(to_split)?;
        let blocks = a.iso().slope_split().map_err(to_split)?;
        let rest: Vec<Mat> = blocks.into_iter().filter(|b| b.slope != mu).map(|b| b.basis).collect();
        let c_basis = rest.iter().fold(Mat::zeros(a.spec(), a.rank(), 0), |acc, m| acc.hstack(m));
        let change = b_basis
            .hstack(&c_basis)
            .inverse()
            .map_err(|_| Error::SplitUnavailable("slope parts do not form a direct sum at this precision".into()))?;
        let b_lattice = lat.intersect_subspace(&b_basis)?;
        let c_lattice = lat.intersect_subspace(&c_basis)?;
        Ok(MinimalSlopeSplitting { b_basis, c_basis, b_lattice, c_lattice, change })
    }

    /// Projection onto 𝔟 along 𝔠.
    pub fn rho(&self, v: &[PadicScalar]) -> Vector {
        let coords = self.change.mul_vec(v);
        let d = self.b_basis.cols();
        self.b_basis.mul_vec(&coords[..d])
    }
}

#[derive(Clone, Debug)]
pub struct RhoDefect {
    pub defect: Vector,
    pub n: u32,
    pub p_gt_class: bool,
    /// Whether p^n · defect lies in 𝔟⁺.
    pub contained: bool,
}

impl RhoDefect {
    pub fn to_json(&self) -> Value {
        json!({
            "defect": vec_to_json(&self.defect),
            "n": self.n,
            "p_gt_class": self.p_gt_class,
            "contained": self.contained,
        })
    }
}

/// d = ρ(x'·x) − ρ(x) − ρ(x') for x' ∈ 𝔞⁺ and x ∈ 𝔟 ⊕ p^{-n}𝔞⁺, with the
/// membership d ∈ p^{-n}𝔟⁺.
pub fn rho_defect(
    a: &DieudonneLieAlgebra,
    split: &MinimalSlopeSplitting,
    x_prime: &[PadicScalar],
    x: &[PadicScalar],
    n: u32,
) -> Result<RhoDefect> {
    let spec = a.spec().clone();
    let lat = a.lattice().ok_or(Error::MissingLattice)?;
    let col = |v: &[PadicScalar]| Mat::from_cols(&spec, a.rank(), &[v.to_vec()]);
    if !lat.contains(&col(x_prime))? {
        return Err(Error::Precondition("x' is not in the lattice".into()));
    }
    let pn = PadicScalar::p_power(&spec, n as i64);
    let c_part = vec_scale(&vec_sub(x, &split.rho(x)), &pn);
    if !lat.contains(&col(&c_part))? {
        return Err(Error::Precondition("the complement part of x is not in p^-n times the lattice".into()));
    }
    let class = a.nilpotency_class()?;
    let prod = group_mul_with_class(a, class, x_prime, x)?;
    let defect = vec_sub(&vec_sub(&split.rho(&prod), &split.rho(x)), &split.rho(x_prime));
    let contained = split.b_lattice.contains(&col(&vec_scale(&defect, &pn)))?;
    Ok(RhoDefect { defect, n, p_gt_class: spec.p() as usize > class, contained })
}

/// A random admissible pair (x', x) for [`rho_defect`]: x' ∈ 𝔞⁺ and
/// x = b + p^{-n} y with b ∈ 𝔟⁺ and y ∈ 𝔠⁺.
pub fn random_rho_inputs<R: Rng>(
    a: &DieudonneLieAlgebra,
    split: &MinimalSlopeSplitting,
    n: u32,
    rng: &mut R,
) -> Result<(Vector, Vector)> {
    let lat = a.lattice().ok_or(Error::MissingLattice)?;
    let spec = a.spec().clone();
    let xp = random_lattice_vector(lat, 6, rng);
    let b = random_lattice_vector(&split.b_lattice, 6, rng);
    let y = random_lattice_vector(&split.c_lattice, 6, rng);
    let x = vec_add(&b, &vec_scale(&y, &PadicScalar::p_power(&spec, -(n as i64))));
    Ok((xp, x))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lyndon_counts() {
        // necklace counts for two letters
        let counts: Vec<usize> = (1..=8).map(|k| lyndon_words(8).iter().filter(|w| w.len() == k).count()).collect();
        assert_eq!(counts, vec![2, 1, 2, 3, 6, 9, 18, 30]);
        assert!(lyndon_words(8).iter().all(|w| is_lyndon(w)));
        assert_eq!(bracketing(&[0, 0, 1]), "[X,[X,Y]]");
        assert_eq!(bracketing(&[0, 1, 1]), "[[X,Y],Y]");
    }

    #[test]
    fn low_degree_coefficients() {
        let z = bch_series(3).unwrap();
        let q = |a: i64, b: i64| BigRational::new(a.into(), b.into());
        assert_eq!(z.coefficient(&[0]), q(1, 1));
        assert_eq!(z.coefficient(&[1]), q(1, 1));
        assert_eq!(z.coefficient(&[0, 1]), q(1, 2));
        assert_eq!(z.coefficient(&[0, 0, 1]), q(1, 12));
        // [Y,[Y,X]] = [[X,Y],Y]
        assert_eq!(z.coefficient(&[0, 1, 1]), q(1, 12));
        assert_eq!(bch_series(1).unwrap().terms().len(), 2);
    }

    #[test]
    fn degree_bound() {
        assert_eq!(bch_series(9).unwrap_err(), Error::DegreeTooLarge { requested: 9, bound: 8 });
    }
}
