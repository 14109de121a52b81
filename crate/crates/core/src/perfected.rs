//! Perfected power series over F_{p^k}: finite sums of monomials X^I with
//! exponents in Z_{≥0}[1/p], kept as classes modulo terms with |I|_∞ > D.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::{BigRational, Rational64};
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::isocrystal::{parse_rational64, parse_rational64_str};
use crate::padic::fp;

/// F_{p^k} = F_p[t]/(m) with m the first monic irreducible of degree k in
/// lexicographic order.
#[derive(Debug, PartialEq, Eq)]
pub struct FiniteField {
    p: u64,
    k: usize,
    modulus: Vec<u64>,
}

/// Element of F_{p^k}: k residues, low degree first.
pub type Coeff = Vec<u64>;

impl FiniteField {
    pub fn new(p: u64, k: usize) -> Result<Arc<FiniteField>> {
        if !fp::is_prime(p) || p > u32::MAX as u64 {
            return Err(Error::InvalidFieldSpec(format!("{p} is not a supported prime")));
        }
        if k == 0 {
            return Err(Error::InvalidFieldSpec("field degree must be positive".into()));
        }
        Ok(Arc::new(FiniteField { p, k, modulus: fp::smallest_irreducible(p, k) }))
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn zero(&self) -> Coeff {
        vec![0; self.k]
    }

    pub fn one(&self) -> Coeff {
        self.from_int(1)
    }

    pub fn from_int(&self, x: i64) -> Coeff {
        let mut c = self.zero();
        c[0] = x.rem_euclid(self.p as i64) as u64;
        c
    }

    /// The class of t.
    pub fn generator(&self) -> Coeff {
        self.reduce(&[0, 1])
    }

    fn reduce(&self, v: &[u64]) -> Coeff {
        let r = fp::rem(v, &self.modulus, self.p);
        let mut c = self.zero();
        for (i, x) in r.into_iter().enumerate() {
            c[i] = x;
        }
        c
    }

    pub fn is_zero(&self, a: &[u64]) -> bool {
        a.iter().all(|&x| x == 0)
    }

    pub fn add(&self, a: &[u64], b: &[u64]) -> Coeff {
        a.iter().zip(b).map(|(x, y)| (x + y) % self.p).collect()
    }

    pub fn neg(&self, a: &[u64]) -> Coeff {
        a.iter().map(|&x| (self.p - x) % self.p).collect()
    }

    pub fn sub(&self, a: &[u64], b: &[u64]) -> Coeff {
        self.add(a, &self.neg(b))
    }

    pub fn mul(&self, a: &[u64], b: &[u64]) -> Coeff {
        self.reduce(&fp::mul(a, b, self.p))
    }

    pub fn pow(&self, a: &[u64], mut e: u128) -> Coeff {
        let mut acc = self.one();
        let mut base = a.to_vec();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        acc
    }

    /// x ↦ x^p.
    pub fn frobenius(&self, a: &[u64]) -> Coeff {
        self.pow(a, self.p as u128)
    }

    /// The unique p-th root, x^{p^{k-1}}.
    pub fn frobenius_inv(&self, a: &[u64]) -> Coeff {
        let mut x = a.to_vec();
        for _ in 1..self.k {
            x = self.frobenius(&x);
        }
        x
    }

    pub fn coeff_to_json(&self, a: &[u64]) -> Value {
        json!(a)
    }

    /// Accepts a list of k residues or a single integer.
    pub fn coeff_from_json(&self, v: &Value) -> Result<Coeff> {
        if let Some(x) = v.as_i64() {
            return Ok(self.from_int(x));
        }
        let arr = v.as_array().ok_or_else(|| Error::Malformed("coefficient must be a list".into()))?;
        if arr.len() != self.k {
            return Err(Error::Malformed(format!("coefficient needs {} entries", self.k)));
        }
        let raw = arr
            .iter()
            .map(|x| x.as_i64().map(|y| y.rem_euclid(self.p as i64) as u64))
            .collect::<Option<Vec<u64>>>()
            .ok_or_else(|| Error::Malformed("coefficient entries must be integers".into()))?;
        Ok(raw)
    }

    pub fn to_json(&self) -> Value {
        json!({"p": self.p, "k": self.k})
    }
}

/// Exponent vector; each component is ≥ 0 with a p-power denominator.
pub type Exponent = Vec<Rational64>;

fn p_adic_denominator_exp(x: Rational64, p: u64) -> Option<u32> {
    let mut d = *x.denom();
    let mut e = 0;
    while d % p as i64 == 0 {
        d /= p as i64;
        e += 1;
    }
    (d == 1).then_some(e)
}

/// −ord_p(I): the largest denominator exponent among the components, or 0
/// when all components are integers.
pub fn neg_ord(i: &[Rational64], p: u64) -> u32 {
    i.iter().map(|&x| p_adic_denominator_exp(x, p).unwrap_or(0)).max().unwrap_or(0)
}

pub fn sup_norm(i: &[Rational64]) -> Rational64 {
    i.iter().copied().max().unwrap_or_else(Rational64::zero)
}

fn big(x: Rational64) -> BigRational {
    BigRational::new(BigInt::from(*x.numer()), BigInt::from(*x.denom()))
}

fn big_pow_p(p: u64, e: i64) -> BigRational {
    let b = BigRational::from_integer(BigInt::from(p));
    if e >= 0 {
        num_traits::pow(b, e as usize)
    } else {
        num_traits::pow(b.recip(), (-e) as usize)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Flavor {
    Relative,
    Absolute,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IdealKind {
    /// (X_1, ..., X_n)^m
    Power,
    /// (X_1^{p^m}, ..., X_n^{p^m})
    Frobenius,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PerfectedSeries {
    field: Arc<FiniteField>,
    nvars: usize,
    bound: Rational64,
    terms: BTreeMap<Exponent, Coeff>,
}

impl PerfectedSeries {
    /// Validates exponents, drops zero coefficients and terms beyond the bound.
    pub fn new(
        field: &Arc<FiniteField>,
        nvars: usize,
        bound: Rational64,
        terms: impl IntoIterator<Item = (Exponent, Coeff)>,
    ) -> Result<PerfectedSeries> {
        if bound.is_negative() {
            return Err(Error::Malformed("degree bound must be nonnegative".into()));
        }
        let mut s = PerfectedSeries::zero(field, nvars, bound);
        for (e, c) in terms {
            if e.len() != nvars {
                return Err(Error::DimensionMismatch(format!("exponent has {} components, expected {nvars}", e.len())));
            }
            for &x in &e {
                if x.is_negative() || p_adic_denominator_exp(x, field.p).is_none() {
                    return Err(Error::Malformed(format!("exponent {x} is not in Z_(>=0)[1/p]")));
                }
            }
            if c.len() != field.k {
                return Err(Error::Malformed("coefficient has the wrong length".into()));
            }
            s.add_term(e, &c);
        }
        Ok(s)
    }

    pub fn zero(field: &Arc<FiniteField>, nvars: usize, bound: Rational64) -> PerfectedSeries {
        PerfectedSeries { field: field.clone(), nvars, bound, terms: BTreeMap::new() }
    }

    pub fn monomial(
        field: &Arc<FiniteField>,
        bound: Rational64,
        exp: Exponent,
        coeff: Coeff,
    ) -> Result<PerfectedSeries> {
        let n = exp.len();
        PerfectedSeries::new(field, n, bound, [(exp, coeff)])
    }

    pub fn constant(field: &Arc<FiniteField>, nvars: usize, bound: Rational64, c: Coeff) -> PerfectedSeries {
        let mut s = PerfectedSeries::zero(field, nvars, bound);
        s.add_term(vec![Rational64::zero(); nvars], &c);
        s
    }

    /// X_i^e.
    pub fn variable_power(
        field: &Arc<FiniteField>,
        nvars: usize,
        bound: Rational64,
        i: usize,
        e: Rational64,
    ) -> Result<PerfectedSeries> {
        let mut exp = vec![Rational64::zero(); nvars];
        exp[i] = e;
        PerfectedSeries::new(field, nvars, bound, [(exp, field.one())])
    }

    fn add_term(&mut self, e: Exponent, c: &[u64]) {
        if sup_norm(&e) > self.bound || self.field.is_zero(c) {
            return;
        }
        let f = self.field.clone();
        match self.terms.entry(e) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c.to_vec());
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let sum = f.add(o.get(), c);
                if f.is_zero(&sum) {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    pub fn field(&self) -> &Arc<FiniteField> {
        &self.field
    }

    pub fn p(&self) -> u64 {
        self.field.p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn bound(&self) -> Rational64 {
        self.bound
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, &Coeff)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, e: &[Rational64]) -> Coeff {
        self.terms.get(e).cloned().unwrap_or_else(|| self.field.zero())
    }

    pub fn constant_term(&self) -> Coeff {
        self.coefficient(&vec![Rational64::zero(); self.nvars])
    }

    /// Whether every exponent is an integer vector.
    pub fn is_ordinary(&self) -> bool {
        self.terms.keys().all(|e| e.iter().all(Rational64::is_integer))
    }

    fn check_compatible(&self, other: &PerfectedSeries) -> Result<()> {
        if self.field != other.field || self.nvars != other.nvars {
            return Err(Error::ParameterMismatch(format!(
                "series over F_{}^{} in {} variables and F_{}^{} in {} variables",
                self.field.p, self.field.k, self.nvars, other.field.p, other.field.k, other.nvars
            )));
        }
        Ok(())
    }

    /// The same class with a smaller bound.
    pub fn with_bound(&self, bound: Rational64) -> PerfectedSeries {
        let bound = bound.min(self.bound);
        let terms = self.terms.iter().filter(|t| sup_norm(t.0) <= bound).map(|(e, c)| (e.clone(), c.clone())).collect();
        PerfectedSeries { field: self.field.clone(), nvars: self.nvars, bound, terms }
    }

    pub fn add(&self, other: &PerfectedSeries) -> Result<PerfectedSeries> {
        self.check_compatible(other)?;
        let mut out = self.with_bound(other.bound);
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c);
        }
        Ok(out)
    }

    pub fn neg(&self) -> PerfectedSeries {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = self.field.neg(c);
        }
        out
    }

    pub fn sub(&self, other: &PerfectedSeries) -> Result<PerfectedSeries> {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &[u64]) -> PerfectedSeries {
        let mut out = PerfectedSeries::zero(&self.field, self.nvars, self.bound);
        for (e, x) in &self.terms {
            out.add_term(e.clone(), &self.field.mul(x, c));
        }
        out
    }

    pub fn mul(&self, other: &PerfectedSeries) -> Result<PerfectedSeries> {
        self.check_compatible(other)?;
        let bound = self.bound.min(other.bound);
        let mut out = PerfectedSeries::zero(&self.field, self.nvars, bound);
        for (a, x) in &self.terms {
            if sup_norm(a) > bound {
                continue;
            }
            for (b, y) in &other.terms {
                let e: Exponent = a.iter().zip(b).map(|(u, v)| u + v).collect();
                out.add_term(e, &self.field.mul(x, y));
            }
        }
        Ok(out)
    }

    pub fn pow(&self, mut e: u64) -> PerfectedSeries {
        let mut acc = PerfectedSeries::constant(&self.field, self.nvars, self.bound, self.field.one());
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base).expect("same parameters");
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base).expect("same parameters");
            }
        }
        acc
    }

    /// Forward: X^I ↦ X^{pI}, bound unchanged. Inverse: X^I ↦ X^{I/p},
    /// bound D/p. The absolute flavor also applies x ↦ x^p (resp. x^{1/p})
    /// to coefficients.
    pub fn frobenius(&self, direction: Direction, flavor: Flavor) -> PerfectedSeries {
        let p = Rational64::from_integer(self.p() as i64);
        let (bound, factor) = match direction {
            Direction::Forward => (self.bound, p),
            Direction::Inverse => (self.bound / p, p.recip()),
        };
        let mut out = PerfectedSeries::zero(&self.field, self.nvars, bound);
        for (e, c) in &self.terms {
            let e: Exponent = e.iter().map(|&x| x * factor).collect();
            let c = match (flavor, direction) {
                (Flavor::Relative, _) => c.clone(),
                (Flavor::Absolute, Direction::Forward) => self.field.frobenius(c),
                (Flavor::Absolute, Direction::Inverse) => self.field.frobenius_inv(c),
            };
            out.add_term(e, &c);
        }
        out
    }

    /// Whether X^I lies in the ideal.
    pub fn monomial_in_ideal(i: &[Rational64], kind: IdealKind, m: u32, p: u64) -> bool {
        match kind {
            IdealKind::Power => i.iter().map(|x| x.floor().to_integer()).sum::<i64>() >= m as i64,
            IdealKind::Frobenius => {
                let pm = big_pow_p(p, m as i64);
                i.iter().any(|&x| big(x) >= pm)
            }
        }
    }

    /// Drops exactly the terms in the monomial ideal.
    pub fn truncate_ideal(&self, kind: IdealKind, m: u32) -> PerfectedSeries {
        let p = self.p();
        let terms = self
            .terms
            .iter()
            .filter(|t| !PerfectedSeries::monomial_in_ideal(t.0, kind, m, p))
            .map(|(e, c)| (e.clone(), c.clone()))
            .collect();
        PerfectedSeries { field: self.field.clone(), nvars: self.nvars, bound: self.bound, terms }
    }

    /// The same series in `total` variables, occupying positions
    /// offset..offset+nvars.
    pub fn embed(&self, total: usize, offset: usize) -> Result<PerfectedSeries> {
        if offset + self.nvars > total {
            return Err(Error::DimensionMismatch("embedding does not fit".into()));
        }
        let terms = self
            .terms
            .iter()
            .map(|(e, c)| {
                let mut x = vec![Rational64::zero(); total];
                x[offset..offset + self.nvars].copy_from_slice(e);
                (x, c.clone())
            })
            .collect();
        Ok(PerfectedSeries { field: self.field.clone(), nvars: total, bound: self.bound, terms })
    }

    pub fn to_json(&self) -> Value {
        let p = self.p();
        let terms: Vec<Value> = self
            .terms
            .iter()
            .map(|(e, c)| {
                let exp: Vec<Value> = e
                    .iter()
                    .map(|&x| {
                        let pexp = p_adic_denominator_exp(x, p).expect("validated exponent");
                        json!({"num": *x.numer(), "pexp": pexp})
                    })
                    .collect();
                json!({"exp": exp, "coeff": self.field.coeff_to_json(c)})
            })
            .collect();
        json!({
            "p": p,
            "nvars": self.nvars,
            "field": self.field.to_json(),
            "D": rational_to_json(self.bound),
            "terms": terms,
        })
    }

    pub fn from_json(v: &Value) -> Result<PerfectedSeries> {
        let field_v = v.get("field").ok_or_else(|| Error::Malformed("series needs \"field\"".into()))?;
        let p = get_u64(field_v, "p")?;
        let k = get_u64(field_v, "k")? as usize;
        if let Some(top) = v.get("p") {
            if top.as_u64() != Some(p) {
                return Err(Error::ParameterMismatch("\"p\" differs from the field characteristic".into()));
            }
        }
        let field = FiniteField::new(p, k)?;
        PerfectedSeries::from_json_with_field(&field, v)
    }

    pub fn from_json_with_field(field: &Arc<FiniteField>, v: &Value) -> Result<PerfectedSeries> {
        let nvars = get_u64(v, "nvars")? as usize;
        let bound = parse_rational64(v.get("D").ok_or_else(|| Error::Malformed("series needs \"D\"".into()))?)?;
        let terms = v
            .get("terms")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Malformed("series needs \"terms\"".into()))?;
        let mut parsed = Vec::with_capacity(terms.len());
        for t in terms {
            let exp = t
                .get("exp")
                .and_then(Value::as_array)
                .ok_or_else(|| Error::Malformed("term needs \"exp\"".into()))?
                .iter()
                .map(|x| parse_exponent(x, field.p))
                .collect::<Result<Exponent>>()?;
            let coeff = field
                .coeff_from_json(t.get("coeff").ok_or_else(|| Error::Malformed("term needs \"coeff\"".into()))?)?;
            parsed.push((exp, coeff));
        }
        PerfectedSeries::new(field, nvars, bound, parsed)
    }
}

impl fmt::Display for PerfectedSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0 + O(|I| > {})", self.bound);
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(e, c)| {
                let exps: Vec<String> = e.iter().map(|x| x.to_string()).collect();
                format!("{:?}*X^({})", c, exps.join(","))
            })
            .collect();
        write!(f, "{} + O(|I| > {})", parts.join(" + "), self.bound)
    }
}

fn get_u64(v: &Value, key: &str) -> Result<u64> {
    v.get(key).and_then(Value::as_u64).ok_or_else(|| Error::Malformed(format!("missing integer {key:?}")))
}

fn rational_to_json(x: Rational64) -> Value {
    if x.is_integer() {
        json!(x.to_integer())
    } else {
        json!(x.to_string())
    }
}

/// `{"num": a, "pexp": e}` for a/p^e, or a plain integer.
fn parse_exponent(v: &Value, p: u64) -> Result<Rational64> {
    if let Some(n) = v.as_i64() {
        return Ok(Rational64::from_integer(n));
    }
    if let Some(s) = v.as_str() {
        return parse_rational64_str(s);
    }
    let num = v
        .get("num")
        .and_then(Value::as_i64)
        .ok_or_else(|| Error::Malformed("exponent needs integer \"num\"".into()))?;
    let pexp = get_u64(v, "pexp")? as u32;
    let den = (p as i64).checked_pow(pexp).ok_or_else(|| Error::Malformed("exponent denominator overflows".into()))?;
    Ok(Rational64::new(num, den))
}

/// Polynomial over F_{p^k} with nonnegative integer exponents.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrdinaryPolynomial {
    field: Arc<FiniteField>,
    nvars: usize,
    terms: BTreeMap<Vec<u32>, Coeff>,
}

impl OrdinaryPolynomial {
    pub fn new(
        field: &Arc<FiniteField>,
        nvars: usize,
        terms: impl IntoIterator<Item = (Vec<u32>, Coeff)>,
    ) -> Result<OrdinaryPolynomial> {
        let mut map: BTreeMap<Vec<u32>, Coeff> = BTreeMap::new();
        for (e, c) in terms {
            if e.len() != nvars {
                return Err(Error::DimensionMismatch(format!("exponent has {} components, expected {nvars}", e.len())));
            }
            let entry = map.entry(e).or_insert_with(|| field.zero());
            *entry = field.add(entry, &c);
        }
        map.retain(|_, c| !field.is_zero(c));
        Ok(OrdinaryPolynomial { field: field.clone(), nvars, terms: map })
    }

    /// From integer coefficients.
    pub fn from_int_terms(
        field: &Arc<FiniteField>,
        nvars: usize,
        terms: &[(&[u32], i64)],
    ) -> Result<OrdinaryPolynomial> {
        OrdinaryPolynomial::new(field, nvars, terms.iter().map(|(e, c)| (e.to_vec(), field.from_int(*c))))
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &Coeff)> {
        self.terms.iter()
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "nvars": self.nvars,
            "terms": self.terms.iter().map(|(e, c)| json!({"exp": e, "coeff": self.field.coeff_to_json(c)})).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(field: &Arc<FiniteField>, v: &Value) -> Result<OrdinaryPolynomial> {
        let nvars = get_u64(v, "nvars")? as usize;
        let terms = v
            .get("terms")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Malformed("polynomial needs \"terms\"".into()))?;
        let mut parsed = Vec::new();
        for t in terms {
            let exp = t
                .get("exp")
                .and_then(Value::as_array)
                .ok_or_else(|| Error::Malformed("term needs \"exp\"".into()))?
                .iter()
                .map(|x| x.as_u64().map(|y| y as u32))
                .collect::<Option<Vec<u32>>>()
                .ok_or_else(|| Error::Malformed("polynomial exponents must be nonnegative integers".into()))?;
            let coeff = field
                .coeff_from_json(t.get("coeff").ok_or_else(|| Error::Malformed("term needs \"coeff\"".into()))?)?;
            parsed.push((exp, coeff));
        }
        OrdinaryPolynomial::new(field, nvars, parsed)
    }
}

/// f(g_1, ..., g_a, h_1, ..., h_b) on classes modulo the common bound.
pub fn compose(f: &OrdinaryPolynomial, g: &[PerfectedSeries], h: &[PerfectedSeries]) -> Result<PerfectedSeries> {
    let args: Vec<&PerfectedSeries> = g.iter().chain(h).collect();
    if args.len() != f.nvars {
        return Err(Error::DimensionMismatch(format!(
            "f has {} variables but {} series were given",
            f.nvars,
            args.len()
        )));
    }
    let Some(first) = args.first() else {
        return Err(Error::Precondition("composition needs at least one series".into()));
    };
    for a in &args {
        first.check_compatible(a)?;
        if *a.field != *f.field {
            return Err(Error::ParameterMismatch("f and the series have different coefficient fields".into()));
        }
        if !a.field.is_zero(&a.constant_term()) {
            return Err(Error::NonzeroConstantTerm);
        }
    }
    let bound = args.iter().map(|a| a.bound).min().expect("nonempty");
    let args: Vec<PerfectedSeries> = args.iter().map(|a| a.with_bound(bound)).collect();
    let mut powers: HashMap<(usize, u32), PerfectedSeries> = HashMap::new();
    let mut out = PerfectedSeries::zero(&f.field, first.nvars, bound);
    for (e, c) in &f.terms {
        let mut term = PerfectedSeries::constant(&f.field, first.nvars, bound, c.clone());
        for (i, &k) in e.iter().enumerate() {
            if k == 0 {
                continue;
            }
            let pw = powers.entry((i, k)).or_insert_with(|| args[i].pow(k as u64)).clone();
            term = term.mul(&pw)?;
        }
        out = out.add(&term)?;
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RestrictedParams {
    pub s: u32,
    pub r: u32,
    pub n0: u32,
}

impl RestrictedParams {
    pub fn new(s: u32, r: u32, n0: u32) -> Result<RestrictedParams> {
        if r == 0 || r >= s {
            return Err(Error::Precondition(format!("need 0 < r < s, got r = {r}, s = {s}")));
        }
        Ok(RestrictedParams { s, r, n0 })
    }
}

/// Window convention for the definitional test at level n.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Window {
    /// |p^{nr} I|_∞ < p^{ns}: terms surviving modulo the Frobenius ideal.
    Strict,
    /// |p^{nr} I|_∞ ≤ p^{ns}.
    Inclusive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClosedForm {
    /// −ord_p(I) ≤ r·max{n0, j + 1} with j the largest integer such that
    /// p^{j(s−r)} ≤ |I|_∞.
    Corrected,
    /// −ord_p(I) ≤ max{n0, s·⌊log_p|I|_∞/(s−r)⌋ + 1}.
    Printed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MembershipMethod {
    Definitional,
    ClosedForm,
    Both,
}

impl MembershipMethod {
    pub fn parse(s: &str) -> Result<MembershipMethod> {
        match s {
            "definitional" => Ok(MembershipMethod::Definitional),
            "closed_form" | "closed-form" => Ok(MembershipMethod::ClosedForm),
            "both" => Ok(MembershipMethod::Both),
            other => Err(Error::Malformed(format!("unknown membership method {other:?}"))),
        }
    }
}

/// Largest integer j with p^{j·w} ≤ m, for m > 0.
fn log_floor(m: Rational64, p: u64, w: u32) -> i64 {
    let m = big(m);
    let step = big_pow_p(p, w as i64);
    let mut j = 0i64;
    let mut cur = BigRational::one();
    if cur <= m {
        while &cur * &step <= m {
            cur *= &step;
            j += 1;
        }
    } else {
        while cur > m {
            cur /= &step;
            j -= 1;
        }
    }
    j
}

/// Per-term closed-form test.
pub fn closed_form_holds(i: &[Rational64], p: u64, params: RestrictedParams, variant: ClosedForm) -> bool {
    let e = neg_ord(i, p) as i64;
    if e == 0 {
        return true;
    }
    let m = sup_norm(i);
    let j = log_floor(m, p, params.s - params.r);
    let (s, r, n0) = (params.s as i64, params.r as i64, params.n0 as i64);
    match variant {
        ClosedForm::Corrected => e <= r * n0.max(j + 1),
        ClosedForm::Printed => e <= n0.max(s * j + 1),
    }
}

fn in_window(i: &[Rational64], p: u64, params: RestrictedParams, n: u32, window: Window) -> bool {
    // |p^{nr} I| vs p^{ns} is |I| vs p^{n(s-r)}
    let lim = big_pow_p(p, (n * (params.s - params.r)) as i64);
    let m = big(sup_norm(i));
    match window {
        Window::Strict => m < lim,
        Window::Inclusive => m <= lim,
    }
}

/// Levels n0..=n_max; beyond n_max every stored term lies in the window and
/// the conditions only get weaker.
fn level_range(bound: Rational64, p: u64, params: RestrictedParams) -> std::ops::RangeInclusive<u32> {
    let mut n = params.n0;
    while big_pow_p(p, (n * (params.s - params.r)) as i64) <= big(bound) {
        n += 1;
    }
    params.n0..=n
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MembershipReport {
    pub member: bool,
    /// First failing exponent, with the failing level for the definitional test.
    pub witness: Option<(Exponent, Option<u32>)>,
}

impl MembershipReport {
    pub fn to_json(&self) -> Value {
        json!({
            "member": self.member,
            "witness": self.witness.as_ref().map(|(e, n)| json!({
                "exp": e.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
                "level": n,
            })),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RestrictedMembership {
    pub definitional: Option<MembershipReport>,
    pub closed_form: Option<MembershipReport>,
    /// Terms on which the two per-term verdicts differ.
    pub disagreements: Vec<Exponent>,
    /// Terms whose verdict depends on the window convention.
    pub boundary_terms: Vec<Exponent>,
    /// Verdict of the closed form as printed, kept for comparison.
    pub printed_closed_form: MembershipReport,
}

impl RestrictedMembership {
    pub fn member(&self) -> bool {
        self.definitional.as_ref().or(self.closed_form.as_ref()).is_some_and(|r| r.member)
    }

    pub fn to_json(&self) -> Value {
        let exps = |v: &[Exponent]| -> Value {
            v.iter().map(|e| e.iter().map(|x| x.to_string()).collect::<Vec<_>>()).collect::<Vec<_>>().into()
        };
        json!({
            "member": self.member(),
            "definitional": self.definitional.as_ref().map(MembershipReport::to_json),
            "closed_form": self.closed_form.as_ref().map(MembershipReport::to_json),
            "disagreements": exps(&self.disagreements),
            "boundary_terms": exps(&self.boundary_terms),
            "printed_closed_form": self.printed_closed_form.to_json(),
        })
    }
}

impl PerfectedSeries {
    /// The definitional test on the stored terms with the given window.
    pub fn definitional_membership(&self, params: RestrictedParams, window: Window) -> MembershipReport {
        let p = self.p();
        for n in level_range(self.bound, p, params) {
            for e in self.terms.keys() {
                if in_window(e, p, params, n, window) && neg_ord(e, p) > n * params.r {
                    return MembershipReport { member: false, witness: Some((e.clone(), Some(n))) };
                }
            }
        }
        MembershipReport { member: true, witness: None }
    }

    fn definitional_term(&self, e: &[Rational64], params: RestrictedParams, window: Window) -> bool {
        let p = self.p();
        level_range(self.bound, p, params).all(|n| !in_window(e, p, params, n, window) || neg_ord(e, p) <= n * params.r)
    }

    pub fn closed_form_membership(&self, params: RestrictedParams, variant: ClosedForm) -> MembershipReport {
        let p = self.p();
        match self.terms.keys().find(|e| !closed_form_holds(e, p, params, variant)) {
            Some(e) => MembershipReport { member: false, witness: Some((e.clone(), None)) },
            None => MembershipReport { member: true, witness: None },
        }
    }

    /// Membership in the complete restricted perfection. With `Both`, the
    /// strict definitional test and the corrected closed form must agree on
    /// every stored term.
    pub fn membership_restricted(
        &self,
        params: RestrictedParams,
        method: MembershipMethod,
    ) -> Result<RestrictedMembership> {
        let p = self.p();
        let want_def = method != MembershipMethod::ClosedForm;
        let want_closed = method != MembershipMethod::Definitional;
        let definitional = want_def.then(|| self.definitional_membership(params, Window::Strict));
        let closed_form = want_closed.then(|| self.closed_form_membership(params, ClosedForm::Corrected));
        let mut disagreements = Vec::new();
        if method == MembershipMethod::Both {
            for e in self.terms.keys() {
                if self.definitional_term(e, params, Window::Strict)
                    != closed_form_holds(e, p, params, ClosedForm::Corrected)
                {
                    disagreements.push(e.clone());
                }
            }
        }
        let boundary_terms = self
            .terms
            .keys()
            .filter(|e| {
                self.definitional_term(e, params, Window::Strict)
                    != self.definitional_term(e, params, Window::Inclusive)
            })
            .cloned()
            .collect();
        let report = RestrictedMembership {
            definitional,
            closed_form,
            disagreements,
            boundary_terms,
            printed_closed_form: self.closed_form_membership(params, ClosedForm::Printed),
        };
        if !report.disagreements.is_empty() {
            return Err(Error::InvariantViolated(format!(
                "definitional and closed-form membership disagree on {} terms",
                report.disagreements.len()
            )));
        }
        Ok(report)
    }

    /// Per-term test p^{−ord_p(I)} ≤ max(C·(|I|_∞ + d)^E, 1).
    pub fn membership_ecd(&self, e: Rational64, c: Rational64, d: Rational64) -> Result<MembershipReport> {
        if !e.is_positive() || !c.is_positive() || d.is_negative() {
            return Err(Error::Precondition("need E > 0, C > 0 and d >= 0".into()));
        }
        let p = self.p();
        let (a, b) = (*e.numer() as u64, *e.denom() as u64);
        let cb = num_traits::pow(big(c), b as usize);
        for i in self.terms.keys() {
            let k = neg_ord(i, p);
            if k == 0 {
                continue;
            }
            let lhs = big_pow_p(p, k as i64 * b as i64);
            let rhs = &cb * num_traits::pow(big(sup_norm(i) + d), a as usize);
            if lhs > rhs {
                return Ok(MembershipReport { member: false, witness: Some((i.clone(), None)) });
            }
        }
        Ok(MembershipReport { member: true, witness: None })
    }
}

/// Which block is raised to the power q^n in the rigidity congruences.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PoweredBlock {
    G,
    H,
}

impl PoweredBlock {
    pub fn parse(s: &str) -> Result<PoweredBlock> {
        match s {
            "g" => Ok(PoweredBlock::G),
            "h" => Ok(PoweredBlock::H),
            other => Err(Error::Malformed(format!("powered block must be g or h, got {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Congruence {
    pub n: usize,
    pub d_n: u64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RigidityReport {
    pub q: u64,
    pub congruences: Vec<Congruence>,
    pub first_failure: Option<usize>,
    /// q^n/d_n strictly decreasing along the given sequence.
    pub ratio_ok: bool,
    pub evaluation_zero: bool,
}

impl RigidityReport {
    pub fn all_congruences_pass(&self) -> bool {
        self.first_failure.is_none()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "q": self.q,
            "congruences": self.congruences.iter().map(|c| json!({"n": c.n, "d_n": c.d_n, "pass": c.pass})).collect::<Vec<_>>(),
            "first_failure": self.first_failure,
            "ratio_ok": self.ratio_ok,
            "evaluation_zero": self.evaluation_zero,
        })
    }
}

/// Checks the congruences f(g, h^{q^n}) ≡ 0 mod (X)^{d_n} (or with g
/// powered) and evaluates f(g(X), h(Y)) on disjoint variables.
pub fn rigidity_check(
    f: &OrdinaryPolynomial,
    g: &[PerfectedSeries],
    h: &[PerfectedSeries],
    r: u32,
    d_seq: &[u64],
    powered: PoweredBlock,
) -> Result<RigidityReport> {
    if d_seq.is_empty() {
        return Err(Error::SequenceTooShort);
    }
    if r == 0 {
        return Err(Error::Precondition("r must be positive".into()));
    }
    let first = g.first().or(h.first()).ok_or_else(|| Error::Precondition("no series given".into()))?;
    let p = first.p();
    let bound = g.iter().chain(h).map(|s| s.bound).min().expect("nonempty");
    let certified = bound.floor().to_integer();
    for &d in d_seq {
        if d as i64 > certified {
            return Err(Error::DegreeBoundTooSmall { needed: d, bound: bound.to_string() });
        }
    }
    let q = p.checked_pow(r).ok_or_else(|| Error::Precondition("q = p^r overflows".into()))?;
    let ratio_ok = d_seq.windows(2).all(|w| (w[1] as u128) > (q as u128) * (w[0] as u128));
    let raise = |s: &PerfectedSeries, times: usize| {
        (0..times).fold(s.clone(), |acc, _| acc.frobenius(Direction::Forward, Flavor::Absolute))
    };
    let mut congruences = Vec::with_capacity(d_seq.len());
    for (n, &d) in d_seq.iter().enumerate() {
        let steps = n * r as usize;
        let (gg, hh): (Vec<_>, Vec<_>) = match powered {
            PoweredBlock::G => (g.iter().map(|s| raise(s, steps)).collect(), h.to_vec()),
            PoweredBlock::H => (g.to_vec(), h.iter().map(|s| raise(s, steps)).collect()),
        };
        let value = compose(f, &gg, &hh)?;
        let pass = value.truncate_ideal(IdealKind::Power, d as u32).is_zero();
        congruences.push(Congruence { n, d_n: d, pass });
    }
    let first_failure = congruences.iter().find(|c| !c.pass).map(|c| c.n);
    let nv = first.nvars;
    let total = if h.is_empty() || g.is_empty() { nv } else { 2 * nv };
    let gx = g.iter().map(|s| s.embed(total, 0)).collect::<Result<Vec<_>>>()?;
    let offset = if g.is_empty() { 0 } else { total - nv };
    let hy = h.iter().map(|s| s.embed(total, offset)).collect::<Result<Vec<_>>>()?;
    let evaluation_zero = compose(f, &gx, &hy)?.is_zero();
    Ok(RigidityReport { q, congruences, first_failure, ratio_ok, evaluation_zero })
}

/// Smallest positive (a, r, s) with a/r = μ₁ and a/s = μ₀.
pub fn slope_exponents(mu1: Rational64, mu0: Rational64) -> Result<(i64, i64, i64)> {
    if mu0 >= mu1 {
        return Err(Error::SlopeOrderViolated { mu0: mu0.to_string(), mu1: mu1.to_string() });
    }
    if !mu0.is_positive() || mu1 > Rational64::one() {
        return Err(Error::Precondition("need 0 < mu0 < mu1 <= 1".into()));
    }
    let a = mu1.numer().lcm(mu0.numer());
    let r = a / mu1.numer() * mu1.denom();
    let s = a / mu0.numer() * mu0.denom();
    if s <= r {
        return Err(Error::InvariantViolated("s > r fails".into()));
    }
    Ok((a, r, s))
}

/// Exponent as (num, pexp) with value num/p^pexp.
pub fn exponent_parts(x: Rational64, p: u64) -> Option<(i64, u32)> {
    p_adic_denominator_exp(x, p).map(|e| (*x.numer(), e))
}

/// Value of num/p^pexp.
pub fn exponent_from_parts(num: i64, pexp: u32, p: u64) -> Result<Rational64> {
    let den = (p as i64).checked_pow(pexp).ok_or_else(|| Error::Malformed("exponent denominator overflows".into()))?;
    Ok(Rational64::new(num, den))
}

/// Numerical value of |I|_∞ for reporting.
pub fn sup_norm_f64(i: &[Rational64]) -> f64 {
    sup_norm(i).to_f64().unwrap_or(f64::NAN)
}
