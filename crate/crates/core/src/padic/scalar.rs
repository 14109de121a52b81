use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::{json, Value};

use super::field::FieldSpec;
use crate::error::{Error, Result};

/// Valuation of a p-adic scalar: exact for nonzero values, a lower bound
/// for values that are zero to the tracked precision.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Valuation {
    Exact(i64),
    AtLeast(i64),
}

impl Valuation {
    /// The exact value or the bound.
    pub fn value(self) -> i64 {
        match self {
            Valuation::Exact(v) | Valuation::AtLeast(v) => v,
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Exact(v) => write!(f, "{v}"),
            Valuation::AtLeast(b) => write!(f, ">= {b}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Repr {
    /// congruent to zero modulo p^bound
    Zero { bound: i64 },
    /// p^val * unit, unit known modulo p^rel and invertible mod p
    Unit { val: i64, rel: u32, unit: Vec<BigInt> },
}

/// Element of Q_q at finite precision.
#[derive(Clone)]
pub struct PadicScalar {
    spec: Arc<FieldSpec>,
    repr: Repr,
}

impl fmt::Debug for PadicScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.repr {
            Repr::Zero { bound } => write!(f, "O({}^{})", self.spec.p(), bound),
            Repr::Unit { val, rel, unit } => {
                let u: Vec<String> = unit.iter().map(|c| c.to_string()).collect();
                write!(f, "{}^{}*[{}] + O(rel {})", self.spec.p(), val, u.join(","), rel)
            }
        }
    }
}

impl PadicScalar {
    /// Builds `p^val * c` where `c` (coordinates over Z) is known modulo
    /// p^k, extracting the valuation of `c`.
    fn normalize(spec: &Arc<FieldSpec>, val: i64, mut c: Vec<BigInt>, k: u32) -> PadicScalar {
        spec.reduce(&mut c, k);
        let pb = spec.p_big();
        let mut w = 0u32;
        while w < k && c.iter().all(|x| x.is_zero() || x.is_multiple_of(&pb)) {
            if c.iter().all(|x| x.is_zero()) {
                w = k;
                break;
            }
            for x in c.iter_mut() {
                *x = &*x / &pb;
            }
            w += 1;
        }
        if w >= k {
            return PadicScalar { spec: spec.clone(), repr: Repr::Zero { bound: val + k as i64 } };
        }
        let rel = (k - w).min(spec.precision());
        spec.reduce(&mut c, rel);
        PadicScalar { spec: spec.clone(), repr: Repr::Unit { val: val + w as i64, rel, unit: c } }
    }

    /// Zero to the full precision N.
    pub fn zero(spec: &Arc<FieldSpec>) -> Self {
        PadicScalar { spec: spec.clone(), repr: Repr::Zero { bound: spec.precision() as i64 } }
    }

    /// Zero known only modulo p^bound.
    pub fn zero_to(spec: &Arc<FieldSpec>, bound: i64) -> Self {
        PadicScalar { spec: spec.clone(), repr: Repr::Zero { bound } }
    }

    pub fn one(spec: &Arc<FieldSpec>) -> Self {
        Self::from_int(spec, 1)
    }

    pub fn from_int(spec: &Arc<FieldSpec>, n: i64) -> Self {
        Self::from_bigint(spec, &BigInt::from(n))
    }

    pub fn from_bigint(spec: &Arc<FieldSpec>, n: &BigInt) -> Self {
        let mut c = vec![BigInt::zero(); spec.degree()];
        c[0] = n.clone();
        Self::from_coeffs(spec, &c)
    }

    /// Element of Z_q with the given coordinates in the basis 1, t, ..., t^{f-1}.
    pub fn from_coeffs(spec: &Arc<FieldSpec>, coeffs: &[BigInt]) -> Self {
        let mut c: Vec<BigInt> = coeffs.to_vec();
        c.resize(spec.degree(), BigInt::zero());
        Self::normalize(spec, 0, c, spec.precision())
    }

    /// `p^val * (coordinates)`, coordinates taken at full precision.
    pub fn from_parts(spec: &Arc<FieldSpec>, val: i64, coeffs: &[BigInt]) -> Self {
        let mut c: Vec<BigInt> = coeffs.to_vec();
        c.resize(spec.degree(), BigInt::zero());
        Self::normalize(spec, val, c, spec.precision())
    }

    pub fn from_rational(spec: &Arc<FieldSpec>, q: &BigRational) -> Self {
        let num = Self::from_bigint(spec, q.numer());
        let den = Self::from_bigint(spec, q.denom());
        num.div(&den).expect("rational denominators are nonzero")
    }

    pub fn from_ratio(spec: &Arc<FieldSpec>, num: i64, den: i64) -> Self {
        Self::from_rational(spec, &BigRational::new(num.into(), den.into()))
    }

    /// p^k.
    pub fn p_power(spec: &Arc<FieldSpec>, k: i64) -> Self {
        let mut c = vec![BigInt::zero(); spec.degree()];
        c[0] = BigInt::one();
        PadicScalar { spec: spec.clone(), repr: Repr::Unit { val: k, rel: spec.precision(), unit: c } }
    }

    /// The class of t, the generator of the residue field lift.
    pub fn generator(spec: &Arc<FieldSpec>) -> Self {
        let mut c = vec![BigInt::zero(); spec.degree()];
        if spec.degree() == 1 {
            c[0] = -spec.modulus()[0].clone();
        } else {
            c[1] = BigInt::one();
        }
        Self::from_coeffs(spec, &c)
    }

    pub fn spec(&self) -> &Arc<FieldSpec> {
        &self.spec
    }

    pub fn valuation(&self) -> Valuation {
        match &self.repr {
            Repr::Zero { bound } => Valuation::AtLeast(*bound),
            Repr::Unit { val, .. } => Valuation::Exact(*val),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.repr, Repr::Zero { .. })
    }

    /// The value is known modulo p^abs_prec.
    pub fn abs_prec(&self) -> i64 {
        match &self.repr {
            Repr::Zero { bound } => *bound,
            Repr::Unit { val, rel, .. } => val + *rel as i64,
        }
    }

    pub fn rel_prec(&self) -> u32 {
        match &self.repr {
            Repr::Zero { .. } => 0,
            Repr::Unit { rel, .. } => *rel,
        }
    }

    /// Unit coordinates (empty slice for zero).
    pub fn unit(&self) -> &[BigInt] {
        match &self.repr {
            Repr::Zero { .. } => &[],
            Repr::Unit { unit, .. } => unit,
        }
    }

    /// Whether the value lies in Z_q. `None` when a zero is not known
    /// modulo p^0.
    pub fn is_integral(&self) -> Option<bool> {
        match &self.repr {
            Repr::Zero { bound } => {
                if *bound >= 0 {
                    Some(true)
                } else {
                    None
                }
            }
            Repr::Unit { val, .. } => Some(*val >= 0),
        }
    }

    /// Whether the value is zero with at least one certified digit above
    /// the given valuation floor; used to decide indeterminate checks.
    pub fn is_certified_zero(&self, floor: i64) -> Option<bool> {
        match &self.repr {
            Repr::Zero { bound } if *bound > floor => Some(true),
            Repr::Zero { .. } => None,
            Repr::Unit { .. } => Some(false),
        }
    }

    fn check_spec(&self, other: &PadicScalar) {
        assert!(
            Arc::ptr_eq(&self.spec, &other.spec) || self.spec.same_as(&other.spec),
            "mixing scalars from different fields"
        );
    }

    /// Coordinates of `p^-shift * self` as integers mod p^k, for `shift <= val`.
    fn scaled_coords(&self, shift: i64, k: u32) -> Vec<BigInt> {
        match &self.repr {
            Repr::Zero { .. } => vec![BigInt::zero(); self.spec.degree()],
            Repr::Unit { val, unit, .. } => {
                let e = val - shift;
                debug_assert!(e >= 0);
                if e >= k as i64 {
                    return vec![BigInt::zero(); self.spec.degree()];
                }
                let m = self.spec.pow(e as u32);
                unit.iter().map(|c| c * &m).collect()
            }
        }
    }

    pub fn add(&self, other: &PadicScalar) -> PadicScalar {
        self.check_spec(other);
        match (&self.repr, &other.repr) {
            (Repr::Zero { bound: a }, Repr::Zero { bound: b }) => PadicScalar::zero_to(&self.spec, (*a).min(*b)),
            (Repr::Zero { bound }, _) => other.truncate_abs(*bound),
            (_, Repr::Zero { bound }) => self.truncate_abs(*bound),
            (Repr::Unit { val: va, .. }, Repr::Unit { val: vb, .. }) => {
                let v = (*va).min(*vb);
                let abs = self.abs_prec().min(other.abs_prec());
                let k = (abs - v) as u32;
                let a = self.scaled_coords(v, k);
                let b = other.scaled_coords(v, k);
                let c: Vec<BigInt> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
                PadicScalar::normalize(&self.spec, v, c, k)
            }
        }
    }

    pub fn neg(&self) -> PadicScalar {
        match &self.repr {
            Repr::Zero { .. } => self.clone(),
            Repr::Unit { val, rel, unit } => {
                let c: Vec<BigInt> = unit.iter().map(|x| -x).collect();
                PadicScalar::normalize(&self.spec, *val, c, *rel)
            }
        }
    }

    pub fn sub(&self, other: &PadicScalar) -> PadicScalar {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &PadicScalar) -> PadicScalar {
        self.check_spec(other);
        match (&self.repr, &other.repr) {
            (Repr::Zero { bound: a }, Repr::Zero { bound: b }) => PadicScalar::zero_to(&self.spec, a + b),
            (Repr::Zero { bound }, Repr::Unit { val, .. }) | (Repr::Unit { val, .. }, Repr::Zero { bound }) => {
                PadicScalar::zero_to(&self.spec, bound + val)
            }
            (Repr::Unit { val: va, rel: ra, unit: ua }, Repr::Unit { val: vb, rel: rb, unit: ub }) => {
                let rel = (*ra).min(*rb);
                let unit = self.spec.mul_res(ua, ub, rel);
                PadicScalar { spec: self.spec.clone(), repr: Repr::Unit { val: va + vb, rel, unit } }
            }
        }
    }

    pub fn inv(&self) -> Result<PadicScalar> {
        match &self.repr {
            Repr::Zero { .. } => Err(Error::DivisionByZero),
            Repr::Unit { val, rel, unit } => {
                if *rel == 0 {
                    return Err(Error::PrecisionExhausted);
                }
                let inv = self.spec.inv_res(unit, *rel).ok_or(Error::DivisionByZero)?;
                Ok(PadicScalar { spec: self.spec.clone(), repr: Repr::Unit { val: -val, rel: *rel, unit: inv } })
            }
        }
    }

    pub fn div(&self, other: &PadicScalar) -> Result<PadicScalar> {
        Ok(self.mul(&other.inv()?))
    }

    /// Frobenius lift sigma, applied to coordinates.
    pub fn sigma(&self) -> PadicScalar {
        match &self.repr {
            Repr::Zero { .. } => self.clone(),
            Repr::Unit { val, rel, unit } => {
                let u = self.spec.sigma_res(unit, *rel);
                PadicScalar::normalize(&self.spec, *val, u, *rel)
            }
        }
    }

    pub fn sigma_inv(&self) -> PadicScalar {
        match &self.repr {
            Repr::Zero { .. } => self.clone(),
            Repr::Unit { val, rel, unit } => {
                let u = self.spec.sigma_inv_res(unit, *rel);
                PadicScalar::normalize(&self.spec, *val, u, *rel)
            }
        }
    }

    /// sigma^k for any integer k.
    pub fn sigma_pow(&self, k: i64) -> PadicScalar {
        let f = self.spec.degree() as i64;
        let k = k.rem_euclid(f);
        let mut x = self.clone();
        for _ in 0..k {
            x = x.sigma();
        }
        x
    }

    /// Coordinates in the basis 1, t, ..., t^{f-1} as elements of the prime
    /// field `base` (which must have f = 1 and the same p).
    pub fn coordinates(&self, base: &Arc<FieldSpec>) -> Vec<PadicScalar> {
        let f = self.spec.degree();
        match &self.repr {
            Repr::Zero { bound } => vec![PadicScalar::zero_to(base, *bound); f],
            Repr::Unit { val, rel, unit } => {
                unit.iter().map(|c| PadicScalar::normalize(base, *val, vec![c.clone()], *rel)).collect()
            }
        }
    }

    /// Inverse of [`PadicScalar::coordinates`].
    pub fn from_coordinates(spec: &Arc<FieldSpec>, coords: &[PadicScalar]) -> PadicScalar {
        let t = PadicScalar::generator(spec);
        let mut acc = PadicScalar::zero(spec);
        let mut tb = PadicScalar::one(spec);
        for c in coords {
            let x = match &c.repr {
                Repr::Zero { bound } => PadicScalar::zero_to(spec, *bound),
                Repr::Unit { val, rel, unit } => {
                    let mut v = vec![BigInt::zero(); spec.degree()];
                    v[0] = unit[0].clone();
                    PadicScalar::normalize(spec, *val, v, *rel)
                }
            };
            acc = acc.add(&x.mul(&tb));
            tb = tb.mul(&t);
        }
        acc
    }

    /// Forget digits at or beyond p^abs.
    pub fn truncate_abs(&self, abs: i64) -> PadicScalar {
        match &self.repr {
            Repr::Zero { bound } => PadicScalar::zero_to(&self.spec, (*bound).min(abs)),
            Repr::Unit { val, rel, unit } => {
                if abs <= *val {
                    return PadicScalar::zero_to(&self.spec, abs);
                }
                let new_rel = (*rel as i64).min(abs - val) as u32;
                if new_rel == *rel {
                    return self.clone();
                }
                PadicScalar::normalize(&self.spec, *val, unit.clone(), new_rel)
            }
        }
    }

    pub fn pow(&self, e: u32) -> PadicScalar {
        let mut acc = PadicScalar::one(&self.spec);
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// Multiply by p^k (exact).
    pub fn shift(&self, k: i64) -> PadicScalar {
        match &self.repr {
            Repr::Zero { bound } => PadicScalar::zero_to(&self.spec, bound + k),
            Repr::Unit { val, rel, unit } => PadicScalar {
                spec: self.spec.clone(),
                repr: Repr::Unit { val: val + k, rel: *rel, unit: unit.clone() },
            },
        }
    }

    /// Equality to the precision both sides carry.
    pub fn approx_eq(&self, other: &PadicScalar) -> bool {
        self.sub(other).is_zero()
    }

    /// Whether the value is fixed by sigma (lies in Q_p) to precision.
    pub fn is_sigma_fixed(&self) -> bool {
        self.sigma().approx_eq(self)
    }

    /// Best rational approximation of a Q_p-rational value: the unit's
    /// constant coordinate read as a balanced residue mod p^rel.
    /// Intended for display of small exact values.
    pub fn to_rational_guess(&self) -> Option<BigRational> {
        match &self.repr {
            Repr::Zero { .. } => Some(BigRational::zero()),
            Repr::Unit { val, rel, unit } => {
                if unit.iter().skip(1).any(|c| !c.is_zero()) {
                    return None;
                }
                let m = self.spec.pow(*rel);
                let q = rational_reconstruct(&unit[0], &m)?;
                let pp = BigRational::from_integer(self.spec.p_big());
                let scale = if *val >= 0 {
                    num_traits::pow(pp, *val as usize)
                } else {
                    num_traits::pow(pp.recip(), (-val) as usize)
                };
                Some(q * scale)
            }
        }
    }

    /// `{"valuation": v, "unit": [...]}`; zero is written with an all-zero
    /// unit and the precision bound as valuation. A `"rel"` field appears
    /// only when the unit carries fewer than N digits.
    pub fn to_json(&self) -> Value {
        match &self.repr {
            Repr::Zero { bound } => {
                let zeros: Vec<Value> = (0..self.spec.degree()).map(|_| json!(0)).collect();
                json!({"valuation": bound, "unit": zeros})
            }
            Repr::Unit { val, rel, unit } => {
                let u: Vec<Value> = unit.iter().map(bigint_json).collect();
                if *rel < self.spec.precision() {
                    json!({"valuation": val, "unit": u, "rel": rel})
                } else {
                    json!({"valuation": val, "unit": u})
                }
            }
        }
    }

    /// Accepts the object form, a bare integer, or a rational string
    /// such as `"-3/25"`.
    pub fn from_json(spec: &Arc<FieldSpec>, v: &Value) -> Result<PadicScalar> {
        match v {
            Value::Number(n) => {
                let i = n.as_i64().ok_or_else(|| Error::Malformed(format!("not an integer scalar: {n}")))?;
                Ok(PadicScalar::from_int(spec, i))
            }
            Value::String(s) => {
                let q = parse_rational(s)?;
                Ok(PadicScalar::from_rational(spec, &q))
            }
            Value::Object(map) => {
                let val = map
                    .get("valuation")
                    .and_then(Value::as_i64)
                    .ok_or_else(|| Error::Malformed("scalar needs integer \"valuation\"".into()))?;
                let unit = map
                    .get("unit")
                    .and_then(Value::as_array)
                    .ok_or_else(|| Error::Malformed("scalar needs array \"unit\"".into()))?;
                if unit.len() != spec.degree() {
                    return Err(Error::Malformed(format!(
                        "unit has {} coordinates, field degree is {}",
                        unit.len(),
                        spec.degree()
                    )));
                }
                let coeffs = unit.iter().map(json_bigint).collect::<Result<Vec<_>>>()?;
                if coeffs.iter().all(|c| c.is_zero()) {
                    return Ok(PadicScalar::zero_to(spec, val));
                }
                let rel = match map.get("rel") {
                    Some(r) => r
                        .as_u64()
                        .filter(|&r| r >= 1 && r <= spec.precision() as u64)
                        .ok_or_else(|| Error::Malformed("\"rel\" must be in [1, N]".into()))?
                        as u32,
                    None => spec.precision(),
                };
                Ok(PadicScalar::normalize(spec, val, coeffs, rel))
            }
            _ => Err(Error::Malformed(format!("cannot read scalar from {v}"))),
        }
    }
}

/// Balanced rational reconstruction of `a mod m` with numerator and
/// denominator bounded by sqrt(m/2).
fn rational_reconstruct(a: &BigInt, m: &BigInt) -> Option<BigRational> {
    let bound = num_integer::Roots::sqrt(&(m / BigInt::from(2)));
    let (mut r0, mut r1) = (m.clone(), a.mod_floor(m));
    let (mut t0, mut t1) = (BigInt::zero(), BigInt::one());
    while r1 > bound {
        let q = &r0 / &r1;
        let r2 = &r0 - &q * &r1;
        let t2 = &t0 - &q * &t1;
        r0 = r1;
        r1 = r2;
        t0 = t1;
        t1 = t2;
    }
    if t1.is_zero() || t1.abs() > bound {
        return None;
    }
    Some(BigRational::new(r1, t1))
}

pub(crate) fn bigint_json(c: &BigInt) -> Value {
    match c.to_i64() {
        Some(i) => json!(i),
        None => Value::String(c.to_string()),
    }
}

pub(crate) fn json_bigint(v: &Value) -> Result<BigInt> {
    match v {
        Value::Number(n) => {
            n.as_i64().map(BigInt::from).ok_or_else(|| Error::Malformed(format!("not an integer: {n}")))
        }
        Value::String(s) => s.trim().parse::<BigInt>().map_err(|_| Error::Malformed(format!("not an integer: {s}"))),
        _ => Err(Error::Malformed(format!("not an integer: {v}"))),
    }
}

/// Parses `"a"`, `"a/b"` with optional sign.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Malformed(format!("not a rational number: {s:?}"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(BigRational::new(n, d))
        }
        None => Ok(BigRational::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

impl Add for &PadicScalar {
    type Output = PadicScalar;
    fn add(self, rhs: &PadicScalar) -> PadicScalar {
        PadicScalar::add(self, rhs)
    }
}

impl Sub for &PadicScalar {
    type Output = PadicScalar;
    fn sub(self, rhs: &PadicScalar) -> PadicScalar {
        PadicScalar::sub(self, rhs)
    }
}

impl Mul for &PadicScalar {
    type Output = PadicScalar;
    fn mul(self, rhs: &PadicScalar) -> PadicScalar {
        PadicScalar::mul(self, rhs)
    }
}

impl Neg for &PadicScalar {
    type Output = PadicScalar;
    fn neg(self) -> PadicScalar {
        PadicScalar::neg(self)
    }
}
