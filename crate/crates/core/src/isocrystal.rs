//! F-isocrystals over Q_q: a matrix F acting by Φ(v) = F·σ(v).

use std::fmt;
use std::sync::Arc;

use num_rational::Rational64;
use num_traits::Zero;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::newton::{eval_at_matrix, hensel_split_at, root_valuations};
use crate::padic::{field_spec_from_json, field_spec_to_json, FieldSpec, PadicScalar, Valuation};

/// Slopes with multiplicities, strictly increasing, multiplicities positive.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct SlopeMultiset {
    entries: Vec<(Rational64, usize)>,
}

impl SlopeMultiset {
    /// Merges equal slopes, sorts, and drops zero multiplicities.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (Rational64, usize)>) -> SlopeMultiset {
        let mut v: Vec<(Rational64, usize)> = pairs.into_iter().filter(|&(_, m)| m > 0).collect();
        v.sort();
        let mut entries: Vec<(Rational64, usize)> = Vec::new();
        for (s, m) in v {
            match entries.last_mut() {
                Some(last) if last.0 == s => last.1 += m,
                _ => entries.push((s, m)),
            }
        }
        SlopeMultiset { entries }
    }

    pub fn entries(&self) -> &[(Rational64, usize)] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn rank(&self) -> usize {
        self.entries.iter().map(|e| e.1).sum()
    }

    /// Σ slope · multiplicity.
    pub fn weighted_sum(&self) -> Rational64 {
        self.entries.iter().fold(Rational64::zero(), |acc, &(s, m)| acc + s * Rational64::from_integer(m as i64))
    }

    pub fn min_slope(&self) -> Option<Rational64> {
        self.entries.first().map(|e| e.0)
    }

    pub fn multiplicity(&self, slope: Rational64) -> usize {
        self.entries.iter().find(|e| e.0 == slope).map_or(0, |e| e.1)
    }

    pub fn negated(&self) -> SlopeMultiset {
        SlopeMultiset::from_pairs(self.entries.iter().map(|&(s, m)| (-s, m)))
    }

    pub fn shifted(&self, by: Rational64) -> SlopeMultiset {
        SlopeMultiset::from_pairs(self.entries.iter().map(|&(s, m)| (s + by, m)))
    }

    pub fn union(&self, other: &SlopeMultiset) -> SlopeMultiset {
        SlopeMultiset::from_pairs(self.entries.iter().chain(&other.entries).copied())
    }

    /// Each slope repeated by multiplicity.
    pub fn expanded(&self) -> Vec<Rational64> {
        self.entries.iter().flat_map(|&(s, m)| std::iter::repeat_n(s, m)).collect()
    }

    pub fn to_json(&self) -> Value {
        Value::Array(self.entries.iter().map(|(s, m)| json!([s.to_string(), m])).collect())
    }

    pub fn from_json(v: &Value) -> Result<SlopeMultiset> {
        let arr = v.as_array().ok_or_else(|| Error::Malformed("slope multiset must be an array".into()))?;
        let mut pairs = Vec::new();
        for e in arr {
            let pair = e
                .as_array()
                .filter(|a| a.len() == 2)
                .ok_or_else(|| Error::Malformed("slope entry must be [slope, mult]".into()))?;
            let s = parse_rational64(&pair[0])?;
            let m = pair[1]
                .as_u64()
                .ok_or_else(|| Error::Malformed("multiplicity must be a nonnegative integer".into()))?;
            pairs.push((s, m as usize));
        }
        Ok(SlopeMultiset::from_pairs(pairs))
    }
}

impl fmt::Display for SlopeMultiset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.entries.iter().map(|(s, m)| format!("({s}, {m})")).collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

/// Parses a rational from a JSON integer or a "a/b" string.
pub fn parse_rational64(v: &Value) -> Result<Rational64> {
    if let Some(i) = v.as_i64() {
        return Ok(Rational64::from_integer(i));
    }
    let s = v.as_str().ok_or_else(|| Error::Malformed(format!("expected a rational, got {v}")))?;
    parse_rational64_str(s)
}

pub fn parse_rational64_str(s: &str) -> Result<Rational64> {
    let bad = || Error::Malformed(format!("bad rational {s:?}"));
    let s = s.trim();
    match s.split_once('/') {
        Some((a, b)) => {
            let a: i64 = a.trim().parse().map_err(|_| bad())?;
            let b: i64 = b.trim().parse().map_err(|_| bad())?;
            if b == 0 {
                return Err(bad());
            }
            Ok(Rational64::new(a, b))
        }
        None => Ok(Rational64::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

/// One isoclinic summand of a slope decomposition.
#[derive(Clone, Debug)]
pub struct SlopeBlock {
    pub slope: Rational64,
    /// Columns span the summand; canonical reduced echelon form.
    pub basis: Mat,
    /// Matrix of Φ on the summand in the returned basis.
    pub frobenius: Mat,
    /// Rank of the simple isocrystal of this slope (its reduced denominator).
    pub simple_rank: usize,
    /// Number of simple summands of that rank.
    pub simple_count: usize,
}

impl SlopeBlock {
    pub fn rank(&self) -> usize {
        self.basis.cols()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "slope": self.slope.to_string(),
            "basis": self.basis.to_json(),
            "frobenius": self.frobenius.to_json(),
            "simple_rank": self.simple_rank,
            "simple_count": self.simple_count,
        })
    }
}

/// Which slopes [`Isocrystal::slope_part`] keeps.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SlopePredicate {
    NonPositive,
    Negative,
    Equal(Rational64),
}

impl SlopePredicate {
    pub fn holds(self, s: Rational64) -> bool {
        match self {
            SlopePredicate::NonPositive => s <= Rational64::zero(),
            SlopePredicate::Negative => s < Rational64::zero(),
            SlopePredicate::Equal(l) => s == l,
        }
    }

    pub fn parse(s: &str) -> Result<SlopePredicate> {
        match s {
            "<=0" | "le0" => Ok(SlopePredicate::NonPositive),
            "<0" | "lt0" => Ok(SlopePredicate::Negative),
            _ => {
                let rest = s.strip_prefix("=").unwrap_or(s);
                Ok(SlopePredicate::Equal(parse_rational64_str(rest)?))
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct Isocrystal {
    frobenius: Mat,
}

impl Isocrystal {
    /// Rejects non-square matrices and matrices whose determinant is zero to
    /// precision.
    pub fn new(frobenius: Mat) -> Result<Isocrystal> {
        if !frobenius.is_square() {
            return Err(Error::DimensionMismatch("Frobenius matrix must be square".into()));
        }
        if frobenius.rows() > 0 && frobenius.det().is_zero() {
            return Err(Error::NonInvertible);
        }
        Ok(Isocrystal { frobenius })
    }

    /// The zero isocrystal.
    pub fn zero(spec: &Arc<FieldSpec>) -> Isocrystal {
        Isocrystal { frobenius: Mat::zeros(spec, 0, 0) }
    }

    /// Diagonal isocrystal with entries p^{e_i}.
    pub fn diagonal_powers(spec: &Arc<FieldSpec>, exps: &[i64]) -> Isocrystal {
        let d: Vec<PadicScalar> = exps.iter().map(|&e| PadicScalar::p_power(spec, e)).collect();
        Isocrystal { frobenius: Mat::diag(spec, &d) }
    }

    pub fn spec(&self) -> &Arc<FieldSpec> {
        self.frobenius.spec()
    }

    pub fn rank(&self) -> usize {
        self.frobenius.rows()
    }

    pub fn frobenius(&self) -> &Mat {
        &self.frobenius
    }

    /// Φ(v) = F·σ(v) applied to the columns of `m`.
    pub fn apply(&self, m: &Mat) -> Mat {
        self.frobenius.mul(&m.sigma())
    }

    /// Φ^{-1}(v) = σ^{-1}(F^{-1} v) applied to the columns of `m`.
    pub fn apply_inverse(&self, m: &Mat) -> Result<Mat> {
        Ok(self.frobenius.inverse()?.mul(m).sigma_inv())
    }

    /// The linear map Φ^f = F·σ(F)·…·σ^{f-1}(F).
    pub fn linearization(&self) -> Mat {
        let f = self.spec().degree();
        let mut acc = self.frobenius.clone();
        let mut cur = self.frobenius.clone();
        for _ in 1..f {
            cur = cur.sigma();
            acc = acc.mul(&cur);
        }
        acc
    }

    /// A^{-1}·F·σ(A): the matrix of Φ in the basis given by the columns of A.
    pub fn change_basis(&self, a: &Mat) -> Result<Isocrystal> {
        let m = a.inverse()?.mul(&self.frobenius).mul(&a.sigma());
        Isocrystal::new(m)
    }

    /// Multiplies the Frobenius by p^k, shifting every slope by k.
    pub fn twist(&self, k: i64) -> Isocrystal {
        let c = PadicScalar::p_power(self.spec(), k);
        Isocrystal { frobenius: self.frobenius.scale(&c) }
    }

    pub fn direct_sum(&self, other: &Isocrystal) -> Isocrystal {
        Isocrystal { frobenius: Mat::block_diag(self.spec(), &[self.frobenius.clone(), other.frobenius.clone()]) }
    }

    /// Matrix of Φ restricted to the Φ-stable span of the columns of `basis`
    /// (full column rank); `None` when the span is not Φ-stable.
    pub fn restricted_frobenius(&self, basis: &Mat) -> Result<Option<Mat>> {
        if basis.cols() == 0 {
            return Ok(Some(Mat::zeros(self.spec(), 0, 0)));
        }
        basis.solve(&self.apply(basis))
    }

    pub fn newton_slopes(&self) -> Result<SlopeMultiset> {
        let n = self.rank();
        if n == 0 {
            return Ok(SlopeMultiset::default());
        }
        let f = self.spec().degree() as i64;
        let l = self.linearization();
        let shift = -l.min_valuation().ok_or(Error::NonInvertible)?.min(0);
        let lp = l.scale(&PadicScalar::p_power(self.spec(), shift));
        let cp = lp.charpoly();
        for (i, c) in cp.iter().enumerate() {
            if !c.is_sigma_fixed() {
                return Err(Error::InvariantViolated(format!(
                    "characteristic polynomial coefficient {i} is not Frobenius-invariant"
                )));
            }
        }
        let roots = root_valuations(&cp)?;
        let pairs =
            roots.into_iter().map(|(w, m)| ((w - Rational64::from_integer(shift)) / Rational64::from_integer(f), m));
        Ok(SlopeMultiset::from_pairs(pairs))
    }

    /// Decomposition into isoclinic summands over the given field.
    ///
    /// Isoclinic blocks are never split further into simple objects; each
    /// block reports the rank and number of its simple constituents.
    pub fn slope_split(&self) -> Result<Vec<SlopeBlock>> {
        let n = self.rank();
        let spec = self.spec().clone();
        let slopes = self.newton_slopes()?;
        let entries = slopes.entries().to_vec();
        if entries.is_empty() {
            return Ok(Vec::new());
        }
        let mut bases: Vec<Mat> = vec![Mat::identity(&spec, n); entries.len()];
        if entries.len() > 1 {
            let l = self.linearization();
            let f = spec.degree() as i64;
            for i in 0..entries.len() - 1 {
                let (u, b) = simplest_between(entries[i].0, entries[i + 1].0);
                let above: usize = entries[i + 1..].iter().map(|e| e.1).sum();
                let k = l.pow(b as u32).scale(&PadicScalar::p_power(&spec, -f * u));
                let (upper, lower) = split_at_zero_valuation(&k, above)?;
                for (j, basis) in bases.iter_mut().enumerate() {
                    let part = if j <= i { &lower } else { &upper };
                    *basis = basis.intersect(part);
                }
            }
        }
        let mut blocks = Vec::with_capacity(entries.len());
        for (basis, &(slope, mult)) in bases.into_iter().zip(&entries) {
            let basis = basis.column_basis();
            if basis.cols() != mult {
                return Err(Error::precision(format!(
                    "slope {slope} summand has dimension {} instead of {mult}",
                    basis.cols()
                )));
            }
            let frob = self
                .restricted_frobenius(&basis)?
                .ok_or_else(|| Error::InvariantViolated(format!("slope {slope} summand is not Frobenius-stable")))?;
            let r = *slope.denom() as usize;
            blocks.push(SlopeBlock { slope, basis, frobenius: frob, simple_rank: r, simple_count: mult / r });
        }
        let all: Vec<Mat> = blocks.iter().map(|b| b.basis.clone()).collect();
        let stacked = all.iter().skip(1).fold(all[0].clone(), |acc, m| acc.hstack(m));
        if stacked.rank() != n {
            return Err(Error::precision("slope summands do not span the whole space"));
        }
        Ok(blocks)
    }

    /// The direct sum of the slope summands whose slope satisfies `pred`,
    /// together with its inclusion matrix (columns are the embedded basis).
    pub fn slope_part(&self, pred: SlopePredicate) -> Result<(Isocrystal, Mat)> {
        let spec = self.spec().clone();
        let chosen: Vec<Mat> =
            self.slope_split()?.into_iter().filter(|b| pred.holds(b.slope)).map(|b| b.basis).collect();
        if chosen.is_empty() {
            return Ok((Isocrystal::zero(&spec), Mat::zeros(&spec, self.rank(), 0)));
        }
        let emb = chosen.iter().skip(1).fold(chosen[0].clone(), |acc, m| acc.hstack(m));
        let frob = self
            .restricted_frobenius(&emb)?
            .ok_or_else(|| Error::InvariantViolated("slope part is not Frobenius-stable".into()))?;
        Ok((Isocrystal { frobenius: frob }, emb))
    }

    /// Hom(Y, Z) with Frobenius g ↦ Φ_Z ∘ g ∘ Φ_Y^{-1}, in the basis E_{ij}
    /// (i indexing Z, j indexing Y) ordered row-major.
    pub fn internal_hom(y: &Isocrystal, z: &Isocrystal) -> Result<Isocrystal> {
        if !y.spec().same_as(z.spec()) {
            return Err(Error::SpecMismatch);
        }
        let spec = y.spec().clone();
        let (ny, nz) = (y.rank(), z.rank());
        if ny == 0 || nz == 0 {
            return Ok(Isocrystal::zero(&spec));
        }
        let fy_inv = y.frobenius.inverse()?;
        let fz = &z.frobenius;
        let m = Mat::from_fn(&spec, nz * ny, nz * ny, |r, c| {
            let (i, j) = (r / ny, r % ny);
            let (k, l) = (c / ny, c % ny);
            fz.get(i, k).mul(fy_inv.get(l, j))
        });
        Isocrystal::new(m)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "spec": field_spec_to_json(self.spec()),
            "rank": self.rank(),
            "frobenius": self.frobenius.to_json(),
        })
    }

    pub fn from_json(v: &Value, default_prec: u32) -> Result<Isocrystal> {
        let spec = field_spec_from_json(
            v.get("spec").ok_or_else(|| Error::Malformed("isocrystal needs \"spec\"".into()))?,
            default_prec,
        )?;
        Isocrystal::from_json_with_spec(&spec, v)
    }

    pub fn from_json_with_spec(spec: &Arc<FieldSpec>, v: &Value) -> Result<Isocrystal> {
        let m = Mat::from_json(
            spec,
            v.get("frobenius").ok_or_else(|| Error::Malformed("isocrystal needs \"frobenius\"".into()))?,
        )?;
        if let Some(r) = v.get("rank") {
            if r.as_u64() != Some(m.rows() as u64) {
                return Err(Error::Malformed("\"rank\" does not match the Frobenius matrix".into()));
            }
        }
        Isocrystal::new(m)
    }
}

/// The rational u/b with smallest denominator strictly between `lo` and `hi`.
pub fn simplest_between(lo: Rational64, hi: Rational64) -> (i64, i64) {
    let mut b = 1i64;
    loop {
        let u = (lo * Rational64::from_integer(b)).floor().to_integer() + 1;
        if Rational64::new(u, b) < hi {
            return (u, b);
        }
        b += 1;
    }
}

/// For a linear map K without eigenvalues of valuation 0, returns bases of
/// the sums of generalized eigenspaces with eigenvalues of positive and of
/// negative valuation; `above` is the expected dimension of the first.
fn split_at_zero_valuation(k: &Mat, above: usize) -> Result<(Mat, Mat)> {
    let spec = k.spec().clone();
    let n = k.rows();
    let q = k.charpoly();
    let c = match q[above].valuation() {
        Valuation::Exact(v) => -v,
        Valuation::AtLeast(_) => return Err(Error::precision("break vertex of the polygon is not certified")),
    };
    let qh: Vec<PadicScalar> = q.iter().map(|x| x.shift(c)).collect();
    for (i, x) in qh.iter().enumerate() {
        let ok = if i == above { true } else { x.is_integral() == Some(true) && x.valuation().value() >= 1 };
        if !ok {
            return Err(Error::precision(format!("coefficient {i} does not certify the slope break")));
        }
    }
    let (a, b) = hensel_split_at(&qh, above, &spec)?;
    let upper = eval_at_matrix(&a, k).kernel();
    let lower = eval_at_matrix(&b, k).kernel();
    if upper.cols() != above || lower.cols() != n - above {
        return Err(Error::precision("kernel dimensions do not match the slope multiplicities"));
    }
    Ok((upper, lower))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(a: i64, b: i64) -> Rational64 {
        Rational64::new(a, b)
    }

    #[test]
    fn simplest_rationals() {
        assert_eq!(simplest_between(r(-1, 1), r(0, 1)), (-1, 2));
        assert_eq!(simplest_between(r(-1, 2), r(0, 1)), (-1, 3));
        assert_eq!(simplest_between(r(-3, 1), r(1, 1)), (-2, 1));
    }

    #[test]
    fn multiset_merges_and_sums() {
        let m = SlopeMultiset::from_pairs(vec![(r(0, 1), 1), (r(-1, 2), 1), (r(-1, 2), 1)]);
        assert_eq!(m.entries(), &[(r(-1, 2), 2), (r(0, 1), 1)]);
        assert_eq!(m.weighted_sum(), r(-1, 1));
        assert_eq!(m.to_json(), json!([["-1/2", 2], ["0", 1]]));
        assert_eq!(SlopeMultiset::from_json(&m.to_json()).unwrap(), m);
    }

    #[test]
    fn predicate_parsing() {
        assert_eq!(SlopePredicate::parse("<=0").unwrap(), SlopePredicate::NonPositive);
        assert_eq!(SlopePredicate::parse("=-1/2").unwrap(), SlopePredicate::Equal(r(-1, 2)));
    }
}
