//! Split classical root data with a Newton cocharacter: slopes of Lie U_ν,
//! the pairing ⟨2ρ, ν⟩, the nilpotency class of Lie U_ν and the Coxeter gate.
//!
//! Coordinates are those of the standard torus of GL(n). For GSp(2g) and
//! SO(n) a cocharacter ν must satisfy ν_i + ν_{n+1-i} = c for a constant c
//! (the similitude character), and for odd n the middle coordinate is c/2.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::{BigRational, Rational64};
use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};

use crate::dieudonne::pdiv_dimension;
use crate::error::{Error, Result};
use crate::isocrystal::{parse_rational64, Isocrystal, SlopeMultiset, SlopePredicate};
use crate::linalg::Mat;
use crate::padic::{FieldSpec, PadicScalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GroupType {
    GL,
    GSp,
    SO,
}

impl GroupType {
    pub fn parse(s: &str) -> Result<GroupType> {
        match s {
            "GL" => Ok(GroupType::GL),
            "GSp" => Ok(GroupType::GSp),
            "SO" => Ok(GroupType::SO),
            other => Err(Error::UnsupportedType(other.to_string())),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GroupType::GL => "GL",
            GroupType::GSp => "GSp",
            GroupType::SO => "SO",
        }
    }
}

impl fmt::Display for GroupType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A split classical group in its standard representation of dimension n
/// with a dominant rational cocharacter ν.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootDatumWithCochar {
    group: GroupType,
    n: usize,
    positive_roots: Vec<Vec<i64>>,
    simple_roots: Vec<Vec<i64>>,
    two_rho: Vec<i64>,
    nu: Vec<Rational64>,
}

fn root(n: usize, plus: usize, minus: usize) -> Vec<i64> {
    let mut v = vec![0; n];
    v[plus] += 1;
    v[minus] -= 1;
    v
}

/// Positive and simple roots, 0-based.
fn root_system(group: GroupType, n: usize) -> (Vec<Vec<i64>>, Vec<Vec<i64>>) {
    let mut pos = Vec::new();
    let mut simple = Vec::new();
    match group {
        GroupType::GL => {
            for i in 0..n {
                for j in i + 1..n {
                    pos.push(root(n, i, j));
                }
            }
            simple.extend((0..n.saturating_sub(1)).map(|i| root(n, i, i + 1)));
        }
        GroupType::GSp => {
            let g = n / 2;
            for i in 0..g {
                for j in i + 1..g {
                    pos.push(root(n, i, j));
                }
                for j in i..g {
                    pos.push(root(n, i, n - 1 - j));
                }
            }
            simple.extend((0..g.saturating_sub(1)).map(|i| root(n, i, i + 1)));
            if g >= 1 {
                simple.push(root(n, g - 1, g));
            }
        }
        GroupType::SO => {
            let m = n / 2;
            for i in 0..m {
                for j in i + 1..m {
                    pos.push(root(n, i, j));
                    pos.push(root(n, i, n - 1 - j));
                }
                if n % 2 == 1 {
                    pos.push(root(n, i, m));
                }
            }
            simple.extend((0..m.saturating_sub(1)).map(|i| root(n, i, i + 1)));
            if n % 2 == 1 && m >= 1 {
                simple.push(root(n, m - 1, m));
            } else if n.is_multiple_of(2) && m >= 2 {
                simple.push(root(n, m - 2, m));
            }
        }
    }
    (pos, simple)
}

fn pair(alpha: &[i64], nu: &[Rational64]) -> Rational64 {
    alpha.iter().zip(nu).fold(Rational64::zero(), |acc, (&a, &x)| acc + x * a)
}

impl RootDatumWithCochar {
    /// `n` is the dimension of the standard representation (2g for GSp(2g)).
    pub fn new(group: GroupType, n: usize, nu: Vec<Rational64>) -> Result<RootDatumWithCochar> {
        if n == 0 || (group == GroupType::GSp && n % 2 == 1) {
            return Err(Error::InvalidRootDatum(format!("{group}({n}) is not a supported group")));
        }
        if nu.len() != n {
            return Err(Error::InvalidRootDatum(format!("ν has {} coordinates, expected {n}", nu.len())));
        }
        if group != GroupType::GL {
            let c = nu[0] + nu[n - 1];
            let torus_ok = (0..n).all(|i| nu[i] + nu[n - 1 - i] == c);
            if !torus_ok {
                return Err(Error::InvalidRootDatum(format!(
                    "ν is not a cocharacter of {group}({n}): ν_i + ν_(n+1-i) must be constant"
                )));
            }
        }
        let (positive_roots, simple_roots) = root_system(group, n);
        for a in &simple_roots {
            if pair(a, &nu) < Rational64::zero() {
                return Err(Error::NotDominant(format!("simple root {a:?} pairs negatively with ν")));
            }
        }
        let mut two_rho = vec![0; n];
        for a in &positive_roots {
            for (t, x) in two_rho.iter_mut().zip(a) {
                *t += x;
            }
        }
        Ok(RootDatumWithCochar { group, n, positive_roots, simple_roots, two_rho, nu })
    }

    pub fn group(&self) -> GroupType {
        self.group
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nu(&self) -> &[Rational64] {
        &self.nu
    }

    pub fn positive_roots(&self) -> &[Vec<i64>] {
        &self.positive_roots
    }

    pub fn simple_roots(&self) -> &[Vec<i64>] {
        &self.simple_roots
    }

    pub fn two_rho(&self) -> &[i64] {
        &self.two_rho
    }

    pub fn pairings(&self) -> Vec<Rational64> {
        self.positive_roots.iter().map(|a| pair(a, &self.nu)).collect()
    }

    /// Slopes −⟨α, ν⟩ over positive roots with ⟨α, ν⟩ > 0.
    pub fn slope_multiset(&self) -> SlopeMultiset {
        SlopeMultiset::from_pairs(self.pairings().into_iter().filter(|x| x.is_positive()).map(|x| (-x, 1)))
    }

    /// ⟨2ρ, ν⟩.
    pub fn leaf_dimension(&self) -> Rational64 {
        pair(&self.two_rho, &self.nu)
    }

    /// Compares ⟨2ρ, ν⟩ with the dimension attached to the slope multiset.
    /// Slopes below −1 fall outside the range of p-divisible groups; for
    /// those the weight Σ(−λ)·mult is compared instead.
    pub fn dimension_identity(&self) -> Result<DimensionIdentity> {
        let slopes = self.slope_multiset();
        let leaf = self.leaf_dimension();
        let (in_range, other) = match pdiv_dimension(&slopes) {
            Ok(d) => (true, d),
            Err(Error::SlopeOutOfRange(_)) => (false, -slopes.weighted_sum()),
            Err(e) => return Err(e),
        };
        if leaf != other {
            return Err(Error::InvariantViolated(format!("⟨2ρ,ν⟩ = {leaf} but the slope dimension is {other}")));
        }
        Ok(DimensionIdentity { leaf_dimension: leaf, in_pdiv_range: in_range })
    }

    /// Invariant form J with g ∈ G iff gᵀJg is a multiple of J.
    fn form(&self) -> Option<Vec<Vec<i64>>> {
        let n = self.n;
        let half = n / 2;
        match self.group {
            GroupType::GL => None,
            GroupType::GSp => Some(
                (0..n)
                    .map(|i| {
                        (0..n)
                            .map(|j| {
                                if i + j == n - 1 {
                                    if i < half {
                                        1
                                    } else {
                                        -1
                                    }
                                } else {
                                    0
                                }
                            })
                            .collect()
                    })
                    .collect(),
            ),
            GroupType::SO => {
                Some((0..n).map(|i| (0..n).map(|j| if i + j == n - 1 { 1 } else { 0 }).collect()).collect())
            }
        }
    }

    /// Basis of the Lie algebra 𝔤 (including scalars for GL and the
    /// similitude groups), restricted to the entries allowed by `mask`.
    fn lie_basis(&self, mask: impl Fn(usize, usize) -> bool) -> Vec<QMat> {
        let n = self.n;
        let vars: Vec<(usize, usize)> =
            (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).filter(|&(i, j)| mask(i, j)).collect();
        let Some(jf) = self.form() else {
            return vars.iter().map(|&(i, j)| unit_qmat(n, i, j)).collect();
        };
        // unknowns X_v and the similitude factor c: XᵀJ + JX - cJ = 0
        let nv = vars.len() + 1;
        let mut rows = Vec::new();
        for a in 0..n {
            for b in 0..n {
                let mut row = vec![BigRational::zero(); nv];
                for (v, &(i, j)) in vars.iter().enumerate() {
                    // (XᵀJ)_ab = Σ_k X_ka J_kb, (JX)_ab = Σ_k J_ak X_kb
                    if j == a {
                        row[v] += qi(jf[i][b]);
                    }
                    if j == b {
                        row[v] += qi(jf[a][i]);
                    }
                }
                row[nv - 1] = -qi(jf[a][b]);
                rows.push(row);
            }
        }
        rational_kernel(rows, nv)
            .into_iter()
            .map(|k| {
                let mut m = vec![vec![BigRational::zero(); n]; n];
                for (v, &(i, j)) in vars.iter().enumerate() {
                    m[i][j] = k[v].clone();
                }
                m
            })
            .filter(|m| m.iter().flatten().any(|x| !x.is_zero()))
            .collect()
    }

    /// Explicit basis of Lie U_ν: the part of 𝔤 spanned by E_ij with ν_i > ν_j.
    pub fn unipotent_basis(&self) -> Vec<QMat> {
        let nu = self.nu.clone();
        self.lie_basis(|i, j| nu[i] > nu[j])
    }

    /// Dimensions of the lower central series of Lie U_ν, starting with
    /// Lie U_ν itself and ending with the last nonzero term.
    pub fn unipotent_lcs_dims(&self) -> Result<Vec<usize>> {
        let base = self.unipotent_basis();
        let expected = self.slope_multiset().rank();
        if base.len() != expected {
            return Err(Error::InvariantViolated(format!(
                "Lie U_ν has dimension {} but {expected} roots pair positively",
                base.len()
            )));
        }
        let mut dims = Vec::new();
        let mut current = base.clone();
        while !current.is_empty() {
            dims.push(current.len());
            let mut brackets = Vec::new();
            for x in &base {
                for y in &current {
                    brackets.push(flatten(&qm_sub(&qm_mul(x, y), &qm_mul(y, x))));
                }
            }
            let n = self.n;
            current = rational_row_basis(brackets, n * n).into_iter().map(|v| unflatten(&v, n)).collect();
        }
        Ok(dims)
    }

    /// n(Lie U_ν): the number of nonzero terms of the lower central series.
    pub fn unipotent_nilpotency(&self) -> Result<usize> {
        Ok(self.unipotent_lcs_dims()?.len())
    }

    /// The Coxeter number from the table used by the gate, and the Coxeter
    /// number of the root system.
    pub fn coxeter_numbers(&self) -> (usize, usize) {
        let n = self.n;
        match self.group {
            GroupType::GL => (n, n),
            GroupType::GSp => (n, n),
            GroupType::SO => {
                let m = n / 2;
                let table = 2 * m.saturating_sub(1);
                let classical = if n % 2 == 1 { 2 * m } else { table };
                (table, classical)
            }
        }
    }

    pub fn coxeter_gate(&self, p: u64) -> Result<CoxeterGate> {
        let (h, h_classical) = self.coxeter_numbers();
        let n_class = self.unipotent_nilpotency()?;
        let bound = h_classical.max(1) - 1;
        if n_class > bound {
            return Err(Error::InvariantViolated(format!("class {n_class} exceeds h - 1 = {bound}")));
        }
        Ok(CoxeterGate {
            h,
            h_classical,
            n_class,
            p_ge_h: p >= h as u64,
            p_ge_h_classical: p >= h_classical as u64,
            p_gt_n: p > n_class as u64,
            class_within_table_bound: n_class < h.max(1),
        })
    }

    /// Frobenius X ↦ b σ(X) b⁻¹ on 𝔤 in a rational basis of 𝔤.
    pub fn adjoint_isocrystal(&self, b: &Mat) -> Result<Isocrystal> {
        let n = self.n;
        let spec = b.spec().clone();
        if b.rows() != n || b.cols() != n {
            return Err(Error::DimensionMismatch(format!("b must be {n}x{n}")));
        }
        let b_inv = b.inverse()?;
        if let Some(jf) = self.form() {
            let j = Mat::from_fn(&spec, n, n, |r, c| PadicScalar::from_int(&spec, jf[r][c]));
            let g = b.transpose().mul(&j).mul(b);
            let lambda = g.get(0, n - 1).clone();
            if !g.approx_eq(&j.scale(&lambda)) || lambda.is_zero() {
                return Err(Error::NotInGroup(format!("b does not preserve the form of {}", self.group)));
            }
        }
        let basis = self.lie_basis(|_, _| true);
        let to_mat = |m: &QMat| Mat::from_fn(&spec, n, n, |r, c| PadicScalar::from_rational(&spec, &m[r][c]));
        let vecs: Vec<Vec<PadicScalar>> = basis
            .iter()
            .map(|m| {
                let mm = to_mat(m);
                (0..n * n).map(|k| mm.get(k / n, k % n).clone()).collect()
            })
            .collect();
        let system = Mat::from_cols(&spec, n * n, &vecs);
        let images: Vec<Vec<PadicScalar>> = basis
            .iter()
            .map(|m| {
                let im = b.mul(&to_mat(m)).mul(&b_inv);
                (0..n * n).map(|k| im.get(k / n, k % n).clone()).collect()
            })
            .collect();
        let rhs = Mat::from_cols(&spec, n * n, &images);
        let f = system
            .solve(&rhs)?
            .ok_or_else(|| Error::NotInGroup("conjugation by b does not preserve the Lie algebra".into()))?;
        Isocrystal::new(f)
    }

    /// A precision at which the adjoint isocrystal of diag(p^{−ν_i}) has a
    /// certified Newton polygon and slope decomposition.
    pub fn adjoint_working_precision(&self) -> u32 {
        let max = self.nu.iter().max().copied().unwrap_or_default();
        let min = self.nu.iter().min().copied().unwrap_or_default();
        let span = (max - min).ceil().to_integer() as u32;
        2 * (self.n * self.n) as u32 * span + 24
    }

    /// b = diag(p^{−ν_i}) for integral ν.
    pub fn diagonal_b(&self, spec: &Arc<FieldSpec>) -> Result<Mat> {
        let d = self
            .nu
            .iter()
            .map(|x| {
                if x.is_integer() {
                    Ok(PadicScalar::p_power(spec, -x.to_integer()))
                } else {
                    Err(Error::Precondition("diagonal b needs integral ν".into()))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Mat::diag(spec, &d))
    }

    /// Newton slopes of the strictly negative part of the adjoint
    /// isocrystal of b.
    pub fn adjoint_negative_slopes(&self, b: &Mat) -> Result<SlopeMultiset> {
        let iso = self.adjoint_isocrystal(b)?;
        let (neg, _) = iso.slope_part(SlopePredicate::Negative)?;
        neg.newton_slopes()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "type": self.group.name(),
            "n": self.n,
            "nu": self.nu.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value) -> Result<RootDatumWithCochar> {
        let group = GroupType::parse(
            v.get("type")
                .and_then(Value::as_str)
                .ok_or_else(|| Error::Malformed("root datum needs \"type\"".into()))?,
        )?;
        let n = v
            .get("n")
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::Malformed("root datum needs integer \"n\"".into()))? as usize;
        let nu = v
            .get("nu")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Malformed("root datum needs \"nu\"".into()))?
            .iter()
            .map(parse_rational64)
            .collect::<Result<Vec<_>>>()?;
        RootDatumWithCochar::new(group, n, nu)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DimensionIdentity {
    pub leaf_dimension: Rational64,
    /// Whether every slope lies in [−1, 0].
    pub in_pdiv_range: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoxeterGate {
    pub h: usize,
    pub h_classical: usize,
    pub n_class: usize,
    pub p_ge_h: bool,
    pub p_ge_h_classical: bool,
    pub p_gt_n: bool,
    /// n_class ≤ h − 1 for the tabulated h.
    pub class_within_table_bound: bool,
}

impl CoxeterGate {
    pub fn to_json(&self) -> Value {
        json!({
            "h": self.h,
            "h_classical": self.h_classical,
            "n_class": self.n_class,
            "p_ge_h": self.p_ge_h,
            "p_ge_h_classical": self.p_ge_h_classical,
            "p_gt_n": self.p_gt_n,
            "class_within_table_bound": self.class_within_table_bound,
        })
    }
}

/// All valid dominant cocharacters of the group with coordinates in `values`.
pub fn enumerate_cocharacters(group: GroupType, n: usize, values: &[i64]) -> Vec<RootDatumWithCochar> {
    let mut out = Vec::new();
    let mut idx = vec![0usize; n];
    if values.is_empty() {
        return out;
    }
    loop {
        let nu: Vec<Rational64> = idx.iter().map(|&k| Rational64::from_integer(values[k])).collect();
        if let Ok(d) = RootDatumWithCochar::new(group, n, nu) {
            out.push(d);
        }
        let mut pos = 0;
        loop {
            if pos == n {
                return out;
            }
            idx[pos] += 1;
            if idx[pos] < values.len() {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

pub type QMat = Vec<Vec<BigRational>>;

fn qi(x: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(x))
}

fn unit_qmat(n: usize, i: usize, j: usize) -> QMat {
    let mut m = vec![vec![BigRational::zero(); n]; n];
    m[i][j] = BigRational::one();
    m
}

fn qm_mul(a: &QMat, b: &QMat) -> QMat {
    let n = a.len();
    let mut out = vec![vec![BigRational::zero(); n]; n];
    for i in 0..n {
        for k in 0..n {
            if a[i][k].is_zero() {
                continue;
            }
            for j in 0..n {
                out[i][j] += &a[i][k] * &b[k][j];
            }
        }
    }
    out
}

fn qm_sub(a: &QMat, b: &QMat) -> QMat {
    a.iter().zip(b).map(|(r, s)| r.iter().zip(s).map(|(x, y)| x - y).collect()).collect()
}

fn flatten(m: &QMat) -> Vec<BigRational> {
    m.iter().flatten().cloned().collect()
}

fn unflatten(v: &[BigRational], n: usize) -> QMat {
    v.chunks(n).map(<[BigRational]>::to_vec).collect()
}

/// Reduced row echelon form; returns the nonzero rows and pivot columns.
fn rational_rref(mut rows: Vec<Vec<BigRational>>, width: usize) -> (Vec<Vec<BigRational>>, Vec<usize>) {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..width {
        let Some(piv) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, piv);
        let inv = BigRational::one() / &rows[r][c];
        rows[r] = rows[r].iter().map(|x| x * &inv).collect();
        for i in 0..rows.len() {
            if i != r && !rows[i][c].is_zero() {
                let f = rows[i][c].clone();
                let pivot_row = rows[r].clone();
                for (x, y) in rows[i].iter_mut().zip(&pivot_row) {
                    *x -= &f * y;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    rows.truncate(r);
    (rows, pivots)
}

fn rational_row_basis(rows: Vec<Vec<BigRational>>, width: usize) -> Vec<Vec<BigRational>> {
    rational_rref(rows, width).0
}

fn rational_kernel(rows: Vec<Vec<BigRational>>, width: usize) -> Vec<Vec<BigRational>> {
    let (red, pivots) = rational_rref(rows, width);
    let free: Vec<usize> = (0..width).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&fc| {
            let mut v = vec![BigRational::zero(); width];
            v[fc] = BigRational::one();
            for (row, &pc) in red.iter().zip(&pivots) {
                v[pc] = -row[fc].clone();
            }
            v
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn root_counts() {
        assert_eq!(root_system(GroupType::GSp, 6).0.len(), 9);
        assert_eq!(root_system(GroupType::SO, 7).0.len(), 9);
        assert_eq!(root_system(GroupType::SO, 8).0.len(), 12);
        assert_eq!(root_system(GroupType::SO, 8).1.len(), 4);
    }

    #[test]
    fn symplectic_lie_algebra_dimension() {
        let d = RootDatumWithCochar::new(GroupType::GSp, 4, vec![Rational64::zero(); 4]).unwrap();
        // gsp(4) = sp(4) ⊕ scalars
        assert_eq!(d.lie_basis(|_, _| true).len(), 11);
        let so = RootDatumWithCochar::new(GroupType::SO, 5, vec![Rational64::zero(); 5]).unwrap();
        assert_eq!(so.lie_basis(|_, _| true).len(), 11);
    }
}
