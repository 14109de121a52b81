//! Dieudonné-Lie algebras: an isocrystal with an F-equivariant Lie bracket
//! and an optional Dieudonné lattice.

use std::sync::Arc;

use num_rational::Rational64;
use num_traits::Zero;
use rand::Rng;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::isocrystal::{Isocrystal, SlopeMultiset, SlopePredicate};
use crate::lattice::{dieudonne_containment, Lattice};
use crate::linalg::{vec_add, vec_is_zero, vec_to_json, Mat, Vector};
use crate::padic::{FieldSpec, PadicScalar, Valuation};
use crate::semilinear::solve_qp_linear;

/// Structure constants: `c[i][j][k]` is the e_k-coordinate of [e_i, e_j].
pub type StructureConstants = Vec<Vec<Vector>>;

#[derive(Clone, Debug)]
pub struct DieudonneLieAlgebra {
    iso: Isocrystal,
    bracket: StructureConstants,
    lattice: Option<Lattice>,
}

/// Outcome of one validation check.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub ok: bool,
    pub witness: Option<Value>,
}

impl Check {
    fn pass() -> Check {
        Check { ok: true, witness: None }
    }

    fn fail(witness: Value) -> Check {
        Check { ok: false, witness: Some(witness) }
    }

    pub fn to_json(&self) -> Value {
        json!({"ok": self.ok, "witness": self.witness})
    }
}

#[derive(Clone, Debug)]
pub struct ValidationReport {
    pub antisymmetry: Check,
    pub jacobi: Check,
    pub f_equivariance: Check,
    /// `None` when the algebra carries no lattice.
    pub lattice_dieudonne: Option<Check>,
    pub lattice_bracket_closure: Option<Check>,
}

impl ValidationReport {
    pub fn bracket_laws_hold(&self) -> bool {
        self.antisymmetry.ok && self.jacobi.ok && self.f_equivariance.ok
    }

    pub fn all_ok(&self) -> bool {
        self.bracket_laws_hold()
            && self.lattice_dieudonne.as_ref().is_none_or(|c| c.ok)
            && self.lattice_bracket_closure.as_ref().is_none_or(|c| c.ok)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "antisymmetry": self.antisymmetry.to_json(),
            "jacobi": self.jacobi.to_json(),
            "f_equivariance": self.f_equivariance.to_json(),
            "lattice_dieudonne": self.lattice_dieudonne.as_ref().map(Check::to_json),
            "lattice_bracket_closure": self.lattice_bracket_closure.as_ref().map(Check::to_json),
        })
    }
}

/// 𝔞 = 𝔞_0 ⊇ 𝔞_1 ⊇ … ⊇ 𝔞_n = 0 with 𝔞_{i+1} = [𝔞, 𝔞_i].
#[derive(Clone, Debug)]
pub struct LowerCentralSeries {
    /// Column bases, ending with the zero subspace.
    pub terms: Vec<Mat>,
    /// The nilpotency class n(𝔞).
    pub class: usize,
}

impl LowerCentralSeries {
    pub fn dims(&self) -> Vec<usize> {
        self.terms.iter().map(Mat::cols).collect()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "dims": self.dims(),
            "class": self.class,
            "terms": self.terms.iter().map(Mat::to_json).collect::<Vec<_>>(),
        })
    }
}

#[derive(Clone, Debug)]
pub struct LatticeFiltration {
    /// 𝔞⁺_i = 𝔞⁺ ∩ 𝔞_i for i = 0, ..., n(𝔞).
    pub lattices: Vec<Lattice>,
    /// Entry i records [𝔞⁺, 𝔞⁺_i] ⊆ 𝔞⁺_{i+1}.
    pub closure: Vec<Check>,
}

impl LatticeFiltration {
    pub fn closed(&self) -> bool {
        self.closure.iter().all(|c| c.ok)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "lattices": self.lattices.iter().map(|l| l.basis().to_json()).collect::<Vec<_>>(),
            "closure": self.closure.iter().map(Check::to_json).collect::<Vec<_>>(),
            "closed": self.closed(),
        })
    }
}

/// The graded piece 𝔞⁺_i / 𝔞⁺_j with its induced Frobenius.
#[derive(Clone, Debug)]
pub struct GradedPiece {
    /// Induced Frobenius on the quotient, in the basis of the quotient lattice.
    pub iso: Isocrystal,
    /// Dieudonné containments for the quotient lattice.
    pub dieudonne: Check,
}

#[derive(Clone, Debug)]
pub struct CenterReport {
    pub central: bool,
    pub min_slope: Rational64,
    /// Dimension of the minimal-slope part 𝔟.
    pub part_rank: usize,
    /// (index into the basis of 𝔟, index of the basis vector of 𝔞).
    pub witness: Option<(usize, usize)>,
}

impl CenterReport {
    pub fn to_json(&self) -> Value {
        json!({
            "central": self.central,
            "min_slope": self.min_slope.to_string(),
            "part_rank": self.part_rank,
            "witness": self.witness.map(|(b, a)| json!({"b_index": b, "a_index": a})),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AutMode {
    /// g∘Φ = Φ∘g and g[x,y] = [gx,y] + [x,gy].
    Derivation,
    /// g∘Φ = Φ∘g and [x,gy] + [gx,y] = 0: the displayed condition with its
    /// quadratic term [gx,gy] left out.
    Literal,
}

impl AutMode {
    pub fn parse(s: &str) -> Result<AutMode> {
        match s {
            "derivation" => Ok(AutMode::Derivation),
            "literal" | "paper_literal" => Ok(AutMode::Literal),
            _ => Err(Error::Malformed(format!("unknown mode {s:?}"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            AutMode::Derivation => "derivation",
            AutMode::Literal => "literal",
        }
    }
}

#[derive(Clone, Debug)]
pub struct AutLieAlgebra {
    pub mode: AutMode,
    /// Basis over Q_p of the solution space, as n×n matrices over Q_q.
    pub basis: Vec<Mat>,
    /// Set in literal mode: the quadratic term was not imposed.
    pub quadratic_term_excluded: bool,
}

impl AutLieAlgebra {
    pub fn dimension(&self) -> usize {
        self.basis.len()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "mode": self.mode.name(),
            "dimension": self.dimension(),
            "quadratic_term_excluded": self.quadratic_term_excluded,
            "basis": self.basis.iter().map(Mat::to_json).collect::<Vec<_>>(),
        })
    }
}

/// Antisymmetric structure constants from entries `(i, j, k, c)` meaning
/// that [e_i, e_j] has e_k-coordinate c (and [e_j, e_i] gets -c).
pub fn structure_constants(
    spec: &Arc<FieldSpec>,
    n: usize,
    entries: &[(usize, usize, usize, PadicScalar)],
) -> StructureConstants {
    let mut c = vec![vec![vec![PadicScalar::zero(spec); n]; n]; n];
    for (i, j, k, v) in entries {
        c[*i][*j][*k] = c[*i][*j][*k].add(v);
        c[*j][*i][*k] = c[*j][*i][*k].sub(v);
    }
    c
}

/// Σ (-λ)·mult over a slope multiset with all slopes in [-1, 0].
pub fn pdiv_dimension(slopes: &SlopeMultiset) -> Result<Rational64> {
    for &(s, _) in slopes.entries() {
        if s < Rational64::from_integer(-1) || s > Rational64::zero() {
            return Err(Error::SlopeOutOfRange(s.to_string()));
        }
    }
    Ok(-slopes.weighted_sum())
}

impl DieudonneLieAlgebra {
    pub fn new(iso: Isocrystal, bracket: StructureConstants, lattice: Option<Mat>) -> Result<DieudonneLieAlgebra> {
        let n = iso.rank();
        let shape_ok =
            bracket.len() == n && bracket.iter().all(|row| row.len() == n && row.iter().all(|v| v.len() == n));
        if !shape_ok {
            return Err(Error::DimensionMismatch(format!("structure constants must be {n}x{n}x{n}")));
        }
        let lattice = match lattice {
            Some(m) => {
                if m.rows() != n || m.cols() != n {
                    return Err(Error::DimensionMismatch("lattice basis must be n x n".into()));
                }
                let l = Lattice::new(m).map_err(|_| Error::NonInvertible)?;
                Some(l)
            }
            None => None,
        };
        Ok(DieudonneLieAlgebra { iso, bracket, lattice })
    }

    pub fn abelian(iso: Isocrystal, lattice: Option<Mat>) -> Result<DieudonneLieAlgebra> {
        let n = iso.rank();
        let c = structure_constants(iso.spec(), n, &[]);
        DieudonneLieAlgebra::new(iso, c, lattice)
    }

    pub fn spec(&self) -> &Arc<FieldSpec> {
        self.iso.spec()
    }

    pub fn rank(&self) -> usize {
        self.iso.rank()
    }

    pub fn iso(&self) -> &Isocrystal {
        &self.iso
    }

    pub fn structure(&self) -> &StructureConstants {
        &self.bracket
    }

    pub fn lattice(&self) -> Option<&Lattice> {
        self.lattice.as_ref()
    }

    pub fn with_lattice(&self, lattice: Option<Mat>) -> Result<DieudonneLieAlgebra> {
        DieudonneLieAlgebra::new(self.iso.clone(), self.bracket.clone(), lattice)
    }

    pub fn basis_vector(&self, i: usize) -> Vector {
        let mut v = vec![PadicScalar::zero(self.spec()); self.rank()];
        v[i] = PadicScalar::one(self.spec());
        v
    }

    pub fn bracket(&self, x: &[PadicScalar], y: &[PadicScalar]) -> Vector {
        let n = self.rank();
        let mut out = vec![PadicScalar::zero(self.spec()); n];
        for (i, xi) in x.iter().enumerate() {
            if xi.is_zero() {
                continue;
            }
            for (j, yj) in y.iter().enumerate() {
                if yj.is_zero() {
                    continue;
                }
                let w = xi.mul(yj);
                for (k, o) in out.iter_mut().enumerate() {
                    let c = &self.bracket[i][j][k];
                    if !c.is_zero() {
                        *o = o.add(&w.mul(c));
                    }
                }
            }
        }
        out
    }

    /// Φ(v) = F·σ(v).
    pub fn phi(&self, v: &[PadicScalar]) -> Vector {
        let s: Vector = v.iter().map(PadicScalar::sigma).collect();
        self.iso.frobenius().mul_vec(&s)
    }

    pub fn validate(&self) -> Result<ValidationReport> {
        let n = self.rank();
        let mut antisymmetry = Check::pass();
        'anti: for i in 0..n {
            for j in i..n {
                let s = vec_add(&self.bracket[i][j], &self.bracket[j][i]);
                if !vec_is_zero(&s) {
                    antisymmetry = Check::fail(json!({"pair": [i, j]}));
                    break 'anti;
                }
            }
        }
        let mut jacobi = Check::pass();
        'jac: for i in 0..n {
            for j in i + 1..n {
                for l in j + 1..n {
                    let (ei, ej, el) = (self.basis_vector(i), self.basis_vector(j), self.basis_vector(l));
                    let a = self.bracket(&ei, &self.bracket(&ej, &el));
                    let b = self.bracket(&ej, &self.bracket(&el, &ei));
                    let c = self.bracket(&el, &self.bracket(&ei, &ej));
                    if !vec_is_zero(&vec_add(&vec_add(&a, &b), &c)) {
                        jacobi = Check::fail(json!({"triple": [i, j, l]}));
                        break 'jac;
                    }
                }
            }
        }
        let mut f_equivariance = Check::pass();
        let f = self.iso.frobenius();
        'feq: for i in 0..n {
            for j in 0..n {
                let lhs = self.bracket(&f.col(i), &f.col(j));
                let rhs = self.phi(&self.bracket[i][j]);
                if !vec_is_zero(&crate::linalg::vec_sub(&lhs, &rhs)) {
                    f_equivariance = Check::fail(json!({"pair": [i, j]}));
                    break 'feq;
                }
            }
        }
        let (lattice_dieudonne, lattice_bracket_closure) = match &self.lattice {
            None => (None, None),
            Some(lat) => {
                let d = match dieudonne_containment(f, lat.basis())? {
                    None => Check::pass(),
                    Some((j, which)) => Check::fail(json!({"lattice_vector": j, "containment": which})),
                };
                let mut closure = Check::pass();
                'clo: for a in 0..n {
                    for b in a + 1..n {
                        let v = self.bracket(&lat.basis().col(a), &lat.basis().col(b));
                        let m = Mat::from_cols(self.spec(), n, &[v]);
                        if !lat.contains(&m)? {
                            closure = Check::fail(json!({"lattice_pair": [a, b]}));
                            break 'clo;
                        }
                    }
                }
                (Some(d), Some(closure))
            }
        };
        Ok(ValidationReport { antisymmetry, jacobi, f_equivariance, lattice_dieudonne, lattice_bracket_closure })
    }

    /// Column basis of the span of all [x, y] for x in the columns of `a`
    /// and y in the columns of `b`.
    pub fn bracket_span(&self, a: &Mat, b: &Mat) -> Mat {
        let n = self.rank();
        let mut gens = Vec::new();
        for x in a.columns() {
            for y in b.columns() {
                let v = self.bracket(&x, &y);
                if !vec_is_zero(&v) {
                    gens.push(v);
                }
            }
        }
        if gens.is_empty() {
            return Mat::zeros(self.spec(), n, 0);
        }
        Mat::from_cols(self.spec(), n, &gens).column_basis()
    }

    pub fn lower_central_series(&self) -> Result<LowerCentralSeries> {
        let n = self.rank();
        let whole = Mat::identity(self.spec(), n);
        let mut terms = vec![whole.clone()];
        while terms.last().is_some_and(|t| t.cols() > 0) {
            let cur = terms.last().expect("nonempty");
            let next = self.bracket_span(&whole, cur);
            if next.cols() >= cur.cols() {
                return Err(Error::NotNilpotent(cur.cols()));
            }
            if next.cols() > 0 && self.iso.restricted_frobenius(&next)?.is_none() {
                return Err(Error::InvariantViolated(format!(
                    "lower central series term {} is not Frobenius-stable",
                    terms.len()
                )));
            }
            terms.push(next);
        }
        let class = terms.len() - 1;
        Ok(LowerCentralSeries { terms, class })
    }

    pub fn nilpotency_class(&self) -> Result<usize> {
        Ok(self.lower_central_series()?.class)
    }

    pub fn lattice_filtration(&self) -> Result<LatticeFiltration> {
        let lat = self.lattice.as_ref().ok_or(Error::MissingLattice)?;
        let lcs = self.lower_central_series()?;
        let lattices = lcs.terms.iter().map(|t| lat.intersect_subspace(t)).collect::<Result<Vec<_>>>()?;
        let mut closure = Vec::new();
        for i in 0..lcs.class {
            let mut check = Check::pass();
            'gen: for a in lat.basis().columns() {
                for b in lattices[i].basis().columns() {
                    let v = self.bracket(&a, &b);
                    let m = Mat::from_cols(self.spec(), self.rank(), std::slice::from_ref(&v));
                    if !lattices[i + 1].contains(&m)? {
                        check = Check::fail(json!({"level": i, "bracket": vec_to_json(&v)}));
                        break 'gen;
                    }
                }
            }
            closure.push(check);
        }
        Ok(LatticeFiltration { lattices, closure })
    }

    /// 𝔞⁺_i / 𝔞⁺_j for i <= j <= n(𝔞), with the Dieudonné containments of
    /// the image lattice checked through elementary divisors.
    pub fn graded_piece(&self, i: usize, j: usize) -> Result<GradedPiece> {
        let filt = self.lattice_filtration()?;
        if i > j || j >= filt.lattices.len() {
            return Err(Error::Precondition(format!("need i <= j <= {}", filt.lattices.len() - 1)));
        }
        let (top, bottom) = (&filt.lattices[i], &filt.lattices[j]);
        let adapted = top.adapted_basis(bottom)?;
        let d = bottom.rank();
        let m = top.rank() - d;
        let spec = self.spec().clone();
        if m == 0 {
            return Ok(GradedPiece { iso: Isocrystal::zero(&spec), dieudonne: Check::pass() });
        }
        let g = adapted
            .solve(&self.iso.apply(&adapted))?
            .ok_or_else(|| Error::InvariantViolated("filtration lattice span is not Frobenius-stable".into()))?;
        let idx: Vec<usize> = (d..d + m).collect();
        let q = g.select_rows(&idx).select_cols(&idx);
        let iso = Isocrystal::new(q)?;
        let dieudonne = match dieudonne_containment(iso.frobenius(), &Mat::identity(&spec, m))? {
            None => Check::pass(),
            Some((k, which)) => Check::fail(json!({"quotient_vector": k, "containment": which})),
        };
        Ok(GradedPiece { iso, dieudonne })
    }

    pub fn minimal_slope_center_check(&self) -> Result<CenterReport> {
        let slopes = self.iso.newton_slopes()?;
        if let Some(&(s, _)) = slopes.entries().iter().find(|e| e.0 >= Rational64::zero()) {
            return Err(Error::SlopeNotStrictlyNegative(s.to_string()));
        }
        let Some(mu) = slopes.min_slope() else {
            return Ok(CenterReport { central: true, min_slope: Rational64::zero(), part_rank: 0, witness: None });
        };
        let (_, emb) = self.iso.slope_part(SlopePredicate::Equal(mu))?;
        for (bi, v) in emb.columns().iter().enumerate() {
            for a in 0..self.rank() {
                if !vec_is_zero(&self.bracket(v, &self.basis_vector(a))) {
                    return Ok(CenterReport {
                        central: false,
                        min_slope: mu,
                        part_rank: emb.cols(),
                        witness: Some((bi, a)),
                    });
                }
            }
        }
        Ok(CenterReport { central: true, min_slope: mu, part_rank: emb.cols(), witness: None })
    }

    /// Solution space over Q_p of the Lie-algebra conditions on g ∈ End(𝔞).
    pub fn aut_lie_algebra(&self, mode: AutMode) -> Result<AutLieAlgebra> {
        let n = self.rank();
        let spec = self.spec().clone();
        let f = self.iso.frobenius().clone();
        let basis = solve_qp_linear(&spec, n * n, |x| {
            let g = Mat::from_fn(&spec, n, n, |i, j| x[i * n + j].clone());
            let mut out: Vec<PadicScalar> = Vec::new();
            let comm = g.mul(&f).sub(&f.mul(&g.sigma()));
            for i in 0..n {
                out.extend(comm.row(i));
            }
            for i in 0..n {
                for j in i + 1..n {
                    let (gi, gj) = (g.col(i), g.col(j));
                    let (ei, ej) = (self.basis_vector(i), self.basis_vector(j));
                    let cross = vec_add(&self.bracket(&gi, &ej), &self.bracket(&ei, &gj));
                    match mode {
                        AutMode::Derivation => {
                            let lhs = g.mul_vec(&self.bracket[i][j]);
                            out.extend(crate::linalg::vec_sub(&lhs, &cross));
                        }
                        AutMode::Literal => out.extend(cross),
                    }
                }
            }
            out
        })?;
        let mats = basis.into_iter().map(|x| Mat::from_fn(&spec, n, n, |i, j| x[i * n + j].clone())).collect();
        Ok(AutLieAlgebra { mode, basis: mats, quadratic_term_excluded: mode == AutMode::Literal })
    }

    /// Closure of the span of `gens` (columns) under Φ, Φ^{-1} and the bracket.
    pub fn smallest_f_stable_subalgebra(&self, gens: &Mat) -> Result<Mat> {
        let n = self.rank();
        if gens.cols() == 0 {
            return Ok(Mat::zeros(self.spec(), n, 0));
        }
        let mut cur = gens.column_basis();
        loop {
            if cur.cols() == 0 {
                return Ok(cur);
            }
            let grown = cur
                .hstack(&self.iso.apply(&cur))
                .hstack(&self.iso.apply_inverse(&cur)?)
                .hstack(&self.bracket_span(&cur, &cur))
                .column_basis();
            if grown.cols() == cur.cols() {
                break;
            }
            cur = grown;
        }
        if self.iso.restricted_frobenius(&cur)?.is_none() || !cur.spans(&self.bracket_span(&cur, &cur))? {
            return Err(Error::InvariantViolated("subalgebra closure is not stable".into()));
        }
        Ok(cur)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "iso": self.iso.to_json(),
            "bracket": self.bracket
                .iter()
                .map(|row| row.iter().map(|v| vec_to_json(v)).collect::<Vec<_>>())
                .collect::<Vec<_>>(),
            "lattice": self.lattice.as_ref().map(|l| l.basis().to_json()),
        })
    }

    pub fn from_json(v: &Value, default_prec: u32) -> Result<DieudonneLieAlgebra> {
        let iso = Isocrystal::from_json(
            v.get("iso").ok_or_else(|| Error::Malformed("algebra needs \"iso\"".into()))?,
            default_prec,
        )?;
        let spec = iso.spec().clone();
        let n = iso.rank();
        let raw = v
            .get("bracket")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Malformed("algebra needs a \"bracket\" array".into()))?;
        let mut bracket = Vec::with_capacity(n);
        for row in raw {
            let row = row.as_array().ok_or_else(|| Error::Malformed("bracket rows must be arrays".into()))?;
            bracket.push(row.iter().map(|e| crate::linalg::vec_from_json(&spec, e)).collect::<Result<Vec<_>>>()?);
        }
        let lattice = match v.get("lattice") {
            None | Some(Value::Null) => None,
            Some(m) => Some(Mat::from_json(&spec, m)?),
        };
        DieudonneLieAlgebra::new(iso, bracket, lattice)
    }
}

/// Frobenius of a rank-r isoclinic isocrystal of slope -s/r:
/// e_i ↦ e_{i+1} and e_{r-1} ↦ u·p^{-s} e_0 for a unit u.
pub fn simple_block(spec: &Arc<FieldSpec>, s: i64, r: usize, u: &PadicScalar) -> Mat {
    let mut m = Mat::zeros(spec, r, r);
    let corner = PadicScalar::p_power(spec, -s).mul(u);
    if r == 1 {
        m.set(0, 0, corner);
        return m;
    }
    for i in 0..r - 1 {
        m.set(i + 1, i, PadicScalar::one(spec));
    }
    m.set(0, r - 1, corner);
    m
}

/// A random Dieudonné-Lie algebra of rank <= 4 with strictly negative
/// slopes, in a basis conjugated by a random element of GL_n(Z_q), whose
/// bracket is a random element of the space of F-equivariant antisymmetric
/// brackets. Every F-equivariant
/// bracket maps slope parts λ, μ into λ + μ, so with slopes in
/// {-1, -1/2, -1/3, -2/3} all iterated brackets of length three vanish and
/// the Jacobi identity holds.
pub fn random_negative_slope_dla<R: Rng>(spec: &Arc<FieldSpec>, rng: &mut R) -> Result<DieudonneLieAlgebra> {
    // (numerator s, rank r) of simple blocks of slope -s/r
    const PATTERNS: &[&[(i64, usize)]] = &[
        &[(1, 2), (1, 1)],
        &[(1, 2), (1, 1), (1, 1)],
        &[(1, 1), (1, 2)],
        &[(1, 1), (1, 2), (1, 1)],
        &[(1, 2)],
        &[(1, 2), (1, 2)],
        &[(1, 1)],
        &[(1, 1), (1, 1), (1, 1)],
        &[(1, 3), (1, 1)],
        &[(2, 3), (1, 1)],
        &[(1, 3)],
    ];
    let pattern = PATTERNS[rng.gen_range(0..PATTERNS.len())];
    let blocks: Vec<Mat> = pattern
        .iter()
        .map(|&(s, r)| {
            let u = PadicScalar::from_int(spec, if rng.gen_bool(0.5) { 1 } else { -1 });
            simple_block(spec, s, r, &u)
        })
        .collect();
    let f0 = Mat::block_diag(spec, &blocks);
    let n = f0.rows();
    let t = PadicScalar::generator(spec);
    let a = loop {
        let a = Mat::from_fn(spec, n, n, |_, _| {
            let x = PadicScalar::from_int(spec, rng.gen_range(-3..=3));
            if rng.gen_bool(0.3) {
                x.mul(&t)
            } else {
                x
            }
        });
        if a.det().valuation() == Valuation::Exact(0) {
            break a;
        }
    };
    let iso = Isocrystal::new(f0)?.change_basis(&a)?;
    let f = iso.frobenius().clone();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let unpack = |x: &[PadicScalar]| -> StructureConstants {
        let entries: Vec<(usize, usize, usize, PadicScalar)> = pairs
            .iter()
            .enumerate()
            .flat_map(|(pi, &(i, j))| (0..n).map(move |k| (i, j, k, x[pi * n + k].clone())))
            .collect();
        structure_constants(spec, n, &entries)
    };
    let kernel = solve_qp_linear(spec, pairs.len() * n, |x| {
        let c = unpack(x);
        let alg = DieudonneLieAlgebra { iso: iso.clone(), bracket: c, lattice: None };
        let mut out = Vec::new();
        for &(i, j) in &pairs {
            let lhs = alg.bracket(&f.col(i), &f.col(j));
            let rhs = alg.phi(&alg.bracket[i][j]);
            out.extend(crate::linalg::vec_sub(&lhs, &rhs));
        }
        out
    })?;
    let mut x = vec![PadicScalar::zero(spec); pairs.len() * n];
    for kv in &kernel {
        let c = PadicScalar::from_int(spec, rng.gen_range(-4..=4));
        x = x.iter().zip(kv).map(|(a, b)| a.add(&b.mul(&c))).collect();
    }
    DieudonneLieAlgebra::new(iso, unpack(&x), None)
}
