//! Dense matrices over Q_q at finite precision.
//!
//! Rank decisions treat an entry as zero exactly when it is zero to the
//! tracked precision. Pivots are chosen by minimal valuation.

use std::sync::Arc;

use serde_json::Value;

use crate::error::{Error, Result};
use crate::padic::{FieldSpec, PadicScalar, Valuation};

pub type Vector = Vec<PadicScalar>;

#[derive(Clone, Debug)]
pub struct Mat {
    spec: Arc<FieldSpec>,
    rows: usize,
    cols: usize,
    data: Vec<PadicScalar>,
}

impl Mat {
    pub fn zeros(spec: &Arc<FieldSpec>, rows: usize, cols: usize) -> Mat {
        Mat { spec: spec.clone(), rows, cols, data: vec![PadicScalar::zero(spec); rows * cols] }
    }

    pub fn identity(spec: &Arc<FieldSpec>, n: usize) -> Mat {
        let mut m = Mat::zeros(spec, n, n);
        for i in 0..n {
            m.set(i, i, PadicScalar::one(spec));
        }
        m
    }

    pub fn from_fn(
        spec: &Arc<FieldSpec>,
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> PadicScalar,
    ) -> Mat {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Mat { spec: spec.clone(), rows, cols, data }
    }

    pub fn from_rows(spec: &Arc<FieldSpec>, rows: Vec<Vector>) -> Result<Mat> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::DimensionMismatch("ragged matrix rows".into()));
        }
        Ok(Mat { spec: spec.clone(), rows: r, cols: c, data: rows.into_iter().flatten().collect() })
    }

    /// Matrix whose columns are the given vectors, all of length `rows`.
    pub fn from_cols(spec: &Arc<FieldSpec>, rows: usize, cols: &[Vector]) -> Mat {
        Mat::from_fn(spec, rows, cols.len(), |i, j| cols[j][i].clone())
    }

    pub fn diag(spec: &Arc<FieldSpec>, d: &[PadicScalar]) -> Mat {
        let mut m = Mat::zeros(spec, d.len(), d.len());
        for (i, x) in d.iter().enumerate() {
            m.set(i, i, x.clone());
        }
        m
    }

    /// Rational entries, for tests and fixtures.
    pub fn from_i64_ratios(spec: &Arc<FieldSpec>, rows: &[&[(i64, i64)]]) -> Mat {
        Mat::from_fn(spec, rows.len(), rows.first().map_or(0, |r| r.len()), |i, j| {
            let (a, b) = rows[i][j];
            PadicScalar::from_ratio(spec, a, b)
        })
    }

    pub fn spec(&self) -> &Arc<FieldSpec> {
        &self.spec
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &PadicScalar {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, x: PadicScalar) {
        self.data[i * self.cols + j] = x;
    }

    pub fn col(&self, j: usize) -> Vector {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn columns(&self) -> Vec<Vector> {
        (0..self.cols).map(|j| self.col(j)).collect()
    }

    pub fn row(&self, i: usize) -> Vector {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn map(&self, f: impl Fn(&PadicScalar) -> PadicScalar) -> Mat {
        Mat { spec: self.spec.clone(), rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    pub fn sigma(&self) -> Mat {
        self.map(PadicScalar::sigma)
    }

    pub fn sigma_inv(&self) -> Mat {
        self.map(PadicScalar::sigma_inv)
    }

    pub fn scale(&self, c: &PadicScalar) -> Mat {
        self.map(|x| x.mul(c))
    }

    pub fn neg(&self) -> Mat {
        self.map(PadicScalar::neg)
    }

    pub fn transpose(&self) -> Mat {
        Mat::from_fn(&self.spec, self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn add(&self, other: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Mat {
            spec: self.spec.clone(),
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a.add(b)).collect(),
        }
    }

    pub fn sub(&self, other: &Mat) -> Mat {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.rows, "matrix product shape");
        let mut out = Mat::zeros(&self.spec, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() && a.abs_prec() >= self.spec.precision() as i64 {
                    // exact-enough zero: contributes O(p^(N + v(b))) only
                    let mut touched = false;
                    for j in 0..other.cols {
                        let b = other.get(k, j);
                        if !b.is_zero() && b.valuation().value() < 0 {
                            touched = true;
                            break;
                        }
                    }
                    if !touched {
                        continue;
                    }
                }
                for j in 0..other.cols {
                    let t = a.mul(other.get(k, j));
                    let cur = out.get(i, j).add(&t);
                    out.set(i, j, cur);
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[PadicScalar]) -> Vector {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                let mut acc = PadicScalar::zero(&self.spec);
                for (j, x) in v.iter().enumerate() {
                    acc = acc.add(&self.get(i, j).mul(x));
                }
                acc
            })
            .collect()
    }

    pub fn pow(&self, e: u32) -> Mat {
        let mut acc = Mat::identity(&self.spec, self.rows);
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn hstack(&self, other: &Mat) -> Mat {
        assert_eq!(self.rows, other.rows);
        Mat::from_fn(&self.spec, self.rows, self.cols + other.cols, |i, j| {
            if j < self.cols {
                self.get(i, j).clone()
            } else {
                other.get(i, j - self.cols).clone()
            }
        })
    }

    pub fn select_cols(&self, idx: &[usize]) -> Mat {
        Mat::from_fn(&self.spec, self.rows, idx.len(), |i, j| self.get(i, idx[j]).clone())
    }

    pub fn select_rows(&self, idx: &[usize]) -> Mat {
        Mat::from_fn(&self.spec, idx.len(), self.cols, |i, j| self.get(idx[i], j).clone())
    }

    /// Block-diagonal sum.
    pub fn block_diag(spec: &Arc<FieldSpec>, blocks: &[Mat]) -> Mat {
        let n: usize = blocks.iter().map(|b| b.rows).sum();
        let m: usize = blocks.iter().map(|b| b.cols).sum();
        let mut out = Mat::zeros(spec, n, m);
        let (mut r0, mut c0) = (0, 0);
        for b in blocks {
            for i in 0..b.rows {
                for j in 0..b.cols {
                    out.set(r0 + i, c0 + j, b.get(i, j).clone());
                }
            }
            r0 += b.rows;
            c0 += b.cols;
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(PadicScalar::is_zero)
    }

    pub fn approx_eq(&self, other: &Mat) -> bool {
        self.rows == other.rows
            && self.cols == other.cols
            && self.data.iter().zip(&other.data).all(|(a, b)| a.approx_eq(b))
    }

    /// Smallest valuation among entries that are nonzero to precision.
    pub fn min_valuation(&self) -> Option<i64> {
        self.data
            .iter()
            .filter_map(|x| match x.valuation() {
                Valuation::Exact(v) => Some(v),
                Valuation::AtLeast(_) => None,
            })
            .min()
    }

    /// Smallest absolute precision over all entries.
    pub fn min_abs_prec(&self) -> i64 {
        self.data.iter().map(PadicScalar::abs_prec).min().unwrap_or(i64::MAX)
    }

    /// Whether every entry lies in Z_q; `None` if some entry is undecided.
    pub fn is_integral(&self) -> Option<bool> {
        let mut all = true;
        for x in &self.data {
            match x.is_integral() {
                Some(true) => {}
                Some(false) => all = false,
                None => return None,
            }
        }
        Some(all)
    }

    /// Coefficients c_0, ..., c_n of det(T*I - self), low degree first.
    /// Division-free (Berkowitz), so no precision is lost to pivoting.
    pub fn charpoly(&self) -> Vec<PadicScalar> {
        assert!(self.is_square());
        let n = self.rows;
        let one = PadicScalar::one(&self.spec);
        if n == 0 {
            return vec![one];
        }
        let mut c = vec![one.clone(), self.get(0, 0).neg()];
        for r in 1..n {
            let mut t = Vec::with_capacity(r + 2);
            t.push(one.clone());
            t.push(self.get(r, r).neg());
            let mut v: Vector = (0..r).map(|i| self.get(i, r).clone()).collect();
            for k in 0..r {
                let mut dot = PadicScalar::zero(&self.spec);
                for (j, vj) in v.iter().enumerate() {
                    dot = dot.add(&self.get(r, j).mul(vj));
                }
                t.push(dot.neg());
                if k + 1 < r {
                    v = (0..r)
                        .map(|i| {
                            let mut acc = PadicScalar::zero(&self.spec);
                            for (j, vj) in v.iter().enumerate() {
                                acc = acc.add(&self.get(i, j).mul(vj));
                            }
                            acc
                        })
                        .collect();
                }
            }
            let mut next = Vec::with_capacity(r + 2);
            for i in 0..r + 2 {
                let mut acc = PadicScalar::zero(&self.spec);
                for j in 0..=i.min(r) {
                    acc = acc.add(&t[i - j].mul(&c[j]));
                }
                next.push(acc);
            }
            c = next;
        }
        c.reverse();
        c
    }

    pub fn det(&self) -> PadicScalar {
        let c = self.charpoly();
        if self.rows.is_multiple_of(2) {
            c[0].clone()
        } else {
            c[0].neg()
        }
    }

    /// Reduced row echelon form with pivots chosen by minimal valuation
    /// within each column.
    pub fn rref(&self) -> Rref {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..m.cols {
            if row == m.rows {
                break;
            }
            let mut best: Option<(usize, i64)> = None;
            for i in row..m.rows {
                if let Valuation::Exact(v) = m.get(i, col).valuation() {
                    if best.is_none_or(|(_, bv)| v < bv) {
                        best = Some((i, v));
                    }
                }
            }
            let Some((pi, _)) = best else { continue };
            if pi != row {
                for j in 0..m.cols {
                    m.data.swap(pi * m.cols + j, row * m.cols + j);
                }
            }
            let inv = m.get(row, col).inv().expect("pivot is nonzero");
            for j in 0..m.cols {
                let x = m.get(row, j).mul(&inv);
                m.set(row, j, x);
            }
            m.set(row, col, PadicScalar::one(&self.spec));
            for i in 0..m.rows {
                if i == row {
                    continue;
                }
                let factor = m.get(i, col).clone();
                if factor.is_zero() {
                    continue;
                }
                for j in 0..m.cols {
                    let x = m.get(i, j).sub(&factor.mul(m.get(row, j)));
                    m.set(i, j, x);
                }
                m.set(i, col, PadicScalar::zero_to(&self.spec, m.get(i, col).abs_prec()));
            }
            pivots.push(col);
            row += 1;
        }
        Rref { matrix: m, pivots }
    }

    pub fn rank(&self) -> usize {
        self.rref().pivots.len()
    }

    /// Basis (as columns) of the right null space.
    pub fn kernel(&self) -> Mat {
        let r = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !r.pivots.contains(c)).collect();
        let mut out = Mat::zeros(&self.spec, self.cols, free.len());
        for (k, &fc) in free.iter().enumerate() {
            out.set(fc, k, PadicScalar::one(&self.spec));
            for (i, &pc) in r.pivots.iter().enumerate() {
                out.set(pc, k, r.matrix.get(i, fc).neg());
            }
        }
        out
    }

    /// Canonical basis of the column space: the nonzero rows of the RREF of
    /// the transpose, returned as columns.
    pub fn column_basis(&self) -> Mat {
        let r = self.transpose().rref();
        let k = r.pivots.len();
        Mat::from_fn(&self.spec, self.rows, k, |i, j| r.matrix.get(j, i).clone())
    }

    /// Solves `self * X = rhs` when `self` has full column rank. Returns
    /// `None` when some column of `rhs` is outside the column span.
    pub fn solve(&self, rhs: &Mat) -> Result<Option<Mat>> {
        assert_eq!(self.rows, rhs.rows);
        let k = self.cols;
        let aug = self.hstack(rhs);
        let r = aug.rref();
        let lhs_pivots = r.pivots.iter().filter(|&&c| c < k).count();
        if lhs_pivots < k {
            return Err(Error::precision("coefficient matrix is rank deficient to precision"));
        }
        if r.pivots.iter().any(|&c| c >= k) {
            return Ok(None);
        }
        let x = Mat::from_fn(&self.spec, k, rhs.cols, |i, j| r.matrix.get(i, k + j).clone());
        Ok(Some(x))
    }

    pub fn inverse(&self) -> Result<Mat> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch("inverse of a non-square matrix".into()));
        }
        match self.solve(&Mat::identity(&self.spec, self.rows)) {
            Ok(Some(x)) => Ok(x),
            Ok(None) | Err(_) => Err(Error::NonInvertible),
        }
    }

    /// Whether every column of `other` lies in the column span of `self`.
    pub fn spans(&self, other: &Mat) -> Result<bool> {
        if self.cols == 0 {
            return Ok(other.is_zero());
        }
        Ok(self.solve(other)?.is_some())
    }

    /// Basis of the intersection of the column spans of two full-rank bases.
    pub fn intersect(&self, other: &Mat) -> Mat {
        if self.cols == 0 || other.cols == 0 {
            return Mat::zeros(&self.spec, self.rows, 0);
        }
        let k = self.kernel_of_pair(other);
        let coeffs = k.select_rows(&(0..self.cols).collect::<Vec<_>>());
        self.mul(&coeffs).column_basis()
    }

    fn kernel_of_pair(&self, other: &Mat) -> Mat {
        self.hstack(&other.neg()).kernel()
    }

    /// Elementary-divisor reduction over Z_q: for a full-column-rank `self`
    /// (n x d) returns P in GL_n(Z_q) whose first d columns form a basis of
    /// the saturation span(self) ∩ Z_q^n.
    pub fn saturation_transform(&self) -> Result<Mat> {
        let n = self.rows;
        let d = self.cols;
        let mut w = self.clone();
        let mut p = Mat::identity(&self.spec, n);
        for t in 0..d {
            let mut best: Option<(usize, usize, i64)> = None;
            for i in t..n {
                for j in t..d {
                    if let Valuation::Exact(v) = w.get(i, j).valuation() {
                        if best.is_none_or(|(_, _, bv)| v < bv) {
                            best = Some((i, j, v));
                        }
                    }
                }
            }
            let Some((pi, pj, _)) = best else {
                return Err(Error::precision("subspace basis is rank deficient to precision"));
            };
            if pi != t {
                for j in 0..d {
                    w.data.swap(pi * d + j, t * d + j);
                }
                for i in 0..n {
                    p.data.swap(i * n + pi, i * n + t);
                }
            }
            if pj != t {
                for i in 0..n {
                    w.data.swap(i * d + pj, i * d + t);
                }
            }
            let inv = w.get(t, t).inv()?;
            for i in 0..n {
                let x = w.get(i, t).mul(&inv);
                w.set(i, t, x);
            }
            for r in t + 1..n {
                let m = w.get(r, t).clone();
                if m.is_zero() {
                    continue;
                }
                for j in 0..d {
                    let x = w.get(r, j).sub(&m.mul(w.get(t, j)));
                    w.set(r, j, x);
                }
                // P <- P * (I + m e_r e_t^T): column t += m * column r
                for i in 0..n {
                    let x = p.get(i, t).add(&m.mul(p.get(i, r)));
                    p.set(i, t, x);
                }
            }
            for j in t + 1..d {
                let m = w.get(t, j).clone();
                if m.is_zero() {
                    continue;
                }
                for i in 0..n {
                    let x = w.get(i, j).sub(&m.mul(w.get(i, t)));
                    w.set(i, j, x);
                }
            }
        }
        Ok(p)
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            (0..self.rows).map(|i| Value::Array((0..self.cols).map(|j| self.get(i, j).to_json()).collect())).collect(),
        )
    }

    pub fn from_json(spec: &Arc<FieldSpec>, v: &Value) -> Result<Mat> {
        let rows = v.as_array().ok_or_else(|| Error::Malformed("matrix must be an array of rows".into()))?;
        let rows = rows
            .iter()
            .map(|r| {
                r.as_array()
                    .ok_or_else(|| Error::Malformed("matrix row must be an array".into()))?
                    .iter()
                    .map(|x| PadicScalar::from_json(spec, x))
                    .collect::<Result<Vector>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Mat::from_rows(spec, rows)
    }
}

/// Output of [`Mat::rref`].
#[derive(Clone, Debug)]
pub struct Rref {
    pub matrix: Mat,
    pub pivots: Vec<usize>,
}

pub fn vec_add(a: &[PadicScalar], b: &[PadicScalar]) -> Vector {
    a.iter().zip(b).map(|(x, y)| x.add(y)).collect()
}

pub fn vec_sub(a: &[PadicScalar], b: &[PadicScalar]) -> Vector {
    a.iter().zip(b).map(|(x, y)| x.sub(y)).collect()
}

pub fn vec_scale(a: &[PadicScalar], c: &PadicScalar) -> Vector {
    a.iter().map(|x| x.mul(c)).collect()
}

pub fn vec_sigma(a: &[PadicScalar]) -> Vector {
    a.iter().map(PadicScalar::sigma).collect()
}

pub fn vec_is_zero(a: &[PadicScalar]) -> bool {
    a.iter().all(PadicScalar::is_zero)
}

pub fn vec_approx_eq(a: &[PadicScalar], b: &[PadicScalar]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.approx_eq(y))
}

pub fn vec_to_json(a: &[PadicScalar]) -> Value {
    Value::Array(a.iter().map(PadicScalar::to_json).collect())
}

pub fn vec_from_json(spec: &Arc<FieldSpec>, v: &Value) -> Result<Vector> {
    v.as_array()
        .ok_or_else(|| Error::Malformed("vector must be an array".into()))?
        .iter()
        .map(|x| PadicScalar::from_json(spec, x))
        .collect()
}
