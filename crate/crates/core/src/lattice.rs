//! Z_q-lattices given by basis matrices.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::padic::{FieldSpec, PadicScalar};

#[derive(Clone, Debug)]
pub struct Lattice {
    basis: Mat,
}

impl Lattice {
    /// Columns must be linearly independent.
    pub fn new(basis: Mat) -> Result<Lattice> {
        if basis.rank() != basis.cols() {
            return Err(Error::DimensionMismatch("lattice basis is not independent".into()));
        }
        Ok(Lattice { basis })
    }

    pub fn standard(spec: &Arc<FieldSpec>, n: usize) -> Lattice {
        Lattice { basis: Mat::identity(spec, n) }
    }

    pub fn basis(&self) -> &Mat {
        &self.basis
    }

    pub fn rank(&self) -> usize {
        self.basis.cols()
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.rows()
    }

    pub fn spec(&self) -> &Arc<FieldSpec> {
        self.basis.spec()
    }

    pub fn scaled(&self, c: &PadicScalar) -> Lattice {
        Lattice { basis: self.basis.scale(c) }
    }

    /// Coordinates of the columns of `m` in this basis, `None` when some
    /// column is outside the span.
    pub fn coordinates(&self, m: &Mat) -> Result<Option<Mat>> {
        if self.rank() == 0 {
            return Ok(if m.is_zero() { Some(Mat::zeros(self.spec(), 0, m.cols())) } else { None });
        }
        self.basis.solve(m)
    }

    /// Index of the first column of `m` not in the lattice, or `None` when
    /// all are members.
    pub fn first_non_member(&self, m: &Mat) -> Result<Option<usize>> {
        let Some(c) = self.coordinates(m)? else {
            for j in 0..m.cols() {
                let col = m.select_cols(&[j]);
                if self.coordinates(&col)?.is_none() {
                    return Ok(Some(j));
                }
            }
            return Ok(Some(0));
        };
        for j in 0..c.cols() {
            for i in 0..c.rows() {
                match c.get(i, j).is_integral() {
                    Some(true) => {}
                    Some(false) => return Ok(Some(j)),
                    None => return Err(Error::precision("lattice membership is undecided")),
                }
            }
        }
        Ok(None)
    }

    pub fn contains(&self, m: &Mat) -> Result<bool> {
        Ok(self.first_non_member(m)?.is_none())
    }

    /// Sublattice `self ∩ span(subspace)`, computed by elementary-divisor
    /// reduction of the subspace coordinates. `self` must span the ambient
    /// space of `subspace`.
    pub fn intersect_subspace(&self, subspace: &Mat) -> Result<Lattice> {
        let spec = self.spec().clone();
        if subspace.cols() == 0 {
            return Ok(Lattice { basis: Mat::zeros(&spec, self.ambient_dim(), 0) });
        }
        let w = self
            .coordinates(subspace)?
            .ok_or_else(|| Error::Precondition("subspace is not inside the lattice span".into()))?;
        let p = w.saturation_transform()?;
        let d = subspace.cols();
        let sat = p.select_cols(&(0..d).collect::<Vec<_>>());
        Ok(Lattice { basis: self.basis.mul(&sat) })
    }

    /// For a saturated sublattice `sub`, a basis of `self` whose first
    /// `sub.rank()` vectors form a basis of `sub`.
    pub fn adapted_basis(&self, sub: &Lattice) -> Result<Mat> {
        if sub.rank() == 0 {
            return Ok(self.basis.clone());
        }
        let w = self
            .coordinates(sub.basis())?
            .ok_or_else(|| Error::Precondition("sublattice is not inside the lattice span".into()))?;
        let p = w.saturation_transform()?;
        let lead = self.basis.mul(&p.select_cols(&(0..sub.rank()).collect::<Vec<_>>()));
        // the saturation of sub's span equals sub when sub is saturated
        if !sub.contains(&lead)? {
            return Err(Error::Precondition("sublattice is not saturated".into()));
        }
        let rest: Vec<usize> = (sub.rank()..self.rank()).collect();
        Ok(sub.basis.hstack(&self.basis.mul(&p.select_cols(&rest))))
    }
}

/// Checks `M ⊆ Φ(M) ⊆ p^{-1} M` for the lattice with basis `basis` and
/// Φ = F∘σ. Returns the index of a failing basis vector and which
/// containment fails.
pub fn dieudonne_containment(frobenius: &Mat, basis: &Mat) -> Result<Option<(usize, &'static str)>> {
    let spec = basis.spec().clone();
    if basis.cols() == 0 {
        return Ok(None);
    }
    let lat = Lattice::new(basis.clone())?;
    let image = Lattice::new(frobenius.mul(&basis.sigma()))?;
    if let Some(j) = image.first_non_member(basis)? {
        return Ok(Some((j, "M ⊆ Φ(M)")));
    }
    let scaled = image.basis().scale(&PadicScalar::p_power(&spec, 1));
    if let Some(j) = lat.first_non_member(&scaled)? {
        return Ok(Some((j, "Φ(M) ⊆ p^-1 M")));
    }
    Ok(None)
}
