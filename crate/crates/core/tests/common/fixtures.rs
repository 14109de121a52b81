//! Small algebras shared by several test suites.

use std::sync::Arc;

use isolab::dieudonne::{structure_constants, DieudonneLieAlgebra};
use isolab::{FieldSpec, Isocrystal, Mat, PadicScalar};

/// x, y, z with Φx = x/p, Φy = y, Φz = z/p and [x, y] = z.
pub fn heisenberg(spec: &Arc<FieldSpec>, lattice: Option<Mat>) -> DieudonneLieAlgebra {
    let iso = Isocrystal::diagonal_powers(spec, &[-1, 0, -1]);
    let c = structure_constants(spec, 3, &[(0, 1, 2, PadicScalar::one(spec))]);
    DieudonneLieAlgebra::new(iso, c, lattice).unwrap()
}

/// Same bracket with Φz = z, which breaks F-equivariance.
pub fn heisenberg_wrong_frobenius(spec: &Arc<FieldSpec>) -> DieudonneLieAlgebra {
    let iso = Isocrystal::diagonal_powers(spec, &[-1, 0, 0]);
    let c = structure_constants(spec, 3, &[(0, 1, 2, PadicScalar::one(spec))]);
    DieudonneLieAlgebra::new(iso, c, None).unwrap()
}

/// x, y a slope -1/2 block with Φx = y, Φy = -x/p; z of slope -1 with
/// Φz = z/p; [x, y] = z.
pub fn heisenberg_type(spec: &Arc<FieldSpec>, lattice: Option<Mat>) -> DieudonneLieAlgebra {
    let f = Mat::from_i64_ratios(
        spec,
        &[&[(0, 1), (-1, spec.p() as i64), (0, 1)], &[(1, 1), (0, 1), (0, 1)], &[(0, 1), (0, 1), (1, spec.p() as i64)]],
    );
    let iso = Isocrystal::new(f).unwrap();
    let c = structure_constants(spec, 3, &[(0, 1, 2, PadicScalar::one(spec))]);
    DieudonneLieAlgebra::new(iso, c, lattice).unwrap()
}

/// Strictly upper-triangular n×n matrices with basis E_ij (i < j, row-major)
/// and the commutator bracket, with trivial Frobenius.
pub fn strictly_upper(spec: &Arc<FieldSpec>, n: usize) -> DieudonneLieAlgebra {
    let idx: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let pos = |a: usize, b: usize| idx.iter().position(|&e| e == (a, b));
    let mut entries = Vec::new();
    for (u, &(i, j)) in idx.iter().enumerate() {
        for (v, &(k, l)) in idx.iter().enumerate() {
            if u >= v {
                continue;
            }
            // [E_ij, E_kl] = δ_jk E_il - δ_li E_kj
            if j == k {
                entries.push((u, v, pos(i, l).unwrap(), PadicScalar::one(spec)));
            }
            if l == i {
                entries.push((u, v, pos(k, j).unwrap(), PadicScalar::from_int(spec, -1)));
            }
        }
    }
    let m = idx.len();
    let iso = Isocrystal::new(Mat::identity(spec, m)).unwrap();
    DieudonneLieAlgebra::new(iso, structure_constants(spec, m, &entries), None).unwrap()
}
