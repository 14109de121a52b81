//! Exact p-adic computations for F-isocrystals, Dieudonné-Lie algebras,
//! Baker-Campbell-Hausdorff group laws, root-theoretic slope data and
//! perfected power series.

pub mod bch;
pub mod dieudonne;
pub mod error;
pub mod isocrystal;
pub mod lattice;
pub mod linalg;
pub mod newton;
pub mod padic;
pub mod perfected;
pub mod roots;
pub mod semilinear;

pub use dieudonne::DieudonneLieAlgebra;
pub use error::{Error, Result};
pub use isocrystal::{Isocrystal, SlopeBlock, SlopeMultiset, SlopePredicate};
pub use lattice::Lattice;
pub use linalg::{Mat, Vector};
pub use padic::{FieldSpec, PadicScalar, Valuation};
