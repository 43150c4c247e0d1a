//! Dense eigensolvers for form-I Bethe-Salpeter matrices
//! `H = [[A, B], [-B, -A]]` with `A ± B` Hermitian positive definite.

pub mod backend;
pub mod error;
pub mod gen;
pub mod matrix;
pub mod solvers;
pub mod verify;

pub use error::{DefiniteFactor, Error, Result};
pub use gen::GeneratorSpec;
pub use matrix::{BseMatrixI, Diagnostic, HalfSpectralFactors, Method, ProductPair, SpectralResult};
pub use solvers::{negative_spectrum, solve};
