use thiserror::Error;

/// Which Hermitian matrix failed the definiteness certificate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DefiniteFactor {
    /// `M1 = A + B`
    M1,
    /// `M2 = A - B`
    M2,
    /// The full BSE Hamiltonian `ΣH = [[A, B], [B, A]]`.
    Hamiltonian,
}

impl std::fmt::Display for DefiniteFactor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DefiniteFactor::M1 => f.write_str("A+B"),
            DefiniteFactor::M2 => f.write_str("A-B"),
            DefiniteFactor::Hamiltonian => f.write_str("ΣH"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("block {block} is not Hermitian (relative deviation {deviation:.3e} > {tol:.3e})")]
    NotHermitian {
        block: &'static str,
        deviation: f64,
        tol: f64,
    },

    #[error("{which} is not positive definite; form-I solvers do not apply")]
    NotDefinite { which: DefiniteFactor },

    /// Raised by the dense backend. `pivot_index` is the zero-based Cholesky
    /// pivot that failed, or `None` when detected from the spectrum.
    #[error("matrix is not positive definite (pivot {pivot_index:?})")]
    NotPositiveDefinite { pivot_index: Option<usize> },

    #[error("{routine} failed to converge")]
    ConvergenceFailure { routine: &'static str },

    #[error("non-positive or non-finite scaling factor in column {column}")]
    NonPositiveScale { column: usize },

    #[error("triangular factor is singular at diagonal index {index}")]
    SingularFactor { index: usize },

    #[error("expected an even row dimension, got {rows}")]
    OddDimension { rows: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("invalid generator spec: {0}")]
    InvalidSpec(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
