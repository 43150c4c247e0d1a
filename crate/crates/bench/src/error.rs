use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}line {line}: {message}", file_prefix(file))]
    Parse {
        line: usize,
        message: String,
        file: Option<PathBuf>,
    },

    #[error(transparent)]
    Core(#[from] bse_core::Error),

    #[error("invalid configuration: {0}")]
    Config(String),
}

fn file_prefix(file: &Option<PathBuf>) -> String {
    file.as_ref()
        .map(|p| format!("{}: ", p.display()))
        .unwrap_or_default()
}

impl BenchError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        BenchError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// Attaches a file name to a parse error; other variants pass through.
    pub fn in_file(self, path: &Path) -> Self {
        match self {
            BenchError::Parse { line, message, .. } => BenchError::Parse {
                line,
                message,
                file: Some(path.to_path_buf()),
            },
            other => other,
        }
    }

    /// Stable snake-case identifier used in CSV status fields and error lines.
    pub fn kind(&self) -> &'static str {
        match self {
            BenchError::Io { .. } => "io",
            BenchError::Parse { .. } => "parse",
            BenchError::Core(e) => core_kind(e),
            BenchError::Config(_) => "config",
        }
    }

    /// Process exit code; see [`EXIT_CODES`].
    pub fn exit_code(&self) -> i32 {
        let kind = self.kind();
        EXIT_CODES
            .iter()
            .find(|(_, k, _)| *k == kind)
            .map(|(code, _, _)| *code)
            .unwrap_or(1)
    }
}

pub fn core_kind(e: &bse_core::Error) -> &'static str {
    use bse_core::Error as E;
    match e {
        E::DimensionMismatch(_) => "dimension_mismatch",
        E::NotHermitian { .. } => "not_hermitian",
        E::NotDefinite { .. } => "not_definite",
        E::NotPositiveDefinite { .. } => "not_positive_definite",
        E::ConvergenceFailure { .. } => "convergence_failure",
        E::NonPositiveScale { .. } => "non_positive_scale",
        E::SingularFactor { .. } => "singular_factor",
        E::OddDimension { .. } => "odd_dimension",
        E::LengthMismatch { .. } => "length_mismatch",
        E::InvalidSpec(_) => "invalid_spec",
    }
}

/// `(exit code, kind, description)` for every failure the CLI can report.
pub const EXIT_CODES: &[(i32, &str, &str)] = &[
    (1, "io", "file could not be read or written"),
    (2, "usage", "invalid command line"),
    (3, "parse", "malformed Matrix Market file"),
    (4, "config", "invalid configuration file or option values"),
    (5, "dimension_mismatch", "matrix dimensions do not conform"),
    (6, "not_hermitian", "A or B is not Hermitian"),
    (7, "not_definite", "A+B or A-B is not positive definite"),
    (8, "not_positive_definite", "a factorization met a non-positive pivot"),
    (9, "convergence_failure", "an eigenvalue or singular value iteration failed"),
    (10, "non_positive_scale", "eigenvector scaling factor not positive"),
    (11, "singular_factor", "triangular factor is singular"),
    (12, "odd_dimension", "expected an even dimension"),
    (13, "length_mismatch", "eigenvalue lists differ in length"),
    (14, "invalid_spec", "invalid generator parameters"),
];
