//! Form-I BSE matrices `H = [[A, B], [-B, -A]]` with Hermitian `A`, `B`,
//! and the pieces every structured solver shares.

use faer::{c64, Mat, MatRef};

use crate::backend::{self, hermitize, CholeskyLower};
use crate::error::{DefiniteFactor, Error, Result};

/// Default relative Hermitian tolerance for [`BseMatrixI::from_blocks`].
pub const DEFAULT_HERMITIAN_TOL: f64 = 1e-12;

/// A validated BSE matrix of form I, stored as its two `n×n` blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct BseMatrixI {
    a: Mat<c64>,
    b: Mat<c64>,
}

impl BseMatrixI {
    /// Validates and stores `A` and `B`.
    ///
    /// A block whose relative deviation `‖X − Xᴴ‖_F / ‖X‖_F` is within `tol`
    /// is replaced by its Hermitian part; anything larger is rejected.
    pub fn from_blocks(a: Mat<c64>, b: Mat<c64>, tol: f64) -> Result<Self> {
        if a.nrows() != a.ncols() || b.nrows() != b.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "blocks must be square, got A {}x{} and B {}x{}",
                a.nrows(),
                a.ncols(),
                b.nrows(),
                b.ncols()
            )));
        }
        if a.nrows() != b.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "A is {0}x{0} but B is {1}x{1}",
                a.nrows(),
                b.nrows()
            )));
        }
        if a.nrows() == 0 {
            return Err(Error::DimensionMismatch("blocks must be non-empty".into()));
        }
        let a = symmetrize_checked(a, "A", tol)?;
        let b = symmetrize_checked(b, "B", tol)?;
        Ok(Self { a, b })
    }

    /// Half-dimension `n`; the realized matrix is `2n×2n`.
    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    pub fn a(&self) -> MatRef<'_, c64> {
        self.a.as_ref()
    }

    pub fn b(&self) -> MatRef<'_, c64> {
        self.b.as_ref()
    }

    /// `‖H‖_F = √(2‖A‖²_F + 2‖B‖²_F)`.
    pub fn norm_fro(&self) -> f64 {
        let a = self.a.norm_l2();
        let b = self.b.norm_l2();
        (2.0 * (a * a + b * b)).sqrt()
    }

    /// The dense `2n×2n` matrix `[[A, B], [-B, -A]]`.
    pub fn realize_full(&self) -> Mat<c64> {
        let n = self.n();
        Mat::from_fn(2 * n, 2 * n, |i, j| match (i < n, j < n) {
            (true, true) => self.a[(i, j)],
            (true, false) => self.b[(i, j - n)],
            (false, true) => -self.b[(i - n, j)],
            (false, false) => -self.a[(i - n, j - n)],
        })
    }

    /// Reads `A` (top-left) and `B` (top-right) from a dense `2n×2n` matrix.
    ///
    /// The bottom blocks are not inspected; use
    /// [`crate::verify::check_form1`] first if the input is untrusted.
    pub fn from_full(m: MatRef<'_, c64>, tol: f64) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "expected a square matrix, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.nrows() % 2 != 0 {
            return Err(Error::OddDimension { rows: m.nrows() });
        }
        let n = m.nrows() / 2;
        let a = m.submatrix(0, 0, n, n).to_owned();
        let b = m.submatrix(0, n, n, n).to_owned();
        Self::from_blocks(a, b, tol)
    }

    /// The Hermitian BSE Hamiltonian `ΣH = [[A, B], [B, A]]`.
    pub fn hamiltonian(&self) -> Mat<c64> {
        let n = self.n();
        Mat::from_fn(2 * n, 2 * n, |i, j| match (i < n, j < n) {
            (true, true) => self.a[(i, j)],
            (true, false) => self.b[(i, j - n)],
            (false, true) => self.b[(i - n, j)],
            (false, false) => self.a[(i - n, j - n)],
        })
    }

    /// `H·X` for a `2n×k` block `X`, using the block structure.
    pub fn apply(&self, x: MatRef<'_, c64>) -> Result<Mat<c64>> {
        let n = self.n();
        if x.nrows() != 2 * n {
            return Err(Error::DimensionMismatch(format!(
                "H is {0}x{0}, operand has {1} rows",
                2 * n,
                x.nrows()
            )));
        }
        let top = x.subrows(0, n);
        let bottom = x.subrows(n, n);
        let at = &self.a * top;
        let ab = &self.a * bottom;
        let bt = &self.b * top;
        let bb = &self.b * bottom;
        let k = x.ncols();
        Ok(Mat::from_fn(2 * n, k, |i, j| {
            if i < n {
                at[(i, j)] + bb[(i, j)]
            } else {
                -bt[(i - n, j)] - ab[(i - n, j)]
            }
        }))
    }

    /// Forms `M1 = A + B` and `M2 = A − B` and certifies both by Cholesky.
    pub fn product_pair(&self) -> Result<ProductPair> {
        let m1 = &self.a + &self.b;
        let m2 = &self.a - &self.b;
        let l1 = backend::cholesky_lower(m1.as_ref()).map_err(|_| Error::NotDefinite {
            which: DefiniteFactor::M1,
        })?;
        let l2 = backend::cholesky_lower(m2.as_ref()).map_err(|_| Error::NotDefinite {
            which: DefiniteFactor::M2,
        })?;
        Ok(ProductPair { m1, m2, l1, l2 })
    }
}

fn symmetrize_checked(mut m: Mat<c64>, block: &'static str, tol: f64) -> Result<Mat<c64>> {
    let norm = m.norm_l2();
    let deviation = (&m - m.adjoint()).norm_l2();
    let relative = if norm > 0.0 { deviation / norm } else { 0.0 };
    if !(relative <= tol) {
        return Err(Error::NotHermitian {
            block,
            deviation: relative,
            tol,
        });
    }
    hermitize(&mut m);
    Ok(m)
}

/// `M1 = A + B`, `M2 = A − B`, both certified positive definite.
///
/// The Cholesky factors obtained while certifying are kept so that solvers
/// built on them do not factor twice.
#[derive(Debug, Clone)]
pub struct ProductPair {
    m1: Mat<c64>,
    m2: Mat<c64>,
    l1: CholeskyLower,
    l2: CholeskyLower,
}

impl ProductPair {
    pub fn m1(&self) -> MatRef<'_, c64> {
        self.m1.as_ref()
    }

    pub fn m2(&self) -> MatRef<'_, c64> {
        self.m2.as_ref()
    }

    /// `L1` with `L1·L1ᴴ = M1`.
    pub fn chol_m1(&self) -> &CholeskyLower {
        &self.l1
    }

    /// `L2` with `L2·L2ᴴ = M2`.
    pub fn chol_m2(&self) -> &CholeskyLower {
        &self.l2
    }
}

/// Right/left eigenvector factors of `M1·M2` with their cross scaling factors.
///
/// Column `j` of `v1` is a right eigenvector, column `j` of `v2` a left one,
/// normalized so that `v1ⱼᴴ v2ⱼ = 1`, with `M1 v2ⱼ = λ1ⱼ v1ⱼ` and
/// `M2 v1ⱼ = λ2ⱼ v2ⱼ`.
#[derive(Debug, Clone)]
pub struct HalfSpectralFactors {
    pub v1: Mat<c64>,
    pub v2: Mat<c64>,
    pub lambda1: Vec<f64>,
    pub lambda2: Vec<f64>,
}

impl HalfSpectralFactors {
    /// Builds the `2n×k` eigenvector matrix of `H`.
    ///
    /// Column `j` is `Q·[xⱼ; yⱼ]` with `Q = ½[[I, I], [-I, I]]`,
    /// `xⱼ = v1ⱼ·(λ1ⱼ/λ2ⱼ)^¼` and `yⱼ = v2ⱼ·(λ2ⱼ/λ1ⱼ)^¼`. For exact factors
    /// the result is Σ-orthonormal.
    pub fn assemble_eigenvectors(&self) -> Result<Mat<c64>> {
        let (n, k) = (self.v1.nrows(), self.v1.ncols());
        if self.v2.nrows() != n
            || self.v2.ncols() != k
            || self.lambda1.len() != k
            || self.lambda2.len() != k
        {
            return Err(Error::DimensionMismatch(format!(
                "factors v1 {}x{}, v2 {}x{}, {} and {} scaling factors",
                n,
                k,
                self.v2.nrows(),
                self.v2.ncols(),
                self.lambda1.len(),
                self.lambda2.len()
            )));
        }
        let mut scales = Vec::with_capacity(k);
        for (j, (&l1, &l2)) in self.lambda1.iter().zip(&self.lambda2).enumerate() {
            let valid = |x: f64| x.is_finite() && x > 0.0;
            if !valid(l1) || !valid(l2) {
                return Err(Error::NonPositiveScale { column: j });
            }
            let s = (l1 / l2).powf(0.25);
            scales.push((s, 1.0 / s));
        }
        Ok(Mat::from_fn(2 * n, k, |i, j| {
            let (sx, sy) = scales[j];
            let r = i % n;
            let x = self.v1[(r, j)] * sx;
            let y = self.v2[(r, j)] * sy;
            if i < n {
                (x + y) * 0.5
            } else {
                (y - x) * 0.5
            }
        }))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Sqrt,
    Chol,
    CholSvd,
    Reference,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Sqrt, Method::Chol, Method::CholSvd, Method::Reference];
    pub const STRUCTURED: [Method; 3] = [Method::Sqrt, Method::Chol, Method::CholSvd];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Sqrt => "sqrt",
            Method::Chol => "chol",
            Method::CholSvd => "chol-svd",
            Method::Reference => "reference",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "sqrt" => Ok(Method::Sqrt),
            "chol" => Ok(Method::Chol),
            "chol-svd" | "cholsvd" | "chol_svd" => Ok(Method::CholSvd),
            "reference" | "ref" => Ok(Method::Reference),
            other => Err(format!(
                "unknown method `{other}` (expected sqrt, chol, chol-svd or reference)"
            )),
        }
    }
}

/// Non-fatal findings attached to a [`SpectralResult`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Diagnostic {
    /// A computed eigenvalue (or its square, for the squaring methods) fell
    /// at or below `threshold = ε·max`, so the `Λ^{±1/2}` scaling of its
    /// eigenvector is unreliable. `raw` is the value before any repair.
    NearSingularEigenvalue {
        index: usize,
        raw: f64,
        threshold: f64,
    },
}

/// Eigenpairs of `H`: `H·v[:, j] = lambda[j]·v[:, j]`.
///
/// Solvers return the `n` positive eigenvalues in ascending order;
/// [`crate::solvers::negative_spectrum`] returns their mirrors `−λⱼ` in the
/// same column order.
#[derive(Debug, Clone)]
pub struct SpectralResult {
    pub lambda: Vec<f64>,
    pub v: Mat<c64>,
    pub method: Method,
    pub diagnostics: Vec<Diagnostic>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn real(rows: &[&[f64]]) -> Mat<c64> {
        Mat::from_fn(rows.len(), rows[0].len(), |i, j| c64::new(rows[i][j], 0.0))
    }

    fn canonical() -> BseMatrixI {
        BseMatrixI::from_blocks(real(&[&[2.0]]), real(&[&[1.0]]), DEFAULT_HERMITIAN_TOL).unwrap()
    }

    #[test]
    fn from_blocks_scalar() {
        assert_eq!(canonical().n(), 1);
    }

    #[test]
    fn from_blocks_rejects_non_hermitian() {
        let err = BseMatrixI::from_blocks(
            real(&[&[0.0, 1.0], &[0.0, 0.0]]),
            Mat::zeros(2, 2),
            DEFAULT_HERMITIAN_TOL,
        )
        .unwrap_err();
        assert!(matches!(err, Error::NotHermitian { block: "A", .. }));
    }

    #[test]
    fn from_blocks_rejects_shapes() {
        let err = BseMatrixI::from_blocks(Mat::zeros(2, 2), Mat::zeros(3, 3), 1e-12).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch(_)));
        let err = BseMatrixI::from_blocks(Mat::zeros(2, 3), Mat::zeros(2, 3), 1e-12).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch(_)));
    }

    #[test]
    fn from_blocks_symmetrizes_small_noise() {
        let mut a = real(&[&[1.0, 0.5], &[0.5, 2.0]]);
        a[(0, 1)] = c64::new(0.5 + 1e-14, 1e-14);
        let h = BseMatrixI::from_blocks(a, Mat::zeros(2, 2), 1e-12).unwrap();
        assert_eq!(h.a()[(0, 1)], h.a()[(1, 0)].conj());
    }

    #[test]
    fn realize_full_places_blocks() {
        let full = canonical().realize_full();
        let want = real(&[&[2.0, 1.0], &[-1.0, -2.0]]);
        assert_eq!((&full - &want).norm_l2(), 0.0);

        let h = BseMatrixI::from_blocks(Mat::identity(2, 2), Mat::zeros(2, 2), 1e-12).unwrap();
        let full = h.realize_full();
        for i in 0..4 {
            let expected = if i < 2 { 1.0 } else { -1.0 };
            assert_eq!(full[(i, i)], c64::new(expected, 0.0));
        }
        assert_eq!(full.norm_l2(), 2.0);
    }

    #[test]
    fn apply_matches_dense_product() {
        let a = Mat::from_fn(3, 3, |i, j| {
            c64::new((i + j) as f64, if i == j { 0.0 } else { i as f64 - j as f64 })
        });
        let b = Mat::from_fn(3, 3, |i, j| c64::new(1.0 / (1 + i + j) as f64, 0.0));
        let h = BseMatrixI::from_blocks(a, b, 1e-12).unwrap();
        let x = Mat::from_fn(6, 2, |i, j| c64::new(i as f64 - 2.0, j as f64 + 0.5));
        let dense = h.realize_full() * &x;
        let fast = h.apply(x.as_ref()).unwrap();
        assert!((&dense - &fast).norm_l2() < 1e-13);
    }

    #[test]
    fn product_pair_scalar() {
        let pair = canonical().product_pair().unwrap();
        assert_eq!(pair.m1()[(0, 0)], c64::new(3.0, 0.0));
        assert_eq!(pair.m2()[(0, 0)], c64::new(1.0, 0.0));

        let h = BseMatrixI::from_blocks(real(&[&[1.0]]), real(&[&[2.0]]), 1e-12).unwrap();
        assert_eq!(
            h.product_pair().unwrap_err(),
            Error::NotDefinite {
                which: DefiniteFactor::M2
            }
        );
        let h = BseMatrixI::from_blocks(real(&[&[1.0]]), real(&[&[-2.0]]), 1e-12).unwrap();
        assert_eq!(
            h.product_pair().unwrap_err(),
            Error::NotDefinite {
                which: DefiniteFactor::M1
            }
        );
    }

    #[test]
    fn assemble_scalar_closed_form() {
        // x = 3^{1/4}, y = 3^{-1/4}; v = [½(x+y); ½(y−x)]
        let f = HalfSpectralFactors {
            v1: real(&[&[3f64.powf(0.25)]]),
            v2: real(&[&[3f64.powf(-0.25)]]),
            lambda1: vec![1.0],
            lambda2: vec![1.0],
        };
        let v = f.assemble_eigenvectors().unwrap();
        assert!((v[(0, 0)].re - 1.0379549).abs() < 1e-7);
        assert!((v[(1, 0)].re + 0.2781192).abs() < 1e-7);
    }

    #[test]
    fn assemble_equal_factors_zero_bottom() {
        let f = HalfSpectralFactors {
            v1: Mat::identity(3, 1),
            v2: Mat::identity(3, 1),
            lambda1: vec![1.0],
            lambda2: vec![1.0],
        };
        let v = f.assemble_eigenvectors().unwrap();
        assert_eq!(v[(0, 0)], c64::new(1.0, 0.0));
        for i in 1..6 {
            assert_eq!(v[(i, 0)], c64::new(0.0, 0.0));
        }
    }

    #[test]
    fn assemble_rejects_bad_scales() {
        for bad in [0.0, -1.0, f64::NAN, f64::INFINITY] {
            let f = HalfSpectralFactors {
                v1: Mat::identity(2, 2),
                v2: Mat::identity(2, 2),
                lambda1: vec![1.0, 1.0],
                lambda2: vec![1.0, bad],
            };
            assert_eq!(
                f.assemble_eigenvectors().unwrap_err(),
                Error::NonPositiveScale { column: 1 }
            );
        }
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.as_str().parse::<Method>().unwrap(), m);
        }
        assert!("qr".parse::<Method>().is_err());
    }
}
