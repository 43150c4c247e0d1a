//! Dense factorizations consumed by the structured solvers.
//!
//! Everything here is a thin contract layer over `faer`, always run
//! sequentially so results are reproducible bit-for-bit for a given input.
//! Eigenvalues come back ascending, singular values descending.

use faer::linalg::matmul::triangular::BlockStructure;
use faer::linalg::{matmul, triangular_solve};
use faer::traits::Conjugate;
use faer::diag::Diag;
use faer::dyn_stack::{MemBuffer, MemStack};
use faer::{c64, Accum, Auto, Mat, MatMut, MatRef, Par, Side, Spec};

use crate::error::{Error, Result};

/// Eigendecomposition `M = vectors · diag(values) · vectorsᴴ` of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianEig {
    pub values: Vec<f64>,
    pub vectors: Mat<c64>,
}

/// Lower Cholesky factor `L` with `L·Lᴴ = M` and a real positive diagonal.
#[derive(Debug, Clone)]
pub struct CholeskyLower {
    l: Mat<c64>,
}

impl CholeskyLower {
    pub fn l(&self) -> MatRef<'_, c64> {
        self.l.as_ref()
    }

    pub fn dim(&self) -> usize {
        self.l.nrows()
    }

    pub fn into_inner(self) -> Mat<c64> {
        self.l
    }
}

/// `M = u · diag(s) · vᴴ`, singular values descending.
#[derive(Debug, Clone)]
pub struct SvdTriple {
    pub u: Mat<c64>,
    pub s: Vec<f64>,
    pub v: Mat<c64>,
}

/// Whether an operand enters a product or solve as-is or conjugate-transposed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Op {
    NoTrans,
    Adjoint,
}

/// Which side the triangular factor sits on in [`tri_solve`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TriSide {
    /// Solve `op(L)·X = rhs`.
    Left,
    /// Solve `X·op(L) = rhs`.
    Right,
}

/// Known zero pattern of a [`matmul`] operand, before `Op` is applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Structure {
    General,
    Lower,
    Upper,
}

impl Structure {
    fn block(self, op: Op) -> BlockStructure {
        match (self, op) {
            (Structure::General, _) => BlockStructure::Rectangular,
            (Structure::Lower, Op::NoTrans) | (Structure::Upper, Op::Adjoint) => {
                BlockStructure::TriangularLower
            }
            (Structure::Upper, Op::NoTrans) | (Structure::Lower, Op::Adjoint) => {
                BlockStructure::TriangularUpper
            }
        }
    }
}

fn ensure_square(m: MatRef<'_, c64>, what: &str) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "{what} must be square, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(m.nrows())
}

/// Hermitian eigendecomposition; only the lower triangle of `m` is read.
///
/// Always uses implicit QR iteration on the tridiagonal form. faer's
/// divide-and-conquer path (its default above n = 128) loses absolute
/// accuracy on eigenvalues far below `‖m‖`.
pub fn hermitian_eig(m: MatRef<'_, c64>) -> Result<HermitianEig> {
    use faer::linalg::evd::{self, ComputeEigenvectors, SelfAdjointEvdParams};

    let n = ensure_square(m, "hermitian_eig input")?;
    let mut params: SelfAdjointEvdParams = <SelfAdjointEvdParams as Auto<c64>>::auto();
    params.recursion_threshold = usize::MAX;
    let params = Spec::new(params);
    let mut s = Diag::<c64>::zeros(n);
    let mut u = Mat::<c64>::zeros(n, n);
    let mut buf = MemBuffer::new(evd::self_adjoint_evd_scratch::<c64>(
        n,
        ComputeEigenvectors::Yes,
        Par::Seq,
        params,
    ));
    evd::self_adjoint_evd(
        m.as_ref(),
        s.as_mut(),
        Some(u.as_mut()),
        Par::Seq,
        MemStack::new(&mut buf),
        params,
    )
    .map_err(|_| Error::ConvergenceFailure {
        routine: "hermitian_eig",
    })?;
    let values: Vec<f64> = (0..n).map(|i| s[i].re).collect();
    let order = sorted_order(&values, false);
    Ok(HermitianEig {
        values: order.iter().map(|&k| values[k]).collect(),
        vectors: Mat::from_fn(n, n, |i, j| u[(i, order[j])]),
    })
}

/// Cholesky factorization reading the lower triangle of `m`.
///
/// Doubles as the definiteness certificate: failure reports the zero-based
/// pivot at which a non-positive value appeared.
pub fn cholesky_lower(m: MatRef<'_, c64>) -> Result<CholeskyLower> {
    ensure_square(m, "cholesky_lower input")?;
    match faer::linalg::solvers::Llt::new(m, Side::Lower) {
        Ok(llt) => Ok(CholeskyLower {
            l: llt.L().to_owned(),
        }),
        Err(faer::linalg::cholesky::llt::factor::LltError::NonPositivePivot { index }) => {
            Err(Error::NotPositiveDefinite {
                pivot_index: Some(index),
            })
        }
    }
}

/// Full SVD of a square matrix, singular values descending.
///
/// Bidiagonal QR iteration only, for the same reason as [`hermitian_eig`].
pub fn svd(m: MatRef<'_, c64>) -> Result<SvdTriple> {
    use faer::linalg::svd::{self, ComputeSvdVectors, SvdParams};

    let n = ensure_square(m, "svd input")?;
    let mut params: SvdParams = <SvdParams as Auto<c64>>::auto();
    params.recursion_threshold = usize::MAX;
    let params = Spec::new(params);
    let mut s = Diag::<c64>::zeros(n);
    let mut u = Mat::<c64>::zeros(n, n);
    let mut v = Mat::<c64>::zeros(n, n);
    let mut buf = MemBuffer::new(svd::svd_scratch::<c64>(
        n,
        n,
        ComputeSvdVectors::Full,
        ComputeSvdVectors::Full,
        Par::Seq,
        params,
    ));
    svd::svd(
        m,
        s.as_mut(),
        Some(u.as_mut()),
        Some(v.as_mut()),
        Par::Seq,
        MemStack::new(&mut buf),
        params,
    )
    .map_err(|_| Error::ConvergenceFailure { routine: "svd" })?;
    let values: Vec<f64> = (0..n).map(|i| s[i].re).collect();
    let order = sorted_order(&values, true);
    Ok(SvdTriple {
        u: Mat::from_fn(n, n, |i, j| u[(i, order[j])]),
        s: order.iter().map(|&k| values[k]).collect(),
        v: Mat::from_fn(n, n, |i, j| v[(i, order[j])]),
    })
}

/// Stable sort permutation; a no-op for already ordered output.
fn sorted_order(values: &[f64], descending: bool) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    if descending {
        order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    } else {
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    }
    order
}

/// Principal square root `S = V·√D·Vᴴ` of a Hermitian positive definite matrix.
///
/// Eigenvalues at or below `ε·λ_max` are rejected, not clamped.
pub fn hpd_sqrt(m: MatRef<'_, c64>) -> Result<Mat<c64>> {
    let n = ensure_square(m, "hpd_sqrt input")?;
    let eig = hermitian_eig(m)?;
    let max = eig.values.last().copied().unwrap_or(0.0);
    let threshold = f64::EPSILON * max;
    if n > 0 && (max <= 0.0 || eig.values[0] <= threshold || !max.is_finite()) {
        return Err(Error::NotPositiveDefinite { pivot_index: None });
    }
    let roots: Vec<f64> = eig.values.iter().map(|d| d.sqrt()).collect();
    let scaled = Mat::from_fn(n, n, |i, j| eig.vectors[(i, j)] * roots[j]);
    let mut s = matmul(
        scaled.as_ref(),
        Op::NoTrans,
        Structure::General,
        eig.vectors.as_ref(),
        Op::Adjoint,
        Structure::General,
    )?;
    hermitize(&mut s);
    Ok(s)
}

/// Solves a triangular system with a Cholesky factor.
pub fn tri_solve(
    l: &CholeskyLower,
    rhs: MatRef<'_, c64>,
    side: TriSide,
    op: Op,
) -> Result<Mat<c64>> {
    let n = l.dim();
    let conforming = match side {
        TriSide::Left => rhs.nrows() == n,
        TriSide::Right => rhs.ncols() == n,
    };
    if !conforming {
        return Err(Error::DimensionMismatch(format!(
            "triangular factor is {n}x{n}, right-hand side is {}x{}",
            rhs.nrows(),
            rhs.ncols()
        )));
    }
    for i in 0..n {
        let d = l.l[(i, i)];
        if !(d.re.abs() >= f64::MIN_POSITIVE) || !d.re.is_finite() {
            return Err(Error::SingularFactor { index: i });
        }
    }

    // X·op(L) = R  <=>  op(L)ᴴ·Xᴴ = Rᴴ
    let (mut x, effective_op) = match side {
        TriSide::Left => (rhs.to_owned(), op),
        TriSide::Right => (
            rhs.adjoint().to_owned(),
            match op {
                Op::NoTrans => Op::Adjoint,
                Op::Adjoint => Op::NoTrans,
            },
        ),
    };
    match effective_op {
        Op::NoTrans => {
            triangular_solve::solve_lower_triangular_in_place(l.l(), x.as_mut(), Par::Seq)
        }
        Op::Adjoint => triangular_solve::solve_upper_triangular_in_place(
            l.l().adjoint(),
            x.as_mut(),
            Par::Seq,
        ),
    }
    Ok(match side {
        TriSide::Left => x,
        TriSide::Right => x.adjoint().to_owned(),
    })
}

/// `op(a) · op(b)`. Triangular hints let the kernel skip the known-zero half;
/// they describe `a` and `b` before the adjoint is applied.
pub fn matmul(
    a: MatRef<'_, c64>,
    op_a: Op,
    structure_a: Structure,
    b: MatRef<'_, c64>,
    op_b: Op,
    structure_b: Structure,
) -> Result<Mat<c64>> {
    let (rows, inner_a) = match op_a {
        Op::NoTrans => (a.nrows(), a.ncols()),
        Op::Adjoint => (a.ncols(), a.nrows()),
    };
    let (inner_b, cols) = match op_b {
        Op::NoTrans => (b.nrows(), b.ncols()),
        Op::Adjoint => (b.ncols(), b.nrows()),
    };
    if inner_a != inner_b {
        return Err(Error::DimensionMismatch(format!(
            "cannot multiply {rows}x{inner_a} by {inner_b}x{cols}"
        )));
    }
    let bs_a = if rows == inner_a { structure_a.block(op_a) } else { BlockStructure::Rectangular };
    let bs_b = if inner_b == cols { structure_b.block(op_b) } else { BlockStructure::Rectangular };
    let mut out = Mat::<c64>::zeros(rows, cols);
    match (op_a, op_b) {
        (Op::NoTrans, Op::NoTrans) => product(out.as_mut(), a, bs_a, b, bs_b),
        (Op::NoTrans, Op::Adjoint) => product(out.as_mut(), a, bs_a, b.adjoint(), bs_b),
        (Op::Adjoint, Op::NoTrans) => product(out.as_mut(), a.adjoint(), bs_a, b, bs_b),
        (Op::Adjoint, Op::Adjoint) => {
            product(out.as_mut(), a.adjoint(), bs_a, b.adjoint(), bs_b)
        }
    }
    Ok(out)
}

fn product<L, R>(
    out: MatMut<'_, c64>,
    lhs: MatRef<'_, L>,
    bs_lhs: BlockStructure,
    rhs: MatRef<'_, R>,
    bs_rhs: BlockStructure,
) where
    L: Conjugate<Canonical = c64>,
    R: Conjugate<Canonical = c64>,
{
    let one = c64::new(1.0, 0.0);
    if bs_lhs == BlockStructure::Rectangular && bs_rhs == BlockStructure::Rectangular {
        matmul::matmul(out, Accum::Replace, lhs, rhs, one, Par::Seq);
    } else {
        matmul::triangular::matmul(
            out,
            BlockStructure::Rectangular,
            Accum::Replace,
            lhs,
            bs_lhs,
            rhs,
            bs_rhs,
            one,
            Par::Seq,
        );
    }
}

/// Replaces `m` by `(m + mᴴ)/2` in place.
pub(crate) fn hermitize(m: &mut Mat<c64>) {
    let n = m.nrows();
    for j in 0..n {
        m[(j, j)] = c64::new(m[(j, j)].re, 0.0);
        for i in j + 1..n {
            let avg = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
            m[(i, j)] = avg;
            m[(j, i)] = avg.conj();
        }
    }
}
