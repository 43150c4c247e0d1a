//! Structure predicates and accuracy diagnostics.

use faer::{c64, Mat, MatRef};

use crate::error::{Error, Result};
use crate::matrix::{BseMatrixI, SpectralResult};

/// `J = [[0, I], [-I, 0]]` and `Σ = diag(I, -I)` of half-dimension `n`,
/// applied without being formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SignatureOperators {
    n: usize,
}

impl SignatureOperators {
    pub fn new(n: usize) -> Self {
        Self { n }
    }

    /// Operators matching the row dimension of `m`.
    pub fn for_rows(rows: usize) -> Result<Self> {
        if rows % 2 != 0 {
            return Err(Error::OddDimension { rows });
        }
        Ok(Self::new(rows / 2))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn check_rows(&self, rows: usize) -> Result<()> {
        if rows != 2 * self.n {
            return Err(Error::DimensionMismatch(format!(
                "signature operators act on {} rows, operand has {rows}",
                2 * self.n
            )));
        }
        Ok(())
    }

    /// `J·X`: top ← bottom, bottom ← −top.
    pub fn apply_j(&self, x: MatRef<'_, c64>) -> Result<Mat<c64>> {
        self.check_rows(x.nrows())?;
        let n = self.n;
        Ok(Mat::from_fn(x.nrows(), x.ncols(), |i, j| {
            if i < n {
                x[(i + n, j)]
            } else {
                -x[(i - n, j)]
            }
        }))
    }

    /// `X·J`: left ← −right, right ← left.
    pub fn apply_j_right(&self, x: MatRef<'_, c64>) -> Result<Mat<c64>> {
        self.check_rows(x.ncols())?;
        let n = self.n;
        Ok(Mat::from_fn(x.nrows(), x.ncols(), |i, j| {
            if j < n {
                -x[(i, j + n)]
            } else {
                x[(i, j - n)]
            }
        }))
    }

    /// `Σ·X`: negate the bottom half.
    pub fn apply_sigma(&self, x: MatRef<'_, c64>) -> Result<Mat<c64>> {
        self.check_rows(x.nrows())?;
        let n = self.n;
        Ok(Mat::from_fn(x.nrows(), x.ncols(), |i, j| {
            if i < n {
                x[(i, j)]
            } else {
                -x[(i, j)]
            }
        }))
    }

    /// `X·Σ`: negate the right half.
    pub fn apply_sigma_right(&self, x: MatRef<'_, c64>) -> Result<Mat<c64>> {
        self.check_rows(x.ncols())?;
        let n = self.n;
        Ok(Mat::from_fn(x.nrows(), x.ncols(), |i, j| {
            if j < n {
                x[(i, j)]
            } else {
                -x[(i, j)]
            }
        }))
    }

    /// `J·X·J`.
    pub fn conjugate_j(&self, x: MatRef<'_, c64>) -> Result<Mat<c64>> {
        let jx = self.apply_j(x)?;
        self.apply_j_right(jx.as_ref())
    }

    /// `Σ·X·Σ`.
    pub fn conjugate_sigma(&self, x: MatRef<'_, c64>) -> Result<Mat<c64>> {
        let sx = self.apply_sigma(x)?;
        self.apply_sigma_right(sx.as_ref())
    }
}

fn square_even(m: MatRef<'_, c64>) -> Result<SignatureOperators> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "expected a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    SignatureOperators::for_rows(m.nrows())
}

fn relative_gap(lhs: &Mat<c64>, m: MatRef<'_, c64>, scale: f64) -> f64 {
    let diff = lhs - m;
    let num = diff.norm_l2();
    if scale == 0.0 {
        num
    } else {
        num / scale
    }
}

/// Form I: `J·Mᴴ·J = M` and `Σ·Mᴴ·Σ = M`, each to `tol·‖M‖_F`.
pub fn check_form1(m: MatRef<'_, c64>, tol: f64) -> Result<bool> {
    let ops = square_even(m)?;
    let scale = m.norm_l2();
    let mh = m.adjoint().to_owned();
    let j_cond = relative_gap(&ops.conjugate_j(mh.as_ref())?, m, scale);
    let s_cond = relative_gap(&ops.conjugate_sigma(mh.as_ref())?, m, scale);
    Ok(j_cond <= tol && s_cond <= tol)
}

/// Form II: `J·Mᵀ·J = M` and `Σ·Mᴴ·Σ = M`, each to `tol·‖M‖_F`.
pub fn check_form2(m: MatRef<'_, c64>, tol: f64) -> Result<bool> {
    let ops = square_even(m)?;
    let scale = m.norm_l2();
    let mt = m.transpose().to_owned();
    let mh = m.adjoint().to_owned();
    let j_cond = relative_gap(&ops.conjugate_j(mt.as_ref())?, m, scale);
    let s_cond = relative_gap(&ops.conjugate_sigma(mh.as_ref())?, m, scale);
    Ok(j_cond <= tol && s_cond <= tol)
}

/// `‖VᴴΣV − I_k‖_F` for a `2n×k` block `V`.
pub fn sigma_orthogonality_error(v: MatRef<'_, c64>) -> Result<f64> {
    let ops = SignatureOperators::for_rows(v.nrows())?;
    let sv = ops.apply_sigma(v)?;
    let mut g = v.adjoint() * &sv;
    for i in 0..g.nrows() {
        g[(i, i)] -= c64::new(1.0, 0.0);
    }
    Ok(g.norm_l2())
}

/// Per-column `‖H·vⱼ − λⱼ·vⱼ‖₂ / ‖H‖_F`.
pub fn residual(h: &BseMatrixI, r: &SpectralResult) -> Result<Vec<f64>> {
    if r.v.ncols() != r.lambda.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} eigenvalues for {} eigenvectors",
            r.lambda.len(),
            r.v.ncols()
        )));
    }
    let hv = h.apply(r.v.as_ref())?;
    let norm = h.norm_fro();
    Ok(r
        .lambda
        .iter()
        .enumerate()
        .map(|(j, &lam)| {
            let col: f64 = (0..hv.nrows())
                .map(|i| (hv[(i, j)] - r.v[(i, j)] * lam).norm_sqr())
                .sum();
            col.sqrt() / norm
        })
        .collect())
}

/// Whether `pos` and `−neg` agree as multisets, within `tol·max|pos|`.
pub fn check_pairing(pos: &[f64], neg: &[f64], tol: f64) -> Result<bool> {
    if pos.len() != neg.len() {
        return Err(Error::LengthMismatch {
            left: pos.len(),
            right: neg.len(),
        });
    }
    let mut p = pos.to_vec();
    let mut q: Vec<f64> = neg.iter().map(|x| -x).collect();
    p.sort_by(f64::total_cmp);
    q.sort_by(f64::total_cmp);
    let scale = pos.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    Ok(p.iter().zip(&q).all(|(a, b)| (a - b).abs() <= tol * scale))
}

/// Inputs to the first-order eigenvalue error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorModelInput {
    pub norm_h: f64,
    pub lambda: f64,
    pub s_lambda: f64,
    pub eps: f64,
}

impl ErrorModelInput {
    pub fn new(norm_h: f64, lambda: f64, s_lambda: f64, eps: f64) -> Result<Self> {
        let ok = |x: f64| x.is_finite() && x > 0.0;
        if !(ok(norm_h) && ok(lambda) && ok(s_lambda) && ok(eps)) || s_lambda > 1.0 {
            return Err(Error::InvalidSpec(format!(
                "error model needs positive inputs with s_lambda <= 1 \
                 (norm_h={norm_h}, lambda={lambda}, s_lambda={s_lambda}, eps={eps})"
            )));
        }
        Ok(Self {
            norm_h,
            lambda,
            s_lambda,
            eps,
        })
    }

    /// `s(λ) = 1`, `ε = f64::EPSILON`.
    pub fn with_defaults(norm_h: f64, lambda: f64) -> Result<Self> {
        Self::new(norm_h, lambda, 1.0, f64::EPSILON)
    }
}

/// Expected absolute error of a computed eigenvalue.
///
/// Squaring methods: `ε·(‖H‖/s)·min(‖H‖/λ, 1/√ε)`; direct methods: `ε·‖H‖/s`.
pub fn predicted_error(input: &ErrorModelInput, squared_method: bool) -> f64 {
    let base = input.eps * input.norm_h / input.s_lambda;
    if squared_method {
        base * (input.norm_h / input.lambda).min(1.0 / input.eps.sqrt())
    } else {
        base
    }
}
