//! Positive-spectrum solvers for form-I BSE matrices.
//!
//! The three structured solvers reduce `H` to the product eigenvalue problem
//! for `M1·M2` (`M1 = A + B`, `M2 = A − B`), solve it with a Hermitian
//! eigendecomposition or an SVD of size `n`, and rebuild Σ-orthonormal
//! eigenvectors of `H` from the left/right factors. [`solve_reference`]
//! ignores that structure and solves the `2n` Hermitian-definite pencil
//! `(ΣH, Σ)` directly; it exists to cross-check the other three.

use faer::{c64, Mat};

use crate::backend::{
    self, cholesky_lower, hermitian_eig, hpd_sqrt, tri_solve, Op, Structure, TriSide,
};
use crate::error::{DefiniteFactor, Error, Result};
use crate::matrix::{BseMatrixI, Diagnostic, HalfSpectralFactors, Method, SpectralResult};

/// Runs the solver selected by `method`.
pub fn solve(h: &BseMatrixI, method: Method) -> Result<SpectralResult> {
    match method {
        Method::Sqrt => solve_sqrt(h),
        Method::Chol => solve_chol(h),
        Method::CholSvd => solve_chol_svd(h),
        Method::Reference => solve_reference(h),
    }
}

/// Square-root method: `S = (A−B)^½`, eigendecomposition of `S(A+B)S`.
pub fn solve_sqrt(h: &BseMatrixI) -> Result<SpectralResult> {
    let pair = h.product_pair()?;
    let s = hpd_sqrt(pair.m2()).map_err(definite(DefiniteFactor::M2))?;
    let sm1 = backend::matmul(
        s.as_ref(),
        Op::NoTrans,
        Structure::General,
        pair.m1(),
        Op::NoTrans,
        Structure::General,
    )?;
    let m = backend::matmul(
        sm1.as_ref(),
        Op::NoTrans,
        Structure::General,
        s.as_ref(),
        Op::NoTrans,
        Structure::General,
    )?;
    let eig = hermitian_eig(m.as_ref())?;
    let squared = SquaredRoots::new(&eig.values);

    // S⁻¹·V_M through a Hermitian (Cholesky) solve rather than an explicit inverse
    let chol_s = cholesky_lower(s.as_ref()).map_err(definite(DefiniteFactor::M2))?;
    let y = tri_solve(&chol_s, eig.vectors.as_ref(), TriSide::Left, Op::NoTrans)?;
    let v1 = tri_solve(&chol_s, y.as_ref(), TriSide::Left, Op::Adjoint)?;
    let v2 = backend::matmul(
        s.as_ref(),
        Op::NoTrans,
        Structure::General,
        eig.vectors.as_ref(),
        Op::NoTrans,
        Structure::General,
    )?;
    squared.finish(v1, v2, Method::Sqrt)
}

/// Cholesky method: `L·Lᴴ = A−B`, eigendecomposition of `Lᴴ(A+B)L`.
pub fn solve_chol(h: &BseMatrixI) -> Result<SpectralResult> {
    let pair = h.product_pair()?;
    let l = pair.chol_m2();
    let m1l = backend::matmul(
        pair.m1(),
        Op::NoTrans,
        Structure::General,
        l.l(),
        Op::NoTrans,
        Structure::Lower,
    )?;
    let m = backend::matmul(
        l.l(),
        Op::Adjoint,
        Structure::Lower,
        m1l.as_ref(),
        Op::NoTrans,
        Structure::General,
    )?;
    let eig = hermitian_eig(m.as_ref())?;
    let squared = SquaredRoots::new(&eig.values);
    let v1 = tri_solve(l, eig.vectors.as_ref(), TriSide::Left, Op::Adjoint)?;
    let v2 = backend::matmul(
        l.l(),
        Op::NoTrans,
        Structure::Lower,
        eig.vectors.as_ref(),
        Op::NoTrans,
        Structure::General,
    )?;
    squared.finish(v1, v2, Method::Chol)
}

/// Cholesky + SVD method: `L1·L1ᴴ = A+B`, `L2·L2ᴴ = A−B`, SVD of `L1ᴴ·L2`.
///
/// The eigenvalues of `H` are the singular values themselves, so nothing is
/// squared and the small eigenvalues keep their relative accuracy.
pub fn solve_chol_svd(h: &BseMatrixI) -> Result<SpectralResult> {
    let pair = h.product_pair()?;
    let (l1, l2) = (pair.chol_m1(), pair.chol_m2());
    let p = backend::matmul(
        l1.l(),
        Op::Adjoint,
        Structure::Lower,
        l2.l(),
        Op::NoTrans,
        Structure::Lower,
    )?;
    let svd = backend::svd(p.as_ref())?;
    let n = svd.s.len();

    let max = svd.s.first().copied().unwrap_or(0.0);
    let threshold = f64::EPSILON * max;
    let mut diagnostics = Vec::new();
    let mut lambda = Vec::with_capacity(n);
    // singular values arrive descending; walk them backwards for ascending output
    for (k, &s) in svd.s.iter().rev().enumerate() {
        if !(s > threshold) {
            diagnostics.push(Diagnostic::NearSingularEigenvalue {
                index: k,
                raw: s,
                threshold,
            });
        }
        lambda.push(s.max(f64::MIN_POSITIVE));
    }
    let u = Mat::from_fn(n, n, |i, k| svd.u[(i, n - 1 - k)] * lambda[k].powf(-0.5));
    let v = Mat::from_fn(n, n, |i, k| svd.v[(i, n - 1 - k)] * lambda[k].powf(-0.5));
    let v1 = backend::matmul(
        l1.l(),
        Op::NoTrans,
        Structure::Lower,
        u.as_ref(),
        Op::NoTrans,
        Structure::General,
    )?;
    let v2 = backend::matmul(
        l2.l(),
        Op::NoTrans,
        Structure::Lower,
        v.as_ref(),
        Op::NoTrans,
        Structure::General,
    )?;
    let factors = HalfSpectralFactors {
        v1,
        v2,
        lambda1: lambda.clone(),
        lambda2: lambda.clone(),
    };
    Ok(SpectralResult {
        v: factors.assemble_eigenvectors()?,
        lambda,
        method: Method::CholSvd,
        diagnostics,
    })
}

/// Unstructured oracle: the pencil `(ΣH, Σ)` of size `2n`.
///
/// With `ΣH = L·Lᴴ`, the Hermitian matrix `K = L⁻¹ΣL⁻ᴴ` has eigenvalues
/// `1/λ`. The `n` positive ones give the positive spectrum of `H`, and
/// `L⁻ᴴw/√m` is the Σ-normalized eigenvector for eigenpair `(m, w)` of `K`.
pub fn solve_reference(h: &BseMatrixI) -> Result<SpectralResult> {
    let n = h.n();
    let hamiltonian = h.hamiltonian();
    let l = cholesky_lower(hamiltonian.as_ref()).map_err(definite(DefiniteFactor::Hamiltonian))?;
    let linv = tri_solve(
        &l,
        Mat::<c64>::identity(2 * n, 2 * n).as_ref(),
        TriSide::Left,
        Op::NoTrans,
    )?;
    let signed = Mat::from_fn(2 * n, 2 * n, |i, j| if j < n { linv[(i, j)] } else { -linv[(i, j)] });
    let mut k = backend::matmul(
        signed.as_ref(),
        Op::NoTrans,
        Structure::Lower,
        linv.as_ref(),
        Op::Adjoint,
        Structure::Lower,
    )?;
    backend::hermitize(&mut k);
    let eig = hermitian_eig(k.as_ref())?;

    // the n largest eigenvalues of K are positive by inertia; largest m = smallest λ
    let picked: Vec<usize> = (n..2 * n).rev().collect();
    let mut diagnostics = Vec::new();
    let threshold = f64::EPSILON * eig.values[2 * n - 1].abs();
    let mut lambda = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for (k, &idx) in picked.iter().enumerate() {
        let m = eig.values[idx];
        if !(m > threshold) {
            diagnostics.push(Diagnostic::NearSingularEigenvalue {
                index: k,
                raw: m,
                threshold,
            });
        }
        let m = m.abs().max(f64::MIN_POSITIVE);
        lambda.push(1.0 / m);
        weights.push(m.sqrt().recip());
    }
    let w = Mat::from_fn(2 * n, n, |i, k| eig.vectors[(i, picked[k])]);
    let mut v = tri_solve(&l, w.as_ref(), TriSide::Left, Op::Adjoint)?;
    for (k, &s) in weights.iter().enumerate() {
        for i in 0..2 * n {
            v[(i, k)] = v[(i, k)] * s;
        }
    }
    Ok(SpectralResult {
        lambda,
        v,
        method: Method::Reference,
        diagnostics,
    })
}

/// Mirrors a positive-spectrum result: `−λⱼ` with eigenvector `[[0, I], [I, 0]]·vⱼ`.
///
/// Column order follows `r`.
///
/// # Panics
/// If `r.v` does not have `2n` rows for the `n` of `h`.
pub fn negative_spectrum(h: &BseMatrixI, r: &SpectralResult) -> SpectralResult {
    let n = h.n();
    assert_eq!(r.v.nrows(), 2 * n, "eigenvector rows do not match H");
    let v = Mat::from_fn(2 * n, r.v.ncols(), |i, j| r.v[((i + n) % (2 * n), j)]);
    SpectralResult {
        lambda: r.lambda.iter().map(|l| -l).collect(),
        v,
        method: r.method,
        diagnostics: r.diagnostics.clone(),
    }
}

fn definite(which: DefiniteFactor) -> impl Fn(Error) -> Error {
    move |e| match e {
        Error::NotPositiveDefinite { .. } => Error::NotDefinite { which },
        other => other,
    }
}

/// Eigenvalues recovered as square roots of the computed spectrum `D` of
/// `M ~ M1·M2`, with the ascending ordering they induce.
///
/// Rounding can leave entries of `D` at or below zero when `H` is badly
/// conditioned. Such an entry is kept as the principal complex root
/// `√d = i·√|d|`: the eigenvector scaling `Λ^{±½}` picks up the phases
/// `e^{±iπ/4}` exactly as plain complex arithmetic would give, while the
/// reported eigenvalue is the modulus `√|d|` and the column is flagged.
struct SquaredRoots {
    order: Vec<usize>,
    /// `|D|`, floored away from zero, indexed like the original spectrum.
    squares: Vec<f64>,
    negative: Vec<bool>,
    diagnostics: Vec<Diagnostic>,
}

impl SquaredRoots {
    fn new(d: &[f64]) -> Self {
        let max = d.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
        let threshold = f64::EPSILON * max;
        let squares: Vec<f64> = d.iter().map(|x| x.abs().max(f64::MIN_POSITIVE)).collect();
        let negative = d.iter().map(|&x| x < 0.0).collect();
        let mut order: Vec<usize> = (0..d.len()).collect();
        order.sort_by(|&i, &j| squares[i].total_cmp(&squares[j]));
        let diagnostics = order
            .iter()
            .enumerate()
            .filter(|&(_, &i)| !(d[i] > threshold))
            .map(|(k, &i)| Diagnostic::NearSingularEigenvalue {
                index: k,
                raw: d[i],
                threshold,
            })
            .collect();
        Self {
            order,
            squares,
            negative,
            diagnostics,
        }
    }

    /// `v1 = X⁻ᴴ·V_M`, `v2 = X·V_M` for the transform `X` of the method; the
    /// cross scaling factors are `λ1 = λ²` and `λ2 = 1`.
    fn finish(self, v1: Mat<c64>, v2: Mat<c64>, method: Method) -> Result<SpectralResult> {
        let n = v1.nrows();
        let order = &self.order;
        let quarter_turn = c64::from_polar(1.0, std::f64::consts::FRAC_PI_4);
        let phase = |k: usize| {
            if self.negative[order[k]] {
                quarter_turn
            } else {
                c64::new(1.0, 0.0)
            }
        };
        let factors = HalfSpectralFactors {
            v1: Mat::from_fn(n, order.len(), |i, k| v1[(i, order[k])] * phase(k)),
            v2: Mat::from_fn(n, order.len(), |i, k| v2[(i, order[k])] * phase(k).conj()),
            lambda1: order.iter().map(|&i| self.squares[i]).collect(),
            lambda2: vec![1.0; order.len()],
        };
        Ok(SpectralResult {
            lambda: factors.lambda1.iter().map(|d| d.sqrt()).collect(),
            v: factors.assemble_eigenvectors()?,
            method,
            diagnostics: self.diagnostics,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::DEFAULT_HERMITIAN_TOL;

    fn real(rows: &[&[f64]]) -> Mat<c64> {
        Mat::from_fn(rows.len(), rows[0].len(), |i, j| c64::new(rows[i][j], 0.0))
    }

    fn canonical() -> BseMatrixI {
        BseMatrixI::from_blocks(real(&[&[2.0]]), real(&[&[1.0]]), DEFAULT_HERMITIAN_TOL).unwrap()
    }

    #[test]
    fn scalar_instance_all_methods() {
        let h = canonical();
        for method in Method::ALL {
            let r = solve(&h, method).unwrap();
            assert_eq!(r.method, method);
            assert!((r.lambda[0] - 3f64.sqrt()).abs() < 1e-15, "{method}");
            // fix the phase of the top entry before comparing
            let phase = r.v[(0, 0)] / r.v[(0, 0)].norm();
            let top = r.v[(0, 0)] * phase.conj();
            let bottom = r.v[(1, 0)] * phase.conj();
            assert!((top.re - 1.0379549).abs() < 1e-7, "{method}: {top}");
            assert!((bottom.re + 0.2781192).abs() < 1e-7, "{method}: {bottom}");
            assert!(top.im.abs() < 1e-15 && bottom.im.abs() < 1e-15);
            assert!(r.diagnostics.is_empty());
        }
    }

    #[test]
    fn decoupled_case_sorts_diagonal() {
        let a = real(&[&[3.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 2.0]]);
        let h = BseMatrixI::from_blocks(a, Mat::zeros(3, 3), 1e-12).unwrap();
        for method in Method::ALL {
            let r = solve(&h, method).unwrap();
            for (got, want) in r.lambda.iter().zip([1.0, 2.0, 3.0]) {
                assert!((got - want).abs() < 1e-14, "{method}: {got} vs {want}");
            }
            // columns are [e_i; 0] up to phase
            for j in 0..3 {
                let bottom: f64 = (3..6).map(|i| r.v[(i, j)].norm()).sum();
                assert!(bottom < 1e-14, "{method}");
            }
        }
    }

    #[test]
    fn indefinite_input_rejected() {
        let h = BseMatrixI::from_blocks(real(&[&[1.0]]), real(&[&[2.0]]), 1e-12).unwrap();
        for method in Method::STRUCTURED {
            assert_eq!(
                solve(&h, method).unwrap_err(),
                Error::NotDefinite {
                    which: DefiniteFactor::M2
                }
            );
        }
        assert_eq!(
            solve_reference(&h).unwrap_err(),
            Error::NotDefinite {
                which: DefiniteFactor::Hamiltonian
            }
        );
    }

    #[test]
    fn negative_spectrum_swaps_halves() {
        let h = canonical();
        let r = solve_chol_svd(&h).unwrap();
        let neg = negative_spectrum(&h, &r);
        assert_eq!(neg.lambda, vec![-r.lambda[0]]);
        assert_eq!(neg.v[(0, 0)], r.v[(1, 0)]);
        assert_eq!(neg.v[(1, 0)], r.v[(0, 0)]);
        let hy = h.apply(neg.v.as_ref()).unwrap();
        for i in 0..2 {
            assert!((hy[(i, 0)] + neg.v[(i, 0)] * 3f64.sqrt()).norm() < 1e-14);
        }

        let a = real(&[&[5.0, 0.0], &[0.0, 7.0]]);
        let h = BseMatrixI::from_blocks(a, Mat::zeros(2, 2), 1e-12).unwrap();
        let r = solve_chol(&h).unwrap();
        let neg = negative_spectrum(&h, &r);
        assert!((neg.lambda[0] + 5.0).abs() < 1e-14 && (neg.lambda[1] + 7.0).abs() < 1e-14);
        assert!(neg.v[(0, 0)].norm() < 1e-15 && (neg.v[(2, 0)].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn squared_roots_flag_nonpositive_values() {
        let roots = SquaredRoots::new(&[-1e-3, 4.0, 1e10]);
        assert_eq!(roots.order, vec![0, 1, 2]);
        assert_eq!(roots.squares[0], 1e-3);
        assert_eq!(roots.diagnostics.len(), 1);
        assert!(matches!(
            roots.diagnostics[0],
            Diagnostic::NearSingularEigenvalue { index: 0, .. }
        ));

        // |D| reorders: -9 sorts after 4
        let roots = SquaredRoots::new(&[-9.0, 4.0]);
        assert_eq!(roots.order, vec![1, 0]);
    }

    #[test]
    fn negative_square_loses_sigma_norm() {
        // complex root of d = -1: Re(xᴴy) = Re(e^{-iπ/2}) = 0
        let one = Mat::<c64>::identity(1, 1);
        let r = SquaredRoots::new(&[-1.0])
            .finish(one.clone(), one, Method::Chol)
            .unwrap();
        assert_eq!(r.lambda, vec![1.0]);
        let sv = r.v[(0, 0)].norm_sqr() - r.v[(1, 0)].norm_sqr();
        assert!(sv.abs() < 1e-15, "{sv}");
        assert_eq!(r.diagnostics.len(), 1);
    }
}
