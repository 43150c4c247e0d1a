//! Seeded test-matrix generators.
//!
//! All randomness comes from ChaCha20 with the 64-bit seed expanded by
//! `SeedableRng::seed_from_u64`; each generated block draws from its own
//! stream (`set_stream`) so adding a block never shifts the others.

use faer::{c64, Mat};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::backend::{self, Op, Structure};
use crate::error::{Error, Result};
use crate::matrix::{BseMatrixI, DEFAULT_HERMITIAN_TOL};

const STREAM_UNITARY: u64 = 0;
const STREAM_BLOCK_A: u64 = 1;
const STREAM_BLOCK_B: u64 = 2;

/// Recipe for the conditioned family: `d = linspace(1, κ/3, n)`,
/// `A = QᴴDQ`, `B = A/2` with a seeded random unitary `Q`.
///
/// The positive spectrum of the result is exactly `(√3/2)·d` and the
/// condition number of `H` is `κ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratorSpec {
    pub n: usize,
    pub kappa: f64,
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn new(n: usize, kappa: f64, seed: u64) -> Result<Self> {
        let spec = Self { n, kappa, seed };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidSpec("n must be at least 1".into()));
        }
        if !(self.kappa >= 3.0) || !self.kappa.is_finite() {
            return Err(Error::InvalidSpec(format!(
                "kappa must be a finite value >= 3, got {}",
                self.kappa
            )));
        }
        Ok(())
    }

    /// `d`, the diagonal of `D`: `n` points equally spaced from 1 to κ/3.
    pub fn diagonal(&self) -> Vec<f64> {
        let top = self.kappa / 3.0;
        if self.n == 1 {
            return vec![1.0];
        }
        let step = (top - 1.0) / (self.n - 1) as f64;
        (0..self.n)
            .map(|i| if i + 1 == self.n { top } else { 1.0 + step * i as f64 })
            .collect()
    }

    /// The exact positive spectrum `(√3/2)·d`, ascending.
    pub fn exact_spectrum(&self) -> Vec<f64> {
        let c = 3f64.sqrt() / 2.0;
        self.diagonal().into_iter().map(|d| c * d).collect()
    }
}

fn stream(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Standard complex Gaussian: real and imaginary parts `N(0, ½)`.
fn complex_gaussian(rng: &mut ChaCha20Rng, rows: usize, cols: usize) -> Mat<c64> {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    // fill column by column so the draw order is explicit
    let mut m = Mat::<c64>::zeros(rows, cols);
    for j in 0..cols {
        for i in 0..rows {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            m[(i, j)] = c64::new(re * scale, im * scale);
        }
    }
    m
}

fn unitary_from(rng: &mut ChaCha20Rng, n: usize) -> Mat<c64> {
    let g = complex_gaussian(rng, n, n);
    let qr = g.qr();
    let r = qr.R();
    let mut q = qr.compute_Q();
    // Haar correction: absorb the phases of diag(R) into Q
    for j in 0..n {
        let d = r[(j, j)];
        let norm = d.norm();
        let phase = if norm > 0.0 { d / norm } else { c64::new(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] = q[(i, j)] * phase;
        }
    }
    q
}

/// Haar-distributed `n×n` unitary matrix, deterministic in `(n, seed)`.
pub fn random_unitary(n: usize, seed: u64) -> Mat<c64> {
    unitary_from(&mut stream(seed, STREAM_UNITARY), n)
}

/// Dense conditioned-family instance with known spectrum (see [`GeneratorSpec`]).
pub fn generate_conditioned(spec: &GeneratorSpec) -> Result<BseMatrixI> {
    spec.validate()?;
    let n = spec.n;
    let q = random_unitary(n, spec.seed);
    let d = spec.diagonal();
    let dq = Mat::from_fn(n, n, |i, j| q[(i, j)] * d[i]);
    let a = backend::matmul(
        q.as_ref(),
        Op::Adjoint,
        Structure::General,
        dq.as_ref(),
        Op::NoTrans,
        Structure::General,
    )?;
    let mut a = a;
    backend::hermitize(&mut a);
    let b = Mat::from_fn(n, n, |i, j| a[(i, j)] * 0.5);
    BseMatrixI::from_blocks(a, b, DEFAULT_HERMITIAN_TOL)
}

/// Random Hermitian blocks with `A` shifted by `‖A‖₁ + ‖B‖₁ + shift_margin`.
///
/// For Hermitian `X`, `‖X‖₂ ≤ ‖X‖₁`, so the shift exceeds `‖A ± B‖₂` and
/// both `A + B` and `A − B` are positive definite with smallest eigenvalue
/// at least `shift_margin`.
pub fn generate_random_definite(n: usize, seed: u64, shift_margin: f64) -> Result<BseMatrixI> {
    if n == 0 {
        return Err(Error::InvalidSpec("n must be at least 1".into()));
    }
    if !(shift_margin > 0.0) || !shift_margin.is_finite() {
        return Err(Error::InvalidSpec(format!(
            "shift_margin must be positive, got {shift_margin}"
        )));
    }
    let mut a = complex_gaussian(&mut stream(seed, STREAM_BLOCK_A), n, n);
    let mut b = complex_gaussian(&mut stream(seed, STREAM_BLOCK_B), n, n);
    backend::hermitize(&mut a);
    backend::hermitize(&mut b);
    let shift = norm_one(&a) + norm_one(&b) + shift_margin;
    for i in 0..n {
        a[(i, i)] = a[(i, i)] + shift;
    }
    BseMatrixI::from_blocks(a, b, DEFAULT_HERMITIAN_TOL)
}

/// Maximum absolute column sum.
fn norm_one(m: &Mat<c64>) -> f64 {
    (0..m.ncols())
        .map(|j| (0..m.nrows()).map(|i| m[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unitarity_residual(q: &Mat<c64>) -> f64 {
        let n = q.ncols();
        (q.adjoint() * q - Mat::<c64>::identity(n, n)).norm_l2()
    }

    #[test]
    fn unitary_scalar_has_unit_modulus() {
        let q = random_unitary(1, 42);
        assert!((q[(0, 0)].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn unitary_is_deterministic_and_unitary() {
        let q1 = random_unitary(16, 7);
        let q2 = random_unitary(16, 7);
        assert_eq!(q1, q2);
        assert!(unitarity_residual(&q1) <= 1e-13);
        assert_ne!(q1, random_unitary(16, 8));
    }

    #[test]
    fn diagonal_endpoints() {
        let spec = GeneratorSpec::new(5, 30.0, 0).unwrap();
        assert_eq!(spec.diagonal(), vec![1.0, 3.25, 5.5, 7.75, 10.0]);
        let spec = GeneratorSpec::new(4, 3.0, 0).unwrap();
        assert!(spec.diagonal().iter().all(|&d| d == 1.0));
    }

    #[test]
    fn invalid_specs() {
        assert!(matches!(GeneratorSpec::new(4, 2.9, 0), Err(Error::InvalidSpec(_))));
        assert!(matches!(GeneratorSpec::new(0, 10.0, 0), Err(Error::InvalidSpec(_))));
        assert!(matches!(GeneratorSpec::new(4, f64::NAN, 0), Err(Error::InvalidSpec(_))));
        let raw = GeneratorSpec {
            n: 3,
            kappa: 1.0,
            seed: 0,
        };
        assert!(matches!(generate_conditioned(&raw), Err(Error::InvalidSpec(_))));
    }

    #[test]
    fn conditioned_blocks_have_fixed_ratio() {
        let h = generate_conditioned(&GeneratorSpec::new(6, 10.0, 3).unwrap()).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                assert_eq!(h.b()[(i, j)], h.a()[(i, j)] * 0.5);
            }
        }
        assert!(h.product_pair().is_ok());
    }

    #[test]
    fn random_definite_is_certified_and_deterministic() {
        let h = generate_random_definite(1, 11, 1.0).unwrap();
        assert!(h.product_pair().is_ok());
        let h1 = generate_random_definite(64, 5, 1.0).unwrap();
        let h2 = generate_random_definite(64, 5, 1.0).unwrap();
        assert_eq!(h1, h2);
        assert!(backend::cholesky_lower((&h1.a() + &h1.b()).as_ref()).is_ok());
        assert!(backend::cholesky_lower((&h1.a() - &h1.b()).as_ref()).is_ok());
        assert!(generate_random_definite(4, 0, 0.0).is_err());
    }
}
