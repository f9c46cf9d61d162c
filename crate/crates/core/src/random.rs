//! Seeded random matrices for generators and calibration.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{RMatrix, RVector};

pub fn gaussian_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> RMatrix {
    RMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

/// Haar-distributed orthogonal matrix: QR of a Gaussian matrix with the signs
/// of `diag(R)` folded into `Q`.
pub fn random_orthogonal(rng: &mut ChaCha8Rng, n: usize) -> RMatrix {
    let qr = gaussian_matrix(rng, n, n).qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// `Q diag(λ) Qᵀ` with a random orthogonal `Q`.
pub fn planted_symmetric(rng: &mut ChaCha8Rng, eigenvalues: &[f64]) -> RMatrix {
    let q = random_orthogonal(rng, eigenvalues.len());
    let d = RMatrix::from_diagonal(&RVector::from_column_slice(eigenvalues));
    &q * d * q.transpose()
}

/// Eigenvalues spread uniformly at random in `[lo, hi]`, with both ends hit.
pub fn spectrum(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n)
        .map(|i| match i {
            0 => hi,
            1 => lo,
            _ => rng.random_range(lo..=hi),
        })
        .collect()
}
