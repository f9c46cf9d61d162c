//! Dense helpers shared by the encoding and control modules.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type RMatrix = DMatrix<f64>;
pub type RVector = DVector<f64>;

/// Eigenvalues below this are treated as zero when taking PSD square roots.
pub const EIGEN_CLAMP: f64 = 1e-14;

pub fn to_complex(m: &RMatrix) -> CMatrix {
    m.map(|x| C64::new(x, 0.0))
}

pub fn real_part(m: &CMatrix) -> RMatrix {
    m.map(|z| z.re)
}

pub fn column(v: &RVector) -> RMatrix {
    RMatrix::from_column_slice(v.len(), 1, v.as_slice())
}

/// Largest singular value. Zero for empty matrices.
pub fn spectral_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone()
        .singular_values()
        .iter()
        .fold(0.0_f64, |acc, &s| acc.max(s))
}

pub fn spectral_norm_real(m: &RMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone()
        .singular_values()
        .iter()
        .fold(0.0_f64, |acc, &s| acc.max(s))
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_real(m: &RMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

/// `‖U†U − I‖` in the elementwise max norm.
pub fn unitarity_defect(u: &CMatrix) -> f64 {
    let n = u.nrows();
    let mut g = u.adjoint() * u;
    for i in 0..n {
        g[(i, i)] -= C64::new(1.0, 0.0);
    }
    max_abs(&g)
}

/// Square root of a Hermitian PSD matrix via eigendecomposition, clamping
/// eigenvalues below [`EIGEN_CLAMP`] to zero.
pub fn hermitian_psd_sqrt(h: &CMatrix) -> CMatrix {
    let sym = (h + h.adjoint()).scale(0.5);
    let eig = sym.symmetric_eigen();
    let roots = eig.eigenvalues.map(|l| {
        let l = if l < EIGEN_CLAMP { 0.0 } else { l };
        C64::new(l.sqrt(), 0.0)
    });
    let q = &eig.eigenvectors;
    q * CMatrix::from_diagonal(&roots) * q.adjoint()
}

/// Symmetric PSD factor `F` with `F Fᵀ = S`, via clamped eigendecomposition.
pub fn psd_factor_real(s: &RMatrix) -> RMatrix {
    let sym = symmetrize(s);
    let eig = sym.symmetric_eigen();
    let roots = eig
        .eigenvalues
        .map(|l| if l < EIGEN_CLAMP { 0.0 } else { l.sqrt() });
    &eig.eigenvectors * RMatrix::from_diagonal(&roots)
}

pub fn symmetrize(m: &RMatrix) -> RMatrix {
    (m + m.transpose()).scale(0.5)
}

pub fn min_eigenvalue(m: &RMatrix) -> f64 {
    symmetrize(m)
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .fold(f64::INFINITY, |acc, &l| acc.min(l))
}

/// Ratio of extreme singular values; infinite for singular input.
pub fn condition_number_real(m: &RMatrix) -> f64 {
    let sv = m.clone().singular_values();
    let max = sv.iter().fold(0.0_f64, |a, &s| a.max(s));
    let min = sv.iter().fold(f64::INFINITY, |a, &s| a.min(s));
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Extends `cols` (orthonormal columns of an `n × k` matrix) to an `n × n`
/// unitary. The new columns come from Gram–Schmidt over the standard basis in
/// index order, so the completion is deterministic.
pub fn complete_to_unitary(cols: &CMatrix) -> CMatrix {
    let n = cols.nrows();
    let k = cols.ncols();
    let mut basis: Vec<DVector<C64>> = (0..k).map(|j| cols.column(j).into_owned()).collect();
    let mut e = 0;
    while basis.len() < n && e < n {
        let mut v = DVector::<C64>::zeros(n);
        v[e] = C64::new(1.0, 0.0);
        // two passes of modified Gram-Schmidt
        for _ in 0..2 {
            for b in &basis {
                let proj = b.dotc(&v);
                v.axpy(-proj, b, C64::new(1.0, 0.0));
            }
        }
        let norm = v.norm();
        if norm > 1e-8 {
            basis.push(v.unscale(norm));
        }
        e += 1;
    }
    CMatrix::from_columns(&basis)
}

/// Smallest `s ≥ 1` with `2^s ≥ d`.
pub fn qubits_for(d: usize) -> usize {
    let mut s = 1;
    while (1usize << s) < d {
        s += 1;
    }
    s
}
