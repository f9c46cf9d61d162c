//! Block encodings of dense matrices as explicit unitaries.
//!
//! A [`BlockEncoding`] stores a unitary `U` on `s + a` qubits together with its
//! normalization `α`, ancilla count `a`, system size `s` and error bound `ε`.
//! Ancilla qubits are the most significant, so the all-zero ancilla sector is
//! the top-left `2^s × 2^s` block and
//!
//! ```text
//! A ≈ α · (⟨0^a| ⊗ I) U (|0^a⟩ ⊗ I)
//! ```
//!
//! Matrices that are not square powers of two are zero-padded first; the
//! encoding remembers the original `rows × cols` so [`decode`] returns the
//! unpadded block.

use crate::error::{Error, Result};
use crate::linalg::{
    complete_to_unitary, hermitian_psd_sqrt, qubits_for, spectral_norm, unitarity_defect,
    CMatrix, C64,
};

/// Tolerance used for the unitarity invariant.
pub const UNITARITY_TOL: f64 = 1e-10;

/// Relative slack allowed when checking `α ≥ ‖A‖`.
const NORM_SLACK: f64 = 1e-10;

/// A matrix zero-padded to `2^s × 2^s`.
#[derive(Clone, Debug, PartialEq)]
pub struct PaddedMatrix {
    data: CMatrix,
    rows: usize,
    cols: usize,
}

impl PaddedMatrix {
    pub fn data(&self) -> &CMatrix {
        &self.data
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn system_qubits(&self) -> usize {
        qubits_for(self.data.nrows())
    }

    /// The original `rows × cols` block.
    pub fn original(&self) -> CMatrix {
        self.data.view((0, 0), (self.rows, self.cols)).into_owned()
    }
}

/// Zero-pads `a` to the smallest `2^s × 2^s` with `s ≥ 1`.
pub fn pad_to_power_of_two(a: &CMatrix) -> PaddedMatrix {
    let s = qubits_for(a.nrows().max(a.ncols()).max(2));
    pad_to_qubits(a, s).expect("s chosen to fit")
}

/// Zero-pads `a` into a `2^s × 2^s` matrix.
pub fn pad_to_qubits(a: &CMatrix, s: usize) -> Result<PaddedMatrix> {
    let dim = 1usize << s;
    if s == 0 || a.nrows() > dim || a.ncols() > dim || a.nrows() == 0 || a.ncols() == 0 {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} matrix does not fit on {s} system qubits",
            a.nrows(),
            a.ncols()
        )));
    }
    let mut data = CMatrix::zeros(dim, dim);
    data.view_mut((0, 0), (a.nrows(), a.ncols())).copy_from(a);
    Ok(PaddedMatrix {
        data,
        rows: a.nrows(),
        cols: a.ncols(),
    })
}

/// An `(α, a, ε)`-block encoding.
#[derive(Clone, Debug)]
pub struct BlockEncoding {
    unitary: CMatrix,
    alpha: f64,
    ancillas: usize,
    system_qubits: usize,
    eps: f64,
    rows: usize,
    cols: usize,
}

impl BlockEncoding {
    pub(crate) fn from_parts(
        unitary: CMatrix,
        alpha: f64,
        ancillas: usize,
        system_qubits: usize,
        eps: f64,
        rows: usize,
        cols: usize,
    ) -> Self {
        debug_assert_eq!(unitary.nrows(), 1 << (ancillas + system_qubits));
        BlockEncoding {
            unitary,
            alpha,
            ancillas,
            system_qubits,
            eps,
            rows,
            cols,
        }
    }

    pub fn unitary(&self) -> &CMatrix {
        &self.unitary
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn ancillas(&self) -> usize {
        self.ancillas
    }

    pub fn system_qubits(&self) -> usize {
        self.system_qubits
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Total qubit count `s + a`.
    pub fn width(&self) -> usize {
        self.system_qubits + self.ancillas
    }

    /// The same unitary, relabelled with a different error bound. Used when the
    /// encoded unitary approximates some target matrix other than the one it
    /// represents exactly.
    pub fn with_eps(mut self, eps: f64) -> Self {
        self.eps = eps;
        self
    }

    pub(crate) fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub(crate) fn with_shape(mut self, rows: usize, cols: usize) -> Self {
        self.rows = rows;
        self.cols = cols;
        self
    }

    /// `‖U†U − I‖` (elementwise max).
    pub fn unitarity_defect(&self) -> f64 {
        unitarity_defect(&self.unitary)
    }

    pub fn is_unitary(&self) -> bool {
        self.unitarity_defect() <= UNITARITY_TOL
    }

    /// The padded `2^s × 2^s` top-left block, unscaled.
    #[cfg(test)]
    pub(crate) fn top_block(&self) -> CMatrix {
        let d = 1usize << self.system_qubits;
        self.unitary.view((0, 0), (d, d)).into_owned()
    }

    /// Adds `extra` most-significant ancillas acting as identity.
    pub(crate) fn pad_ancillas(&self, extra: usize) -> CMatrix {
        if extra == 0 {
            return self.unitary.clone();
        }
        let d = self.unitary.nrows();
        let copies = 1usize << extra;
        let mut out = CMatrix::zeros(d * copies, d * copies);
        for c in 0..copies {
            out.view_mut((c * d, c * d), (d, d)).copy_from(&self.unitary);
        }
        out
    }
}

/// Exact `(α, 1, 0)` encoding via the unitary dilation
/// `[[X, √(I−XX†)], [√(I−X†X), −X†]]` with `X = A/α`.
pub fn encode_dilation(a: &CMatrix, alpha: f64) -> Result<BlockEncoding> {
    encode_dilation_padded(&pad_to_power_of_two(a), alpha)
}

/// [`encode_dilation`] on an already padded matrix, keeping its system size.
pub fn encode_dilation_padded(a: &PaddedMatrix, alpha: f64) -> Result<BlockEncoding> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::InvalidAlpha(alpha));
    }
    let norm = spectral_norm(&a.data);
    if norm > alpha * (1.0 + NORM_SLACK) {
        return Err(Error::Normalization { alpha, norm });
    }
    let d = a.data.nrows();
    let x = a.data.unscale(alpha);
    let xd = x.adjoint();
    let id = CMatrix::identity(d, d);
    let top_right = hermitian_psd_sqrt(&(&id - &x * &xd));
    let bottom_left = hermitian_psd_sqrt(&(&id - &xd * &x));

    let mut u = CMatrix::zeros(2 * d, 2 * d);
    u.view_mut((0, 0), (d, d)).copy_from(&x);
    u.view_mut((0, d), (d, d)).copy_from(&top_right);
    u.view_mut((d, 0), (d, d)).copy_from(&bottom_left);
    u.view_mut((d, d), (d, d)).copy_from(&(-xd));

    Ok(BlockEncoding::from_parts(
        u,
        alpha,
        1,
        a.system_qubits(),
        0.0,
        a.rows,
        a.cols,
    ))
}

/// `(‖A‖_F, s, ε_machine)` encoding built from row-state and row-norm
/// preparation isometries, `U = U_rows† · U_norms`.
///
/// On the layout `|ancilla⟩|system⟩` (both `s` qubits):
///
/// * `U_rows : |0⟩|i⟩ ↦ |ψ̄_i⟩|i⟩` with `ψ̄_i = Σ_k conj(A_ik)/‖A_i·‖ |k⟩`,
/// * `U_norms: |0⟩|j⟩ ↦ |j⟩|ν⟩` with `ν = Σ_i ‖A_i·‖/‖A‖_F |i⟩`,
///
/// so `⟨0,i|U|0,j⟩ = A_ij/‖A‖_F`. Zero rows (including padding) use the
/// canonical state `|0⟩`. Both isometries are completed to unitaries with
/// [`complete_to_unitary`].
pub fn encode_frobenius(a: &CMatrix) -> Result<BlockEncoding> {
    let padded = pad_to_power_of_two(a);
    let fro = padded.data.norm();
    if fro == 0.0 {
        return Err(Error::ZeroMatrix);
    }
    let d = padded.data.nrows();
    let s = padded.system_qubits();
    let big = d * d;

    let row_norms: Vec<f64> = (0..d).map(|i| padded.data.row(i).norm()).collect();

    let mut rows_iso = CMatrix::zeros(big, d);
    for i in 0..d {
        if row_norms[i] > 0.0 {
            for k in 0..d {
                rows_iso[(k * d + i, i)] = padded.data[(i, k)].conj() / row_norms[i];
            }
        } else {
            rows_iso[(i, i)] = C64::new(1.0, 0.0);
        }
    }
    let mut norms_iso = CMatrix::zeros(big, d);
    for j in 0..d {
        for i in 0..d {
            norms_iso[(j * d + i, j)] = C64::new(row_norms[i] / fro, 0.0);
        }
    }

    let u_rows = complete_to_unitary(&rows_iso);
    let u_norms = complete_to_unitary(&norms_iso);
    let u = u_rows.adjoint() * u_norms;
    let eps = f64::EPSILON * fro * big as f64;
    Ok(BlockEncoding::from_parts(
        u,
        fro,
        s,
        s,
        eps,
        padded.rows,
        padded.cols,
    ))
}

/// Encodes a column vector as an `n × 1` matrix with `α = max(‖v‖₂, 1)`.
pub fn encode_vector(v: &[C64]) -> Result<BlockEncoding> {
    let m = CMatrix::from_column_slice(v.len(), 1, v);
    let norm = m.norm();
    encode_dilation(&m, norm.max(1.0))
}

/// [`encode_vector`] on a fixed system size.
pub fn encode_vector_on(v: &[C64], s: usize) -> Result<BlockEncoding> {
    let m = CMatrix::from_column_slice(v.len(), 1, v);
    let norm = m.norm();
    encode_dilation_padded(&pad_to_qubits(&m, s)?, norm.max(1.0))
}

/// `α` times the top-left `rows × cols` block of the zero-ancilla sector.
pub fn decode(e: &BlockEncoding) -> CMatrix {
    e.unitary
        .view((0, 0), (e.rows, e.cols))
        .map(|z| z * e.alpha)
}

/// Spectral-norm distance between `a` and the decoded block.
pub fn verify(e: &BlockEncoding, a: &CMatrix) -> Result<f64> {
    if a.nrows() != e.rows || a.ncols() != e.cols {
        return Err(Error::DimensionMismatch(format!(
            "encoding is {}x{}, matrix is {}x{}",
            e.rows,
            e.cols,
            a.nrows(),
            a.ncols()
        )));
    }
    Ok(spectral_norm(&(a - decode(e))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn pads_identity_unchanged() {
        let p = pad_to_power_of_two(&CMatrix::identity(2, 2));
        assert_eq!(p.system_qubits(), 1);
        assert_eq!(p.data(), &CMatrix::identity(2, 2));
    }

    #[test]
    fn pads_rectangular_with_zeros() {
        let p = pad_to_power_of_two(&CMatrix::from_element(3, 2, c(1.0)));
        assert_eq!(p.data().nrows(), 4);
        for i in 0..4 {
            for j in 0..4 {
                let expect = if i < 3 && j < 2 { 1.0 } else { 0.0 };
                assert_eq!(p.data()[(i, j)], c(expect));
            }
        }
    }

    #[test]
    fn scalar_padded_to_one_qubit() {
        let p = pad_to_power_of_two(&CMatrix::from_element(1, 1, c(0.7)));
        assert_eq!(p.system_qubits(), 1);
        assert_eq!(p.data()[(0, 0)], c(0.7));
        assert_eq!(p.data()[(1, 1)], c(0.0));
    }

    #[test]
    fn dilation_of_scalar() {
        let e = encode_dilation(&CMatrix::from_element(1, 1, c(0.5)), 1.0).unwrap();
        assert_eq!(e.unitary().nrows(), 4);
        assert_eq!(e.unitary()[(0, 0)], c(0.5));
        assert!(e.is_unitary());
        assert!((decode(&e)[(0, 0)] - c(0.5)).norm() < 1e-15);
    }

    #[test]
    fn dilation_of_identity_has_no_coupling() {
        let e = encode_dilation(&CMatrix::identity(2, 2), 1.0).unwrap();
        assert_eq!(decode(&e), CMatrix::identity(2, 2));
        let u = e.unitary();
        assert!(max_abs(&u.view((0, 2), (2, 2)).into_owned()) < 1e-15);
        assert!(max_abs(&u.view((2, 0), (2, 2)).into_owned()) < 1e-15);
    }

    #[test]
    fn dilation_of_zero_is_swap_shaped() {
        let e = encode_dilation(&CMatrix::zeros(2, 2), 1.0).unwrap();
        let mut expect = CMatrix::zeros(4, 4);
        expect.view_mut((0, 2), (2, 2)).fill_with_identity();
        expect.view_mut((2, 0), (2, 2)).fill_with_identity();
        assert!(max_abs(&(e.unitary() - expect)) < 1e-15);
        assert_eq!(decode(&e), CMatrix::zeros(2, 2));
    }

    #[test]
    fn dilation_rejects_small_alpha() {
        let a = CMatrix::identity(2, 2).scale(2.0);
        assert!(matches!(
            encode_dilation(&a, 1.0),
            Err(Error::Normalization { .. })
        ));
        assert!(matches!(
            encode_dilation(&a, 0.0),
            Err(Error::InvalidAlpha(_))
        ));
    }

    #[test]
    fn frobenius_identity() {
        let e = encode_frobenius(&CMatrix::identity(2, 2)).unwrap();
        assert!((e.alpha() - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(e.ancillas(), 1);
        let block = e.top_block();
        assert!(max_abs(&(block - CMatrix::identity(2, 2).unscale(2f64.sqrt()))) < 1e-14);
        assert!(e.is_unitary());
    }

    #[test]
    fn frobenius_with_zero_row() {
        let mut a = CMatrix::zeros(2, 2);
        a[(0, 0)] = c(1.0);
        let e = encode_frobenius(&a).unwrap();
        assert!((e.alpha() - 1.0).abs() < 1e-15);
        assert!(max_abs(&(decode(&e) - &a)) < 1e-14);
    }

    #[test]
    fn frobenius_single_entry() {
        let mut a = CMatrix::zeros(3, 3);
        a[(0, 0)] = C64::new(-0.3, 0.4);
        let e = encode_frobenius(&a).unwrap();
        assert!((e.alpha() - 0.5).abs() < 1e-15);
        assert!((decode(&e)[(0, 0)] - a[(0, 0)]).norm() < 1e-14);
    }

    #[test]
    fn frobenius_rejects_zero() {
        assert!(matches!(
            encode_frobenius(&CMatrix::zeros(2, 2)),
            Err(Error::ZeroMatrix)
        ));
    }

    #[test]
    fn vectors() {
        let e = encode_vector(&[c(1.0), c(0.0)]).unwrap();
        assert_eq!(decode(&e).column(0).into_owned().as_slice(), &[c(1.0), c(0.0)]);
        let z = encode_vector(&[c(0.0), c(0.0)]).unwrap();
        assert_eq!(z.alpha(), 1.0);
        let e = encode_vector(&[c(3.0), c(4.0)]).unwrap();
        assert!((e.alpha() - 5.0).abs() < 1e-15);
        let d = decode(&e);
        assert!((d[(0, 0)] - c(3.0)).norm() < 1e-14);
        assert!((d[(1, 0)] - c(4.0)).norm() < 1e-14);
    }

    #[test]
    fn verify_checks_shape() {
        let e = encode_dilation(&CMatrix::identity(2, 2), 1.0).unwrap();
        assert!(verify(&e, &CMatrix::identity(3, 3)).is_err());
        assert!(verify(&e, &CMatrix::identity(2, 2)).unwrap() < 1e-15);
    }

    #[test]
    fn verify_sees_perturbation() {
        let a = CMatrix::from_row_slice(2, 2, &[c(0.3), c(0.1), c(-0.2), c(0.4)]);
        let e = encode_dilation(&a, 1.0).unwrap();
        let delta = 1e-3;
        let shifted = &a + CMatrix::identity(2, 2).scale(delta);
        assert!((verify(&e, &shifted).unwrap() - delta).abs() < 1e-12);
    }
}
