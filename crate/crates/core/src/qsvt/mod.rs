//! Singular-value transformation and matrix inversion on block encodings.
//!
//! The transformation is simulated exactly: the encoded block is decomposed
//! as `A/α = W Σ V†`, the odd polynomial is applied to the singular values,
//! and the result `V p(Σ) W†` is dilated into a fresh unitary with one more
//! ancilla than the input. Resource accounting charges `d` queries to the
//! input encoding, which is what a phase-sequence circuit would use.

mod calibrate;
mod poly;

pub use calibrate::{calibrate_degrees, default_grid, linear_fit, CalibrationPoint, DegreeCalibration};
pub use poly::{build_inverse_polynomial, InversePolynomial, BOUND_TOL, GRID_POINTS};

use nalgebra::DVector;

use crate::blockenc::{decode, encode_dilation_padded, pad_to_qubits, BlockEncoding};
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C64};

/// Number of calls to the input block encoding (or its adjoint).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct QueryCount(pub usize);

/// Singular values below this fraction of the window edge are rejected.
const WINDOW_SLACK: f64 = 1e-9;

/// Smallest singular value regarded as nonzero.
pub const SINGULAR_TOL: f64 = 1e-14;

fn square_block(e: &BlockEncoding) -> Result<CMatrix> {
    if e.rows() != e.cols() {
        return Err(Error::DimensionMismatch(format!(
            "inversion needs a square block, got {}x{}",
            e.rows(),
            e.cols()
        )));
    }
    Ok(decode(e))
}

/// Extreme singular values `(σ_min, σ_max)` of the decoded block.
pub fn singular_value_range(e: &BlockEncoding) -> (f64, f64) {
    let sv = decode(e).singular_values();
    let max = sv.iter().fold(0.0_f64, |a, &s| a.max(s));
    let min = sv.iter().fold(f64::INFINITY, |a, &s| a.min(s));
    (min, max)
}

/// `σ_max / σ_min` of the decoded block.
pub fn estimate_condition_number(e: &BlockEncoding) -> Result<f64> {
    square_block(e)?;
    let (min, max) = singular_value_range(e);
    if min < SINGULAR_TOL * max.max(1.0) {
        return Err(Error::Singular(min));
    }
    Ok(max / min)
}

/// Applies `p` to the singular values of `A/α`, returning an exact
/// `(1, a + 1, δ·L/α)` encoding of `V p(Σ) W†` where `A/α = W Σ V†` and `L`
/// is the polynomial's Lipschitz constant.
pub fn apply_svt(e: &BlockEncoding, p: &InversePolynomial) -> Result<(BlockEncoding, QueryCount)> {
    let block = square_block(e)?.unscale(e.alpha());
    let svd = block.svd(true, true);
    let (w, vt) = match (svd.u, svd.v_t) {
        (Some(u), Some(v_t)) => (u, v_t),
        _ => return Err(Error::InvalidPolynomial("SVD did not converge".into())),
    };
    let edge = p.window_edge();
    let mut transformed = DVector::<C64>::zeros(svd.singular_values.len());
    for (i, &sigma) in svd.singular_values.iter().enumerate() {
        if sigma < edge * (1.0 - WINDOW_SLACK) {
            return Err(Error::ConditionViolation { sigma, edge });
        }
        transformed[i] = C64::new(p.eval(sigma.min(1.0)), 0.0);
    }
    let image = vt.adjoint() * CMatrix::from_diagonal(&transformed) * w.adjoint();

    let padded = pad_to_qubits(&image, e.system_qubits())?;
    // |p| <= 1 on [-1, 1]; clamp the norm check against grid round-off
    let norm = crate::linalg::spectral_norm(padded.data());
    let alpha = norm.max(1.0);
    let dil = encode_dilation_padded(&padded, alpha)?;
    let unitary = dil.pad_ancillas(e.ancillas());
    let eps = p.lipschitz() * e.eps() / e.alpha();
    let out = BlockEncoding::from_parts(
        unitary,
        alpha,
        e.ancillas() + 1,
        e.system_qubits(),
        eps,
        e.cols(),
        e.rows(),
    );
    Ok((out, QueryCount(p.degree())))
}

/// Knobs for [`invert_with`].
#[derive(Clone, Copy, Debug)]
pub struct InvertOptions {
    /// Headroom factor in the target `1/(κβx)`; must exceed about 1.053.
    pub beta: f64,
    /// Use this `κ` for the window instead of estimating it.
    pub kappa: Option<f64>,
    /// Multiplier applied to the estimated `κ`.
    pub margin: f64,
}

impl Default for InvertOptions {
    fn default() -> Self {
        InvertOptions {
            beta: 2.0,
            kappa: None,
            margin: 1.05,
        }
    }
}

/// Output of [`invert`].
#[derive(Clone, Debug)]
pub struct Inversion {
    pub encoding: BlockEncoding,
    /// `σ_max/σ_min` of the input block.
    pub kappa: f64,
    /// Window parameter the polynomial was built for, relative to `α`.
    pub kappa_window: f64,
    pub degree: usize,
    pub queries: QueryCount,
    pub polynomial: InversePolynomial,
}

/// [`invert_with`] using default options.
pub fn invert(e: &BlockEncoding, eps_prime: f64) -> Result<Inversion> {
    invert_with(e, eps_prime, &InvertOptions::default())
}

/// Encodes `A⁻¹` where `e` encodes `A`.
///
/// The window is `[α/κ_w, α]` in terms of singular values of `A`, with
/// `κ_w = margin · α/σ_min` unless an explicit `κ` is given. The result has
/// `α' = κ_w β/α` and `ε' ≤ α'(ε′ + L·δ/α)`.
pub fn invert_with(e: &BlockEncoding, eps_prime: f64, opts: &InvertOptions) -> Result<Inversion> {
    let kappa = estimate_condition_number(e)?;
    let (sigma_min, _) = singular_value_range(e);
    let kappa_window = match opts.kappa {
        Some(k) => k,
        None => (opts.margin * e.alpha() / sigma_min).max(1.0),
    };
    let polynomial = build_inverse_polynomial(kappa_window, eps_prime, opts.beta)?;
    let (svt, queries) = apply_svt(e, &polynomial)?;
    let alpha_out = svt.alpha() * kappa_window * opts.beta / e.alpha();
    let eps_out = alpha_out * (eps_prime + svt.eps());
    let encoding = svt.with_alpha(alpha_out).with_eps(eps_out);
    Ok(Inversion {
        encoding,
        kappa,
        kappa_window,
        degree: polynomial.degree(),
        queries,
        polynomial,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blockenc::encode_dilation;
    use crate::linalg::{max_abs, spectral_norm};

    fn diag(values: &[f64]) -> CMatrix {
        let v: Vec<C64> = values.iter().map(|&x| C64::new(x, 0.0)).collect();
        CMatrix::from_diagonal(&DVector::from_vec(v))
    }

    #[test]
    fn condition_number_of_diagonal() {
        let e = encode_dilation(&diag(&[1.0, 0.25]), 1.0).unwrap();
        assert!((estimate_condition_number(&e).unwrap() - 4.0).abs() < 1e-12);
        let z = encode_dilation(&diag(&[1.0, 0.0]), 1.0).unwrap();
        assert!(matches!(estimate_condition_number(&z), Err(Error::Singular(_))));
    }

    #[test]
    fn inverts_diagonal() {
        let a = diag(&[1.0, 0.5]);
        let e = encode_dilation(&a, 1.0).unwrap();
        let inv = invert(&e, 1e-3).unwrap();
        let got = decode(&inv.encoding);
        assert!((got[(0, 0)].re - 1.0).abs() < 1e-2);
        assert!((got[(1, 1)].re - 2.0).abs() < 1e-2);
        assert!(max_abs(&(&a * &got - CMatrix::identity(2, 2))) < 10.0 * inv.kappa * 1e-3);
        assert_eq!(inv.encoding.ancillas(), 2);
        assert!(inv.encoding.is_unitary());
    }

    #[test]
    fn window_violation_is_reported() {
        let e = encode_dilation(&diag(&[1.0, 0.1]), 1.0).unwrap();
        let p = build_inverse_polynomial(2.0, 1e-3, 2.0).unwrap();
        assert!(matches!(apply_svt(&e, &p), Err(Error::ConditionViolation { .. })));
    }

    #[test]
    fn unit_kappa_uses_linear_polynomial() {
        let e = encode_dilation(&diag(&[0.5, 0.5]), 0.5).unwrap();
        let inv = invert(&e, 1e-4).unwrap();
        // margin widens the window, so the degree is small but above 1
        assert!(inv.degree >= 1);
        let opts = InvertOptions {
            kappa: Some(1.0),
            ..InvertOptions::default()
        };
        let inv = invert_with(&e, 1e-4, &opts).unwrap();
        assert_eq!(inv.degree, 1);
        let got = decode(&inv.encoding);
        assert!(spectral_norm(&(got - diag(&[2.0, 2.0]))) < 1e-12);
    }
}
