//! Arithmetic on block encodings.
//!
//! Parameters propagate exactly:
//!
//! | op         | α      | ancillas      | ε          |
//! |------------|--------|---------------|------------|
//! | `add`      | α + β  | max(a, b) + 1 | δ + ε      |
//! | `multiply` | αβ     | a + b         | αε + βδ    |
//! | `adjoint`  | α      | a             | δ          |
//! | `reencode` | ‖A‖    | 1             | δ          |

use crate::blockenc::{decode, encode_dilation_padded, pad_to_qubits, BlockEncoding};
use crate::error::{Error, Result};
use crate::linalg::{spectral_norm, CMatrix, C64};

fn check_system(a: &BlockEncoding, b: &BlockEncoding) -> Result<()> {
    if a.system_qubits() != b.system_qubits() {
        return Err(Error::SystemSizeMismatch {
            left: a.system_qubits(),
            right: b.system_qubits(),
        });
    }
    Ok(())
}

/// LCU sum `W = (V†⊗I)(|0⟩⟨0|⊗U_A + |1⟩⟨1|⊗U_B)(V⊗I)` with
/// `V = [[√α, √β], [√β, −√α]] / √(α+β)`.
///
/// The selector qubit is the most significant; the shorter operand is padded
/// with identity ancillas so both act on `max(a, b)` ancillas.
pub fn add(ea: &BlockEncoding, eb: &BlockEncoding) -> Result<BlockEncoding> {
    check_system(ea, eb)?;
    if ea.rows() != eb.rows() || ea.cols() != eb.cols() {
        return Err(Error::DimensionMismatch(format!(
            "cannot add {}x{} and {}x{}",
            ea.rows(),
            ea.cols(),
            eb.rows(),
            eb.cols()
        )));
    }
    let (alpha, beta) = (ea.alpha(), eb.alpha());
    let total = alpha + beta;
    if total == 0.0 {
        return Err(Error::ZeroNormalization);
    }
    let anc = ea.ancillas().max(eb.ancillas());
    let ua = ea.pad_ancillas(anc - ea.ancillas());
    let ub = eb.pad_ancillas(anc - eb.ancillas());

    let v = [
        [(alpha / total).sqrt(), (beta / total).sqrt()],
        [(beta / total).sqrt(), -(alpha / total).sqrt()],
    ];
    let d = ua.nrows();
    let mut w = CMatrix::zeros(2 * d, 2 * d);
    for r in 0..2 {
        for c in 0..2 {
            // W_rc = Σ_k V_kr V_kc U_k  (V is real)
            let ca = v[0][r] * v[0][c];
            let cb = v[1][r] * v[1][c];
            let mut block = w.view_mut((r * d, c * d), (d, d));
            block.zip_zip_apply(&ua, &ub, |out, x, y| {
                *out = x.scale(ca) + y.scale(cb);
            });
        }
    }
    Ok(BlockEncoding::from_parts(
        w,
        total,
        anc + 1,
        ea.system_qubits(),
        ea.eps() + eb.eps(),
        ea.rows(),
        ea.cols(),
    ))
}

/// Product `(I_b ⊗ U_A)(I_a ⊗ U_B)` on the register order
/// `(B ancillas, A ancillas, system)`.
///
/// `I_a ⊗ U_B` acts on the B ancillas and the system with the A ancillas in
/// between, so the product is assembled entrywise:
///
/// ```text
/// ⟨b',a',s'| U |b,a,s⟩ = Σ_t ⟨a',s'|U_A|a,t⟩ ⟨b',t|U_B|b,s⟩
/// ```
///
/// which costs `dim² · 2^s` instead of a dense `dim³` product.
pub fn multiply(ea: &BlockEncoding, eb: &BlockEncoding) -> Result<BlockEncoding> {
    check_system(ea, eb)?;
    if ea.cols() != eb.rows() {
        return Err(Error::DimensionMismatch(format!(
            "cannot multiply {}x{} by {}x{}",
            ea.rows(),
            ea.cols(),
            eb.rows(),
            eb.cols()
        )));
    }
    let s_dim = 1usize << ea.system_qubits();
    let da = 1usize << ea.ancillas();
    let db = 1usize << eb.ancillas();
    let ua = ea.unitary();
    let ub = eb.unitary();
    let dim = db * da * s_dim;
    let mut out = CMatrix::zeros(dim, dim);

    let idx = |ib: usize, ia: usize, is: usize| (ib * da + ia) * s_dim + is;
    let mut a_row = vec![C64::new(0.0, 0.0); s_dim];
    for ia_out in 0..da {
        for is_out in 0..s_dim {
            let ra = ia_out * s_dim + is_out;
            for ia_in in 0..da {
                for (t, slot) in a_row.iter_mut().enumerate() {
                    *slot = ua[(ra, ia_in * s_dim + t)];
                }
                if a_row.iter().all(|z| z.re == 0.0 && z.im == 0.0) {
                    continue;
                }
                for ib_out in 0..db {
                    let row = idx(ib_out, ia_out, is_out);
                    for ib_in in 0..db {
                        for is_in in 0..s_dim {
                            let col_b = ib_in * s_dim + is_in;
                            let mut acc = C64::new(0.0, 0.0);
                            for (t, av) in a_row.iter().enumerate() {
                                acc += av * ub[(ib_out * s_dim + t, col_b)];
                            }
                            out[(row, idx(ib_in, ia_in, is_in))] = acc;
                        }
                    }
                }
            }
        }
    }
    Ok(BlockEncoding::from_parts(
        out,
        ea.alpha() * eb.alpha(),
        ea.ancillas() + eb.ancillas(),
        ea.system_qubits(),
        ea.alpha() * eb.eps() + eb.alpha() * ea.eps(),
        ea.rows(),
        eb.cols(),
    ))
}

/// `U†`, encoding `A†` with unchanged parameters.
pub fn adjoint(e: &BlockEncoding) -> BlockEncoding {
    BlockEncoding::from_parts(
        e.unitary().adjoint(),
        e.alpha(),
        e.ancillas(),
        e.system_qubits(),
        e.eps(),
        e.cols(),
        e.rows(),
    )
}

/// Exact dilation encoding of `±I` on `dim × dim`, padded to `s` qubits.
pub fn signed_identity(dim: usize, s: usize, negative: bool) -> Result<BlockEncoding> {
    let sign = if negative { -1.0 } else { 1.0 };
    let id = CMatrix::identity(dim, dim).scale(sign);
    encode_dilation_padded(&pad_to_qubits(&id, s)?, 1.0)
}

/// `c · A`. Negative factors multiply by an exact encoding of `−I`
/// (one extra ancilla); the magnitude goes into `α`.
pub fn scale(e: &BlockEncoding, c: f64) -> Result<BlockEncoding> {
    if c == 0.0 || !c.is_finite() {
        return Err(Error::ZeroScale);
    }
    let base = if c < 0.0 {
        let minus = signed_identity(e.cols(), e.system_qubits(), true)?;
        multiply(e, &minus)?
    } else {
        e.clone()
    };
    let mag = c.abs();
    let alpha = base.alpha() * mag;
    let eps = base.eps() * mag;
    Ok(base.with_alpha(alpha).with_eps(eps))
}

/// `A − B` as `add(A, scale(B, −1))`.
pub fn subtract(ea: &BlockEncoding, eb: &BlockEncoding) -> Result<BlockEncoding> {
    add(ea, &scale(eb, -1.0)?)
}

/// Decodes and rebuilds a one-ancilla dilation with tight `α = ‖A‖`.
/// The error bound is carried forward. A zero block keeps the incoming `α`.
pub fn reencode(e: &BlockEncoding) -> Result<BlockEncoding> {
    let dense = decode(e);
    let norm = spectral_norm(&dense);
    let alpha = if norm > 0.0 { norm.min(e.alpha()) } else { e.alpha() };
    let padded = pad_to_qubits(&dense, e.system_qubits())?;
    Ok(encode_dilation_padded(&padded, alpha)?.with_eps(e.eps()))
}
