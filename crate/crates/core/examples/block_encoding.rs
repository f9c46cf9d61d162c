//! Dilation and Frobenius encodings of the same matrix.

use qlqg::blockenc::{decode, encode_dilation, encode_frobenius, encode_vector, verify};
use qlqg::linalg::{spectral_norm, CMatrix, C64};

fn main() -> qlqg::Result<()> {
    let a = CMatrix::from_row_slice(
        3,
        3,
        &[
            C64::new(0.9, 0.0),
            C64::new(0.2, 0.1),
            C64::new(0.0, 0.0),
            C64::new(-0.3, 0.0),
            C64::new(0.5, 0.0),
            C64::new(0.1, -0.2),
            C64::new(0.0, 0.4),
            C64::new(0.0, 0.0),
            C64::new(0.7, 0.0),
        ],
    );
    let dil = encode_dilation(&a, spectral_norm(&a))?;
    let frob = encode_frobenius(&a)?;
    for (name, e) in [("dilation", &dil), ("frobenius", &frob)] {
        println!(
            "{name:>9}: alpha {:.4}  ancillas {}  system qubits {}  width {}  unitarity defect {:.1e}  decode error {:.1e}",
            e.alpha(),
            e.ancillas(),
            e.system_qubits(),
            e.width(),
            e.unitarity_defect(),
            verify(e, &a)?
        );
    }

    let v = [C64::new(3.0, 0.0), C64::new(-4.0, 0.0)];
    let ev = encode_vector(&v)?;
    println!("vector: alpha {} (= |v|), decoded {:?}", ev.alpha(), decode(&ev).column(0).iter().map(|z| z.re).collect::<Vec<_>>());
    Ok(())
}
