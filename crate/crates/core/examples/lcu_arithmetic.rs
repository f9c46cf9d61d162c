//! Sums, products and re-encoding, with the parameter bookkeeping shown.

use qlqg::beops::{add, adjoint, multiply, reencode, subtract};
use qlqg::blockenc::{decode, encode_dilation, BlockEncoding};
use qlqg::linalg::{real_part, spectral_norm, to_complex, RMatrix};

fn show(name: &str, e: &BlockEncoding) {
    let m = real_part(&decode(e));
    println!(
        "{name:<14} alpha {:>7.4}  ancillas {}  eps {:.1e}  block {:?}",
        e.alpha(),
        e.ancillas(),
        e.eps(),
        m.iter().map(|x| (x * 1e6).round() / 1e6).collect::<Vec<_>>()
    );
}

fn main() -> qlqg::Result<()> {
    let a = to_complex(&RMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]));
    let b = to_complex(&RMatrix::from_row_slice(2, 2, &[0.3, 0.0, 0.2, -0.4]));
    let ea = encode_dilation(&a, spectral_norm(&a))?;
    let eb = encode_dilation(&b, 1.0)?;
    show("A", &ea);
    show("B", &eb);
    show("A + B", &add(&ea, &eb)?);
    show("A - B", &subtract(&ea, &eb)?);
    let prod = multiply(&ea, &eb)?;
    show("A B", &prod);
    let gram = multiply(&adjoint(&prod), &prod)?;
    show("(AB)^T AB", &gram);
    show("reencoded", &reencode(&gram)?);
    Ok(())
}
