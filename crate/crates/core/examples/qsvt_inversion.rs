//! Inverting a random symmetric matrix through the singular-value transform.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qlqg::blockenc::{decode, encode_dilation};
use qlqg::linalg::{spectral_norm, to_complex, CMatrix};
use qlqg::qsvt::invert;
use qlqg::random::{planted_symmetric, spectrum};

fn main() -> qlqg::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let d = 4;
    for &kappa in &[2.0, 10.0, 50.0] {
        let ev = spectrum(&mut rng, d, 1.0 / kappa, 1.0);
        let a = to_complex(&planted_symmetric(&mut rng, &ev));
        for &eps in &[1e-3, 1e-8] {
            let inv = invert(&encode_dilation(&a, 1.0)?, eps)?;
            let residual = spectral_norm(&(&a * decode(&inv.encoding) - CMatrix::identity(d, d)));
            println!(
                "kappa {kappa:>4}  eps' {eps:.0e}  window {:>6.2}  degree {:>5}  alpha' {:>7.2}  ancillas {}  residual {residual:.2e}  bound {:.1e}",
                inv.kappa_window,
                inv.degree,
                inv.encoding.alpha(),
                inv.encoding.ancillas(),
                10.0 * kappa * eps
            );
        }
    }
    Ok(())
}
