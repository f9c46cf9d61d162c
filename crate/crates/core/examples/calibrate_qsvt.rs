//! Degree table of the inverse polynomial over a (κ, ε′) grid.

use qlqg::qsvt::build_inverse_polynomial;

fn main() -> qlqg::Result<()> {
    let beta = 2.0;
    println!("{:>6} {:>8} {:>7} {:>12} {:>10}", "kappa", "eps", "degree", "window_err", "max|p|");
    for &kappa in &[2.0, 5.0, 10.0, 20.0] {
        for &eps in &[1e-2, 1e-4, 1e-6, 1e-8] {
            let p = build_inverse_polynomial(kappa, eps, beta)?;
            println!(
                "{:>6} {:>8.0e} {:>7} {:>12.3e} {:>10.6}",
                kappa,
                eps,
                p.degree(),
                p.window_error(),
                p.max_abs()
            );
        }
    }
    Ok(())
}
