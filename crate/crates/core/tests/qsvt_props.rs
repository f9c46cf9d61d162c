use approx::assert_relative_eq;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qlqg::blockenc::{decode, encode_dilation};
use qlqg::linalg::{spectral_norm, to_complex, CMatrix};
use qlqg::qsvt::{build_inverse_polynomial, invert, invert_with, InvertOptions, BOUND_TOL};
use qlqg::random::{planted_symmetric, spectrum};

fn log_uniform(lo: f64, hi: f64) -> impl Strategy<Value = f64> {
    (lo.ln()..hi.ln()).prop_map(f64::exp)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn polynomial_is_odd_bounded_and_accurate(
        kappa in 1.5..15.0f64,
        eps in log_uniform(1e-7, 1e-2),
        probes in prop::collection::vec(0.0..1.0f64, 64),
    ) {
        let p = build_inverse_polynomial(kappa, eps, 2.0).unwrap();
        prop_assert_eq!(p.degree() % 2, 1);
        prop_assert!(p.coefficients().iter().step_by(2).all(|&c| c == 0.0));
        for &u in &probes {
            let x = 2.0 * u - 1.0;
            prop_assert!((p.eval(-x) + p.eval(x)).abs() <= 1e-12);
            prop_assert!(p.eval(x).abs() <= 1.0 + BOUND_TOL);
            // probes off the construction grid
            let w = 1.0 / kappa + u * (1.0 - 1.0 / kappa);
            let target = 1.0 / (kappa * 2.0 * w);
            prop_assert!((p.eval(w) - target).abs() <= 1.01 * eps, "x={w} err={}", (p.eval(w) - target).abs());
        }
    }

    #[test]
    fn inversion_residual_within_bound(
        seed in any::<u64>(),
        d in 2usize..=4,
        kappa in 1.5..12.0f64,
        eps in log_uniform(1e-8, 1e-3),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ev = spectrum(&mut rng, d, 1.0 / kappa, 1.0);
        let a = to_complex(&planted_symmetric(&mut rng, &ev));
        let inv = invert(&encode_dilation(&a, 1.0).unwrap(), eps).unwrap();
        let got = decode(&inv.encoding);
        let residual = spectral_norm(&(&a * &got - CMatrix::identity(d, d)));
        prop_assert!(residual <= 10.0 * kappa * eps, "residual {residual}");
        let exact = a.clone().try_inverse().unwrap();
        prop_assert!(spectral_norm(&(got - exact)) <= inv.encoding.eps() * (1.0 + 1e-6) + 1e-12);
        prop_assert!(inv.encoding.is_unitary());
    }
}

#[test]
fn inversion_handles_loose_normalization() {
    // ‖A‖ = 0.5 but α = 2: the window widens and the result is unchanged
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let ev = spectrum(&mut rng, 3, 0.1, 0.5);
    let a = to_complex(&planted_symmetric(&mut rng, &ev));
    let tight = invert(&encode_dilation(&a, 0.5).unwrap(), 1e-8).unwrap();
    let loose = invert(&encode_dilation(&a, 2.0).unwrap(), 1e-8).unwrap();
    assert!(loose.kappa_window > tight.kappa_window);
    assert!(loose.degree > tight.degree);
    let (gt, gl) = (decode(&tight.encoding), decode(&loose.encoding));
    for (x, y) in gt.iter().zip(gl.iter()) {
        assert_relative_eq!(x.re, y.re, epsilon = 1e-6);
    }
}

#[test]
fn fixed_window_must_cover_the_spectrum() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let ev = spectrum(&mut rng, 2, 0.05, 1.0);
    let a = to_complex(&planted_symmetric(&mut rng, &ev));
    let e = encode_dilation(&a, 1.0).unwrap();
    let narrow = InvertOptions {
        kappa: Some(5.0),
        ..InvertOptions::default()
    };
    assert!(invert_with(&e, 1e-6, &narrow).is_err());
    let wide = InvertOptions {
        kappa: Some(25.0),
        ..InvertOptions::default()
    };
    assert!(invert_with(&e, 1e-6, &wide).is_ok());
}
