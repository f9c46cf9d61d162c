//! Seeded random LQG problems with controlled conditioning.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::classical::conditioning_profile;
use crate::error::{Error, Result};
use crate::linalg::{psd_factor_real, spectral_norm_real, RMatrix, RVector};
use crate::problem::LqgProblem;
use crate::random::{gaussian_matrix, planted_symmetric, spectrum};

/// Regeneration attempts before giving up on the conditioning target.
pub const MAX_ATTEMPTS: usize = 10;

/// Shrink factor applied to `B` and `C` on each failed attempt.
const SHRINK: f64 = 0.7;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSpec {
    pub n: usize,
    pub m: usize,
    pub p: usize,
    #[serde(rename = "T")]
    pub horizon: usize,
    pub seed: u64,
    pub kappa_target: f64,
}

fn with_spectral_norm(rng: &mut ChaCha8Rng, rows: usize, cols: usize, norm: f64) -> RMatrix {
    let g = gaussian_matrix(rng, rows, cols);
    let s = spectral_norm_real(&g);
    if s == 0.0 {
        g
    } else {
        g * (norm / s)
    }
}

/// `φ X^{1/2} G Y^{1/2}` with `‖G‖ = 1`, keeping `[[X, Z], [Zᵀ, Y]]` PSD for
/// `φ ≤ 1`.
fn coupling(rng: &mut ChaCha8Rng, x: &RMatrix, y: &RMatrix, phi: f64) -> RMatrix {
    let g = with_spectral_norm(rng, x.nrows(), y.nrows(), 1.0);
    psd_factor_real(x) * g * psd_factor_real(y).transpose() * phi
}

fn draw(rng: &mut ChaCha8Rng, spec: &GeneratorSpec, shrink: f64) -> LqgProblem {
    let GeneratorSpec { n, m, p, .. } = *spec;
    let top = spec.kappa_target.sqrt().min(2.0);
    let a_norm = rng.random_range(0.8..=1.1);
    let a = with_spectral_norm(rng, n, n, a_norm);
    let b = with_spectral_norm(rng, n, m, shrink);
    let c = with_spectral_norm(rng, p, n, shrink);
    let mut sym = |dim: usize, lo: f64, hi: f64| {
        let ev = spectrum(rng, dim, lo, hi);
        planted_symmetric(rng, &ev)
    };
    let mm = sym(n, 0.5, 1.5);
    let nn = sym(m, 1.0, top);
    let m_t = sym(n, 0.5, 1.5);
    let sigma = sym(n, 0.1, 0.5);
    let gamma = sym(p, 1.0, top);
    let r0 = sym(n, 0.1, 1.0);
    let phi_s = rng.random_range(0.0..=0.5);
    let phi_u = rng.random_range(0.0..=0.5);
    let s = coupling(rng, &mm, &nn, phi_s);
    let upsilon = coupling(rng, &sigma, &gamma, phi_u);
    let mu0 = RVector::from_iterator(n, gaussian_matrix(rng, n, 1).iter().copied());
    LqgProblem {
        a,
        b,
        c,
        m: mm,
        n: nn,
        s,
        m_t,
        sigma,
        gamma,
        upsilon,
        mu0,
        r0,
        horizon: spec.horizon,
    }
}

/// Draws a problem whose Riccati and innovation matrices all have condition
/// number at most `kappa_target`, checked with the classical pass.
///
/// Each failed attempt draws afresh with `B` and `C` shrunk by a further 0.7.
pub fn generate_problem(spec: &GeneratorSpec) -> Result<LqgProblem> {
    if spec.n == 0 || spec.m == 0 || spec.p == 0 {
        return Err(Error::Config("generator dimensions must be at least 1".into()));
    }
    if spec.kappa_target.is_nan() || spec.kappa_target < 1.0 {
        return Err(Error::Config(format!(
            "kappa_target must be >= 1, got {}",
            spec.kappa_target
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut worst = f64::INFINITY;
    for attempt in 0..MAX_ATTEMPTS {
        let prob = draw(&mut rng, spec, SHRINK.powi(attempt as i32));
        if prob.validate().is_err() {
            continue;
        }
        let kappa = match conditioning_profile(&prob) {
            Ok(prof) => prof.worst(),
            Err(_) => continue,
        };
        if kappa <= spec.kappa_target {
            return Ok(prob);
        }
        worst = worst.min(kappa);
    }
    Err(Error::GeneratorExhausted {
        target: spec.kappa_target,
        attempts: MAX_ATTEMPTS,
        worst,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(seed: u64) -> GeneratorSpec {
        GeneratorSpec {
            n: 2,
            m: 1,
            p: 1,
            horizon: 10,
            seed,
            kappa_target: 5.0,
        }
    }

    #[test]
    fn deterministic() {
        assert_eq!(generate_problem(&spec(3)).unwrap(), generate_problem(&spec(3)).unwrap());
        assert_ne!(generate_problem(&spec(3)).unwrap(), generate_problem(&spec(4)).unwrap());
    }

    #[test]
    fn meets_target() {
        let p = generate_problem(&spec(9)).unwrap();
        assert!(p.validate().is_ok());
        assert!(conditioning_profile(&p).unwrap().worst() <= 5.0);
    }

    #[test]
    fn unreachable_target() {
        // scalar blocks always have κ = 1, so use 2x2 ones
        let mut s = spec(1);
        s.m = 2;
        s.p = 2;
        s.kappa_target = 1.0;
        assert!(matches!(generate_problem(&s), Err(Error::GeneratorExhausted { .. })));
    }
}
