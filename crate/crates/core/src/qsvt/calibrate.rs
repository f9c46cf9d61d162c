//! Degree calibration over a grid of condition numbers and tolerances.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{invert, poly::build_inverse_polynomial};
use crate::blockenc::{decode, encode_dilation};
use crate::error::Result;
use crate::linalg::{spectral_norm, to_complex, CMatrix};
use crate::random::{planted_symmetric, spectrum};

/// Dimension of the random SPD test matrices.
pub const TEST_DIM: usize = 4;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationPoint {
    pub kappa: f64,
    pub eps_prime: f64,
    pub degree: usize,
    /// `‖A·Â⁻¹ − I‖` for a random SPD `A` with spectrum in `[1/κ, 1]`,
    /// inverted with the window fixed at `κ`.
    pub residual: f64,
    /// `10·κ·ε′`.
    pub residual_bound: f64,
}

/// Least-squares fit of degree against `κ ln(1/ε′)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegreeCalibration {
    pub beta: f64,
    pub points: Vec<CalibrationPoint>,
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    /// `max d / (κ ln(1/ε′))` over the grid.
    pub envelope: f64,
}

/// Slack on the envelope when judging degrees outside the grid.
const ENVELOPE_SLACK: f64 = 1.1;

impl DegreeCalibration {
    /// Upper bound `c·κ ln(1/ε′)` used by the complexity audit.
    pub fn envelope_bound(&self, kappa: f64, eps_prime: f64) -> f64 {
        // κ = 1 degenerates to a degree-1 polynomial
        (ENVELOPE_SLACK * self.envelope * kappa * (1.0 / eps_prime).ln()).max(1.0)
    }

    pub fn residuals_ok(&self) -> bool {
        self.points.iter().all(|p| p.residual <= p.residual_bound)
    }
}

/// Ordinary least squares `y ≈ a x + b`, returning `(a, b, R²)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - slope * a - intercept).powi(2))
        .sum();
    let ss_tot: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    (slope, intercept, 1.0 - ss_res / ss_tot)
}

fn residual(kappa: f64, eps_prime: f64, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ev = spectrum(&mut rng, TEST_DIM, 1.0 / kappa, 1.0);
    let a = to_complex(&planted_symmetric(&mut rng, &ev));
    let inv = invert(&encode_dilation(&a, 1.0)?, eps_prime)?;
    let id = CMatrix::identity(TEST_DIM, TEST_DIM);
    Ok(spectral_norm(&(a * decode(&inv.encoding) - id)))
}

/// Builds the polynomial at every grid point (in parallel, merged in grid
/// order), checks an inversion residual, and fits the degree law.
pub fn calibrate_degrees(kappas: &[f64], eps_primes: &[f64], beta: f64, seed: u64) -> Result<DegreeCalibration> {
    let grid: Vec<(usize, f64, f64)> = kappas
        .iter()
        .flat_map(|&k| eps_primes.iter().map(move |&e| (k, e)))
        .enumerate()
        .map(|(i, (k, e))| (i, k, e))
        .collect();
    let points: Vec<CalibrationPoint> = grid
        .par_iter()
        .map(|&(i, kappa, eps_prime)| {
            let poly = build_inverse_polynomial(kappa, eps_prime, beta)?;
            Ok(CalibrationPoint {
                kappa,
                eps_prime,
                degree: poly.degree(),
                residual: residual(kappa, eps_prime, seed.wrapping_add(i as u64))?,
                residual_bound: 10.0 * kappa * eps_prime,
            })
        })
        .collect::<Result<_>>()?;
    let x: Vec<f64> = points.iter().map(|p| p.kappa * (1.0 / p.eps_prime).ln()).collect();
    let y: Vec<f64> = points.iter().map(|p| p.degree as f64).collect();
    let (slope, intercept, r2) = linear_fit(&x, &y);
    let envelope = x.iter().zip(&y).map(|(a, b)| b / a).fold(0.0, f64::max);
    Ok(DegreeCalibration {
        beta,
        points,
        slope,
        intercept,
        r2,
        envelope,
    })
}

/// The acceptance grid: `κ ∈ {2, 5, 10, 20}`, `ε′ ∈ {1e-2, 1e-4, 1e-6, 1e-8}`.
pub fn default_grid() -> (Vec<f64>, Vec<f64>) {
    (vec![2.0, 5.0, 10.0, 20.0], vec![1e-2, 1e-4, 1e-6, 1e-8])
}
