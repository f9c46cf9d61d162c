//! Exact classical LQG: backward Riccati pass, Kalman filter, scalar cost
//! terms and seeded closed-loop simulation.

use nalgebra::Cholesky;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{condition_number_real, psd_factor_real, symmetrize, RMatrix, RVector};
use crate::problem::LqgProblem;

/// Backward-pass sequences: `P_0..P_T`, `K_0..K_{T−1}`, `r_0..r_T`.
#[derive(Clone, Debug)]
pub struct RiccatiSolution {
    pub p: Vec<RMatrix>,
    pub k: Vec<RMatrix>,
    pub r: Vec<f64>,
}

fn spd_inverse(m: &RMatrix) -> Option<RMatrix> {
    let chol = Cholesky::new(symmetrize(m))?;
    let inv = chol.inverse();
    if inv.iter().all(|x| x.is_finite()) {
        Some(inv)
    } else {
        None
    }
}

/// `P_T = M_T`, then for `k = T−1..0`
/// `K_k = −(N + BᵀP_{k+1}B)⁻¹(Sᵀ + BᵀP_{k+1}A)` and
/// `P_k = M + AᵀP_{k+1}A − (Sᵀ + BᵀP_{k+1}A)ᵀ(N + BᵀP_{k+1}B)⁻¹(Sᵀ + BᵀP_{k+1}A)`.
pub fn riccati_backward(prob: &LqgProblem) -> Result<RiccatiSolution> {
    let t = prob.horizon;
    let mut p = vec![RMatrix::zeros(0, 0); t + 1];
    let mut k = vec![RMatrix::zeros(0, 0); t];
    p[t] = symmetrize(&prob.m_t);
    for step in (0..t).rev() {
        let next = &p[step + 1];
        let h = &prob.n + prob.b.transpose() * next * &prob.b;
        let g = prob.s.transpose() + prob.b.transpose() * next * &prob.a;
        let h_inv = spd_inverse(&h).ok_or(Error::Conditioning { step })?;
        let gain = -(&h_inv * &g);
        let pk = &prob.m + prob.a.transpose() * next * &prob.a + g.transpose() * &gain;
        k[step] = gain;
        p[step] = symmetrize(&pk);
    }
    let mut sol = RiccatiSolution { p, k, r: Vec::new() };
    sol.r = scalar_terms_r(prob, &sol);
    Ok(sol)
}

/// `r_T = 0`, `r_k = Σ_{j=k+1}^{T} Tr(Σ P_j)`.
pub fn scalar_terms_r(prob: &LqgProblem, sol: &RiccatiSolution) -> Vec<f64> {
    let t = sol.p.len() - 1;
    let mut r = vec![0.0; t + 1];
    for k in (0..t).rev() {
        r[k] = r[k + 1] + (&prob.sigma * &sol.p[k + 1]).trace();
    }
    r
}

/// One Kalman update.
#[derive(Clone, Debug)]
pub struct KalmanUpdate {
    pub mu: RVector,
    pub r: RMatrix,
    pub gain: RMatrix,
    pub innovation: RVector,
}

/// `L = (Υ + ARCᵀ)(Γ + CRCᵀ)⁻¹`, `μ' = Aμ + Bu + L(y − Cμ)`,
/// `R' = Σ + ARAᵀ − (Υ + ARCᵀ)(Γ + CRCᵀ)⁻¹(Υ + ARCᵀ)ᵀ`.
///
/// `y_next` is the measurement `y_{k+1} = C x_k + v_k`. A singular innovation
/// covariance is reported as [`Error::FilterDegeneracy`] at step 0; use
/// [`filter_forward`] for step-tagged errors.
pub fn kalman_step(
    mu: &RVector,
    r: &RMatrix,
    u: &RVector,
    y_next: &RVector,
    prob: &LqgProblem,
) -> Result<KalmanUpdate> {
    kalman_step_at(0, mu, r, u, y_next, prob)
}

fn kalman_step_at(
    step: usize,
    mu: &RVector,
    r: &RMatrix,
    u: &RVector,
    y_next: &RVector,
    prob: &LqgProblem,
) -> Result<KalmanUpdate> {
    let ct = prob.c.transpose();
    let v = &prob.gamma + &prob.c * r * &ct;
    let w = &prob.upsilon + &prob.a * r * &ct;
    let v_inv = spd_inverse(&v).ok_or(Error::FilterDegeneracy { step })?;
    let gain = &w * &v_inv;
    let innovation = y_next - &prob.c * mu;
    let mu_next = &prob.a * mu + &prob.b * u + &gain * &innovation;
    let r_next = &prob.sigma + &prob.a * r * prob.a.transpose() - &gain * w.transpose();
    Ok(KalmanUpdate {
        mu: mu_next,
        r: symmetrize(&r_next),
        gain,
        innovation,
    })
}

/// Covariance map in the information form
/// `Σ − ΥΓ⁻¹Υᵀ + (A − ΥΓ⁻¹C)(CᵀΓ⁻¹C + R⁻¹)⁻¹(A − ΥΓ⁻¹C)ᵀ`.
///
/// Falls back to [`riccati_map_singular`] when `R` is not safely invertible.
pub fn riccati_map_alternative(r: &RMatrix, prob: &LqgProblem) -> Result<RMatrix> {
    let (g_inv, a_bar, sigma_bar) = information_terms(prob)?;
    let info = prob.c.transpose() * &g_inv * &prob.c;
    let r_inv = match spd_inverse(r) {
        Some(inv) if condition_number_real(r) < 1e10 => inv,
        _ => return riccati_map_singular(r, prob),
    };
    let middle = spd_inverse(&(info + r_inv)).ok_or_else(|| {
        Error::InvalidProblem("information matrix is not positive definite".into())
    })?;
    Ok(symmetrize(&(sigma_bar + &a_bar * middle * a_bar.transpose())))
}

/// The form valid for singular `R`, with middle factor `(R CᵀΓ⁻¹C + I)⁻¹ R`.
pub fn riccati_map_singular(r: &RMatrix, prob: &LqgProblem) -> Result<RMatrix> {
    let (g_inv, a_bar, sigma_bar) = information_terms(prob)?;
    let n = prob.state_dim();
    let info = prob.c.transpose() * &g_inv * &prob.c;
    let lhs = r * info + RMatrix::identity(n, n);
    let middle = lhs
        .lu()
        .solve(r)
        .ok_or_else(|| Error::InvalidProblem("R C^T Gamma^-1 C + I is singular".into()))?;
    Ok(symmetrize(&(sigma_bar + &a_bar * middle * a_bar.transpose())))
}

fn information_terms(prob: &LqgProblem) -> Result<(RMatrix, RMatrix, RMatrix)> {
    let g_inv = spd_inverse(&prob.gamma).ok_or(Error::SingularGamma)?;
    let a_bar = &prob.a - &prob.upsilon * &g_inv * &prob.c;
    let sigma_bar = &prob.sigma - &prob.upsilon * &g_inv * prob.upsilon.transpose();
    Ok((g_inv, a_bar, sigma_bar))
}

/// Variants of the output-feedback scalar term `s_k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScalarTermForm {
    /// `Tr(R_k M) + Σ_{j=k}^{T−1} Tr[R_j M + (Σ + AR_jAᵀ − R_{j+1})P_{j+1}]`.
    Printed,
    /// The sum alone, without the leading `Tr(R_k M)`.
    WithoutLeading,
    /// `Tr(R_T M_T) + Σ_{j=k}^{T−1} Tr[…]`: the terminal-cost term in place of
    /// the leading one, which is what the expected-cost identity requires.
    TerminalCorrected,
}

impl ScalarTermForm {
    pub const ALL: [ScalarTermForm; 3] = [
        ScalarTermForm::Printed,
        ScalarTermForm::WithoutLeading,
        ScalarTermForm::TerminalCorrected,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScalarTermForm::Printed => "printed",
            ScalarTermForm::WithoutLeading => "without_leading",
            ScalarTermForm::TerminalCorrected => "terminal_corrected",
        }
    }
}

/// `s_0..s_T` from covariances `R_0..R_T` and Riccati matrices `P_0..P_T`.
pub fn scalar_terms_s(prob: &LqgProblem, r: &[RMatrix], p: &[RMatrix], form: ScalarTermForm) -> Vec<f64> {
    let t = r.len() - 1;
    let mut tail = vec![0.0; t + 1];
    for j in (0..t).rev() {
        let drift = &prob.sigma + &prob.a * &r[j] * prob.a.transpose() - &r[j + 1];
        tail[j] = tail[j + 1] + (&r[j] * &prob.m).trace() + (drift * &p[j + 1]).trace();
    }
    (0..=t)
        .map(|k| match form {
            ScalarTermForm::Printed => (&r[k] * &prob.m).trace() + tail[k],
            ScalarTermForm::WithoutLeading => tail[k],
            ScalarTermForm::TerminalCorrected => (&r[t] * &prob.m_t).trace() + tail[k],
        })
        .collect()
}

/// Open-loop moments: `μ' = Aμ + Bu`, `R' = Σ + ARAᵀ`.
pub fn mean_cov_propagation(mu: &RVector, r: &RMatrix, u: &RVector, prob: &LqgProblem) -> (RVector, RMatrix) {
    let mu_next = &prob.a * mu + &prob.b * u;
    let r_next = symmetrize(&(&prob.sigma + &prob.a * r * prob.a.transpose()));
    (mu_next, r_next)
}

/// Error covariances `R_0..R_T`; they do not depend on the measurements.
pub fn covariance_sequence(prob: &LqgProblem) -> Result<Vec<RMatrix>> {
    let n = prob.state_dim();
    let zero_u = RVector::zeros(prob.input_dim());
    let zero_y = RVector::zeros(prob.output_dim());
    let mut r = vec![symmetrize(&prob.r0)];
    let mu = RVector::zeros(n);
    for k in 0..prob.horizon {
        let upd = kalman_step_at(k, &mu, &r[k], &zero_u, &zero_y, prob)?;
        r.push(upd.r);
    }
    Ok(r)
}

/// Per-step condition numbers of the matrices the quantum pipeline inverts.
#[derive(Clone, Debug)]
pub struct ConditioningProfile {
    /// `κ(N + BᵀP_{k+1}B)` for `k = 0..T−1`.
    pub riccati: Vec<f64>,
    /// `κ(Γ + CR_kCᵀ)` for `k = 0..T−1`.
    pub innovation: Vec<f64>,
}

impl ConditioningProfile {
    pub fn worst(&self) -> f64 {
        self.riccati
            .iter()
            .chain(&self.innovation)
            .fold(1.0_f64, |a, &k| a.max(k))
    }
}

pub fn conditioning_profile(prob: &LqgProblem) -> Result<ConditioningProfile> {
    let sol = riccati_backward(prob)?;
    let r = covariance_sequence(prob)?;
    let riccati = (0..prob.horizon)
        .map(|k| condition_number_real(&(&prob.n + prob.b.transpose() * &sol.p[k + 1] * &prob.b)))
        .collect();
    let innovation = (0..prob.horizon)
        .map(|k| condition_number_real(&(&prob.gamma + &prob.c * &r[k] * prob.c.transpose())))
        .collect();
    Ok(ConditioningProfile { riccati, innovation })
}

/// Forward pass: estimates, gains, controls and scalar terms.
#[derive(Clone, Debug)]
pub struct FilterTrace {
    /// `μ_0..μ_T`.
    pub mu: Vec<RVector>,
    /// `R_0..R_T`.
    pub r: Vec<RMatrix>,
    /// `L_1..L_T`.
    pub l: Vec<RMatrix>,
    /// `u_0..u_{T−1}`.
    pub u: Vec<RVector>,
    /// `s_0..s_T` in the printed form; see [`scalar_terms_s`] for variants.
    pub s: Vec<f64>,
    /// `y_{k+1} − Cμ_k` for `k = 0..T−1`.
    pub innovations: Vec<RVector>,
}

/// Runs the filter on `y_1..y_T` with `u_0 = K_0μ_0` computed first and
/// `u_{k+1} = K_{k+1}μ_{k+1}` after each update.
pub fn filter_forward(prob: &LqgProblem, sol: &RiccatiSolution, measurements: &[RVector]) -> Result<FilterTrace> {
    let t = prob.horizon;
    if measurements.len() != t {
        return Err(Error::DimensionMismatch(format!(
            "expected {t} measurements, got {}",
            measurements.len()
        )));
    }
    let mut mu = vec![prob.mu0.clone()];
    let mut r = vec![symmetrize(&prob.r0)];
    let mut l = Vec::with_capacity(t);
    let mut u = Vec::with_capacity(t);
    let mut innovations = Vec::with_capacity(t);
    if t > 0 {
        u.push(&sol.k[0] * &mu[0]);
    }
    for k in 0..t {
        let upd = kalman_step_at(k, &mu[k], &r[k], &u[k], &measurements[k], prob)?;
        mu.push(upd.mu);
        r.push(upd.r);
        l.push(upd.gain);
        innovations.push(upd.innovation);
        if k + 1 < t {
            u.push(&sol.k[k + 1] * &mu[k + 1]);
        }
    }
    let s = scalar_terms_s(prob, &r, &sol.p, ScalarTermForm::Printed);
    Ok(FilterTrace {
        mu,
        r,
        l,
        u,
        s,
        innovations,
    })
}

/// One closed-loop rollout.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    /// `x_0..x_T`.
    pub x: Vec<RVector>,
    /// `y_1..y_T`.
    pub y: Vec<RVector>,
    /// `u_0..u_{T−1}`.
    pub u: Vec<RVector>,
    pub w: Vec<RVector>,
    pub v: Vec<RVector>,
    /// Filter estimates `μ_0..μ_T`.
    pub mu: Vec<RVector>,
    /// `Σ_k c(x_k, u_k) + x_TᵀM_T x_T`.
    pub cost: f64,
}

/// Factor `F` with `F Fᵀ = S`: Cholesky when it succeeds, otherwise a clamped
/// eigendecomposition.
fn covariance_factor(s: &RMatrix) -> RMatrix {
    match Cholesky::new(symmetrize(s)) {
        Some(chol) => chol.l(),
        None => psd_factor_real(s),
    }
}

fn standard_normals(rng: &mut ChaCha8Rng, n: usize) -> RVector {
    RVector::from_fn(n, |_, _| StandardNormal.sample(rng))
}

fn stage_cost(prob: &LqgProblem, x: &RVector, u: &RVector) -> f64 {
    (x.transpose() * &prob.m * x)[(0, 0)]
        + (u.transpose() * &prob.n * u)[(0, 0)]
        + 2.0 * (x.transpose() * &prob.s * u)[(0, 0)]
}

/// Closed-loop rollout `index` under `seed`.
///
/// The generator is ChaCha8 seeded with `seed` on stream `index`. It draws
/// `x_0 − μ₀` first (`n` normals through a factor of `R₀`), then for each
/// step `n + p` normals through a factor of `Δ`, split into `(w_k, v_k)`.
pub fn simulate_rollout(prob: &LqgProblem, gains: &[RMatrix], seed: u64, index: u64) -> Result<Trajectory> {
    let (n, p, t) = (prob.state_dim(), prob.output_dim(), prob.horizon);
    if gains.len() != t {
        return Err(Error::DimensionMismatch(format!(
            "expected {t} gains, got {}",
            gains.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let f0 = covariance_factor(&prob.r0);
    let fd = covariance_factor(&prob.noise_covariance());

    let x0 = &prob.mu0 + &f0 * standard_normals(&mut rng, n);
    let mut traj = Trajectory {
        x: vec![x0],
        y: Vec::with_capacity(t),
        u: Vec::with_capacity(t),
        w: Vec::with_capacity(t),
        v: Vec::with_capacity(t),
        mu: vec![prob.mu0.clone()],
        cost: 0.0,
    };
    let mut r = symmetrize(&prob.r0);
    for (k, gain) in gains.iter().enumerate() {
        let noise = &fd * standard_normals(&mut rng, n + p);
        let w = noise.rows(0, n).into_owned();
        let v = noise.rows(n, p).into_owned();
        let x = &traj.x[k];
        let u = gain * &traj.mu[k];
        traj.cost += stage_cost(prob, x, &u);
        let y = &prob.c * x + &v;
        let x_next = &prob.a * x + &prob.b * &u + &w;
        let upd = kalman_step_at(k, &traj.mu[k], &r, &u, &y, prob)?;
        r = upd.r;
        traj.mu.push(upd.mu);
        traj.x.push(x_next);
        traj.y.push(y);
        traj.u.push(u);
        traj.w.push(w);
        traj.v.push(v);
    }
    let xt = &traj.x[t];
    traj.cost += (xt.transpose() * &prob.m_t * xt)[(0, 0)];
    Ok(traj)
}

/// [`simulate_rollout`] on stream 0.
pub fn simulate_plant(prob: &LqgProblem, gains: &[RMatrix], seed: u64) -> Result<Trajectory> {
    simulate_rollout(prob, gains, seed, 0)
}

/// Sample mean and standard error of the realized cost.
#[derive(Clone, Copy, Debug)]
pub struct CostEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub trials: usize,
}

/// Runs `trials` rollouts on streams `0..trials` in parallel; statistics are
/// accumulated in index order.
pub fn monte_carlo_cost(prob: &LqgProblem, gains: &[RMatrix], trials: usize, seed: u64) -> Result<CostEstimate> {
    if trials < 2 {
        return Err(Error::Config("need at least two Monte Carlo trials".into()));
    }
    let costs: Vec<f64> = (0..trials as u64)
        .into_par_iter()
        .map(|i| simulate_rollout(prob, gains, seed, i).map(|t| t.cost))
        .collect::<Result<_>>()?;
    let n = trials as f64;
    let mean = costs.iter().sum::<f64>() / n;
    let var = costs.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(CostEstimate {
        mean,
        std_error: (var / n).sqrt(),
        trials,
    })
}

/// `μᵀPμ + scalar`.
pub fn value_function(mu: &RVector, p: &RMatrix, scalar: f64) -> f64 {
    (mu.transpose() * p * mu)[(0, 0)] + scalar
}
