//! The LQG pipeline on block encodings: Riccati backward pass, Kalman forward
//! pass with interleaved control extraction, and resource auditing.
//!
//! Every named intermediate (`U_1`, `U_2`, `K_k`, `P_k`, `V_k`, `W_k`, `L_k`,
//! `μ_k`, `R_k`) is re-encoded as a tight one-ancilla dilation before it is
//! reused, so the simulated width stays bounded. The ledger records the width
//! and normalization reached before each re-encode.

mod ledger;

pub use ledger::{Phase, ResourceLedger, StepRecord, Totals};

use serde::{Deserialize, Serialize};

use crate::blockenc::{
    decode, encode_dilation_padded, encode_frobenius, encode_vector_on, pad_to_qubits, BlockEncoding,
};
use crate::classical::{conditioning_profile, riccati_backward, simulate_plant};
use crate::error::{Error, Result};
use crate::linalg::{qubits_for, real_part, spectral_norm, to_complex, RMatrix, RVector, C64};
use crate::problem::LqgProblem;
use crate::qsvt::{DegreeCalibration, InvertOptions};
use ledger::StepMeter;

/// How problem matrices are loaded.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EncodingScheme {
    /// Exact one-ancilla dilation with `α = ‖A‖`.
    #[default]
    Dilation,
    /// Row-norm/row-state construction with `α = ‖A‖_F` and `s` ancillas.
    Frobenius,
}

/// Source of the window parameter for each inversion.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KappaPolicy {
    /// From the decoded matrix, widened by the margin.
    Estimated,
    /// Caller-supplied bounds for the Riccati and Kalman inversions.
    Fixed { riccati: f64, kalman: f64 },
}

#[derive(Clone, Copy, Debug)]
pub struct QuantumOptions {
    pub eps_prime_r: f64,
    pub eps_prime_v: f64,
    pub beta: f64,
    pub margin: f64,
    pub kappa: KappaPolicy,
    pub scheme: EncodingScheme,
}

impl Default for QuantumOptions {
    fn default() -> Self {
        QuantumOptions {
            eps_prime_r: 1e-8,
            eps_prime_v: 1e-8,
            beta: 2.0,
            margin: 1.05,
            kappa: KappaPolicy::Estimated,
            scheme: EncodingScheme::Dilation,
        }
    }
}

impl QuantumOptions {
    fn invert_options(&self, phase: Phase) -> InvertOptions {
        let kappa = match (self.kappa, phase) {
            (KappaPolicy::Estimated, _) => None,
            (KappaPolicy::Fixed { riccati, .. }, Phase::Riccati) => Some(riccati),
            (KappaPolicy::Fixed { kalman, .. }, Phase::Kalman) => Some(kalman),
        };
        InvertOptions {
            beta: self.beta,
            kappa,
            margin: self.margin,
        }
    }
}

/// Block encodings of the problem data on a shared system size.
#[derive(Clone, Debug)]
pub struct EncodedProblem {
    pub a: BlockEncoding,
    pub b: BlockEncoding,
    pub c: BlockEncoding,
    pub m: BlockEncoding,
    pub n: BlockEncoding,
    pub s: BlockEncoding,
    pub m_t: BlockEncoding,
    pub sigma: BlockEncoding,
    pub gamma: BlockEncoding,
    pub upsilon: BlockEncoding,
    pub mu0: BlockEncoding,
    pub r0: BlockEncoding,
    pub system_qubits: usize,
    pub horizon: usize,
}

fn encode_matrix(m: &RMatrix, s: usize, scheme: EncodingScheme) -> Result<BlockEncoding> {
    let padded = pad_to_qubits(&to_complex(m), s)?;
    let norm = spectral_norm(padded.data());
    if norm == 0.0 {
        return encode_dilation_padded(&padded, 1.0);
    }
    match scheme {
        EncodingScheme::Dilation => encode_dilation_padded(&padded, norm),
        EncodingScheme::Frobenius => Ok(encode_frobenius(padded.data())?.with_shape(m.nrows(), m.ncols())),
    }
}

fn encode_real_vector(v: &RVector, s: usize) -> Result<BlockEncoding> {
    let z: Vec<C64> = v.iter().map(|&x| C64::new(x, 0.0)).collect();
    encode_vector_on(&z, s)
}

fn decode_real(e: &BlockEncoding) -> RMatrix {
    real_part(&decode(e))
}

fn decode_vector(e: &BlockEncoding) -> RVector {
    let m = decode_real(e);
    RVector::from_iterator(m.nrows(), m.column(0).iter().copied())
}

impl EncodedProblem {
    /// Number of encodings built, each charged as one data-structure access.
    pub const ENCODINGS: usize = 12;

    pub fn new(prob: &LqgProblem, scheme: EncodingScheme) -> Result<Self> {
        let dim = prob.state_dim().max(prob.input_dim()).max(prob.output_dim()).max(2);
        let s = qubits_for(dim);
        let enc = |m: &RMatrix| encode_matrix(m, s, scheme);
        Ok(EncodedProblem {
            a: enc(&prob.a)?,
            b: enc(&prob.b)?,
            c: enc(&prob.c)?,
            m: enc(&prob.m)?,
            n: enc(&prob.n)?,
            s: enc(&prob.s)?,
            m_t: enc(&prob.m_t)?,
            sigma: enc(&prob.sigma)?,
            gamma: enc(&prob.gamma)?,
            upsilon: enc(&prob.upsilon)?,
            mu0: encode_real_vector(&prob.mu0, s)?,
            r0: enc(&prob.r0)?,
            system_qubits: s,
            horizon: prob.horizon,
        })
    }

    /// Loads a measurement stream `y_1..y_T` on this system size.
    pub fn encode_measurements(&self, ys: &[RVector]) -> Result<Vec<BlockEncoding>> {
        ys.iter()
            .map(|y| encode_real_vector(y, self.system_qubits))
            .collect()
    }
}

/// Output of [`q_riccati_backward`].
#[derive(Clone, Debug)]
pub struct QuantumRiccati {
    /// `U_{K_0}..U_{K_{T−1}}`.
    pub k: Vec<BlockEncoding>,
    /// `U_{P_0}..U_{P_T}`.
    pub p: Vec<BlockEncoding>,
    pub ledger: ResourceLedger,
}

/// Backward pass:
///
/// ```text
/// U_1     ← U_Bᵀ·U_{P_{k+1}}·U_B + U_N
/// U_1⁻¹   ← invert(U_1)
/// U_2     ← U_Sᵀ + U_Bᵀ·U_{P_{k+1}}·U_A
/// U_{K_k} ← −U_1⁻¹·U_2
/// U_{P_k} ← U_M + U_Aᵀ·U_{P_{k+1}}·U_A − U_2ᵀ·U_1⁻¹·U_2
/// ```
pub fn q_riccati_backward(ep: &EncodedProblem, opts: &QuantumOptions) -> Result<QuantumRiccati> {
    let t = ep.horizon;
    let iopts = opts.invert_options(Phase::Riccati);
    let mut p = vec![ep.m_t.clone(); t + 1];
    let mut k_seq = vec![ep.m_t.clone(); t];
    let mut records = Vec::with_capacity(t);
    for k in (0..t).rev() {
        let step = || -> Result<(BlockEncoding, BlockEncoding, StepRecord)> {
            let mut q = StepMeter::new(k, Phase::Riccati);
            let next = &p[k + 1];
            let bt = q.adj(&ep.b);
            let at = q.adj(&ep.a);
            let st = q.adj(&ep.s);

            let btp = q.mul(&bt, next)?;
            let btpb = q.mul(&btp, &ep.b)?;
            let u1 = q.add(&btpb, &ep.n)?;
            let u1 = q.reencode(&u1)?;
            let inv = q.invert(&u1, opts.eps_prime_r, &iopts)?.encoding;

            let btpa = q.mul(&btp, &ep.a)?;
            let u2 = q.add(&st, &btpa)?;
            let u2 = q.reencode(&u2)?;

            let gain = q.mul(&inv, &u2)?;
            let gain = q.neg(&gain)?;
            let gain = q.reencode(&gain)?;

            let atp = q.mul(&at, next)?;
            let atpa = q.mul(&atp, &ep.a)?;
            let head = q.add(&ep.m, &atpa)?;
            let u2t = q.adj(&u2);
            let corr = q.mul(&u2t, &inv)?;
            let corr = q.mul(&corr, &u2)?;
            let pk = q.sub(&head, &corr)?;
            let pk = q.reencode(&pk)?;

            let eps = gain.eps().max(pk.eps());
            Ok((gain, pk, q.finish(eps)))
        };
        let (gain, pk, rec) = step().map_err(|e| e.at_step("riccati", k))?;
        k_seq[k] = gain;
        p[k] = pk;
        records.push(rec);
    }
    Ok(QuantumRiccati {
        k: k_seq,
        p,
        ledger: ResourceLedger {
            per_step: records,
            setup_encodings: 0,
        },
    })
}

/// `u = K μ` read out from the product encoding.
pub fn extract_control(e_k: &BlockEncoding, e_mu: &BlockEncoding) -> Result<RVector> {
    if e_k.cols() != e_mu.rows() {
        return Err(Error::DimensionMismatch(format!(
            "gain has {} columns, estimate has {} rows",
            e_k.cols(),
            e_mu.rows()
        )));
    }
    Ok(decode_vector(&crate::beops::multiply(e_k, e_mu)?))
}

/// Output of [`q_kalman_forward`].
#[derive(Clone, Debug)]
pub struct QuantumFilter {
    /// `U_{μ_0}..U_{μ_T}`.
    pub mu: Vec<BlockEncoding>,
    /// `U_{R_0}..U_{R_T}`.
    pub r: Vec<BlockEncoding>,
    /// `U_{L_1}..U_{L_T}`.
    pub l: Vec<BlockEncoding>,
    /// `u_0..u_{T−1}`, read out at the start of each step.
    pub u: Vec<RVector>,
    pub ledger: ResourceLedger,
}

/// Forward pass on measurements `U_{y_1}..U_{y_T}` and gains `U_{K_k}`.
///
/// Step `k` reads out `u_k = K_k μ_k` and loads it as `U_{u_k}`, then
///
/// ```text
/// U_{V_k}     ← U_Γ + U_C·U_{R_k}·U_Cᵀ,   U_{V_k}⁻¹ ← invert(U_{V_k})
/// U_{W_k}     ← U_Υ + U_A·U_{R_k}·U_Cᵀ
/// U_{L_{k+1}} ← U_{W_k}·U_{V_k}⁻¹
/// U_δ         ← U_{y_{k+1}} − U_C·U_{μ_k}
/// U_{μ_{k+1}} ← U_A·U_{μ_k} + U_B·U_{u_k} + U_{L_{k+1}}·U_δ
/// U_{R_{k+1}} ← U_Σ + U_A·U_{R_k}·U_Aᵀ − U_{L_{k+1}}·U_{V_k}·U_{L_{k+1}}ᵀ
/// ```
///
/// The measurements are taken as given; in a closed loop they depend on the
/// controls, so callers generate them from a plant simulation.
pub fn q_kalman_forward(
    ep: &EncodedProblem,
    measurements: &[BlockEncoding],
    gains: &[BlockEncoding],
    opts: &QuantumOptions,
) -> Result<QuantumFilter> {
    let t = ep.horizon;
    if measurements.len() != t || gains.len() != t {
        return Err(Error::DimensionMismatch(format!(
            "horizon {t} needs {t} measurements and gains, got {} and {}",
            measurements.len(),
            gains.len()
        )));
    }
    let iopts = opts.invert_options(Phase::Kalman);
    let s = ep.system_qubits;
    let mut out = QuantumFilter {
        mu: vec![ep.mu0.clone()],
        r: vec![ep.r0.clone()],
        l: Vec::with_capacity(t),
        u: Vec::with_capacity(t),
        ledger: ResourceLedger::default(),
    };
    for k in 0..t {
        let mu = &out.mu[k];
        let r = &out.r[k];
        let step = || -> Result<_> {
            let mut q = StepMeter::new(k, Phase::Kalman);
            let ku = q.mul(&gains[k], mu)?;
            let u = decode_vector(&ku);
            let u_enc = q.load(encode_real_vector(&u, s)?.with_eps(ku.eps()));

            let ct = q.adj(&ep.c);
            let at = q.adj(&ep.a);
            let cr = q.mul(&ep.c, r)?;
            let crc = q.mul(&cr, &ct)?;
            let v = q.add(&ep.gamma, &crc)?;
            let v = q.reencode(&v)?;
            let v_inv = q.invert(&v, opts.eps_prime_v, &iopts)?.encoding;

            let ar = q.mul(&ep.a, r)?;
            let arc = q.mul(&ar, &ct)?;
            let w = q.add(&ep.upsilon, &arc)?;
            let w = q.reencode(&w)?;

            let l = q.mul(&w, &v_inv)?;
            let l = q.reencode(&l)?;

            let y = q.load(measurements[k].clone());
            let cmu = q.mul(&ep.c, mu)?;
            let delta = q.sub(&y, &cmu)?;

            let amu = q.mul(&ep.a, mu)?;
            let bu = q.mul(&ep.b, &u_enc)?;
            let drift = q.add(&amu, &bu)?;
            let correction = q.mul(&l, &delta)?;
            let mu_next = q.add(&drift, &correction)?;
            let mu_next = q.reencode(&mu_next)?;

            let ara = q.mul(&ar, &at)?;
            let prior = q.add(&ep.sigma, &ara)?;
            let lv = q.mul(&l, &v)?;
            let lt = q.adj(&l);
            let lvl = q.mul(&lv, &lt)?;
            let r_next = q.sub(&prior, &lvl)?;
            let r_next = q.reencode(&r_next)?;

            let eps = mu_next.eps().max(r_next.eps()).max(l.eps());
            Ok((u, l, mu_next, r_next, q.finish(eps)))
        };
        let (u, l, mu_next, r_next, rec) = step().map_err(|e| e.at_step("kalman", k))?;
        out.u.push(u);
        out.l.push(l);
        out.mu.push(mu_next);
        out.r.push(r_next);
        out.ledger.per_step.push(rec);
    }
    Ok(out)
}

/// Decoded results of a full quantum run.
#[derive(Clone, Debug)]
pub struct QuantumRun {
    pub k: Vec<RMatrix>,
    pub p: Vec<RMatrix>,
    pub mu: Vec<RVector>,
    pub r: Vec<RMatrix>,
    pub l: Vec<RMatrix>,
    pub u: Vec<RVector>,
    pub ledger: ResourceLedger,
}

/// Encodes the problem, runs the backward pass, then the forward pass with
/// interleaved controls on `y_1..y_T`.
pub fn q_lqg(prob: &LqgProblem, measurements: &[RVector], opts: &QuantumOptions) -> Result<QuantumRun> {
    let ep = EncodedProblem::new(prob, opts.scheme).map_err(|e| e.in_phase("encoding"))?;
    let riccati = q_riccati_backward(&ep, opts)?;
    let ys = ep
        .encode_measurements(measurements)
        .map_err(|e| e.in_phase("encoding"))?;
    let filter = q_kalman_forward(&ep, &ys, &riccati.k, opts)?;

    let mut ledger = ResourceLedger {
        per_step: Vec::new(),
        setup_encodings: EncodedProblem::ENCODINGS,
    };
    ledger.extend(riccati.ledger);
    ledger.extend(filter.ledger);
    Ok(QuantumRun {
        k: riccati.k.iter().map(decode_real).collect(),
        p: riccati.p.iter().map(decode_real).collect(),
        mu: filter.mu.iter().map(decode_vector).collect(),
        r: filter.r.iter().map(decode_real).collect(),
        l: filter.l.iter().map(decode_real).collect(),
        u: filter.u,
        ledger,
    })
}

/// Checks on a completed ledger.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexityAudit {
    pub horizon: usize,
    pub totals: Totals,
    /// Totals equal the sum of per-step records.
    pub consistent: bool,
    /// Each phase has `T` records with identical query counts.
    pub per_step_constant: bool,
    /// Every degree lies under the calibrated envelope, when one is given.
    pub within_envelope: Option<bool>,
}

/// Ledger consistency, per-step constancy and the degree envelope.
pub fn audit_complexity(
    ledger: &ResourceLedger,
    horizon: usize,
    envelope: Option<(&DegreeCalibration, &QuantumOptions)>,
) -> ComplexityAudit {
    let totals = ledger.totals();
    let summed: usize = ledger.per_step.iter().map(|r| r.queries).sum();
    let constant = |phase: Phase| {
        let q: Vec<usize> = ledger.phase(phase).map(|r| r.queries).collect();
        q.len() == horizon && q.windows(2).all(|w| w[0] == w[1])
    };
    let within_envelope = envelope.map(|(cal, opts)| {
        ledger.per_step.iter().all(|r| {
            let eps = match r.phase {
                Phase::Riccati => opts.eps_prime_r,
                Phase::Kalman => opts.eps_prime_v,
            };
            r.degree as f64 <= cal.envelope_bound(r.kappa, eps)
        })
    });
    ComplexityAudit {
        horizon,
        consistent: summed == totals.queries,
        per_step_constant: constant(Phase::Riccati) && constant(Phase::Kalman),
        totals,
        within_envelope,
    }
}

/// Query totals at two horizons of the same problem.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HorizonAudit {
    pub horizons: (usize, usize),
    pub queries: (usize, usize),
    /// `q₂·T₁ = q₁·T₂` in integer arithmetic.
    pub linear_in_t: bool,
    /// The multiset of per-step query counts is the same for both runs.
    pub per_step_independent: bool,
}

/// Fixed window parameters covering every inversion up to horizon `t`,
/// taken from the classical pass and widened by `margin`.
pub fn fixed_kappa_for(prob: &LqgProblem, margin: f64) -> Result<KappaPolicy> {
    let prof = conditioning_profile(prob)?;
    let worst = |v: &[f64]| v.iter().fold(1.0_f64, |a, &k| a.max(k)) * margin;
    Ok(KappaPolicy::Fixed {
        riccati: worst(&prof.riccati),
        kalman: worst(&prof.innovation),
    })
}

fn measurements_for(prob: &LqgProblem, seed: u64) -> Result<Vec<RVector>> {
    let sol = riccati_backward(prob)?;
    Ok(simulate_plant(prob, &sol.k, seed)?.y)
}

/// Runs the pipeline at horizons `t1` and `t2` with window parameters fixed
/// from the longer horizon, and compares query totals.
pub fn horizon_audit(prob: &LqgProblem, t1: usize, t2: usize, opts: &QuantumOptions, seed: u64) -> Result<HorizonAudit> {
    let long = prob.with_horizon(t1.max(t2));
    let mut opts = *opts;
    if opts.kappa == KappaPolicy::Estimated {
        opts.kappa = fixed_kappa_for(&long, opts.margin)?;
    }
    let run = |t: usize| -> Result<ResourceLedger> {
        let p = prob.with_horizon(t);
        let ys = measurements_for(&p, seed)?;
        Ok(q_lqg(&p, &ys, &opts)?.ledger)
    };
    let (a, b) = (run(t1)?, run(t2)?);
    let (qa, qb) = (a.totals().queries, b.totals().queries);
    let counts = |l: &ResourceLedger| {
        let mut v: Vec<(Phase, usize)> = l.per_step.iter().map(|r| (r.phase, r.queries)).collect();
        v.sort_by_key(|&(p, q)| (p == Phase::Kalman, q));
        v.dedup();
        v
    };
    Ok(HorizonAudit {
        horizons: (t1, t2),
        queries: (qa, qb),
        linear_in_t: qb * t1 == qa * t2,
        per_step_independent: counts(&a) == counts(&b),
    })
}
