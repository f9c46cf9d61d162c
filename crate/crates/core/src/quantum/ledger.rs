//! Resource accounting for the block-encoded pipeline.

use serde::{Deserialize, Serialize};

use crate::beops;
use crate::blockenc::BlockEncoding;
use crate::error::Result;
use crate::qsvt::{invert_with, InvertOptions, Inversion};

/// Which recursion a step belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Riccati,
    Kalman,
}

impl Phase {
    pub fn name(self) -> &'static str {
        match self {
            Phase::Riccati => "riccati",
            Phase::Kalman => "kalman",
        }
    }
}

/// Metered cost of one recursion step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub k: usize,
    pub phase: Phase,
    /// Window parameter of the step's inversion.
    pub kappa: f64,
    /// `σ_max/σ_min` of the inverted matrix.
    pub kappa_estimate: f64,
    pub degree: usize,
    /// Inversion queries (`degree`) plus two per binary and one per unary
    /// operation.
    pub queries: usize,
    pub adds: usize,
    pub mults: usize,
    pub adjoints: usize,
    pub scales: usize,
    pub reencodes: usize,
    /// Classical values loaded into fresh encodings (measurements, controls).
    pub data_loads: usize,
    /// Widest ancilla register seen before re-encoding.
    pub peak_ancilla: usize,
    /// Largest normalization seen before re-encoding.
    pub peak_alpha: f64,
    /// Tracked error bound of the step's outputs.
    pub eps_bound: f64,
}

/// Sums over a run.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Totals {
    pub steps: usize,
    pub queries: usize,
    pub riccati_queries: usize,
    pub kalman_queries: usize,
    pub inversions: usize,
    pub adds: usize,
    pub mults: usize,
    pub adjoints: usize,
    pub scales: usize,
    pub reencodes: usize,
    pub data_loads: usize,
    /// Problem matrices encoded once before the recursions.
    pub setup_encodings: usize,
    pub max_degree: usize,
    pub peak_ancilla: usize,
    pub peak_alpha: f64,
    pub eps_bound: f64,
}

/// Per-step records plus one-off setup charges.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ResourceLedger {
    pub per_step: Vec<StepRecord>,
    /// Encodings of the problem data, each charged one data-structure access.
    pub setup_encodings: usize,
}

impl ResourceLedger {
    pub fn extend(&mut self, other: ResourceLedger) {
        self.per_step.extend(other.per_step);
        self.setup_encodings += other.setup_encodings;
    }

    pub fn phase(&self, phase: Phase) -> impl Iterator<Item = &StepRecord> {
        self.per_step.iter().filter(move |r| r.phase == phase)
    }

    pub fn totals(&self) -> Totals {
        let mut t = Totals {
            setup_encodings: self.setup_encodings,
            ..Totals::default()
        };
        for r in &self.per_step {
            t.steps += 1;
            t.queries += r.queries;
            match r.phase {
                Phase::Riccati => t.riccati_queries += r.queries,
                Phase::Kalman => t.kalman_queries += r.queries,
            }
            t.inversions += 1;
            t.adds += r.adds;
            t.mults += r.mults;
            t.adjoints += r.adjoints;
            t.scales += r.scales;
            t.reencodes += r.reencodes;
            t.data_loads += r.data_loads;
            t.max_degree = t.max_degree.max(r.degree);
            t.peak_ancilla = t.peak_ancilla.max(r.peak_ancilla);
            t.peak_alpha = t.peak_alpha.max(r.peak_alpha);
            t.eps_bound = t.eps_bound.max(r.eps_bound);
        }
        t
    }
}

/// Wraps the block-encoding operations of one step and counts them.
#[derive(Debug)]
pub(crate) struct StepMeter {
    record: StepRecord,
    op_queries: usize,
}

impl StepMeter {
    pub(crate) fn new(k: usize, phase: Phase) -> Self {
        StepMeter {
            record: StepRecord {
                k,
                phase,
                kappa: 1.0,
                kappa_estimate: 1.0,
                degree: 0,
                queries: 0,
                adds: 0,
                mults: 0,
                adjoints: 0,
                scales: 0,
                reencodes: 0,
                data_loads: 0,
                peak_ancilla: 0,
                peak_alpha: 0.0,
                eps_bound: 0.0,
            },
            op_queries: 0,
        }
    }

    fn observe(&mut self, e: &BlockEncoding) {
        self.record.peak_ancilla = self.record.peak_ancilla.max(e.ancillas());
        self.record.peak_alpha = self.record.peak_alpha.max(e.alpha());
    }

    pub(crate) fn add(&mut self, a: &BlockEncoding, b: &BlockEncoding) -> Result<BlockEncoding> {
        let out = beops::add(a, b)?;
        self.record.adds += 1;
        self.op_queries += 2;
        self.observe(&out);
        Ok(out)
    }

    pub(crate) fn mul(&mut self, a: &BlockEncoding, b: &BlockEncoding) -> Result<BlockEncoding> {
        let out = beops::multiply(a, b)?;
        self.record.mults += 1;
        self.op_queries += 2;
        self.observe(&out);
        Ok(out)
    }

    pub(crate) fn adj(&mut self, a: &BlockEncoding) -> BlockEncoding {
        self.record.adjoints += 1;
        self.op_queries += 1;
        beops::adjoint(a)
    }

    pub(crate) fn neg(&mut self, a: &BlockEncoding) -> Result<BlockEncoding> {
        let out = beops::scale(a, -1.0)?;
        self.record.scales += 1;
        self.op_queries += 1;
        self.observe(&out);
        Ok(out)
    }

    pub(crate) fn sub(&mut self, a: &BlockEncoding, b: &BlockEncoding) -> Result<BlockEncoding> {
        let nb = self.neg(b)?;
        self.add(a, &nb)
    }

    pub(crate) fn reencode(&mut self, a: &BlockEncoding) -> Result<BlockEncoding> {
        self.observe(a);
        self.record.reencodes += 1;
        beops::reencode(a)
    }

    pub(crate) fn load(&mut self, e: BlockEncoding) -> BlockEncoding {
        self.record.data_loads += 1;
        self.observe(&e);
        e
    }

    pub(crate) fn invert(&mut self, a: &BlockEncoding, eps_prime: f64, opts: &InvertOptions) -> Result<Inversion> {
        let inv = invert_with(a, eps_prime, opts)?;
        self.record.kappa = inv.kappa_window;
        self.record.kappa_estimate = inv.kappa;
        self.record.degree = inv.degree;
        self.observe(&inv.encoding);
        Ok(inv)
    }

    pub(crate) fn finish(mut self, eps_bound: f64) -> StepRecord {
        self.record.queries = self.record.degree + self.op_queries;
        self.record.eps_bound = eps_bound;
        self.record
    }
}
