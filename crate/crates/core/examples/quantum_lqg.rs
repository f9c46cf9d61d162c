//! The block-encoded pipeline against the classical oracle.

use qlqg::generate::{generate_problem, GeneratorSpec};
use qlqg::harness::{classical_run, compare_runs};
use qlqg::quantum::{q_lqg, QuantumOptions};

fn main() -> qlqg::Result<()> {
    let prob = generate_problem(&GeneratorSpec {
        n: 4,
        m: 2,
        p: 2,
        horizon: 20,
        seed: 0,
        kappa_target: 10.0,
    })?;
    let classical = classical_run(&prob, 1)?;
    let run = q_lqg(&prob, &classical.measurements, &QuantumOptions::default())?;
    let dev = compare_runs(&run, &classical);
    println!("relative deviations: {dev:?}");
    println!("k  u_k (quantum)                 u_k (classical)");
    for (k, (q, c)) in run.u.iter().zip(&classical.u).enumerate().take(5) {
        println!("{k:<2} {:>+.8?} {:>+.8?}", q.as_slice(), c.as_slice());
    }
    let t = run.ledger.totals();
    println!(
        "{} queries over {} inversions, max degree {}, peak ancillas {}",
        t.queries, t.inversions, t.max_degree, t.peak_ancilla
    );
    Ok(())
}
