//! Per-step query counts and the linear-in-horizon check.

use qlqg::generate::{generate_problem, GeneratorSpec};
use qlqg::quantum::{fixed_kappa_for, horizon_audit, QuantumOptions};

fn main() -> qlqg::Result<()> {
    let prob = generate_problem(&GeneratorSpec {
        n: 4,
        m: 2,
        p: 2,
        horizon: 10,
        seed: 0,
        kappa_target: 10.0,
    })?;
    let mut opts = QuantumOptions::default();
    opts.kappa = fixed_kappa_for(&prob.with_horizon(40), opts.margin)?;
    println!("window parameters: {:?}", opts.kappa);
    for (t1, t2) in [(5, 10), (10, 20), (20, 40)] {
        let h = horizon_audit(&prob, t1, t2, &opts, 0)?;
        println!(
            "T={t1:>2}: {:>6} queries  T={t2:>2}: {:>6} queries  linear {}  per-step independent {}",
            h.queries.0, h.queries.1, h.linear_in_t, h.per_step_independent
        );
    }
    Ok(())
}
