//! The classical controller on a generated problem: gains, filter and cost.

use qlqg::classical::{
    conditioning_profile, filter_forward, riccati_backward, simulate_plant, ScalarTermForm, covariance_sequence,
    scalar_terms_s,
};
use qlqg::generate::{generate_problem, GeneratorSpec};

fn main() -> qlqg::Result<()> {
    let prob = generate_problem(&GeneratorSpec {
        n: 3,
        m: 1,
        p: 2,
        horizon: 8,
        seed: 2,
        kappa_target: 10.0,
    })?;
    let sol = riccati_backward(&prob)?;
    let prof = conditioning_profile(&prob)?;
    println!("worst condition number of an inverted matrix: {:.3}", prof.worst());
    for (k, gain) in sol.k.iter().enumerate() {
        println!("K_{k} = {:.4?}", gain.iter().collect::<Vec<_>>());
    }

    let plant = simulate_plant(&prob, &sol.k, 42)?;
    let trace = filter_forward(&prob, &sol, &plant.y)?;
    for k in 0..prob.horizon {
        let err = (&plant.x[k] - &trace.mu[k]).norm();
        println!("k={k}  |x - mu| = {err:.4}  u = {:.4?}", trace.u[k].iter().collect::<Vec<_>>());
    }
    println!("realized cost {:.4}", plant.cost);

    let r = covariance_sequence(&prob)?;
    for form in ScalarTermForm::ALL {
        println!("s_0 ({}) = {:.6}", form.name(), scalar_terms_s(&prob, &r, &sol.p, form)[0]);
    }
    Ok(())
}
