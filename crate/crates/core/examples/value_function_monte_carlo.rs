//! Expected cost against Monte Carlo rollouts, for each scalar-term variant.

use qlqg::classical::{covariance_sequence, monte_carlo_cost, riccati_backward, scalar_terms_s, value_function, ScalarTermForm};
use qlqg::problem::scalar_example;

fn main() -> qlqg::Result<()> {
    let prob = scalar_example(2);
    let sol = riccati_backward(&prob)?;
    let r = covariance_sequence(&prob)?;
    let est = monte_carlo_cost(&prob, &sol.k, 100_000, 7)?;
    println!("Monte Carlo: {:.4} ± {:.4} over {} rollouts", est.mean, est.std_error, est.trials);
    for form in ScalarTermForm::ALL {
        let s0 = scalar_terms_s(&prob, &r, &sol.p, form)[0];
        let v = value_function(&prob.mu0, &sol.p[0], s0);
        println!(
            "{:<19} s_0 = {s0:.6}  value = {v:.6}  z = {:.2}",
            form.name(),
            (est.mean - v) / est.std_error
        );
    }
    Ok(())
}
