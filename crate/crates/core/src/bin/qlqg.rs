use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use qlqg::harness::{default_config, emit, run, Mode, RunConfig};

/// Classical and block-encoded LQG runs with JSON reports.
#[derive(Parser, Debug)]
#[command(name = "qlqg", version)]
struct Args {
    /// JSON run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// classical, quantum, compare, audit or calibrate-qsvt.
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    horizon: Option<usize>,
    #[arg(long)]
    eps_prime_r: Option<f64>,
    #[arg(long)]
    eps_prime_v: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    match_tol: Option<f64>,
    /// Report path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Monte Carlo rollouts for the value-function check.
    #[arg(long)]
    trials: Option<usize>,
}

fn configure(args: &Args) -> qlqg::Result<RunConfig> {
    let mode = args.mode.as_deref().map(str::parse::<Mode>).transpose()?;
    let mut cfg = match &args.config {
        Some(path) => RunConfig::load(path)?,
        None => default_config(mode.unwrap_or(Mode::Compare)),
    };
    if let Some(m) = mode {
        cfg.mode = m;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
        cfg.monte_carlo.seed = s;
    }
    if let Some(t) = args.horizon {
        cfg.set_horizon(t);
    }
    let tol = &mut cfg.tolerances;
    tol.eps_prime_r = args.eps_prime_r.unwrap_or(tol.eps_prime_r);
    tol.eps_prime_v = args.eps_prime_v.unwrap_or(tol.eps_prime_v);
    tol.beta = args.beta.unwrap_or(tol.beta);
    tol.match_tol = args.match_tol.unwrap_or(tol.match_tol);
    if let Some(n) = args.trials {
        cfg.monte_carlo.trials = n;
    }
    if let Some(out) = &args.out {
        cfg.out = Some(out.display().to_string());
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let args = Args::parse();
    let outcome = configure(&args).and_then(|cfg| {
        let report = run(&cfg)?;
        if let Some(text) = emit(&cfg, &report)? {
            println!("{text}");
        }
        Ok(report.pass)
    });
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() { 2 } else { 3 })
        }
    }
}
