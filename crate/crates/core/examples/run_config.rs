//! Runs a JSON configuration through the harness, as the binary does.
//!
//! `cargo run --release --example run_config -- examples/configs/generated_audit.json`

use qlqg::harness::{run, RunConfig};

fn main() -> qlqg::Result<()> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/examples/configs/scalar_compare.json").into());
    let cfg = RunConfig::load(path.as_ref())?;
    let report = run(&cfg)?;
    println!("{}", report.to_json()?);
    Ok(())
}
