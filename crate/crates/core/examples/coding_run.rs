//! A coding run over the trivial group: alternate domain, range, and orbit
//! requirements, then read the target back from the orbit parities.
//!
//! `cargo run --example coding_run -- 10110`

use cofinitary::bits::BitString;
use cofinitary::engine::{auto_schedule, decode, run, DecodeMode};
use cofinitary::forcing::Flavor;
use cofinitary::oracle::TrivialOracle;

fn main() -> cofinitary::Result<()> {
    let text = std::env::args().nth(1).unwrap_or_else(|| "1011".into());
    let r = BitString::parse_hex_or_binary(&text)?;
    let flavor = Flavor::Coding(r.clone());
    let trace = run(flavor.clone(), &auto_schedule(&flavor, r.len()), &mut TrivialOracle)?;

    for (i, step) in trace.steps.iter().enumerate() {
        println!("{i:>3} {:<16} {:<16} |s| = {}", step.requirement.to_string(), step.operation, step.certificate.upper.injection.len());
    }
    for o in trace.final_condition.injection.closed_orbits() {
        println!("orbit min {:>3} size {}", o.min(), o.len());
    }
    let bits = decode(&trace.final_condition.injection, DecodeMode::OrbitOrder, r.len() - 1)?;
    println!("target {r}, decoded {bits}");
    assert_eq!(bits, r);
    Ok(())
}
