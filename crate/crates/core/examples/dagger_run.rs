//! A dagger run: every power x^p of the new permutation is promised to keep
//! its fixed points, and the number of p-cycles of x codes the target.

use cofinitary::bits::{nth_prime, BitString};
use cofinitary::engine::{run, DenseRequirement};
use cofinitary::forcing::Flavor;
use cofinitary::oracle::TrivialOracle;

fn main() -> cofinitary::Result<()> {
    let r: BitString = "0110".parse()?;
    let mut schedule = Vec::new();
    for n in 0..r.len() {
        schedule.push(DenseRequirement::WordAdded { word: format!("x^{}", nth_prime(n)).parse()? });
        schedule.push(DenseRequirement::DomainHits { n: n as u64 });
    }
    let trace = run(Flavor::Dagger(r.clone()), &schedule, &mut TrivialOracle)?;

    let s = &trace.final_condition.injection;
    for n in 0..r.len() {
        let p = nth_prime(n) as usize;
        let count = s.closed_orbits().iter().filter(|o| o.len() == p).count();
        println!("p = {p}: {count} orbits, bit {}", count % 2);
    }
    println!("words kept: {}", trace.final_condition.words.len());
    for w in trace.final_condition.words.iter().take(8) {
        println!("  {w}");
    }
    println!("decoded {} (target {r})", trace.decoded);
    Ok(())
}
