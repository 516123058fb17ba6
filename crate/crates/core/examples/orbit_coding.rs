//! The two orbit codes: parities of closed orbits in order of their least
//! element, and parities of how many orbits have each prime size.

use cofinitary::engine::{decode, DecodeMode};
use cofinitary::injections::PartialInjection;

fn cycle(points: &[u64]) -> Vec<(u64, u64)> {
    points.iter().zip(points.iter().cycle().skip(1)).map(|(&a, &b)| (a, b)).collect()
}

fn main() -> cofinitary::Result<()> {
    let mut pairs = cycle(&[0, 1, 2]);
    pairs.extend(cycle(&[3, 4]));
    pairs.extend(cycle(&[5, 6, 7, 8, 9]));
    pairs.extend(cycle(&[10, 11]));
    pairs.extend([(12, 13)]); // an open orbit, ignored by both codes
    let s = PartialInjection::from_pairs(pairs)?;

    for o in s.orbits() {
        println!("{:?} closed={} size={}", o.elements, o.closed, o.len());
    }
    println!("orbit order:  {}", decode(&s, DecodeMode::OrbitOrder, 3)?);
    // Two 2-cycles cancel; one 3-cycle and one 5-cycle remain.
    println!("prime parity: {}", decode(&s, DecodeMode::PrimeParity, 3)?);

    // The prime-parity code does not see conjugation.
    let f = PartialInjection::from_permutation(&[1, 2, 0, 4, 3, 5])?;
    let g = PartialInjection::from_permutation(&[5, 3, 1, 0, 2, 4])?;
    println!("o†(fg) = {}, o†(gf) = {}", f.compose(&g).o_dagger(2), g.compose(&f).o_dagger(2));

    let gap = PartialInjection::from_pairs(cycle(&[0, 1]).into_iter().chain(cycle(&[5, 6])))?;
    println!("with a gap at 2: {:?}", decode(&gap, DecodeMode::OrbitOrder, 1));
    Ok(())
}
