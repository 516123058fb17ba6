//! Closing an open orbit at a chosen size without disturbing the fixed points
//! of the words already promised.

use cofinitary::forcing::{close_orbit, orbit_bound, strong_close_orbit, Condition, Flavor};
use cofinitary::injections::{fixed_points, PartialInjection};
use cofinitary::oracle::TranslationOracle;
use cofinitary::words::Word;

fn main() -> cofinitary::Result<()> {
    let z = TranslationOracle;
    let g = TranslationOracle::element(2);
    let words: Vec<Word> = vec!["x^2".parse().unwrap(), format!("{g}.x").parse().unwrap()];
    let s = PartialInjection::from_pairs([(0, 4), (4, 7)])?;
    let c = Condition::with(s, words.clone(), Flavor::Plain);

    let (k_bound, l) = orbit_bound(&c, 0);
    println!("orbit of 0 has {} points, longest word {l}, so K = {k_bound}", c.injection.orbit_of(0).len());
    match close_orbit(&c, 0, k_bound, &z) {
        Err(e) => println!("k = K refused: {e}"),
        Ok(_) => unreachable!(),
    }
    for k in k_bound + 1..=k_bound + 3 {
        let out = close_orbit(&c, 0, k, &z)?;
        let orbit = out.condition.injection.orbit_of(0);
        println!("k = {k}: chain {:?}, orbit {:?}", out.chain, orbit.elements);
        for w in &words {
            let before = fixed_points(w, &c.injection, &z)?.points;
            let after = fixed_points(w, &out.condition.injection, &z)?.points;
            assert_eq!(before, after);
        }
    }

    // Strong closure adds one closed orbit to v[s] for a word v that is not x.
    let v: Word = format!("{g}.x").parse().unwrap();
    let d = Condition::with(PartialInjection::new(), [], Flavor::Dagger("1".parse().unwrap()));
    let out = strong_close_orbit(&d, &v, 3, &z)?;
    println!("new 3-orbit of {v}[t]: {:?} above {}", out.orbit, out.n_bound);
    Ok(())
}
