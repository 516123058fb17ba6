//! Reducing words, testing niceness, and finding indecomposable roots over
//! the translation group.

use cofinitary::injections::{fixed_points, word_graph, PartialInjection};
use cofinitary::oracle::TranslationOracle;
use cofinitary::words::{Letter, Word};

fn main() -> cofinitary::Result<()> {
    let z = TranslationOracle;
    let up = TranslationOracle::element(1);
    let down = TranslationOracle::element(-1);

    // g_{+1} g_{-1} cancels, and the two x's merge.
    let raw = [Letter::Group(up), Letter::X, Letter::Group(up), Letter::Group(down), Letter::X];
    let w = Word::reduce(&raw, &z)?;
    println!("reduce {raw:?}\n    -> {w}  (nice: {})", w.is_nice());

    let v: Word = format!("{up}.x").parse().unwrap();
    let cube = v.power(3, &z)?;
    let (root, k) = cube.indecomposable_root()?;
    println!("{cube} = ({root})^{k}");

    let mixed: Word = format!("{up}.x.{down}.x^2").parse().unwrap();
    println!("nice cyclic conjugates and inverses of {mixed}:");
    for c in mixed.cyclic_conjugates_and_inverses(&z)? {
        println!("  {c}");
    }

    // Graph and fixed points of v[s] for a small partial injection.
    let s = PartialInjection::from_pairs([(0, 1), (1, 3), (3, 0)])?;
    println!("s = {:?}", s.pairs().collect::<Vec<_>>());
    println!("{v}[s] = {:?}", word_graph(&v, &s, &z)?.pairs().collect::<Vec<_>>());
    println!("fix({v}[s]) = {:?}", fixed_points(&v, &s, &z)?.points);
    Ok(())
}
