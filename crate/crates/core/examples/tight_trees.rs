//! Meeting tree requirements: the run makes s agree with some branch above
//! each requested node, and the sealed stage still does.

use cofinitary::engine::{
    auto_schedule, run, seal, tightness_samples, verify_tightness_sample, DenseRequirement, TightnessReport,
};
use cofinitary::forcing::Flavor;
use cofinitary::oracle::TrivialOracle;
use cofinitary::trees::TreeSpec;

fn main() -> cofinitary::Result<()> {
    let flavor = Flavor::Dagger("101".parse()?);
    let mut schedule = auto_schedule(&flavor, 3);
    schedule.push(DenseRequirement::TreeDiagonalized { tree: TreeSpec::Full, node: vec![9, 2] });
    for seed in 0..3 {
        schedule.push(DenseRequirement::TreeDiagonalized { tree: TreeSpec::Sparse { seed, per_mille: 250 }, node: vec![] });
    }

    let mut oracle = TrivialOracle;
    let trace = run(flavor, &schedule, &mut oracle)?;
    for step in trace.steps.iter().filter(|s| s.tree_witness.is_some()) {
        let w = step.tree_witness.as_ref().unwrap();
        println!("{}: branch {:?} agrees at index {}", step.requirement, w.node, w.k);
    }

    let stage = seal(&trace, 0, &mut oracle)?;
    let trees = tightness_samples(&trace)?;
    for (tree, report) in trees.iter().zip(verify_tightness_sample(&stage, &trees)?) {
        match report {
            TightnessReport::Witnessed(w) => println!("tree of depth {}: {} witnesses", tree.depth(), w.len()),
            TightnessReport::Counterexample(node) => println!("tree of depth {}: fails above {node:?}", tree.depth()),
        }
    }
    Ok(())
}
