//! Three stages, each a permutation built over the group generated by the
//! earlier ones. Later stages promise words in the earlier generators, which
//! forces the earlier stages to grow on demand.

use cofinitary::bits::BitString;
use cofinitary::engine::{staged_run, DenseRequirement};
use cofinitary::oracle::{GroupOracle, StagedOracle};

fn schedule(extra: &[String]) -> Vec<DenseRequirement> {
    let mut out: Vec<DenseRequirement> = (0..4).map(|n| DenseRequirement::DomainHits { n }).collect();
    for w in ["x", "x^2", "x^3", "x^5", "x^7"].iter().map(|s| s.to_string()).chain(extra.iter().cloned()) {
        out.push(DenseRequirement::WordAdded { word: w.parse().unwrap() });
    }
    out.push(DenseRequirement::DomainHits { n: 40 });
    out
}

fn main() -> cofinitary::Result<()> {
    let targets: Vec<BitString> = ["1011", "0110", "1101"].iter().map(|s| s.parse().unwrap()).collect();
    let (s0, s1) = (StagedOracle::generator(0), StagedOracle::generator(1));
    let schedules = vec![
        schedule(&[]),
        schedule(&[format!("{s0}.x")]),
        schedule(&[format!("{s0}.x"), format!("{s1}.x.{s0}.x")]),
    ];
    let out = staged_run(&targets, &schedules)?;
    for (i, (stage, trace)) in out.stages.iter().zip(&out.traces).enumerate() {
        println!(
            "stage {i}: {} points, window {}, {} growths during its run, codes {}",
            stage.injection.len(),
            stage.window,
            trace.total_window_growths(),
            stage.injection.o_dagger(3),
        );
    }

    let group = StagedOracle::new(out.stages);
    let w = group.compose(s1, s0)?;
    println!("σ1σ0 fixes {:?} below the window", group.fixed_points(w)?.points);
    Ok(())
}
