//! Saving a trace, replaying it, and catching a single edited pair.

use serde_json::Value;

use cofinitary::engine::{auto_schedule, run, verify_trace};
use cofinitary::forcing::Flavor;
use cofinitary::oracle::TranslationOracle;

fn main() -> cofinitary::Result<()> {
    let flavor = Flavor::Coding("1101".parse()?);
    let trace = run(flavor.clone(), &auto_schedule(&flavor, 4), &mut TranslationOracle)?;
    let text = serde_json::to_string_pretty(&trace).expect("serializable");
    println!("trace: {} bytes, {} steps", text.len(), trace.steps.len());
    println!("replay: {:?}", verify_trace(&text));

    let mut doc: Value = serde_json::from_str(&text).unwrap();
    let pair = &mut doc["steps"][5]["certificate"]["upper"]["injection"][1][1];
    *pair = Value::from(pair.as_u64().unwrap() + 3);
    match verify_trace(&doc.to_string()) {
        Ok(n) => println!("edited trace passed {n} steps?"),
        Err(failure) => println!("edited trace rejected at {failure}"),
    }
    Ok(())
}
