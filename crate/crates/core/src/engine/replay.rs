//! Re-checks a saved run trace from the file contents alone.

use std::fmt;

use serde::de::DeserializeOwned;
use serde_json::Value;

use crate::forcing::{leq, validate, Condition};
use crate::oracle::OracleSpec;

use super::{decoded_bits, execute, Conventions, DenseRequirement, Step};

/// Where and why a trace failed to verify. `step` is `None` for problems
/// outside the step list (header, final condition, decoded bits).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyFailure {
    pub step: Option<usize>,
    pub reason: String,
}

impl fmt::Display for VerifyFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.step {
            Some(i) => write!(f, "step {i}: {}", self.reason),
            None => write!(f, "{}", self.reason),
        }
    }
}

fn fail<T>(step: Option<usize>, reason: impl Into<String>) -> Result<T, VerifyFailure> {
    Err(VerifyFailure { step, reason: reason.into() })
}

fn field<T: DeserializeOwned>(v: &Value, key: &str, step: Option<usize>) -> Result<T, VerifyFailure> {
    let raw = v.get(key).cloned().unwrap_or(Value::Null);
    serde_json::from_value(raw).or_else(|e| fail(step, format!("bad {key}: {e}")))
}

/// Replays every step: the certificate must chain from the previous
/// condition, its order claim and snapshots must re-check, and re-executing
/// the requirement must reproduce the recorded upper condition. Returns the
/// number of verified steps.
pub fn verify_trace(text: &str) -> Result<usize, VerifyFailure> {
    let doc: Value = serde_json::from_str(text).or_else(|e| fail(None, format!("not JSON: {e}")))?;
    let conventions: Conventions = field(&doc, "conventions", None)?;
    if conventions != Conventions::default() {
        return fail(None, "unsupported conventions header");
    }
    let spec: OracleSpec = field(&doc, "oracle", None)?;
    let oracle = spec.build();
    let oracle = oracle.as_ref();
    let initial: Condition = field(&doc, "initial", None)?;
    if !initial.injection.is_empty() || !initial.words.is_empty() {
        return fail(None, "initial condition is not empty");
    }
    let schedule: Vec<DenseRequirement> = field(&doc, "schedule", None)?;
    let steps = doc.get("steps").and_then(Value::as_array).ok_or(VerifyFailure {
        step: None,
        reason: "missing steps".into(),
    })?;
    if steps.len() != schedule.len() {
        return fail(None, format!("{} steps for {} requirements", steps.len(), schedule.len()));
    }

    let mut prev = initial;
    for (i, (raw, req)) in steps.iter().zip(&schedule).enumerate() {
        let at = Some(i);
        let step: Step = serde_json::from_value(raw.clone()).or_else(|e| fail(at, format!("unreadable: {e}")))?;
        if &step.requirement != req {
            return fail(at, "requirement differs from the schedule");
        }
        let cert = &step.certificate;
        if cert.lower != prev {
            return fail(at, "lower condition does not continue the chain");
        }
        let recheck = match leq(&cert.upper, &cert.lower, oracle) {
            Ok(Ok(c)) => c,
            Ok(Err(refusal)) => return fail(at, format!("order refused: {refusal}")),
            Err(e) => return fail(at, format!("order check failed: {e}")),
        };
        if recheck.fixpoint_snapshots != cert.fixpoint_snapshots {
            return fail(at, "fixed-point snapshots differ");
        }
        match validate(&cert.upper, oracle) {
            Ok(None) => {}
            Ok(Some(v)) => return fail(at, format!("invalid condition: {v}")),
            Err(e) => return fail(at, format!("validation failed: {e}")),
        }
        let redo = execute(&prev, req, oracle).or_else(|e| fail(at, format!("re-execution failed: {e}")))?;
        if redo.condition != cert.upper {
            return fail(at, "re-execution gives a different condition");
        }
        if redo.operation != step.operation || redo.witness != step.tree_witness {
            return fail(at, "re-execution gives a different operation or witness");
        }
        prev = cert.upper.clone();
    }

    let final_condition: Condition = field(&doc, "final", None)?;
    if final_condition != prev {
        return fail(None, "final condition differs from the last certificate");
    }
    let decoded: crate::bits::BitString = field(&doc, "decoded", None)?;
    match decoded_bits(&final_condition) {
        Ok(bits) if bits == decoded => Ok(steps.len()),
        Ok(bits) => fail(None, format!("decoded bits {decoded} but the final condition gives {bits}")),
        Err(e) => fail(None, format!("cannot decode final condition: {e}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::BitString;
    use crate::engine::{auto_schedule, run};
    use crate::forcing::Flavor;
    use crate::oracle::TrivialOracle;

    fn trace_json() -> String {
        let flavor = Flavor::Coding("101".parse::<BitString>().unwrap());
        let trace = run(flavor.clone(), &auto_schedule(&flavor, 3), &mut TrivialOracle).unwrap();
        serde_json::to_string_pretty(&trace).unwrap()
    }

    #[test]
    fn own_output_verifies() {
        let text = trace_json();
        assert_eq!(verify_trace(&text), Ok(9));
    }

    #[test]
    fn edited_pair_is_caught_at_its_step() {
        let text = trace_json();
        let mut doc: Value = serde_json::from_str(&text).unwrap();
        let pair = &mut doc["steps"][4]["certificate"]["upper"]["injection"][0][1];
        *pair = Value::from(pair.as_u64().unwrap() + 17);
        let err = verify_trace(&doc.to_string()).unwrap_err();
        assert_eq!(err.step, Some(4));
    }

    #[test]
    fn edited_final_is_caught() {
        let mut doc: Value = serde_json::from_str(&trace_json()).unwrap();
        doc["decoded"] = Value::from("000");
        assert_eq!(verify_trace(&doc.to_string()).unwrap_err().step, None);
    }
}
