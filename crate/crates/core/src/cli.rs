//! Command-line front end. Exit codes: 0 success, 1 engine or verification
//! failure, 2 usage error.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::Value;

use crate::bits::BitString;
use crate::engine::{auto_schedule, decode, run, seal, verify_trace, CompletedStage, DecodeMode, DenseRequirement};
use crate::error::Error;
use crate::forcing::Flavor;
use crate::injections::PartialInjection;
use crate::oracle::{GroupOracle, StagedOracle, TranslationOracle, TrivialOracle};
use crate::trees::TreeSpec;
use crate::words::Word;

#[derive(Debug, Parser)]
#[command(name = "cofinitary", version, about = "Generic cofinitary permutations with orbit-parity coding")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a schedule and write the certified trace.
    Run(RunArgs),
    /// Re-check every certificate of a saved trace.
    Verify { path: PathBuf },
    /// Decode the bits carried by a trace, stage, or injection file.
    Decode {
        path: PathBuf,
        #[arg(long, value_enum, default_value = "orbit-order")]
        mode: ModeArg,
        #[arg(long, default_value_t = 7)]
        upto: usize,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FlavorArg {
    Plain,
    Coding,
    Dagger,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    OrbitOrder,
    PrimeParity,
}

#[derive(Debug, clap::Args)]
struct RunArgs {
    #[arg(long, value_enum)]
    flavor: FlavorArg,
    /// Target bits, binary (`1011`) or hex (`0xb`).
    #[arg(long)]
    bits: Option<String>,
    /// `trivial`, `translation`, or `staged:<file>` with a JSON list of stages.
    #[arg(long, default_value = "trivial")]
    oracle: String,
    /// `auto:N` or `file:<path>` with a JSON list of requirements.
    #[arg(long)]
    schedule: Option<String>,
    /// Comma-separated words to add after the schedule, e.g. `x,x^2`.
    #[arg(long)]
    words: Option<String>,
    /// Number of tree requirements to append (full and seeded sparse trees alternate).
    #[arg(long, default_value_t = 0)]
    trees: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Trace output path; the trace goes to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also seal the run and write the stage list (input stages plus this one).
    #[arg(long)]
    seal: Option<PathBuf>,
    #[arg(short, long, action = clap::ArgAction::Count)]
    verbose: u8,
}

struct UsageError(String);

impl<E: std::fmt::Display> From<E> for UsageError {
    fn from(e: E) -> Self {
        UsageError(e.to_string())
    }
}

/// Runs the CLI on the process arguments and returns the exit code.
pub fn main() -> i32 {
    main_from(std::env::args_os())
}

pub fn main_from(args: impl IntoIterator<Item = impl Into<OsString> + Clone>) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match cli.command {
        Command::Run(args) => cmd_run(&args),
        Command::Verify { path } => cmd_verify(&path),
        Command::Decode { path, mode, upto } => cmd_decode(&path, mode, upto),
    }
}

fn flavor_of(args: &RunArgs) -> Result<Flavor, UsageError> {
    let bits = args.bits.as_deref().map(BitString::parse_hex_or_binary).transpose()?;
    match (args.flavor, bits) {
        (FlavorArg::Plain, None) => Ok(Flavor::Plain),
        (FlavorArg::Plain, Some(_)) => Err(UsageError("the plain flavor takes no target bits".into())),
        (FlavorArg::Coding, Some(r)) => Ok(Flavor::Coding(r)),
        (FlavorArg::Dagger, Some(r)) => Ok(Flavor::Dagger(r)),
        (_, None) => Err(UsageError("coding and dagger runs need --bits".into())),
    }
}

fn read_stages(path: &Path) -> Result<Vec<CompletedStage>, UsageError> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

fn oracle_of(spec: &str) -> Result<Box<dyn GroupOracle>, UsageError> {
    match spec {
        "trivial" => Ok(Box::new(TrivialOracle)),
        "translation" => Ok(Box::new(TranslationOracle)),
        other => match other.strip_prefix("staged:") {
            Some(path) => Ok(Box::new(StagedOracle::new(read_stages(Path::new(path))?))),
            None => Err(UsageError(format!("unknown oracle {other:?}"))),
        },
    }
}

fn schedule_of(args: &RunArgs, flavor: &Flavor) -> Result<Vec<DenseRequirement>, UsageError> {
    let mut schedule = match args.schedule.as_deref() {
        None if args.words.is_some() => Vec::new(),
        None => auto_schedule(flavor, flavor.target().map_or(0, BitString::len)),
        Some(spec) => {
            if let Some(n) = spec.strip_prefix("auto:") {
                auto_schedule(flavor, n.parse()?)
            } else if let Some(path) = spec.strip_prefix("file:") {
                serde_json::from_str(&fs::read_to_string(path)?)?
            } else {
                return Err(UsageError(format!("unknown schedule {spec:?}")));
            }
        }
    };
    if let Some(words) = &args.words {
        for w in words.split(',') {
            schedule.push(DenseRequirement::WordAdded { word: w.trim().parse::<Word>()? });
        }
    }
    for i in 0..args.trees {
        schedule.push(if i % 2 == 0 {
            DenseRequirement::TreeDiagonalized { tree: TreeSpec::Full, node: vec![100 + i as u64] }
        } else {
            let seed = args.seed.wrapping_add(i as u64);
            DenseRequirement::TreeDiagonalized { tree: TreeSpec::Sparse { seed, per_mille: 200 }, node: vec![] }
        });
    }
    Ok(schedule)
}

fn cmd_run(args: &RunArgs) -> i32 {
    let prepared = (|| -> Result<_, UsageError> {
        let flavor = flavor_of(args)?;
        let oracle = oracle_of(&args.oracle)?;
        let schedule = schedule_of(args, &flavor)?;
        Ok((flavor, oracle, schedule))
    })();
    let (flavor, mut oracle, schedule) = match prepared {
        Ok(p) => p,
        Err(UsageError(msg)) => {
            eprintln!("error: {msg}");
            return 2;
        }
    };
    let trace = match run(flavor, &schedule, oracle.as_mut()) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("run failed: {e}");
            return 1;
        }
    };
    let json = serde_json::to_string_pretty(&trace).expect("traces serialize");
    let report_to_stdout = args.out.is_some();
    let report = |line: String| {
        if report_to_stdout {
            println!("{line}");
        } else {
            eprintln!("{line}");
        }
    };
    for (i, step) in trace.steps.iter().enumerate() {
        let mut line = format!("step {i}: {} via {}", step.requirement, step.operation);
        if step.window_growths > 0 {
            line.push_str(&format!(" ({} window growths)", step.window_growths));
        }
        if args.verbose > 0 {
            line.push_str(&format!(" -> {} pairs", step.certificate.upper.injection.len()));
        }
        report(line);
    }
    report(format!("decoded: {}", trace.decoded));
    match &args.out {
        Some(path) => {
            if let Err(e) = fs::write(path, &json) {
                eprintln!("cannot write {}: {e}", path.display());
                return 2;
            }
        }
        None => println!("{json}"),
    }
    if let Some(path) = &args.seal {
        let mut stages = match oracle.spec() {
            crate::oracle::OracleSpec::Staged { stages } => stages,
            _ => Vec::new(),
        };
        let stage = match seal(&trace, stages.len(), oracle.as_mut()) {
            Ok(s) => s,
            Err(e) => {
                eprintln!("seal failed: {e}");
                return 1;
            }
        };
        // Sealing may have grown the earlier stages.
        if let crate::oracle::OracleSpec::Staged { stages: grown } = oracle.spec() {
            stages = grown;
        }
        stages.push(stage);
        let text = serde_json::to_string_pretty(&stages).expect("stages serialize");
        if let Err(e) = fs::write(path, text) {
            eprintln!("cannot write {}: {e}", path.display());
            return 2;
        }
    }
    0
}

fn cmd_verify(path: &Path) -> i32 {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("cannot read {}: {e}", path.display());
            return 2;
        }
    };
    match verify_trace(&text) {
        Ok(n) => {
            println!("ok: {n} steps verified");
            0
        }
        Err(failure) => {
            println!("FAILED at {failure}");
            1
        }
    }
}

/// The injection inside a trace (its final condition), a stage, a stage
/// list (the last stage), or a bare list of pairs.
fn injection_in(doc: &Value) -> Result<PartialInjection, String> {
    let pick = if let Some(f) = doc.get("final") {
        f.get("injection")
    } else if doc.get("injection").is_some() {
        doc.get("injection")
    } else if let Some(last) = doc.as_array().and_then(|a| a.last()).filter(|v| v.is_object()) {
        last.get("injection")
    } else {
        Some(doc)
    };
    let raw = pick.cloned().ok_or("no injection found")?;
    serde_json::from_value(raw).map_err(|e| e.to_string())
}

fn cmd_decode(path: &Path, mode: ModeArg, upto: usize) -> i32 {
    let doc: Value = match fs::read_to_string(path).map_err(|e| e.to_string()).and_then(|t| {
        serde_json::from_str(&t).map_err(|e| e.to_string())
    }) {
        Ok(d) => d,
        Err(e) => {
            eprintln!("cannot read {}: {e}", path.display());
            return 2;
        }
    };
    let s = match injection_in(&doc) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("no injection in {}: {e}", path.display());
            return 2;
        }
    };
    let mode = match mode {
        ModeArg::OrbitOrder => DecodeMode::OrbitOrder,
        ModeArg::PrimeParity => DecodeMode::PrimeParity,
    };
    match decode(&s, mode, upto) {
        Ok(bits) => {
            println!("{bits}");
            0
        }
        Err(e @ Error::NotNiceInjection) => {
            eprintln!("{e}");
            1
        }
        Err(e) => {
            eprintln!("{e}");
            1
        }
    }
}
