//! Finite approximations of generic cofinitary permutations.
//!
//! A condition is a finite partial injection `s` together with a finite set
//! `E` of words in `G ∪ {x, x⁻¹}`; extending a condition may never change
//! the fixed points of `w[s]` for `w ∈ E`. The crate implements the
//! constructive extension steps (totality, word bookkeeping, tree
//! diagonalization, orbit closing), codes bits into the parities of orbit
//! lengths, and checks every step with an explicit certificate.
//!
//! ```
//! use cofinitary::engine::{auto_schedule, run};
//! use cofinitary::forcing::Flavor;
//! use cofinitary::oracle::TrivialOracle;
//!
//! let flavor = Flavor::Coding("1011".parse().unwrap());
//! let trace = run(flavor.clone(), &auto_schedule(&flavor, 4), &mut TrivialOracle).unwrap();
//! assert_eq!(trace.decoded.to_string(), "1011");
//! ```

pub mod bits;
pub mod cli;
pub mod engine;
pub mod error;
pub mod forcing;
pub mod injections;
pub mod oracle;
pub mod trees;
pub mod words;

pub use error::{Error, Result};
