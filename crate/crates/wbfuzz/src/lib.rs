//! Search-based white-box fuzzer for REST APIs.
//!
//! The crate is split along the data flow of one fuzzing run: [`schema`]
//! turns an OpenAPI document into action templates, [`genes`] provides the
//! evolvable genotype for every input slot, [`engine`] runs a many-target
//! evolutionary search whose fitness comes from the in-process [`harness`]
//! (tracked wrapper operations emitting the branch-distance heuristics of
//! [`distance`]), [`taint`] turns runtime string sightings into genotype
//! specializations, [`sqlgen`] reconciles SQL and entity constraints for
//! database seeding, and [`oracle`] classifies faults and exports replayable
//! suites.

pub mod cli;
pub mod distance;
pub mod engine;
pub mod error;
pub mod genes;
pub mod harness;
pub mod oracle;
pub mod regexgen;
pub mod schema;
pub mod sqlgen;
pub mod taint;

pub use error::{Error, Result};

/// Deterministic RNG used everywhere a seed is threaded through.
pub type Rng = rand_chacha::ChaCha8Rng;
