//! Search engine and exact verifier for perfect parallelepipeds: solids
//! whose 3 edges, 6 face diagonals and 4 body diagonals all have integer
//! length.
//!
//! The pipeline is a funnel:
//!
//! 1. [`parallelogram`] enumerates perfect parallelograms up to an edge bound
//!    and indexes them by edge pair.
//! 2. [`assembly`] joins three of them along matching edges at a vertex with
//!    no obtuse face angle, keeps triples whose four body diagonals are
//!    integers, and decides exactly whether the triple spans a solid in R^3.
//! 3. [`certificate`] packages survivors as independently checkable records.
//! 4. [`search`] drives the funnel over a range of largest edges in
//!    parallel, with funnel statistics and checkpoint/resume.
//!
//! All filtering is exact integer arithmetic ([`arith`]); floating point is
//! only used for the advisory coordinates of an embedding.

pub mod arith;
pub mod assembly;
pub mod certificate;
pub mod error;
pub mod parallelogram;
pub mod search;

pub use assembly::{
    assemble, body_diagonals, embed, realizability, BodyDiagonals, CandidateTriple, Decision,
    ExactCosine, Realizability,
};
pub use certificate::{Certificate, Invalid};
pub use error::{Error, Result};
pub use parallelogram::{
    enumerate_pair, enumerate_range, ParallelogramIndex, PerfectParallelogram,
};
pub use search::{FunnelStats, SearchConfig, SearchOutcome};
