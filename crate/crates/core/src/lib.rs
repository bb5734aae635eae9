//! Signed belief networks grown by fitness-weighted preferential attachment.
//!
//! A network of statements (vertices) joined by positive, neutral or negative
//! associations (edges) is grown one input at a time. Each input is linked in
//! preferentially, then spends the rest of its time budget on two-step random
//! walks that add further links. Vertices whose share of negative links exceeds
//! the network tolerance are ejected, possibly setting off a cascade, and a fixed
//! number of random links is forgotten after every cycle.
//!
//! The crate is `no_std` (with `alloc`) so that the model can be embedded
//! anywhere; file formats, configuration and the command-line front end live
//! in the companion `beliefnet` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod analysis;
pub mod engine;
mod error;
pub mod experiments;
mod fenwick;
pub mod model;

pub use crate::{
    analysis::{DegreeHistogram, DistanceSummary, PowerLawFit},
    engine::{CycleReport, SimConfig, SimulationRun},
    error::{Error, Result},
    experiments::{ExperimentSpec, FigureData, FigureId, Scale},
    model::{EdgeSign, SignCounts, SignedNetwork, VertexAttrs, VertexId},
};

/// Generator used for every stochastic choice of a run.
pub type SimRng = rand_chacha::ChaCha8Rng;

/// Seeds the per-run generator.
pub fn seeded_rng(seed: u64) -> SimRng {
    use rand::SeedableRng;
    SimRng::seed_from_u64(seed)
}
