//! Dynamic and static topic model (DSTM).
//!
//! Documents arrive in time-ordered epochs. Within an epoch each document
//! mixes supertopics, each supertopic mixes subtopics, and subtopics emit
//! words. Across epochs the word distribution of every subtopic is drawn
//! around a `beta`-weighted mixture of all subtopics of the previous epoch.
//!
//! Inference runs a stochastic EM per epoch: a collapsed Gibbs E-step over
//! joint (supertopic, subtopic) assignments and a fixed-point M-step for the
//! subtopic priors and the dynamic weights. The estimated word distributions
//! of one epoch become the prior of the next.
//!
//! This crate is `no_std` (it needs `alloc`). File formats, the CLI and
//! parallel evaluation live in the `dstm` crate.
#![no_std]
// `!(x > 0.0)` checks are meant to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(feature = "std")]
extern crate std;

pub mod baselines;
pub mod config;
pub mod corpus;
mod error;
pub mod estimate;
pub mod eval;
pub mod fit;
pub mod math;
pub mod mstep;
pub mod sampler;
pub mod state;
pub mod structure;
pub mod synth;

pub use config::{ModelConfig, ModelKind};
pub use corpus::{Corpus, Document, Epoch, SplitCorpus, Vocabulary};
pub use error::{Error, Result};
pub use fit::{fit, fit_epoch, EpochFit, EpochParams, FittedModel};
pub use math::Matrix;
pub use state::EpochState;

/// Generator used for every stochastic step. Any seedable generator would
/// do; fixing one keeps runs reproducible per seed.
pub type ModelRng = rand_chacha::ChaCha8Rng;

/// Seeded generator on an independent stream, e.g. one stream per epoch.
pub fn rng_for(seed: u64, stream: u64) -> ModelRng {
    use rand::SeedableRng;
    let mut rng = ModelRng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
