//! Stability analysis for replicated Latent Dirichlet Allocation runs.
//!
//! The crate fits LDA by collapsed Gibbs sampling, compares topics of
//! different runs with a thresholded ("modified") Jaccard coefficient,
//! clusters all topics of all runs with complete linkage and prunes the
//! resulting dendrogram locally so that the sum of cluster disparities is
//! minimal. The normalized minimum is the S-CLOP score. Running S-CLOP on all
//! pairs of runs yields a prototype: the run that is on average most similar
//! to all others.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, parallel
//! execution and the command line tool live in the `sclop` crate.
//!
//! A minimal pipeline:
//!
//! ```
//! use sclop_core::{corpus, lda, sclop, synth};
//!
//! let spec = synth::SyntheticSpec { docs: 40, doc_length: 30, ..Default::default() };
//! let corpus = synth::generate(&spec).unwrap();
//! let cfg = lda::LdaConfig { iterations: 20, ..lda::LdaConfig::with_topics(4) };
//! let runs = lda::replicate(&corpus, &cfg, 3, 7).unwrap();
//! let report = sclop::sclop(&runs, &sclop::SclopConfig::default()).unwrap();
//! assert!((0.0..=1.0).contains(&report.score));
//! # let _ = corpus::PreprocessConfig::default();
//! ```
#![no_std]
#![warn(missing_debug_implementations)]

extern crate alloc;

pub mod corpus;
pub mod dendrogram;
mod error;
pub mod exec;
pub mod lda;
pub mod prototype;
pub mod sclop;
pub mod similarity;
pub mod synth;

pub use error::{Error, FilterStage, Result};
