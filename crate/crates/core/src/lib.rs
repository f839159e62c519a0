//! Relevant-feature selection for KDD'99-style intrusion detection.
//!
//! The crate covers the whole model: deduplicated datasets ([`dataset`]),
//! entropy statistics and MDL discretization ([`stats`]), CFS-driven subset
//! search ([`featsel`]), from-scratch learners ([`classifiers`]),
//! cross-validated metrics ([`evaluation`]) and the guarded add/delete
//! selection procedures ([`pipeline`]).

pub mod classifiers;
pub mod dataset;
pub mod error;
pub mod evaluation;
pub mod featsel;
pub mod pipeline;
pub mod reference;
pub mod seed;
pub mod stats;
pub mod synth;

pub use error::{Error, Result};
