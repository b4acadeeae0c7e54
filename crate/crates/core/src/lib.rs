//! Statistical model checking for networks of priced timed automata.
//!
//! Models are written in a small text format ([`text::parse_model`]) and
//! validated into a [`model::NetworkModel`]. The [`engine`] generates random
//! runs, [`monitor`] decides bounded reachability and safety queries on them,
//! and [`stats`] turns outcome streams into estimates, hypothesis tests and
//! comparisons. [`oracle`] computes the same probabilities numerically for
//! small acyclic models.

pub mod cli;
pub mod engine;
pub mod error;
pub mod examples;
pub mod hist;
pub mod model;
pub mod monitor;
pub mod oracle;
pub mod quad;
pub mod rng;
pub mod sampler;
pub mod stats;
pub mod text;

pub use error::{Error, ParseError, Result, ValidationError, ValidationErrors};
