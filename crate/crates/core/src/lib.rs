//! Mining descriptive rules from listings in wiki pages and turning them
//! into new knowledge graph assertions.
//!
//! The pipeline runs in stages, each usable on its own:
//! [`wikitext`] extraction, [`tagger`], [`subjects`] detection,
//! [`rules`] mining and selection, [`thresholds`] sweeps,
//! [`assertions`] generation and filtering, and the [`synth`] benchmark.

pub mod assertions;
pub mod cli;
pub mod corpus;
pub mod error;
pub mod kg;
pub mod pipeline;
pub mod rules;
pub mod stats;
pub mod subjects;
pub mod synth;
pub mod tagger;
pub mod text;
pub mod thresholds;
pub mod wikitext;

pub use error::{Error, Result};
