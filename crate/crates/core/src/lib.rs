//! Proximity full-text search over inverted indexes with multi-component keys.
//!
//! Ordinary `(id, position)` postings answer any query but read every
//! occurrence of every query lemma. Two- and three-component key indexes
//! pre-join nearby occurrences of frequent ("stop") lemmas, so a query over
//! stop lemmas touches orders of magnitude fewer postings. All engines return
//! identical result fragments; they differ only in what they read.

pub mod bench;
pub mod error;
pub mod index;
pub mod lexicon;
pub mod query;

pub use error::{Error, Result};
pub use index::{build_index, BuildOptions, Families, Index, IndexConfig};
pub use lexicon::{Dictionary, FlList, Lexicon, LemmaClass, LemmaId, LexiconConfig};
pub use query::{evaluate_query, EngineKind, EvalOptions, Fragment, Metrics, QueryOutcome};
