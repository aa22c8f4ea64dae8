//! Query evaluation: expansion into subqueries, per-subquery dispatch onto an
//! index family, and result merging.

pub mod engine;
pub mod expand;
pub mod fill;
pub mod heap;
pub mod keys;
pub mod oracle;
pub mod search_doc;

use std::time::{Duration, Instant};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::index::format::Family;
use crate::index::Index;
use crate::lexicon::{LemmaClass, LemmaId};

pub use engine::{equalize, evaluate_ordinary_path, evaluate_pair_path, evaluate_subquery, PathMetrics};
pub use expand::{expand_query, SubLemma, Subquery, MAX_SUBQUERIES};
pub use fill::{fill_intermediate_lists, IntermediateList, EXHAUSTED};
pub use heap::BoundedMinHeap;
pub use keys::{select_keys, select_pair_key, KeySlot, PairChunk, SelectedKey};
pub use oracle::{
    brute_force_query, brute_force_search, brute_force_search_prepared, project_subquery_lists,
    TokenizedCorpus,
};
pub use search_doc::{search_in_document, Fragment};

/// Which access path evaluates subqueries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EngineKind {
    /// Cheapest eligible family: triple, then pair, then ordinary.
    Auto,
    Triple,
    Pair,
    Ordinary,
}

impl EngineKind {
    pub fn name(self) -> &'static str {
        match self {
            EngineKind::Auto => "auto",
            EngineKind::Triple => "triple",
            EngineKind::Pair => "pair",
            EngineKind::Ordinary => "ordinary",
        }
    }
}

impl std::str::FromStr for EngineKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<EngineKind> {
        match s {
            "auto" => Ok(EngineKind::Auto),
            "triple" => Ok(EngineKind::Triple),
            "pair" => Ok(EngineKind::Pair),
            "ordinary" => Ok(EngineKind::Ordinary),
            other => Err(Error::InvalidConfig(format!("unknown engine {other:?}"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct EvalOptions {
    pub engine: EngineKind,
    /// Also emit the window still open when a list runs out (kept identical
    /// in every engine and the brute-force reference).
    pub emit_final_fragment: bool,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            engine: EngineKind::Auto,
            emit_final_fragment: true,
        }
    }
}

/// Aggregated evaluation cost of one query.
#[derive(Debug, Default, Clone, Serialize)]
pub struct Metrics {
    pub postings_read: u64,
    pub bytes_read: u64,
    pub heap_ops: u64,
    #[serde(skip)]
    pub max_heap_len: usize,
    #[serde(skip)]
    pub wall_time: Duration,
    #[serde(skip)]
    pub subquery_count: u32,
    #[serde(skip)]
    pub subquery_length: u32,
}

impl Metrics {
    fn merge_path(&mut self, path: &PathMetrics) {
        self.postings_read += path.postings_read;
        self.bytes_read += path.bytes_read;
        self.heap_ops += path.heap_ops;
        self.max_heap_len = self.max_heap_len.max(path.max_heap_len);
    }

    /// The on-demand JSON form: postings, bytes, wall time, heap ops.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "postings_read": self.postings_read,
            "bytes_read": self.bytes_read,
            "wall_time_ms": self.wall_time.as_secs_f64() * 1e3,
            "heap_ops": self.heap_ops,
        })
    }
}

/// Sorted, deduplicated fragments.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ResultSet {
    fragments: Vec<Fragment>,
}

impl ResultSet {
    pub fn from_unsorted(mut fragments: Vec<Fragment>) -> ResultSet {
        fragments.sort_unstable();
        fragments.dedup();
        ResultSet { fragments }
    }

    pub fn as_slice(&self) -> &[Fragment] {
        &self.fragments
    }

    pub fn len(&self) -> usize {
        self.fragments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fragments.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Fragment> {
        self.fragments.iter()
    }
}

impl<'a> IntoIterator for &'a ResultSet {
    type Item = &'a Fragment;
    type IntoIter = std::slice::Iter<'a, Fragment>;

    fn into_iter(self) -> Self::IntoIter {
        self.fragments.iter()
    }
}

#[derive(Debug)]
pub struct QueryOutcome {
    pub results: ResultSet,
    pub metrics: Metrics,
    /// Dispatch diagnostics, e.g. fallbacks forced by lemma classes.
    pub notices: Vec<String>,
}

/// Evaluate a query string: expand, dispatch each subquery, merge fragments.
pub fn evaluate_query(index: &Index, query: &str, opts: &EvalOptions) -> Result<QueryOutcome> {
    let started = Instant::now();
    let subqueries = expand_query(query, index.dictionary(), index.lexicon())?;
    let mut fragments = Vec::new();
    let mut metrics = Metrics::default();
    let mut notices = Vec::new();
    for sub in &subqueries {
        metrics.subquery_count += 1;
        metrics.subquery_length = metrics.subquery_length.max(sub.len() as u32);
        let ids = match sub.ids() {
            // A lemma absent from the lexicon occurs nowhere: empty result.
            None => continue,
            Some(ids) => ids,
        };
        let (frags, path) = dispatch(index, sub, &ids, opts, &mut notices)?;
        fragments.extend(frags);
        metrics.merge_path(&path);
    }
    metrics.wall_time = started.elapsed();
    Ok(QueryOutcome {
        results: ResultSet::from_unsorted(fragments),
        metrics,
        notices,
    })
}

fn dispatch(
    index: &Index,
    sub: &Subquery,
    ids: &[LemmaId],
    opts: &EvalOptions,
    notices: &mut Vec<String>,
) -> Result<(Vec<Fragment>, PathMetrics)> {
    let cfg = index.lexicon_config();
    let all_stop = ids
        .iter()
        .all(|&id| index.lexicon().class_of(id, &cfg) == LemmaClass::Stop);
    let m = ids.len();
    let emit_final = opts.emit_final_fragment;

    let describe = |sub: &Subquery| {
        sub.lemmas
            .iter()
            .map(|l| l.text.as_str())
            .collect::<Vec<_>>()
            .join(" ")
    };

    match opts.engine {
        EngineKind::Auto => {
            if all_stop && m >= 3 && index.has_family(Family::Triple) {
                evaluate_subquery(index, ids, emit_final)
            } else if all_stop && m >= 2 && index.has_family(Family::Pair) {
                evaluate_pair_path(index, ids, emit_final)
            } else {
                evaluate_ordinary_path(index, ids, emit_final)
            }
        }
        EngineKind::Triple => {
            if all_stop && m >= 3 {
                index.family_table(Family::Triple)?;
                evaluate_subquery(index, ids, emit_final)
            } else {
                notices.push(format!(
                    "subquery [{}] is not all stop lemmas of length >= 3; falling back to the ordinary index",
                    describe(sub)
                ));
                evaluate_ordinary_path(index, ids, emit_final)
            }
        }
        EngineKind::Pair => {
            if all_stop && m >= 2 {
                index.family_table(Family::Pair)?;
                evaluate_pair_path(index, ids, emit_final)
            } else {
                notices.push(format!(
                    "subquery [{}] is not all stop lemmas of length >= 2; falling back to the ordinary index",
                    describe(sub)
                ));
                evaluate_ordinary_path(index, ids, emit_final)
            }
        }
        EngineKind::Ordinary => evaluate_ordinary_path(index, ids, emit_final),
    }
}
