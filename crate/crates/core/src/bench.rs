//! Synthetic Zipfian corpora, stop-lemma query sampling, and instrumented
//! engine comparisons.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::weighted::WeightedIndex;
use rand_distr::{Distribution, Zipf};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::index::Index;
use crate::query::{evaluate_query, EngineKind, EvalOptions, Metrics, ResultSet};

/// Parameters of a synthetic corpus. Words are drawn i.i.d. from a Zipf
/// distribution over `vocab_size` ranks; word `w<rank>` is its own lemma.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorpusSpec {
    pub doc_count: u32,
    pub words_per_doc: (u32, u32),
    pub vocab_size: u32,
    pub zipf_exponent: f64,
    pub rng_seed: u64,
}

impl CorpusSpec {
    /// The desk-scale default: a ~1/1000-scale stand-in for a large text
    /// collection, with the usual stop/frequent cut-offs still meaningful.
    pub fn desk_default() -> CorpusSpec {
        CorpusSpec {
            doc_count: 2_000,
            words_per_doc: (1_000, 5_000),
            vocab_size: 20_000,
            zipf_exponent: 1.0,
            rng_seed: 42,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.doc_count == 0
            || self.vocab_size == 0
            || self.words_per_doc.0 == 0
            || self.words_per_doc.0 > self.words_per_doc.1
            || self.zipf_exponent <= 0.0
        {
            return Err(Error::InvalidConfig(format!("corpus spec {self:?}")));
        }
        Ok(())
    }
}

/// Word text of a 1-based frequency rank.
pub fn rank_word(rank: u64) -> String {
    format!("w{rank}")
}

/// Full benchmark description, readable from a JSON config file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct BenchConfig {
    pub corpus: CorpusSpec,
    pub max_distance: u32,
    pub sw_count: u32,
    pub fu_count: u32,
    pub query_count: usize,
    pub query_length: (u32, u32),
    pub query_seed: u64,
    pub engines: Vec<String>,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            corpus: CorpusSpec::desk_default(),
            max_distance: 5,
            sw_count: 700,
            fu_count: 2_100,
            query_count: 200,
            query_length: (3, 5),
            query_seed: 7,
            engines: vec!["ordinary".into(), "pair".into(), "triple".into()],
        }
    }
}

impl BenchConfig {
    pub fn engine_kinds(&self) -> Result<Vec<EngineKind>> {
        self.engines.iter().map(|e| e.parse()).collect()
    }
}

/// Deterministically generate the corpus described by `spec`.
pub fn generate_corpus(spec: &CorpusSpec) -> Result<Vec<String>> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.rng_seed);
    let zipf = Zipf::new(spec.vocab_size as f64, spec.zipf_exponent)
        .map_err(|e| Error::InvalidConfig(format!("zipf: {e}")))?;
    let mut docs = Vec::with_capacity(spec.doc_count as usize);
    for _ in 0..spec.doc_count {
        let len = rng.random_range(spec.words_per_doc.0..=spec.words_per_doc.1);
        let mut doc = String::with_capacity(len as usize * 6);
        for i in 0..len {
            if i > 0 {
                doc.push(' ');
            }
            let rank = zipf.sample(&mut rng) as u64;
            doc.push_str(&rank_word(rank));
        }
        docs.push(doc);
    }
    Ok(docs)
}

/// Sample stop-lemma queries, weighted by corpus frequency, with uniform
/// lengths in `length_range`.
pub fn generate_queries(
    index: &Index,
    count: usize,
    length_range: (u32, u32),
    seed: u64,
) -> Result<Vec<String>> {
    let lexicon = index.lexicon();
    let cfg = index.lexicon_config();
    let stop = lexicon.stop_lemmas(&cfg);
    if stop.is_empty() {
        return Err(Error::InvalidConfig(
            "index has no stop lemmas to sample queries from".into(),
        ));
    }
    let weights: Vec<u64> = stop.iter().map(|&id| lexicon.count_of(id).max(1)).collect();
    let picker = WeightedIndex::new(&weights)
        .map_err(|e| Error::InvalidConfig(format!("query weights: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut queries = Vec::with_capacity(count);
    for _ in 0..count {
        let len = rng.random_range(length_range.0..=length_range.1);
        let words: Vec<&str> = (0..len)
            .map(|_| lexicon.text_of(stop[picker.sample(&mut rng)]))
            .collect();
        queries.push(words.join(" "));
    }
    Ok(queries)
}

/// Mean cost aggregates of one engine over a query set.
#[derive(Debug, Clone, Serialize, Deserialize, Default)]
pub struct EngineAggregate {
    pub mean_wall_time_ms: f64,
    pub mean_postings_read: f64,
    pub mean_bytes_read: f64,
    pub total_fragments: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchReport {
    pub query_count: usize,
    pub max_distance: u32,
    pub sw_count: u32,
    pub fu_count: u32,
    pub engines: BTreeMap<String, EngineAggregate>,
}

impl BenchReport {
    pub fn engine(&self, kind: EngineKind) -> &EngineAggregate {
        &self.engines[kind.name()]
    }

    pub fn text_table(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "{} queries, max_distance={} sw_count={} fu_count={}\n",
            self.query_count, self.max_distance, self.sw_count, self.fu_count
        ));
        out.push_str(&format!(
            "{:<10} {:>16} {:>16} {:>14} {:>12}\n",
            "engine", "mean postings", "mean bytes", "mean ms", "fragments"
        ));
        for (name, agg) in &self.engines {
            out.push_str(&format!(
                "{:<10} {:>16.1} {:>16.1} {:>14.3} {:>12}\n",
                name,
                agg.mean_postings_read,
                agg.mean_bytes_read,
                agg.mean_wall_time_ms,
                agg.total_fragments
            ));
        }
        out
    }
}

/// Run every query through every requested engine, cross-check that the
/// engines return the same fragments, and aggregate per-engine costs.
///
/// Queries run sequentially by default for stable latency numbers; `parallel`
/// trades that for throughput.
pub fn run_benchmark(
    index: &Index,
    queries: &[String],
    engines: &[EngineKind],
    parallel: bool,
) -> Result<BenchReport> {
    let per_query = |query: &String| -> Result<Vec<(ResultSet, Metrics)>> {
        let mut outcomes = Vec::with_capacity(engines.len());
        for &engine in engines {
            let started = Instant::now();
            let outcome = evaluate_query(
                index,
                query,
                &EvalOptions {
                    engine,
                    emit_final_fragment: true,
                },
            )?;
            let mut metrics = outcome.metrics;
            metrics.wall_time = started.elapsed();
            outcomes.push((outcome.results, metrics));
        }
        for (i, (results, _)) in outcomes.iter().enumerate().skip(1) {
            if results != &outcomes[0].0 {
                return Err(Error::EngineMismatch {
                    query: query.clone(),
                    detail: format!(
                        "{} returned {} fragments, {} returned {}",
                        engines[0].name(),
                        outcomes[0].0.len(),
                        engines[i].name(),
                        results.len()
                    ),
                });
            }
        }
        Ok(outcomes)
    };

    let all: Vec<Vec<(ResultSet, Metrics)>> = if parallel {
        use rayon::prelude::*;
        queries.par_iter().map(per_query).collect::<Result<_>>()?
    } else {
        queries.iter().map(per_query).collect::<Result<_>>()?
    };

    let mut engines_out = BTreeMap::new();
    for (e_idx, &engine) in engines.iter().enumerate() {
        let mut agg = EngineAggregate::default();
        for outcomes in &all {
            let (results, metrics) = &outcomes[e_idx];
            agg.mean_wall_time_ms += metrics.wall_time.as_secs_f64() * 1e3;
            agg.mean_postings_read += metrics.postings_read as f64;
            agg.mean_bytes_read += metrics.bytes_read as f64;
            agg.total_fragments += results.len() as u64;
        }
        let n = queries.len().max(1) as f64;
        agg.mean_wall_time_ms /= n;
        agg.mean_postings_read /= n;
        agg.mean_bytes_read /= n;
        engines_out.insert(engine.name().to_owned(), agg);
    }
    Ok(BenchReport {
        query_count: queries.len(),
        max_distance: index.max_distance(),
        sw_count: index.manifest().sw_count,
        fu_count: index.manifest().fu_count,
        engines: engines_out,
    })
}

/// Least-squares slope of log(frequency) against log(rank) over the `top_n`
/// most frequent ranks of `counts` (descending). Used to check generated
/// corpora against their own law.
pub fn rank_frequency_slope(counts: &[u64], top_n: usize) -> f64 {
    let n = counts.len().min(top_n);
    assert!(n >= 2, "need at least two ranks to fit a slope");
    let points: Vec<(f64, f64)> = counts[..n]
        .iter()
        .enumerate()
        .map(|(i, &c)| (((i + 1) as f64).ln(), (c.max(1) as f64).ln()))
        .collect();
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n as f64;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n as f64;
    let sxy: f64 = points.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_x) * (p.0 - mean_x)).sum();
    sxy / sxx
}
