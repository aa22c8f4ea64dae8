//! Shared test support: an independent decoder for the on-disk format and a
//! randomized engine-equivalence trial harness.

#![allow(dead_code)]

pub mod independent;

use std::time::{Duration, Instant};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use pfts::index::{build_index, BuildOptions, Families, Index, IndexConfig};
use pfts::lexicon::Dictionary;
use pfts::query::{brute_force_query, evaluate_query, EngineKind, EvalOptions, TokenizedCorpus};

/// Uniform random corpus over a tiny vocabulary; every lemma is a stop lemma
/// under the trial config.
pub fn random_corpus(rng: &mut ChaCha8Rng, doc_count: u32, max_words: u32, vocab: u32) -> Vec<String> {
    (0..doc_count)
        .map(|_| {
            let len = rng.random_range(3..=max_words.max(3));
            let words: Vec<String> = (0..len)
                .map(|_| format!("w{}", rng.random_range(0..vocab)))
                .collect();
            words.join(" ")
        })
        .collect()
}

#[derive(Debug, Default)]
pub struct TrialAggregate {
    pub trials: usize,
    pub divergences: Vec<String>,
    pub heap_bound_violations: Vec<String>,
    pub heap_ops_violations: Vec<String>,
    pub total_postings_read: u64,
    pub elapsed: Duration,
}

/// Run `trials` randomized equivalence trials: per trial, build an index over
/// a fresh random corpus, draw one stop-lemma query of length 3 to 5, and
/// compare the triple engine, the pair engine, the ordinary engine, and the
/// brute-force reference fragment for fragment, while checking the heap
/// bounds on the multi-component paths.
pub fn run_equivalence_trials(trials: usize, base_seed: u64) -> TrialAggregate {
    let started = Instant::now();
    let mut agg = TrialAggregate {
        trials,
        ..TrialAggregate::default()
    };
    for trial in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(base_seed + trial as u64);
        let max_distance = [2u32, 3, 5][trial % 3];
        let (doc_count, max_words) = if trial % 50 == 0 {
            (rng.random_range(20..=100), rng.random_range(100..=500))
        } else {
            (rng.random_range(1..=15), rng.random_range(5..=120))
        };
        // Two dictionary lemmas may join the vocabulary; stay within 50.
        let vocab = rng.random_range(4..=48);
        let docs = random_corpus(&mut rng, doc_count, max_words, vocab);

        let mut dict = Dictionary::new();
        if trial % 10 == 3 {
            // A word with two lemma alternatives, and one remapped word.
            dict.insert("w0", vec!["w0".into(), "q0".into()]);
            dict.insert("w1", vec!["z1".into()]);
        }

        let cfg = IndexConfig {
            max_distance,
            sw_count: vocab + 8,
            fu_count: 4,
            families: Families::default(),
        };
        let opts = BuildOptions {
            batch_size: [0usize, 2, 7][trial % 3],
            threads: 1,
        };
        let dir = tempfile::tempdir().expect("tempdir");
        build_index(&docs, &dict, &cfg, &opts, dir.path()).expect("trial build");
        let index = Index::open(dir.path()).expect("trial open");

        let lexicon = index.lexicon();
        let stop = lexicon.stop_lemmas(&index.lexicon_config());
        assert!(!stop.is_empty(), "trial corpus produced no stop lemmas");
        let len = rng.random_range(3..=5);
        let words: Vec<&str> = (0..len)
            .map(|_| lexicon.text_of(stop[rng.random_range(0..stop.len())]))
            .collect();
        let query = words.join(" ");

        let corpus = TokenizedCorpus::build(&docs, index.dictionary(), lexicon).expect("tokenize");
        let expected = brute_force_query(
            &query,
            &corpus,
            index.dictionary(),
            lexicon,
            max_distance,
            true,
        )
        .expect("reference run");

        for engine in [EngineKind::Triple, EngineKind::Pair, EngineKind::Ordinary] {
            let outcome = evaluate_query(
                &index,
                &query,
                &EvalOptions {
                    engine,
                    emit_final_fragment: true,
                },
            )
            .expect("engine run");
            if outcome.results != expected {
                agg.divergences.push(format!(
                    "trial {trial} (seed {}, md {max_distance}) engine {} query {query:?}: {} fragments vs reference {}",
                    base_seed + trial as u64,
                    engine.name(),
                    outcome.results.len(),
                    expected.len(),
                ));
            }
            let m = outcome.metrics;
            agg.total_postings_read += m.postings_read;
            if m.max_heap_len > 2 * max_distance as usize {
                agg.heap_bound_violations.push(format!(
                    "trial {trial} engine {}: heap length {} exceeds {}",
                    engine.name(),
                    m.max_heap_len,
                    2 * max_distance
                ));
            }
            if m.heap_ops > 4 * m.postings_read {
                agg.heap_ops_violations.push(format!(
                    "trial {trial} engine {}: {} heap ops for {} postings read",
                    engine.name(),
                    m.heap_ops,
                    m.postings_read
                ));
            }
        }
    }
    agg.elapsed = started.elapsed();
    agg
}
