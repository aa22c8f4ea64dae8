//! Randomized cross-checks of the three engines against the brute-force
//! reference, plus build-coverage and cursor-replay checks.

mod common;

use proptest::prelude::*;

use pfts::index::format::Family;
use pfts::index::postings::window_positions;
use pfts::index::{build_index, BuildOptions, Families, Index, IndexConfig};
use pfts::lexicon::Dictionary;
use pfts::query::{brute_force_query, evaluate_query, EngineKind, EvalOptions, TokenizedCorpus};

fn build_trial_index(docs: &[String], dict: &Dictionary, max_distance: u32, dir: &std::path::Path) -> Index {
    let cfg = IndexConfig {
        max_distance,
        sw_count: 100,
        fu_count: 4,
        families: Families::default(),
    };
    let opts = BuildOptions {
        batch_size: 3,
        threads: 1,
    };
    build_index(docs, dict, &cfg, &opts, dir).expect("build");
    Index::open(dir).expect("open")
}

fn corpus_strategy() -> impl Strategy<Value = Vec<String>> {
    let word = prop::sample::select(vec!["a", "b", "c", "d", "e", "f", "g", "h"]);
    let doc = prop::collection::vec(word, 1..60).prop_map(|w| w.join(" "));
    prop::collection::vec(doc, 1..8)
}

fn query_strategy() -> impl Strategy<Value = String> {
    let word = prop::sample::select(vec!["a", "b", "c", "d", "e", "mixed"]);
    prop::collection::vec(word, 1..6).prop_map(|w| w.join(" "))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// Engines and the reference agree on arbitrary corpora and queries,
    /// including lengths 1 and 2 and words that never occur.
    #[test]
    fn engines_match_reference(docs in corpus_strategy(), query in query_strategy(), md in 1u32..6) {
        let mut dict = Dictionary::new();
        // "mixed" expands to two lemmas, one of which may be absent.
        dict.insert("mixed", vec!["a".into(), "zz".into()]);
        let dir = tempfile::tempdir().unwrap();
        let index = build_trial_index(&docs, &dict, md, dir.path());
        let corpus = TokenizedCorpus::build(&docs, index.dictionary(), index.lexicon()).unwrap();
        let expected = brute_force_query(&query, &corpus, index.dictionary(), index.lexicon(), md, true).unwrap();
        for engine in [EngineKind::Auto, EngineKind::Triple, EngineKind::Pair, EngineKind::Ordinary] {
            let outcome = evaluate_query(&index, &query, &EvalOptions { engine, emit_final_fragment: true }).unwrap();
            prop_assert_eq!(
                outcome.results.as_slice(),
                expected.as_slice(),
                "engine {} on query {:?}",
                engine.name(),
                &query
            );
        }
    }

    /// The final-window switch changes both the engines and the reference the
    /// same way.
    #[test]
    fn emit_final_consistent(docs in corpus_strategy(), query in query_strategy()) {
        let dir = tempfile::tempdir().unwrap();
        let index = build_trial_index(&docs, &Dictionary::new(), 3, dir.path());
        let corpus = TokenizedCorpus::build(&docs, index.dictionary(), index.lexicon()).unwrap();
        let expected = brute_force_query(&query, &corpus, index.dictionary(), index.lexicon(), 3, false).unwrap();
        for engine in [EngineKind::Triple, EngineKind::Ordinary] {
            let outcome = evaluate_query(&index, &query, &EvalOptions { engine, emit_final_fragment: false }).unwrap();
            prop_assert_eq!(outcome.results.as_slice(), expected.as_slice());
        }
    }
}

#[test]
fn randomized_trials_smoke() {
    let agg = common::run_equivalence_trials(60, 0xfeed);
    assert!(agg.divergences.is_empty(), "{:?}", agg.divergences);
    assert!(agg.heap_bound_violations.is_empty(), "{:?}", agg.heap_bound_violations);
    assert!(agg.heap_ops_violations.is_empty(), "{:?}", agg.heap_ops_violations);
}

/// Build coverage on short documents: every occurrence that could take part
/// in a triple posting under the window rule shows up as a projected
/// position of at least one posting of that key.
#[test]
fn triple_build_coverage_brute_force() {
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for round in 0..30 {
        let md = [2u32, 3, 5][round % 3];
        let vocab = rng.random_range(3..=8);
        let docs = common::random_corpus(&mut rng, 1, 200, vocab);
        let dir = tempfile::tempdir().unwrap();
        let index = build_trial_index(&docs, &Dictionary::new(), md, dir.path());
        let lexicon = index.lexicon();

        // Token positions per lemma id.
        let corpus = TokenizedCorpus::build(&docs, index.dictionary(), lexicon).unwrap();
        let positions = |text: &str| -> Vec<u32> {
            let id = match lexicon.id_of(text) {
                Some(id) => id,
                None => return Vec::new(),
            };
            let mut out = Vec::new();
            let mut cur = index.open_cursor_ordinary(id).unwrap();
            while let Some(p) = cur.advance().unwrap() {
                out.push(p.p);
            }
            out
        };
        let _ = &corpus;

        let table = index.family_table(Family::Triple).unwrap();
        for entry in &table.entries {
            let ids = entry.key;
            let texts: Vec<String> = ids
                .iter()
                .map(|&i| lexicon.text_of(pfts::lexicon::LemmaId(i)).to_owned())
                .collect();
            let (pf, ps, pt) = (positions(&texts[0]), positions(&texts[1]), positions(&texts[2]));

            // Projected positions of the stored postings, per slot.
            let mut cur = index
                .open_cursor_triple(pfts::index::postings::TripleKey {
                    f: pfts::lexicon::LemmaId(ids[0]),
                    s: pfts::lexicon::LemmaId(ids[1]),
                    t: pfts::lexicon::LemmaId(ids[2]),
                })
                .unwrap();
            let (mut proj_f, mut proj_s, mut proj_t) = (Vec::new(), Vec::new(), Vec::new());
            while let Some(p) = cur.advance().unwrap() {
                proj_f.push(p.p);
                proj_s.push(p.second());
                proj_t.push(p.third());
            }

            // Exhaustive participation rule.
            for &a in &pf {
                let near_s = window_positions(&ps, a, md);
                let near_t = window_positions(&pt, a, md);
                if !near_s.is_empty() && !near_t.is_empty() {
                    assert!(proj_f.contains(&a), "anchor {a} missing for key {texts:?}");
                    for &b in &near_s {
                        assert!(proj_s.contains(&b), "second {b} missing for key {texts:?}");
                    }
                    for &c in &near_t {
                        assert!(proj_t.contains(&c), "third {c} missing for key {texts:?}");
                    }
                }
            }
        }
    }
}

/// Cursor replay equals the independent decoder's view of the same file.
#[test]
fn cursor_replay_matches_independent_decoder() {
    let docs = vec![
        "to be or not to be or".to_owned(),
        "be not or or to be".to_owned(),
    ];
    let dir = tempfile::tempdir().unwrap();
    let index = build_trial_index(&docs, &Dictionary::new(), 5, dir.path());
    let bytes = std::fs::read(dir.path().join("triples.idx")).unwrap();
    let decoded = common::independent::decode_family_file(&bytes);
    assert_eq!(decoded.family, 3);
    for key in &decoded.keys {
        let mut cur = index
            .open_cursor_triple(pfts::index::postings::TripleKey {
                f: pfts::lexicon::LemmaId(key.key[0]),
                s: pfts::lexicon::LemmaId(key.key[1]),
                t: pfts::lexicon::LemmaId(key.key[2]),
            })
            .unwrap();
        let mut replay = Vec::new();
        while let Some(p) = cur.advance().unwrap() {
            replay.push((p.id, p.p, p.d1 as i64, p.d2 as i64));
        }
        assert_eq!(replay, key.postings);
    }
}
