//! Brute-force reference search: rebuild each key's postings straight from
//! token positions, project, sort, and run the same in-document loop. No
//! index files, cursors, or heaps are involved, so it independently checks
//! the whole indexed pipeline.

use std::collections::HashMap;

use crate::error::Result;
use crate::index::postings::{pair_postings_for_doc, triple_postings_for_doc};
use crate::lexicon::{each_token, lemmatize, Dictionary, FlList, LemmaId, Lexicon};
use crate::query::fill::IntermediateList;
use crate::query::keys::{select_keys, select_pair_key};
use crate::query::search_doc::{search_in_document, Fragment};

/// Build the per-ordinal sorted intermediate lists of one document from its
/// per-lemma position lists.
///
/// Three or more lemmas re-derive each selected triple key's postings with
/// the index pairing rule; two lemmas use the pair rule; one lemma uses its
/// raw positions. Starred slots stay empty-handed, covered by earlier keys.
pub fn project_subquery_lists(
    sub: &[LemmaId],
    positions: &HashMap<LemmaId, Vec<u32>>,
    fl: &FlList,
    max_distance: u32,
) -> Vec<Vec<u32>> {
    let empty: Vec<u32> = Vec::new();
    let pos_of = |id: LemmaId| positions.get(&id).unwrap_or(&empty);
    let mut lists: Vec<Vec<u32>> = vec![Vec::new(); sub.len()];

    if let Ok(keys) = select_keys(sub, fl) {
        for key in &keys {
            let postings = triple_postings_for_doc(
                0,
                pos_of(key.key.f),
                pos_of(key.key.s),
                pos_of(key.key.t),
                max_distance,
            );
            for posting in &postings {
                for (slot, value) in [
                    (key.slots[0], posting.p),
                    (key.slots[1], posting.second()),
                    (key.slots[2], posting.third()),
                ] {
                    if let Some(ordinal) = slot.target() {
                        lists[ordinal].push(value);
                    }
                }
            }
        }
    } else if let Ok(key) = select_pair_key(sub, fl) {
        let postings = pair_postings_for_doc(0, pos_of(key.key.w), pos_of(key.key.v), max_distance);
        for posting in &postings {
            lists[key.slots[0].ordinal].push(posting.p);
            lists[key.slots[1].ordinal].push(posting.second());
        }
    } else if sub.len() == 1 {
        lists[0] = pos_of(sub[0]).clone();
    }

    for list in &mut lists {
        list.sort_unstable();
    }
    lists
}

/// Reference evaluation of one subquery over raw document texts.
pub fn brute_force_search(
    sub: &[LemmaId],
    docs: &[String],
    dict: &Dictionary,
    lexicon: &Lexicon,
    max_distance: u32,
    emit_final: bool,
) -> Result<Vec<Fragment>> {
    let mut fragments = Vec::new();
    for (doc, text) in docs.iter().enumerate() {
        let positions = queried_positions(text, sub, dict, lexicon)?;
        search_prepared_doc(
            sub,
            doc as u32,
            &positions,
            lexicon.fl_list(),
            max_distance,
            emit_final,
            &mut fragments,
        );
    }
    Ok(fragments)
}

fn search_prepared_doc(
    sub: &[LemmaId],
    doc: u32,
    positions: &HashMap<LemmaId, Vec<u32>>,
    fl: &FlList,
    max_distance: u32,
    emit_final: bool,
    fragments: &mut Vec<Fragment>,
) {
    if sub.iter().any(|id| !positions.contains_key(id)) {
        return;
    }
    let lists = project_subquery_lists(sub, positions, fl, max_distance);
    let mut ils: Vec<IntermediateList> =
        lists.into_iter().map(IntermediateList::from_sorted).collect();
    search_in_document(&mut ils, doc, emit_final, fragments);
}

/// A corpus tokenized once so repeated reference runs skip re-tokenization.
pub struct TokenizedCorpus {
    docs: Vec<HashMap<LemmaId, Vec<u32>>>,
}

impl TokenizedCorpus {
    pub fn build(docs: &[String], dict: &Dictionary, lexicon: &Lexicon) -> Result<TokenizedCorpus> {
        let mut out = Vec::with_capacity(docs.len());
        for text in docs {
            let mut positions: HashMap<LemmaId, Vec<u32>> = HashMap::new();
            each_token(text, |word, pos| {
                for lemma in lemmatize(word, dict) {
                    if let Some(id) = lexicon.id_of(lemma) {
                        let list = positions.entry(id).or_default();
                        if list.last() != Some(&pos) {
                            list.push(pos);
                        }
                    }
                }
            })?;
            out.push(positions);
        }
        Ok(TokenizedCorpus { docs: out })
    }

    pub fn doc_count(&self) -> u32 {
        self.docs.len() as u32
    }
}

/// [`brute_force_search`] over a pre-tokenized corpus.
pub fn brute_force_search_prepared(
    sub: &[LemmaId],
    corpus: &TokenizedCorpus,
    fl: &FlList,
    max_distance: u32,
    emit_final: bool,
) -> Vec<Fragment> {
    let mut fragments = Vec::new();
    for (doc, positions) in corpus.docs.iter().enumerate() {
        search_prepared_doc(
            sub,
            doc as u32,
            positions,
            fl,
            max_distance,
            emit_final,
            &mut fragments,
        );
    }
    fragments
}

/// Query-level reference run: expand into subqueries exactly like the
/// engines, evaluate each against the raw corpus, and merge.
pub fn brute_force_query(
    query: &str,
    corpus: &TokenizedCorpus,
    dict: &Dictionary,
    lexicon: &Lexicon,
    max_distance: u32,
    emit_final: bool,
) -> Result<crate::query::ResultSet> {
    let subqueries = crate::query::expand_query(query, dict, lexicon)?;
    let mut fragments = Vec::new();
    for sub in &subqueries {
        if let Some(ids) = sub.ids() {
            fragments.extend(brute_force_search_prepared(
                &ids,
                corpus,
                lexicon.fl_list(),
                max_distance,
                emit_final,
            ));
        }
    }
    Ok(crate::query::ResultSet::from_unsorted(fragments))
}

/// Position lists of the queried lemmas in one document.
fn queried_positions(
    text: &str,
    sub: &[LemmaId],
    dict: &Dictionary,
    lexicon: &Lexicon,
) -> Result<HashMap<LemmaId, Vec<u32>>> {
    let mut positions: HashMap<LemmaId, Vec<u32>> = HashMap::new();
    each_token(text, |word, pos| {
        for lemma in lemmatize(word, dict) {
            if let Some(id) = lexicon.id_of(lemma) {
                if sub.contains(&id) {
                    let list = positions.entry(id).or_default();
                    // A word may carry duplicate lemma alternatives.
                    if list.last() != Some(&pos) {
                        list.push(pos);
                    }
                }
            }
        }
    })?;
    Ok(positions)
}
