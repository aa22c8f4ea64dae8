//! Subquery evaluation against each index family.
//!
//! All three paths compute the same result fragments; they differ in which
//! posting lists they read. The triple path streams pre-joined `(f, s, t)`
//! postings. The pair path re-joins each triple key from its `(f, s)` and
//! `(f, t)` pair lists by intersecting on the anchor position. The ordinary
//! path re-joins from raw `(id, p)` lists and also serves queries that
//! multi-component keys cannot (short queries, non-stop lemmas).

use std::collections::HashMap;

use crate::error::Result;
use crate::index::cursor::{Cursor1, Cursor2, Cursor3, DocCursor};
use crate::index::postings::{pair_occurrence_lists, Posting3};
use crate::index::Index;
use crate::lexicon::LemmaId;
use crate::query::fill::{fill_intermediate_lists, IntermediateList, KeyFiller};
use crate::query::keys::{select_keys, select_pair_key, PairChunk, SelectedKey};
use crate::query::oracle::project_subquery_lists;
use crate::query::search_doc::{search_in_document, Fragment};

/// Read-cost counters of one evaluation path.
#[derive(Debug, Default, Clone, Copy)]
pub struct PathMetrics {
    pub postings_read: u64,
    pub bytes_read: u64,
    pub heap_ops: u64,
    pub max_heap_len: usize,
}

impl PathMetrics {
    fn absorb_cursors<'a, C: DocCursor + 'a>(&mut self, cursors: impl Iterator<Item = &'a C>) {
        for c in cursors {
            self.postings_read += c.postings_read();
            self.bytes_read += c.bytes_read();
        }
    }
}

/// Advance cursors until they all stand on the same document id.
///
/// Any cursor whose id trails the current maximum advances; returns None as
/// soon as one cursor exhausts.
pub fn equalize<C: DocCursor>(cursors: &mut [C]) -> Result<Option<u32>> {
    if cursors.is_empty() {
        return Ok(None);
    }
    for cursor in cursors.iter_mut() {
        if cursor.current_doc().is_none() && !cursor.step()? {
            return Ok(None);
        }
    }
    loop {
        let target = cursors
            .iter()
            .map(|c| c.current_doc().expect("primed cursor"))
            .max()
            .expect("non-empty cursor set");
        let mut aligned = true;
        for cursor in cursors.iter_mut() {
            loop {
                match cursor.current_doc() {
                    Some(doc) if doc < target => {
                        if !cursor.step()? {
                            return Ok(None);
                        }
                    }
                    Some(doc) => {
                        if doc > target {
                            aligned = false;
                        }
                        break;
                    }
                    None => return Ok(None),
                }
            }
        }
        if aligned {
            return Ok(Some(target));
        }
    }
}

/// Evaluate an all-stop subquery of three or more lemmas with triple keys.
pub fn evaluate_subquery(
    index: &Index,
    sub: &[LemmaId],
    emit_final: bool,
) -> Result<(Vec<Fragment>, PathMetrics)> {
    let keys = select_keys(sub, index.lexicon().fl_list())
        .expect("triple path requires at least three lemmas");
    let max_distance = index.max_distance();
    let mut cursors: Vec<Cursor3> = keys
        .iter()
        .map(|k| index.open_cursor_triple(k.key))
        .collect::<Result<_>>()?;

    let mut fragments = Vec::new();
    let mut metrics = PathMetrics::default();
    while let Some(did) = equalize(&mut cursors)? {
        let mut lists: Vec<Vec<u32>> = vec![Vec::new(); sub.len()];
        for (key, cursor) in keys.iter().zip(cursors.iter_mut()) {
            let stats = fill_intermediate_lists(cursor, did, key, max_distance, &mut lists)?;
            metrics.heap_ops += stats.ops;
            metrics.max_heap_len = metrics.max_heap_len.max(stats.max_len);
        }
        let mut ils: Vec<IntermediateList> =
            lists.into_iter().map(IntermediateList::from_sorted).collect();
        search_in_document(&mut ils, did, emit_final, &mut fragments);
    }
    metrics.absorb_cursors(cursors.iter());
    Ok((fragments, metrics))
}

/// Evaluate an all-stop subquery from the two-component index.
///
/// Two lemmas use their single pair key directly. Longer subqueries re-join
/// each triple key's postings from the anchor-sharing pair lists, making the
/// output identical to the triple path posting for posting.
pub fn evaluate_pair_path(
    index: &Index,
    sub: &[LemmaId],
    emit_final: bool,
) -> Result<(Vec<Fragment>, PathMetrics)> {
    if sub.len() == 2 {
        return evaluate_single_pair(index, sub, emit_final);
    }
    let keys = select_keys(sub, index.lexicon().fl_list())
        .expect("pair path requires at least two lemmas");
    let chunks: Vec<PairChunk> = keys.iter().map(PairChunk::from_selected).collect();
    let max_distance = index.max_distance();

    // One cursor per pair key per chunk, shared when (f,s) == (f,t).
    let mut cursors: Vec<Cursor2> = Vec::new();
    let mut chunk_cursors: Vec<(usize, usize)> = Vec::new();
    for chunk in &chunks {
        let fs_idx = cursors.len();
        cursors.push(index.open_cursor_pair(chunk.fs)?);
        let ft_idx = if chunk.same_key() {
            fs_idx
        } else {
            cursors.push(index.open_cursor_pair(chunk.ft)?);
            fs_idx + 1
        };
        chunk_cursors.push((fs_idx, ft_idx));
    }

    let mut fragments = Vec::new();
    let mut metrics = PathMetrics::default();
    while let Some(did) = equalize(&mut cursors)? {
        let mut lists: Vec<Vec<u32>> = vec![Vec::new(); sub.len()];
        for (chunk, &(fs_idx, ft_idx)) in chunks.iter().zip(&chunk_cursors) {
            let key = SelectedKey {
                key: crate::index::postings::TripleKey {
                    f: chunk.fs.w,
                    s: chunk.fs.v,
                    t: chunk.ft.v,
                },
                slots: chunk.slots,
            };
            let mut filler = KeyFiller::new(&key, max_distance, &mut lists);
            if fs_idx == ft_idx {
                rejoin_same_key(&mut cursors[fs_idx], did, &mut filler)?;
            } else {
                let (a, b) = cursors.split_at_mut(ft_idx);
                rejoin_two_keys(&mut a[fs_idx], &mut b[0], did, &mut filler)?;
            }
            let stats = filler.finish();
            metrics.heap_ops += stats.ops;
            metrics.max_heap_len = metrics.max_heap_len.max(stats.max_len);
        }
        let mut ils: Vec<IntermediateList> =
            lists.into_iter().map(IntermediateList::from_sorted).collect();
        search_in_document(&mut ils, did, emit_final, &mut fragments);
    }
    metrics.absorb_cursors(cursors.iter());
    Ok((fragments, metrics))
}

/// Consume the run of postings sharing the cursor's current anchor position
/// within `did`; returns the anchor and the companion positions, ascending.
fn take_anchor_run(cursor: &mut Cursor2, did: u32) -> Result<Option<(u32, Vec<u32>)>> {
    let anchor = match cursor.value() {
        Some(p) if p.id == did => p.p,
        _ => return Ok(None),
    };
    let mut run = Vec::new();
    while let Some(p) = cursor.value() {
        if p.id != did || p.p != anchor {
            break;
        }
        run.push(p.second());
        cursor.advance()?;
    }
    Ok(Some((anchor, run)))
}

/// Re-join triple postings where both components come from one pair list.
fn rejoin_same_key(cursor: &mut Cursor2, did: u32, filler: &mut KeyFiller) -> Result<()> {
    while let Some((anchor, run)) = take_anchor_run(cursor, did)? {
        push_joined(filler, did, anchor, &run, &run);
    }
    Ok(())
}

/// Re-join triple postings from `(f, s)` and `(f, t)` lists: anchors present
/// in both lists contribute, with their companion runs paired index-wise.
fn rejoin_two_keys(
    fs: &mut Cursor2,
    ft: &mut Cursor2,
    did: u32,
    filler: &mut KeyFiller,
) -> Result<()> {
    let mut run_s = take_anchor_run(fs, did)?;
    let mut run_t = take_anchor_run(ft, did)?;
    while let (Some((pa, rs)), Some((pb, rt))) = (&run_s, &run_t) {
        if pa < pb {
            run_s = take_anchor_run(fs, did)?;
        } else if pb < pa {
            run_t = take_anchor_run(ft, did)?;
        } else {
            push_joined(filler, did, *pa, rs, rt);
            run_s = take_anchor_run(fs, did)?;
            run_t = take_anchor_run(ft, did)?;
        }
    }
    // Drain whatever the slower list still holds for this document.
    while take_anchor_run(fs, did)?.is_some() {}
    while take_anchor_run(ft, did)?.is_some() {}
    Ok(())
}

fn push_joined(filler: &mut KeyFiller, did: u32, anchor: u32, rs: &[u32], rt: &[u32]) {
    for (ps, pt) in pair_occurrence_lists(rs, rt) {
        filler.push(Posting3 {
            id: did,
            p: anchor,
            d1: (ps as i64 - anchor as i64) as i32,
            d2: (pt as i64 - anchor as i64) as i32,
        });
    }
}

/// Two-lemma subquery straight off its pair key: the anchor slot's positions
/// append directly, the companion slot passes through one bounded heap.
fn evaluate_single_pair(
    index: &Index,
    sub: &[LemmaId],
    emit_final: bool,
) -> Result<(Vec<Fragment>, PathMetrics)> {
    let key = select_pair_key(sub, index.lexicon().fl_list())
        .expect("single pair path requires exactly two lemmas");
    let max_distance = index.max_distance();
    let mut fragments = Vec::new();
    let mut metrics = PathMetrics::default();

    let mut cursors = [index.open_cursor_pair(key.key)?];
    while let Some(did) = equalize(&mut cursors)? {
        let cursor = &mut cursors[0];
        let mut lists: Vec<Vec<u32>> = vec![Vec::new(); 2];
        let mut filler =
            KeyFiller::for_pair(key.slots[0].ordinal, key.slots[1].ordinal, max_distance, &mut lists);
        while let Some(&p) = cursor.value() {
            if p.id != did {
                break;
            }
            filler.push(Posting3 {
                id: p.id,
                p: p.p,
                d1: p.d,
                d2: 0,
            });
            cursor.advance()?;
        }
        let stats = filler.finish();
        metrics.heap_ops += stats.ops;
        metrics.max_heap_len = metrics.max_heap_len.max(stats.max_len);
        let mut ils: Vec<IntermediateList> =
            lists.into_iter().map(IntermediateList::from_sorted).collect();
        search_in_document(&mut ils, did, emit_final, &mut fragments);
    }
    metrics.absorb_cursors(cursors.iter());
    Ok((fragments, metrics))
}

/// Evaluate any subquery from the ordinary index: intersect the lemmas'
/// posting lists document-at-a-time, then re-join the multi-component keys
/// from the in-document positions and run the same search loop.
pub fn evaluate_ordinary_path(
    index: &Index,
    sub: &[LemmaId],
    emit_final: bool,
) -> Result<(Vec<Fragment>, PathMetrics)> {
    let mut distinct: Vec<LemmaId> = Vec::new();
    for &id in sub {
        if !distinct.contains(&id) {
            distinct.push(id);
        }
    }
    let mut cursors: Vec<Cursor1> = distinct
        .iter()
        .map(|&id| index.open_cursor_ordinary(id))
        .collect::<Result<_>>()?;

    let fl = index.lexicon().fl_list();
    let max_distance = index.max_distance();
    let mut fragments = Vec::new();
    let mut metrics = PathMetrics::default();
    while let Some(did) = equalize(&mut cursors)? {
        let mut positions: HashMap<LemmaId, Vec<u32>> = HashMap::new();
        for (&id, cursor) in distinct.iter().zip(cursors.iter_mut()) {
            let list = positions.entry(id).or_default();
            while let Some(&p) = cursor.value() {
                if p.id != did {
                    break;
                }
                list.push(p.p);
                cursor.advance()?;
            }
        }
        let lists = project_subquery_lists(sub, &positions, fl, max_distance);
        let mut ils: Vec<IntermediateList> =
            lists.into_iter().map(IntermediateList::from_sorted).collect();
        search_in_document(&mut ils, did, emit_final, &mut fragments);
    }
    metrics.absorb_cursors(cursors.iter());
    Ok((fragments, metrics))
}
