//! Posting records, multi-component keys, and the per-document rules that
//! generate key postings from word positions.

use crate::lexicon::{FlList, LemmaId};

/// Ordinary posting: one occurrence of one lemma.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Posting1 {
    pub id: u32,
    pub p: u32,
}

/// Pair-key posting: occurrence of the first component at `p`, with the
/// second component at signed offset `d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Posting2 {
    pub id: u32,
    pub p: u32,
    pub d: i32,
}

/// Triple-key posting: occurrence of the first component at `p`, with the
/// second and third components at signed offsets `d1` and `d2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Posting3 {
    pub id: u32,
    pub p: u32,
    pub d1: i32,
    pub d2: i32,
}

impl Posting3 {
    pub fn second(&self) -> u32 {
        (self.p as i64 + self.d1 as i64) as u32
    }

    pub fn third(&self) -> u32 {
        (self.p as i64 + self.d2 as i64) as u32
    }
}

impl Posting2 {
    pub fn second(&self) -> u32 {
        (self.p as i64 + self.d as i64) as u32
    }
}

/// Normalized two-component key: `fl(w) <= fl(v)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PairKey {
    pub w: LemmaId,
    pub v: LemmaId,
}

/// Normalized three-component key: `fl(f) <= fl(s) <= fl(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TripleKey {
    pub f: LemmaId,
    pub s: LemmaId,
    pub t: LemmaId,
}

/// Sort three lemmas into normalized key order.
///
/// Returns the key plus the permutation `perm`, where `perm[slot]` is the
/// original argument position now occupying that normalized slot. Rank ties
/// break by lemma id; identical lemmas keep argument order.
pub fn normalize_triple(a: LemmaId, b: LemmaId, c: LemmaId, fl: &FlList) -> (TripleKey, [usize; 3]) {
    let mut slots = [(a, 0usize), (b, 1), (c, 2)];
    slots.sort_by_key(|&(id, orig)| (fl.ord_key(id), orig));
    (
        TripleKey {
            f: slots[0].0,
            s: slots[1].0,
            t: slots[2].0,
        },
        [slots[0].1, slots[1].1, slots[2].1],
    )
}

/// Two-component analogue of [`normalize_triple`].
pub fn normalize_pair(a: LemmaId, b: LemmaId, fl: &FlList) -> (PairKey, [usize; 2]) {
    let mut slots = [(a, 0usize), (b, 1)];
    slots.sort_by_key(|&(id, orig)| (fl.ord_key(id), orig));
    (
        PairKey {
            w: slots[0].0,
            v: slots[1].0,
        },
        [slots[0].1, slots[1].1],
    )
}

/// Positions of a lemma within `max_distance` of `anchor`, the anchor itself
/// excluded. `positions` must be ascending.
pub fn window_positions(positions: &[u32], anchor: u32, max_distance: u32) -> Vec<u32> {
    let lo = anchor.saturating_sub(max_distance);
    let hi = anchor.saturating_add(max_distance);
    let start = positions.partition_point(|&p| p < lo);
    positions[start..]
        .iter()
        .copied()
        .take_while(|&p| p <= hi)
        .filter(|&p| p != anchor)
        .collect()
}

/// Index-wise pairing of two nearby-occurrence lists, extending the shorter
/// list by repeating its last element so every occurrence lands in at least
/// one pair. Both lists must be non-empty.
pub fn pair_occurrence_lists(ss: &[u32], st: &[u32]) -> Vec<(u32, u32)> {
    debug_assert!(!ss.is_empty() && !st.is_empty());
    let n = ss.len().max(st.len());
    (0..n)
        .map(|i| (ss[i.min(ss.len() - 1)], st[i.min(st.len() - 1)]))
        .collect()
}

/// All postings of triple key `(f, s, t)` in one document, derived from the
/// ascending position lists of its components.
///
/// For each occurrence `pf` of `f`, the `s` and `t` occurrences within
/// `max_distance` are paired index-wise; a missing side drops the anchor.
pub fn triple_postings_for_doc(
    doc: u32,
    pos_f: &[u32],
    pos_s: &[u32],
    pos_t: &[u32],
    max_distance: u32,
) -> Vec<Posting3> {
    let mut out = Vec::new();
    for &pf in pos_f {
        let ss = window_positions(pos_s, pf, max_distance);
        if ss.is_empty() {
            continue;
        }
        let st = window_positions(pos_t, pf, max_distance);
        if st.is_empty() {
            continue;
        }
        for (ps, pt) in pair_occurrence_lists(&ss, &st) {
            out.push(Posting3 {
                id: doc,
                p: pf,
                d1: (ps as i64 - pf as i64) as i32,
                d2: (pt as i64 - pf as i64) as i32,
            });
        }
    }
    out
}

/// All postings of pair key `(w, v)` in one document: one posting per
/// `(pw, pv)` occurrence pair within `max_distance`.
pub fn pair_postings_for_doc(
    doc: u32,
    pos_w: &[u32],
    pos_v: &[u32],
    max_distance: u32,
) -> Vec<Posting2> {
    let mut out = Vec::new();
    for &pw in pos_w {
        for pv in window_positions(pos_v, pw, max_distance) {
            out.push(Posting2 {
                id: doc,
                p: pw,
                d: (pv as i64 - pw as i64) as i32,
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fl_identity(n: u32) -> FlList {
        FlList::from_ranks((0..n).collect())
    }

    #[test]
    fn normalize_sorts_by_rank() {
        // who=2, are=1, you=0 in rank order mirrors fl(you) < fl(are) < fl(who).
        let fl = fl_identity(3);
        let (who, are, you) = (LemmaId(2), LemmaId(1), LemmaId(0));
        let (key, perm) = normalize_triple(who, are, you, &fl);
        assert_eq!(key, TripleKey { f: you, s: are, t: who });
        assert_eq!(perm, [2, 1, 0]);
    }

    #[test]
    fn normalize_identical_components() {
        let fl = fl_identity(2);
        let a = LemmaId(1);
        let (key, perm) = normalize_triple(a, a, a, &fl);
        assert_eq!(key, TripleKey { f: a, s: a, t: a });
        assert_eq!(perm, [0, 1, 2]);
    }

    #[test]
    fn golden_triple_postings() {
        // "to be or not to be or": to@{0,4}, be@{1,5}, or@{2,6}.
        let postings = triple_postings_for_doc(7, &[0, 4], &[1, 5], &[2, 6], 6);
        let expect = [
            Posting3 { id: 7, p: 0, d1: 1, d2: 2 },
            Posting3 { id: 7, p: 0, d1: 5, d2: 6 },
            Posting3 { id: 7, p: 4, d1: -3, d2: -2 },
            Posting3 { id: 7, p: 4, d1: 1, d2: 2 },
        ];
        assert_eq!(postings, expect);
    }

    #[test]
    fn triple_postings_missing_component() {
        assert!(triple_postings_for_doc(0, &[3], &[], &[4], 5).is_empty());
        assert!(triple_postings_for_doc(0, &[3], &[4], &[], 5).is_empty());
    }

    #[test]
    fn pair_postings_exhaustive() {
        // "to be or" with key (to, be).
        assert_eq!(
            pair_postings_for_doc(0, &[0], &[1], 5),
            vec![Posting2 { id: 0, p: 0, d: 1 }]
        );
        // "w v w" with key (w, v).
        assert_eq!(
            pair_postings_for_doc(0, &[0, 2], &[1], 5),
            vec![Posting2 { id: 0, p: 0, d: 1 }, Posting2 { id: 0, p: 2, d: -1 }]
        );
    }

    #[test]
    fn window_excludes_anchor_position() {
        assert_eq!(window_positions(&[0, 2, 4], 2, 2), vec![0, 4]);
        assert_eq!(window_positions(&[2], 2, 5), Vec::<u32>::new());
    }
}
