//! The in-document search loop over intermediate posting lists.

use serde::{Deserialize, Serialize};

use crate::query::fill::IntermediateList;

/// One search hit: a text window of document `did` spanning word positions
/// `s..=e` that contains every query lemma.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Fragment {
    pub did: u32,
    pub s: u32,
    pub e: u32,
}

/// Walk one intermediate list per query-lemma ordinal and emit fragments.
///
/// Each round takes `s` = the minimum current value and `e` = the maximum;
/// the minimum list advances, and a fragment is emitted whenever that list
/// jumps past `e`. Ties pick the lowest ordinal. With `emit_final` set the
/// window still open when the minimum list runs out is emitted too.
///
/// A document with any empty list yields no fragments.
pub fn search_in_document(
    lists: &mut [IntermediateList],
    did: u32,
    emit_final: bool,
    out: &mut Vec<Fragment>,
) {
    if lists.is_empty() || lists.iter().any(IntermediateList::is_empty) {
        return;
    }
    loop {
        let mut min_idx = 0;
        let mut s = lists[0].value();
        let mut e = lists[0].value();
        for (i, list) in lists.iter().enumerate().skip(1) {
            let v = list.value();
            if v < s {
                s = v;
                min_idx = i;
            }
            if v > e {
                e = v;
            }
        }
        let (s, e) = (s as u32, e as u32);
        if !lists[min_idx].has_more() {
            if emit_final {
                out.push(Fragment { did, s, e });
            }
            return;
        }
        lists[min_idx].next();
        if lists[min_idx].value() > e as u64 {
            out.push(Fragment { did, s, e });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(lists: Vec<Vec<u32>>, emit_final: bool) -> Vec<(u32, u32)> {
        let mut ils: Vec<IntermediateList> =
            lists.into_iter().map(IntermediateList::from_sorted).collect();
        let mut out = Vec::new();
        search_in_document(&mut ils, 0, emit_final, &mut out);
        out.into_iter().map(|f| (f.s, f.e)).collect()
    }

    #[test]
    fn golden_to_be_or() {
        let got = run(
            vec![vec![0, 0, 4, 4], vec![1, 1, 5, 5], vec![2, 2, 6, 6]],
            true,
        );
        assert_eq!(got, vec![(0, 2), (1, 4), (2, 5), (4, 6)]);
    }

    #[test]
    fn golden_to_be_or_without_final_window() {
        let got = run(
            vec![vec![0, 0, 4, 4], vec![1, 1, 5, 5], vec![2, 2, 6, 6]],
            false,
        );
        assert_eq!(got, vec![(0, 2), (1, 4), (2, 5)]);
    }

    #[test]
    fn single_lemma_emits_each_occurrence() {
        assert_eq!(run(vec![vec![7]], true), vec![(7, 7)]);
        assert_eq!(run(vec![vec![2, 9]], true), vec![(2, 2), (9, 9)]);
    }

    #[test]
    fn no_width_limit() {
        assert_eq!(run(vec![vec![0], vec![100]], true), vec![(0, 100)]);
    }

    #[test]
    fn empty_list_skips_document() {
        assert_eq!(run(vec![vec![1, 2], vec![]], true), Vec::<(u32, u32)>::new());
    }
}
