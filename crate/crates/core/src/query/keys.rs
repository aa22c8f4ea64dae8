//! Key selection: carve a subquery into normalized three-component keys.
//!
//! Lemmas are taken three at a time; when the length is not a multiple of
//! three the last key is formed from the final three lemmas, and its slots
//! that repeat already-covered query ordinals are starred. Starred slots keep
//! participating in the key (the index is looked up by the full normalized
//! triple) but produce no intermediate list.

use crate::index::postings::{PairKey, TripleKey};
use crate::lexicon::{FlList, LemmaId};

/// One slot of a selected key: which query-lemma ordinal it carries and
/// whether an earlier key already covers that ordinal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KeySlot {
    pub ordinal: usize,
    pub starred: bool,
}

impl KeySlot {
    /// Ordinal to fill, unless starred.
    pub fn target(&self) -> Option<usize> {
        (!self.starred).then_some(self.ordinal)
    }
}

/// A normalized triple key with its slot-to-ordinal bindings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SelectedKey {
    pub key: TripleKey,
    pub slots: [KeySlot; 3],
}

/// Subqueries shorter than three lemmas cannot use triple keys.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NotApplicable;

/// Select and normalize the triple keys covering `sub`.
pub fn select_keys(sub: &[LemmaId], fl: &FlList) -> Result<Vec<SelectedKey>, NotApplicable> {
    let m = sub.len();
    if m < 3 {
        return Err(NotApplicable);
    }
    let full_chunks = m / 3;
    let covered = full_chunks * 3;
    // Ordinal chunks plus, for lengths not divisible by three, a final key
    // over the last three lemmas whose already-covered ordinals are starred.
    let mut chunks: Vec<([usize; 3], usize)> = (0..full_chunks)
        .map(|c| ([3 * c, 3 * c + 1, 3 * c + 2], 0))
        .collect();
    if m % 3 != 0 {
        chunks.push(([m - 3, m - 2, m - 1], covered));
    }
    let keys = chunks
        .iter()
        .map(|&(ordinals, star_below)| {
            let mut slots: Vec<(LemmaId, usize)> =
                ordinals.iter().map(|&o| (sub[o], o)).collect();
            // Normalized component order: rank ascending, lemma id then
            // ordinal as deterministic tie-breaks.
            slots.sort_by_key(|&(id, o)| (fl.ord_key(id), o));
            SelectedKey {
                key: TripleKey {
                    f: slots[0].0,
                    s: slots[1].0,
                    t: slots[2].0,
                },
                slots: [
                    KeySlot { ordinal: slots[0].1, starred: slots[0].1 < star_below },
                    KeySlot { ordinal: slots[1].1, starred: slots[1].1 < star_below },
                    KeySlot { ordinal: slots[2].1, starred: slots[2].1 < star_below },
                ],
            }
        })
        .collect();
    Ok(keys)
}

/// The two-component access plan for one triple key: the anchor component
/// paired with each of the other two. Intersecting both lists on the anchor
/// position recovers exactly the triple key's postings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairChunk {
    /// (f, s): anchor with the second component.
    pub fs: PairKey,
    /// (f, t): anchor with the third component.
    pub ft: PairKey,
    /// Slot bindings of the underlying triple key.
    pub slots: [KeySlot; 3],
}

impl PairChunk {
    pub fn from_selected(key: &SelectedKey) -> PairChunk {
        PairChunk {
            fs: PairKey {
                w: key.key.f,
                v: key.key.s,
            },
            ft: PairKey {
                w: key.key.f,
                v: key.key.t,
            },
            slots: key.slots,
        }
    }

    /// Both pair keys coincide when the second and third components are the
    /// same lemma; a single posting list then serves both sides.
    pub fn same_key(&self) -> bool {
        self.fs == self.ft
    }
}

/// The single pair key of a two-lemma subquery.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SelectedPairKey {
    pub key: PairKey,
    pub slots: [KeySlot; 2],
}

pub fn select_pair_key(sub: &[LemmaId], fl: &FlList) -> Result<SelectedPairKey, NotApplicable> {
    if sub.len() != 2 {
        return Err(NotApplicable);
    }
    let mut slots = [(sub[0], 0usize), (sub[1], 1)];
    slots.sort_by_key(|&(id, o)| (fl.ord_key(id), o));
    Ok(SelectedPairKey {
        key: PairKey {
            w: slots[0].0,
            v: slots[1].0,
        },
        slots: [
            KeySlot { ordinal: slots[0].1, starred: false },
            KeySlot { ordinal: slots[1].1, starred: false },
        ],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// who=293, are=268, you=47, and=100, why=200, do=150, say=180, what=120.
    fn fixture() -> (FlList, std::collections::HashMap<&'static str, LemmaId>) {
        let words = [
            ("who", 293u32),
            ("are", 268),
            ("you", 47),
            ("and", 100),
            ("why", 200),
            ("do", 150),
            ("say", 180),
            ("what", 120),
        ];
        let mut ranks = vec![u32::MAX; words.len()];
        let mut ids = std::collections::HashMap::new();
        for (i, (w, r)) in words.iter().enumerate() {
            ranks[i] = *r;
            ids.insert(*w, LemmaId(i as u32));
        }
        (FlList::from_ranks(ranks), ids)
    }

    fn names(key: &SelectedKey, ids: &std::collections::HashMap<&str, LemmaId>) -> [String; 3] {
        let name = |id: LemmaId| {
            ids.iter()
                .find(|(_, &v)| v == id)
                .map(|(k, _)| k.to_string())
                .unwrap()
        };
        [name(key.key.f), name(key.key.s), name(key.key.t)]
    }

    #[test]
    fn who_are_you_who() {
        let (fl, ids) = fixture();
        let sub = [ids["who"], ids["are"], ids["you"], ids["who"]];
        let keys = select_keys(&sub, &fl).unwrap();
        assert_eq!(keys.len(), 2);
        assert_eq!(names(&keys[0], &ids), ["you", "are", "who"]);
        assert_eq!(
            keys[0].slots.map(|s| (s.ordinal, s.starred)),
            [(2, false), (1, false), (0, false)]
        );
        assert_eq!(names(&keys[1], &ids), ["you", "are", "who"]);
        assert_eq!(
            keys[1].slots.map(|s| (s.ordinal, s.starred)),
            [(2, true), (1, true), (3, false)]
        );
    }

    #[test]
    fn hornblower_eleven_lemmas() {
        let (fl, ids) = fixture();
        let sub = [
            ids["who"], ids["are"], ids["you"], ids["and"], ids["why"], ids["do"],
            ids["you"], ids["say"], ids["what"], ids["you"], ids["do"],
        ];
        let keys = select_keys(&sub, &fl).unwrap();
        assert_eq!(keys.len(), 4);
        assert_eq!(names(&keys[0], &ids), ["you", "are", "who"]);
        assert_eq!(names(&keys[1], &ids), ["and", "do", "why"]);
        assert_eq!(names(&keys[2], &ids), ["you", "what", "say"]);
        assert_eq!(names(&keys[3], &ids), ["you", "what", "do"]);
        let starred: Vec<(usize, bool)> =
            keys[3].slots.iter().map(|s| (s.ordinal, s.starred)).collect();
        assert_eq!(starred, vec![(9, false), (8, true), (10, false)]);
    }

    #[test]
    fn exact_multiple_no_stars() {
        let (fl, ids) = fixture();
        let sub = [ids["who"], ids["are"], ids["you"]];
        let keys = select_keys(&sub, &fl).unwrap();
        assert_eq!(keys.len(), 1);
        assert!(keys[0].slots.iter().all(|s| !s.starred));
    }

    #[test]
    fn five_lemmas_star_overlap() {
        let (fl, ids) = fixture();
        let sub = [ids["who"], ids["are"], ids["you"], ids["and"], ids["why"]];
        let keys = select_keys(&sub, &fl).unwrap();
        assert_eq!(keys.len(), 2);
        let starred: Vec<usize> = keys[1]
            .slots
            .iter()
            .filter(|s| s.starred)
            .map(|s| s.ordinal)
            .collect();
        assert_eq!(starred, vec![2]);
    }

    #[test]
    fn too_short() {
        let (fl, ids) = fixture();
        assert_eq!(select_keys(&[ids["who"]], &fl), Err(NotApplicable));
        assert_eq!(select_keys(&[ids["who"], ids["are"]], &fl), Err(NotApplicable));
    }
}
