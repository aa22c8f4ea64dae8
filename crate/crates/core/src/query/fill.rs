//! Intermediate posting lists and the streaming fill that builds them from
//! key postings.
//!
//! Postings arrive ordered by anchor position. The anchor slot's projections
//! are therefore already nondecreasing and append directly; the other slots'
//! projections form one ascending run per anchor and pass through a
//! [`BoundedMinHeap`] that flushes its minimum whenever more than
//! `2 * max_distance` runs are live, restoring order. Starred slots are
//! covered by an earlier key and produce no list.

use crate::index::cursor::Cursor3;
use crate::index::postings::Posting3;
use crate::query::heap::BoundedMinHeap;
use crate::query::keys::SelectedKey;

pub const EXHAUSTED: u64 = u64::MAX;

/// Per-query-lemma sorted position stream with a read cursor.
#[derive(Debug, Clone)]
pub struct IntermediateList {
    positions: Vec<u32>,
    cursor: usize,
}

impl IntermediateList {
    /// Wrap an already nondecreasing position list.
    pub fn from_sorted(positions: Vec<u32>) -> IntermediateList {
        debug_assert!(positions.windows(2).all(|w| w[0] <= w[1]));
        IntermediateList {
            positions,
            cursor: 0,
        }
    }

    /// Current position, or [`EXHAUSTED`] once all records are read.
    pub fn value(&self) -> u64 {
        self.positions
            .get(self.cursor)
            .map(|&p| p as u64)
            .unwrap_or(EXHAUSTED)
    }

    /// True while records remain past the current one.
    pub fn has_more(&self) -> bool {
        self.cursor + 1 < self.positions.len()
    }

    pub fn next(&mut self) {
        self.cursor += 1;
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[u32] {
        &self.positions
    }
}

/// Heap accounting across one subquery evaluation.
#[derive(Debug, Default, Clone, Copy)]
pub struct HeapStats {
    pub ops: u64,
    /// Largest steady-state heap length observed (after each flush).
    pub max_len: usize,
}

/// Builds the unstarred slots' intermediate lists for one key in one document.
pub struct KeyFiller<'a> {
    /// Target ordinal per slot; None for starred slots.
    targets: [Option<usize>; 3],
    heaps: [Option<BoundedMinHeap>; 2],
    /// The current anchor's projection run per heap slot.
    pending: [Vec<u32>; 2],
    current_anchor: Option<u32>,
    lists: &'a mut [Vec<u32>],
    max_len: usize,
}

impl<'a> KeyFiller<'a> {
    pub fn new(key: &SelectedKey, max_distance: u32, lists: &'a mut [Vec<u32>]) -> KeyFiller<'a> {
        Self::with_targets(
            [
                key.slots[0].target(),
                key.slots[1].target(),
                key.slots[2].target(),
            ],
            max_distance,
            lists,
        )
    }

    /// Two-slot form for pair keys; the posting's `d2` is ignored.
    pub fn for_pair(
        w_ordinal: usize,
        v_ordinal: usize,
        max_distance: u32,
        lists: &'a mut [Vec<u32>],
    ) -> KeyFiller<'a> {
        Self::with_targets([Some(w_ordinal), Some(v_ordinal), None], max_distance, lists)
    }

    fn with_targets(
        targets: [Option<usize>; 3],
        max_distance: u32,
        lists: &'a mut [Vec<u32>],
    ) -> KeyFiller<'a> {
        let heap = |need: bool| need.then(|| BoundedMinHeap::for_max_distance(max_distance));
        KeyFiller {
            targets,
            heaps: [heap(targets[1].is_some()), heap(targets[2].is_some())],
            pending: [Vec::new(), Vec::new()],
            current_anchor: None,
            lists,
            max_len: 0,
        }
    }

    pub fn push(&mut self, posting: Posting3) {
        if self.current_anchor != Some(posting.p) {
            self.seal_runs();
            self.current_anchor = Some(posting.p);
        }
        if let Some(ordinal) = self.targets[0] {
            self.lists[ordinal].push(posting.p);
        }
        for (slot, projected) in [(1usize, posting.second()), (2, posting.third())] {
            if self.targets[slot].is_some() {
                self.pending[slot - 1].push(projected);
            }
        }
    }

    /// Hand the finished anchor runs to the heaps and flush past the bound.
    fn seal_runs(&mut self) {
        for slot in [1usize, 2] {
            if let Some(ordinal) = self.targets[slot] {
                let run = std::mem::take(&mut self.pending[slot - 1]);
                if run.is_empty() {
                    continue;
                }
                let heap = self.heaps[slot - 1].as_mut().expect("heap for unstarred slot");
                heap.push_run(run);
                while heap.len() > heap.capacity() {
                    let min = heap.pop_min().expect("overfull heap");
                    self.lists[ordinal].push(min);
                }
                self.max_len = self.max_len.max(heap.len());
            }
        }
    }

    /// Drain the heaps in ascending order once the document's postings end.
    pub fn finish(mut self) -> HeapStats {
        self.seal_runs();
        let mut ops = 0;
        for slot in [1usize, 2] {
            if let (Some(ordinal), Some(heap)) = (self.targets[slot], self.heaps[slot - 1].as_mut())
            {
                while let Some(min) = heap.pop_min() {
                    self.lists[ordinal].push(min);
                }
            }
        }
        for heap in self.heaps.iter().flatten() {
            ops += heap.ops();
        }
        HeapStats {
            ops,
            max_len: self.max_len,
        }
    }
}

/// Consume all of `cursor`'s postings for document `did` into the key's
/// unstarred intermediate lists.
///
/// The cursor must stand on a posting of `did`; afterwards it stands on the
/// first posting of a later document (or is exhausted).
pub fn fill_intermediate_lists(
    cursor: &mut Cursor3,
    did: u32,
    key: &SelectedKey,
    max_distance: u32,
    lists: &mut [Vec<u32>],
) -> crate::error::Result<HeapStats> {
    assert_eq!(
        cursor.value().map(|p| p.id),
        Some(did),
        "fill called with a cursor not aligned at the document"
    );
    let mut filler = KeyFiller::new(key, max_distance, lists);
    while let Some(&posting) = cursor.value() {
        if posting.id != did {
            break;
        }
        filler.push(posting);
        cursor.advance()?;
    }
    Ok(filler.finish())
}
