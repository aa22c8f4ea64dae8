//! Length-bounded binary min-heap that re-sorts the near-sorted projection
//! streams of the second and third key components.
//!
//! Postings arrive grouped by anchor position, and within one anchor the
//! projections `p + d` are already ascending. The heap therefore merges one
//! ascending *run* per anchor: each entry is the head of a live run, `PopMin`
//! emits the smallest head and advances its run. Merging at run granularity
//! is what makes the `2 * max_distance` length bound sound: whenever more
//! runs are live, the oldest run's anchor trails the current one by more than
//! `2 * max_distance`, so its values can no longer be undercut (`|d| <=
//! max_distance` both ways) and flushing the minimum is safe. A heap of bare
//! values has no such bound; streams with repeated or co-located key
//! components overflow any fixed value count.
//!
//! Flushing whenever the length exceeds the bound keeps emitted values
//! nondecreasing; the drain after the last posting finishes the merge.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

/// Min-heap over ascending runs, at most `2 * max_distance` of them live at
/// any steady state.
#[derive(Debug)]
pub struct BoundedMinHeap {
    /// (head value, run id); the id keeps equal heads deterministic.
    heap: BinaryHeap<Reverse<(u32, usize)>>,
    /// Run values plus the index of the next unread one.
    runs: Vec<(Vec<u32>, usize)>,
    capacity: usize,
    ops: u64,
}

impl BoundedMinHeap {
    pub fn for_max_distance(max_distance: u32) -> BoundedMinHeap {
        let capacity = 2 * max_distance as usize;
        BoundedMinHeap {
            heap: BinaryHeap::with_capacity(capacity + 1),
            runs: Vec::new(),
            capacity,
            ops: 0,
        }
    }

    /// Add one anchor's ascending projection run.
    pub fn push_run(&mut self, run: Vec<u32>) {
        if run.is_empty() {
            return;
        }
        debug_assert!(run.windows(2).all(|w| w[0] <= w[1]));
        self.ops += 1;
        let id = self.runs.len();
        let head = run[0];
        self.runs.push((run, 1));
        self.heap.push(Reverse((head, id)));
    }

    /// Remove and return the smallest pending value.
    pub fn pop_min(&mut self) -> Option<u32> {
        let Reverse((value, id)) = self.heap.pop()?;
        self.ops += 1;
        let (run, next) = &mut self.runs[id];
        if *next < run.len() {
            let head = run[*next];
            *next += 1;
            self.ops += 1;
            self.heap.push(Reverse((head, id)));
        }
        Some(value)
    }

    /// Number of live runs.
    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Push/pop operations so far.
    pub fn ops(&self) -> u64 {
        self.ops
    }
}
