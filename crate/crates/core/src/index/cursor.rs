//! Sequential posting cursors over one key's block.
//!
//! A freshly opened cursor is positioned before its first posting; `advance`
//! decodes the next record and counts it. Records come back in strictly
//! increasing (id, p, offsets) order because blocks are stored that way.

use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::index::format::{read_rec1, read_rec2, read_rec3, DeltaState};
use crate::index::postings::{Posting1, Posting2, Posting3};

/// Document-id view of a cursor, what `equalize` needs.
pub trait DocCursor {
    /// Document id of the current posting, if any.
    fn current_doc(&self) -> Option<u32>;
    /// Decode the next posting; false once the list is exhausted.
    fn step(&mut self) -> Result<bool>;
    fn postings_read(&self) -> u64;
    fn bytes_read(&self) -> u64;
}

macro_rules! cursor_type {
    ($name:ident, $posting:ty, $read:ident) => {
        #[derive(Debug)]
        pub struct $name {
            block: Vec<u8>,
            pos: usize,
            remaining: u64,
            state: DeltaState,
            current: Option<$posting>,
            postings_read: u64,
            /// File + absolute offset of the block, for error reporting.
            file: PathBuf,
            base_offset: u64,
        }

        impl $name {
            pub fn new(block: Vec<u8>, count: u64, file: PathBuf, base_offset: u64) -> Self {
                Self {
                    block,
                    pos: 0,
                    remaining: count,
                    state: DeltaState::default(),
                    current: None,
                    postings_read: 0,
                    file,
                    base_offset,
                }
            }

            /// A cursor with nothing to read (absent key).
            pub fn exhausted() -> Self {
                Self::new(Vec::new(), 0, PathBuf::new(), 0)
            }

            pub fn value(&self) -> Option<&$posting> {
                self.current.as_ref()
            }

            /// Decode and return the next posting, or None at the end.
            pub fn advance(&mut self) -> Result<Option<&$posting>> {
                if self.remaining == 0 {
                    self.current = None;
                    return Ok(None);
                }
                let rec = $read(&self.block, &mut self.pos, &mut self.state).map_err(|e| {
                    Error::format(
                        &self.file,
                        self.base_offset + self.pos as u64,
                        e.to_string(),
                    )
                })?;
                self.remaining -= 1;
                self.postings_read += 1;
                self.current = Some(rec);
                Ok(self.current.as_ref())
            }
        }

        impl DocCursor for $name {
            fn current_doc(&self) -> Option<u32> {
                self.current.as_ref().map(|p| p.id)
            }

            fn step(&mut self) -> Result<bool> {
                Ok(self.advance()?.is_some())
            }

            fn postings_read(&self) -> u64 {
                self.postings_read
            }

            fn bytes_read(&self) -> u64 {
                self.pos as u64
            }
        }
    };
}

cursor_type!(Cursor1, Posting1, read_rec1);
cursor_type!(Cursor2, Posting2, read_rec2);
cursor_type!(Cursor3, Posting3, read_rec3);

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index::format::{encode_block1, encode_block3};

    #[test]
    fn cursor_reads_exactly_count_postings() {
        let postings = vec![
            Posting1 { id: 0, p: 1 },
            Posting1 { id: 0, p: 9 },
            Posting1 { id: 4, p: 2 },
        ];
        let block = encode_block1(&postings);
        let mut cur = Cursor1::new(block.clone(), 3, PathBuf::from("t"), 0);
        assert!(cur.value().is_none());
        let mut got = Vec::new();
        while let Some(p) = cur.advance().unwrap() {
            got.push(*p);
        }
        assert_eq!(got, postings);
        assert_eq!(cur.postings_read(), 3);
        assert_eq!(cur.bytes_read(), block.len() as u64);
        assert!(cur.advance().unwrap().is_none());
    }

    #[test]
    fn exhausted_cursor() {
        let mut cur = Cursor3::exhausted();
        assert!(cur.value().is_none());
        assert!(cur.advance().unwrap().is_none());
        assert_eq!(cur.postings_read(), 0);
    }

    #[test]
    fn corrupt_block_reports_file_offset() {
        let postings = vec![
            Posting3 { id: 1, p: 700, d1: 3, d2: -4 },
            Posting3 { id: 9, p: 800, d1: 1, d2: 1 },
        ];
        let block = encode_block3(&postings);
        let truncated = block[..block.len() - 1].to_vec();
        let mut cur = Cursor3::new(truncated, 2, PathBuf::from("triples.idx"), 100);
        cur.advance().unwrap();
        let err = cur.advance().unwrap_err();
        match err {
            Error::Format { file, offset, .. } => {
                assert_eq!(file, PathBuf::from("triples.idx"));
                assert!(offset > 100);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }
}
