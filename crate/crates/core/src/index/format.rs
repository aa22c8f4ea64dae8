//! On-disk index layout.
//!
//! An index directory holds `manifest` (JSON), `lexicon`, up to three family
//! files (`ordinary.idx`, `pairs.idx`, `triples.idx`), and `docs.repo`.
//!
//! Family file layout, little-endian, LEB128 varints throughout:
//!
//! ```text
//! magic "PFI1" | family byte (1=ordinary, 2=pair, 3=triple) | key_count
//! key table, keys ascending:  components (1/2/3 varints) | posting_count | block_len
//! posting blocks, concatenated in key order
//! ```
//!
//! Posting records are delta-coded per block with state reset at block start
//! (`prev_id = 0`, `prev_p = 0`): the document id is stored as a delta from
//! the previous record's id; the position as a delta within the same document
//! and absolute when the id changes; the signed component offsets zigzagged.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::index::postings::{Posting1, Posting2, Posting3};
use crate::index::varint::{read_varint, write_varint, zigzag_decode, zigzag_encode, VarintError};
use crate::lexicon::{Dictionary, FlList, Lexicon};

pub const FORMAT_VERSION: u32 = 1;
pub const FAMILY_MAGIC: [u8; 4] = *b"PFI1";
pub const LEXICON_MAGIC: [u8; 4] = *b"PFL1";
pub const REPO_MAGIC: [u8; 4] = *b"PFR1";

pub const MANIFEST_FILE: &str = "manifest";
pub const LEXICON_FILE: &str = "lexicon";
pub const ORDINARY_FILE: &str = "ordinary.idx";
pub const PAIRS_FILE: &str = "pairs.idx";
pub const TRIPLES_FILE: &str = "triples.idx";
pub const REPO_FILE: &str = "docs.repo";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Ordinary,
    Pair,
    Triple,
}

impl Family {
    pub fn code(self) -> u8 {
        match self {
            Family::Ordinary => 1,
            Family::Pair => 2,
            Family::Triple => 3,
        }
    }

    pub fn arity(self) -> usize {
        self.code() as usize
    }

    pub fn file_name(self) -> &'static str {
        match self {
            Family::Ordinary => ORDINARY_FILE,
            Family::Pair => PAIRS_FILE,
            Family::Triple => TRIPLES_FILE,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Family::Ordinary => "ordinary",
            Family::Pair => "pair",
            Family::Triple => "triple",
        }
    }

    pub fn from_code(code: u8) -> Option<Family> {
        match code {
            1 => Some(Family::Ordinary),
            2 => Some(Family::Pair),
            3 => Some(Family::Triple),
            _ => None,
        }
    }
}

// ---------------------------------------------------------------------------
// Record codecs
// ---------------------------------------------------------------------------

/// Delta state for one posting block.
#[derive(Debug, Clone, Copy, Default)]
pub struct DeltaState {
    pub prev_id: u32,
    pub prev_p: u32,
}

fn write_id_p(buf: &mut Vec<u8>, state: &mut DeltaState, id: u32, p: u32) {
    let id_delta = id - state.prev_id;
    write_varint(buf, id_delta as u64);
    if id_delta > 0 {
        write_varint(buf, p as u64);
    } else {
        write_varint(buf, (p - state.prev_p) as u64);
    }
    state.prev_id = id;
    state.prev_p = p;
}

fn read_id_p(
    bytes: &[u8],
    pos: &mut usize,
    state: &mut DeltaState,
) -> Result<(u32, u32), VarintError> {
    let id_delta = read_varint(bytes, pos)?;
    let id = state
        .prev_id
        .checked_add(u32::try_from(id_delta).map_err(|_| VarintError::Overflow)?)
        .ok_or(VarintError::Overflow)?;
    let p_raw = read_varint(bytes, pos)?;
    let p_raw = u32::try_from(p_raw).map_err(|_| VarintError::Overflow)?;
    let p = if id_delta > 0 {
        p_raw
    } else {
        state.prev_p.checked_add(p_raw).ok_or(VarintError::Overflow)?
    };
    state.prev_id = id;
    state.prev_p = p;
    Ok((id, p))
}

fn read_offset(bytes: &[u8], pos: &mut usize) -> Result<i32, VarintError> {
    let z = read_varint(bytes, pos)?;
    i32::try_from(zigzag_decode(z)).map_err(|_| VarintError::Overflow)
}

pub fn write_rec1(buf: &mut Vec<u8>, state: &mut DeltaState, rec: Posting1) {
    write_id_p(buf, state, rec.id, rec.p);
}

pub fn write_rec2(buf: &mut Vec<u8>, state: &mut DeltaState, rec: Posting2) {
    write_id_p(buf, state, rec.id, rec.p);
    write_varint(buf, zigzag_encode(rec.d as i64));
}

pub fn write_rec3(buf: &mut Vec<u8>, state: &mut DeltaState, rec: Posting3) {
    write_id_p(buf, state, rec.id, rec.p);
    write_varint(buf, zigzag_encode(rec.d1 as i64));
    write_varint(buf, zigzag_encode(rec.d2 as i64));
}

pub fn read_rec1(
    bytes: &[u8],
    pos: &mut usize,
    state: &mut DeltaState,
) -> Result<Posting1, VarintError> {
    let (id, p) = read_id_p(bytes, pos, state)?;
    Ok(Posting1 { id, p })
}

pub fn read_rec2(
    bytes: &[u8],
    pos: &mut usize,
    state: &mut DeltaState,
) -> Result<Posting2, VarintError> {
    let (id, p) = read_id_p(bytes, pos, state)?;
    let d = read_offset(bytes, pos)?;
    Ok(Posting2 { id, p, d })
}

pub fn read_rec3(
    bytes: &[u8],
    pos: &mut usize,
    state: &mut DeltaState,
) -> Result<Posting3, VarintError> {
    let (id, p) = read_id_p(bytes, pos, state)?;
    let d1 = read_offset(bytes, pos)?;
    let d2 = read_offset(bytes, pos)?;
    Ok(Posting3 { id, p, d1, d2 })
}

pub fn encode_block1(postings: &[Posting1]) -> Vec<u8> {
    let mut buf = Vec::with_capacity(postings.len() * 3);
    let mut state = DeltaState::default();
    for &rec in postings {
        write_rec1(&mut buf, &mut state, rec);
    }
    buf
}

pub fn encode_block2(postings: &[Posting2]) -> Vec<u8> {
    let mut buf = Vec::with_capacity(postings.len() * 4);
    let mut state = DeltaState::default();
    for &rec in postings {
        write_rec2(&mut buf, &mut state, rec);
    }
    buf
}

pub fn encode_block3(postings: &[Posting3]) -> Vec<u8> {
    let mut buf = Vec::with_capacity(postings.len() * 5);
    let mut state = DeltaState::default();
    for &rec in postings {
        write_rec3(&mut buf, &mut state, rec);
    }
    buf
}

pub fn decode_block1(bytes: &[u8], count: u64) -> Result<Vec<Posting1>, (u64, VarintError)> {
    let mut out = Vec::with_capacity(count as usize);
    let mut pos = 0;
    let mut state = DeltaState::default();
    for _ in 0..count {
        out.push(read_rec1(bytes, &mut pos, &mut state).map_err(|e| (pos as u64, e))?);
    }
    Ok(out)
}

pub fn decode_block2(bytes: &[u8], count: u64) -> Result<Vec<Posting2>, (u64, VarintError)> {
    let mut out = Vec::with_capacity(count as usize);
    let mut pos = 0;
    let mut state = DeltaState::default();
    for _ in 0..count {
        out.push(read_rec2(bytes, &mut pos, &mut state).map_err(|e| (pos as u64, e))?);
    }
    Ok(out)
}

pub fn decode_block3(bytes: &[u8], count: u64) -> Result<Vec<Posting3>, (u64, VarintError)> {
    let mut out = Vec::with_capacity(count as usize);
    let mut pos = 0;
    let mut state = DeltaState::default();
    for _ in 0..count {
        out.push(read_rec3(bytes, &mut pos, &mut state).map_err(|e| (pos as u64, e))?);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Key tables
// ---------------------------------------------------------------------------

/// One key table entry: padded component ids, posting count, and the block's
/// byte range relative to the posting area.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KeyEntry {
    pub key: [u32; 3],
    pub count: u64,
    pub offset: u64,
    pub len: u64,
}

#[derive(Debug)]
pub struct FamilyTable {
    pub family: Family,
    pub entries: Vec<KeyEntry>,
    /// Absolute file offset of the posting area.
    pub posting_base: u64,
}

impl FamilyTable {
    pub fn find(&self, key: [u32; 3]) -> Option<&KeyEntry> {
        self.entries
            .binary_search_by(|e| e.key.cmp(&key))
            .ok()
            .map(|i| &self.entries[i])
    }

    pub fn posting_count(&self) -> u64 {
        self.entries.iter().map(|e| e.count).sum()
    }
}

struct CountingReader<R> {
    inner: R,
    offset: u64,
}

impl<R: Read> CountingReader<R> {
    fn read_byte(&mut self) -> std::io::Result<Option<u8>> {
        let mut b = [0u8; 1];
        match self.inner.read(&mut b)? {
            0 => Ok(None),
            _ => {
                self.offset += 1;
                Ok(Some(b[0]))
            }
        }
    }

    fn read_exact(&mut self, buf: &mut [u8]) -> std::io::Result<()> {
        self.inner.read_exact(buf)?;
        self.offset += buf.len() as u64;
        Ok(())
    }

    fn read_varint(&mut self, path: &Path) -> Result<u64> {
        let mut value = 0u64;
        let mut shift = 0u32;
        loop {
            let byte = self
                .read_byte()?
                .ok_or_else(|| Error::format(path, self.offset, "truncated varint"))?;
            if shift == 63 && byte > 1 {
                return Err(Error::format(path, self.offset, "varint exceeds 64 bits"));
            }
            value |= u64::from(byte & 0x7f) << shift;
            if byte & 0x80 == 0 {
                return Ok(value);
            }
            shift += 7;
            if shift > 63 {
                return Err(Error::format(path, self.offset, "varint exceeds 64 bits"));
            }
        }
    }
}

/// Parse a family file's header and key table, leaving posting blocks on disk.
pub fn read_family_table(path: &Path) -> Result<FamilyTable> {
    let file = File::open(path)?;
    let mut r = CountingReader {
        inner: BufReader::new(file),
        offset: 0,
    };
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)
        .map_err(|_| Error::format(path, 0, "file too short for magic"))?;
    if magic != FAMILY_MAGIC {
        return Err(Error::format(path, 0, "bad magic"));
    }
    let mut code = [0u8; 1];
    r.read_exact(&mut code)?;
    let family = Family::from_code(code[0])
        .ok_or_else(|| Error::format(path, 4, format!("unknown family code {}", code[0])))?;
    let key_count = r.read_varint(path)?;
    let arity = family.arity();
    let mut entries = Vec::with_capacity(key_count.min(1 << 24) as usize);
    let mut offset = 0u64;
    let mut prev_key = [0u32; 3];
    for i in 0..key_count {
        let mut key = [0u32; 3];
        for slot in key.iter_mut().take(arity) {
            let v = r.read_varint(path)?;
            *slot = u32::try_from(v)
                .map_err(|_| Error::format(path, r.offset, "lemma id exceeds 32 bits"))?;
        }
        if i > 0 && key <= prev_key {
            return Err(Error::format(path, r.offset, "key table not ascending"));
        }
        prev_key = key;
        let count = r.read_varint(path)?;
        let len = r.read_varint(path)?;
        entries.push(KeyEntry {
            key,
            count,
            offset,
            len,
        });
        offset += len;
    }
    Ok(FamilyTable {
        family,
        entries,
        posting_base: r.offset,
    })
}

/// Write a complete family file: header, key table, then the posting area
/// streamed from `blocks`.
pub fn write_family_file(
    path: &Path,
    family: Family,
    entries: &[(u32, u32, u32, u64, u64)], // (k0, k1, k2, count, block_len)
    blocks: &mut impl Read,
) -> Result<u64> {
    let mut header = Vec::new();
    header.extend_from_slice(&FAMILY_MAGIC);
    header.push(family.code());
    write_varint(&mut header, entries.len() as u64);
    let arity = family.arity();
    for &(k0, k1, k2, count, len) in entries {
        let comps = [k0, k1, k2];
        for &c in comps.iter().take(arity) {
            write_varint(&mut header, c as u64);
        }
        write_varint(&mut header, count);
        write_varint(&mut header, len);
    }
    let file = File::create(path)?;
    let mut w = BufWriter::new(file);
    w.write_all(&header)?;
    let copied = std::io::copy(blocks, &mut w)?;
    w.flush()?;
    Ok(header.len() as u64 + copied)
}

// ---------------------------------------------------------------------------
// Manifest
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct FamilyStats {
    pub key_count: u64,
    pub posting_count: u64,
    pub bytes: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub format_version: u32,
    pub max_distance: u32,
    pub sw_count: u32,
    pub fu_count: u32,
    pub doc_count: u32,
    pub lemma_count: u32,
    pub families: BTreeMap<String, FamilyStats>,
    pub checksums: BTreeMap<String, String>,
}

impl Manifest {
    pub fn write(&self, dir: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self)?;
        std::fs::write(dir.join(MANIFEST_FILE), json + "\n")?;
        Ok(())
    }

    pub fn read(dir: &Path) -> Result<Manifest> {
        let path = dir.join(MANIFEST_FILE);
        let text = std::fs::read_to_string(&path)?;
        let manifest: Manifest = serde_json::from_str(&text)?;
        if manifest.format_version != FORMAT_VERSION {
            return Err(Error::format(
                &path,
                0,
                format!("unsupported format version {}", manifest.format_version),
            ));
        }
        Ok(manifest)
    }
}

pub fn sha256_file(path: &Path) -> Result<String> {
    use sha2::{Digest, Sha256};
    let mut file = File::open(path)?;
    let mut hasher = Sha256::new();
    std::io::copy(&mut file, &mut hasher)?;
    let digest = hasher.finalize();
    let mut hex = String::with_capacity(64);
    for byte in digest {
        use std::fmt::Write;
        write!(hex, "{byte:02x}").expect("writing to string");
    }
    Ok(hex)
}

// ---------------------------------------------------------------------------
// Lexicon section
// ---------------------------------------------------------------------------

/// Persist the lemma table (text, rank, count per id) plus the dictionary the
/// index was built with, so queries lemmatize identically.
pub fn write_lexicon(path: &Path, lexicon: &Lexicon, dict: &Dictionary) -> Result<()> {
    let mut buf = Vec::new();
    buf.extend_from_slice(&LEXICON_MAGIC);
    write_varint(&mut buf, lexicon.len() as u64);
    for id in 0..lexicon.len() as u32 {
        let id = crate::lexicon::LemmaId(id);
        let text = lexicon.text_of(id);
        write_varint(&mut buf, text.len() as u64);
        buf.extend_from_slice(text.as_bytes());
        write_varint(&mut buf, lexicon.fl_list().fl(id) as u64);
        write_varint(&mut buf, lexicon.count_of(id));
    }
    let mut entries: Vec<(&str, &[String])> = dict.entries().collect();
    entries.sort_by(|a, b| a.0.cmp(b.0));
    write_varint(&mut buf, entries.len() as u64);
    for (word, lemmas) in entries {
        write_varint(&mut buf, word.len() as u64);
        buf.extend_from_slice(word.as_bytes());
        write_varint(&mut buf, lemmas.len() as u64);
        for lemma in lemmas {
            write_varint(&mut buf, lemma.len() as u64);
            buf.extend_from_slice(lemma.as_bytes());
        }
    }
    std::fs::write(path, buf)?;
    Ok(())
}

pub fn read_lexicon(path: &Path) -> Result<(Lexicon, Dictionary)> {
    let bytes = std::fs::read(path)?;
    let mut pos = 0usize;
    if bytes.len() < 4 || bytes[..4] != LEXICON_MAGIC {
        return Err(Error::format(path, 0, "bad magic"));
    }
    pos += 4;
    let err = |pos: usize, e: VarintError| Error::format(path, pos as u64, e.to_string());
    let read_str = |bytes: &[u8], pos: &mut usize| -> Result<String> {
        let len = read_varint(bytes, pos).map_err(|e| err(*pos, e))? as usize;
        let end = pos
            .checked_add(len)
            .filter(|&e| e <= bytes.len())
            .ok_or_else(|| Error::format(path, *pos as u64, "string runs past end of file"))?;
        let s = std::str::from_utf8(&bytes[*pos..end])
            .map_err(|_| Error::format(path, *pos as u64, "invalid utf-8"))?
            .to_owned();
        *pos = end;
        Ok(s)
    };

    let lemma_count = read_varint(&bytes, &mut pos).map_err(|e| err(pos, e))? as usize;
    let mut texts = Vec::with_capacity(lemma_count);
    let mut ranks = Vec::with_capacity(lemma_count);
    let mut counts = Vec::with_capacity(lemma_count);
    for _ in 0..lemma_count {
        texts.push(read_str(&bytes, &mut pos)?);
        let fl = read_varint(&bytes, &mut pos).map_err(|e| err(pos, e))?;
        ranks.push(u32::try_from(fl).map_err(|_| Error::format(path, pos as u64, "rank overflow"))?);
        counts.push(read_varint(&bytes, &mut pos).map_err(|e| err(pos, e))?);
    }
    let lexicon = Lexicon::from_parts(texts, counts, FlList::from_ranks(ranks));

    let mut dict = Dictionary::new();
    let entry_count = read_varint(&bytes, &mut pos).map_err(|e| err(pos, e))? as usize;
    for _ in 0..entry_count {
        let word = read_str(&bytes, &mut pos)?;
        let n = read_varint(&bytes, &mut pos).map_err(|e| err(pos, e))? as usize;
        let mut lemmas = Vec::with_capacity(n);
        for _ in 0..n {
            lemmas.push(read_str(&bytes, &mut pos)?);
        }
        dict.insert(word, lemmas);
    }
    Ok((lexicon, dict))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn block3_roundtrip_golden() {
        let postings = vec![
            Posting3 { id: 0, p: 0, d1: 1, d2: 2 },
            Posting3 { id: 0, p: 0, d1: 5, d2: 6 },
            Posting3 { id: 0, p: 4, d1: -3, d2: -2 },
            Posting3 { id: 0, p: 4, d1: 1, d2: 2 },
        ];
        let block = encode_block3(&postings);
        let decoded = decode_block3(&block, postings.len() as u64).unwrap();
        assert_eq!(decoded, postings);
    }

    #[test]
    fn block_decode_truncated_reports_offset() {
        let postings = vec![Posting1 { id: 3, p: 700 }];
        let block = encode_block1(&postings);
        let e = decode_block1(&block[..block.len() - 1], 1).unwrap_err();
        assert_eq!(e.1, VarintError::Truncated);
    }

    fn sorted_p3(max_doc: u32) -> impl Strategy<Value = Vec<Posting3>> {
        prop::collection::vec(
            (0..max_doc, 0u32..10_000, -31i32..=31, -31i32..=31),
            0..200,
        )
        .prop_map(|mut v| {
            v.sort_unstable();
            v.dedup();
            v.into_iter()
                .map(|(id, p, d1, d2)| Posting3 {
                    id,
                    p,
                    d1: if d1 == 0 { 1 } else { d1 },
                    d2: if d2 == 0 { 1 } else { d2 },
                })
                .collect()
        })
    }

    proptest! {
        #[test]
        fn block3_roundtrip(postings in sorted_p3(50)) {
            let block = encode_block3(&postings);
            let decoded = decode_block3(&block, postings.len() as u64).unwrap();
            prop_assert_eq!(decoded, postings);
        }
    }
}
