//! A second, independent decoder for the index byte format, written against
//! the documented layout only:
//!
//! Family file: magic "PFI1", family byte (1/2/3 = component count), key
//! count as LEB128; key table entries of component ids (arity varints),
//! posting count, block length; then the posting blocks in key order.
//!
//! Posting block (state resets per block, prev_id = prev_p = 0): per record a
//! LEB128 id delta from the previous record's id; the position, absolute when
//! the id changed and a delta from the previous position otherwise; then one
//! zigzag LEB128 signed offset per extra key component.

/// Decoded posting: id, position, and up to two signed offsets (0 when the
/// family has fewer components).
pub type FlatPosting = (u32, u32, i64, i64);

pub struct DecodedFamily {
    pub family: u8,
    pub keys: Vec<DecodedKey>,
}

pub struct DecodedKey {
    pub key: Vec<u32>,
    pub postings: Vec<FlatPosting>,
}

fn uleb128(bytes: &[u8], pos: &mut usize) -> u64 {
    let mut value = 0u64;
    let mut shift = 0;
    loop {
        let byte = bytes[*pos];
        *pos += 1;
        value |= u64::from(byte & 0x7f) << shift;
        if byte & 0x80 == 0 {
            return value;
        }
        shift += 7;
        assert!(shift < 64, "varint too long");
    }
}

fn unzigzag(v: u64) -> i64 {
    ((v >> 1) as i64) ^ -((v & 1) as i64)
}

/// Decode `count` records of a posting block with `arity` key components.
/// Returns the records and the number of bytes consumed.
pub fn decode_block(bytes: &[u8], count: u64, arity: usize) -> (Vec<FlatPosting>, usize) {
    let mut pos = 0usize;
    let mut prev_id = 0u32;
    let mut prev_p = 0u32;
    let mut out = Vec::with_capacity(count as usize);
    for _ in 0..count {
        let id_delta = uleb128(bytes, &mut pos) as u32;
        let id = prev_id + id_delta;
        let p_raw = uleb128(bytes, &mut pos) as u32;
        let p = if id_delta > 0 { p_raw } else { prev_p + p_raw };
        let d1 = if arity >= 2 {
            unzigzag(uleb128(bytes, &mut pos))
        } else {
            0
        };
        let d2 = if arity >= 3 {
            unzigzag(uleb128(bytes, &mut pos))
        } else {
            0
        };
        out.push((id, p, d1, d2));
        prev_id = id;
        prev_p = p;
    }
    (out, pos)
}

/// Decode a whole family file.
pub fn decode_family_file(bytes: &[u8]) -> DecodedFamily {
    assert_eq!(&bytes[..4], b"PFI1", "bad family file magic");
    let family = bytes[4];
    let arity = family as usize;
    assert!((1..=3).contains(&arity), "bad family byte");
    let mut pos = 5usize;
    let key_count = uleb128(bytes, &mut pos);
    let mut table = Vec::with_capacity(key_count as usize);
    for _ in 0..key_count {
        let key: Vec<u32> = (0..arity).map(|_| uleb128(bytes, &mut pos) as u32).collect();
        let count = uleb128(bytes, &mut pos);
        let len = uleb128(bytes, &mut pos);
        table.push((key, count, len));
    }
    let mut keys = Vec::with_capacity(table.len());
    for (key, count, len) in table {
        let (postings, consumed) = decode_block(&bytes[pos..pos + len as usize], count, arity);
        assert_eq!(consumed as u64, len, "block length mismatch for key {key:?}");
        pos += len as usize;
        keys.push(DecodedKey { key, postings });
    }
    assert_eq!(pos, bytes.len(), "trailing bytes after posting area");
    DecodedFamily { family, keys }
}
