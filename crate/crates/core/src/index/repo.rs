//! Document repository: indexed texts in compressed form, addressable by id.

use std::fs::File;
use std::io::{Read, Write};
use std::os::unix::fs::FileExt;
use std::path::{Path, PathBuf};

use flate2::read::DeflateDecoder;
use flate2::write::DeflateEncoder;
use flate2::Compression;

use crate::error::{Error, Result};
use crate::index::format::REPO_MAGIC;
use crate::index::varint::{read_varint, write_varint};

/// Write `docs.repo`: magic, doc count, per-doc compressed lengths, then the
/// deflate blobs in id order.
pub fn write_repo(path: &Path, docs: &[String]) -> Result<()> {
    let mut blobs = Vec::with_capacity(docs.len());
    for text in docs {
        let mut enc = DeflateEncoder::new(Vec::new(), Compression::default());
        enc.write_all(text.as_bytes())?;
        blobs.push(enc.finish()?);
    }
    let mut header = Vec::new();
    header.extend_from_slice(&REPO_MAGIC);
    write_varint(&mut header, docs.len() as u64);
    for blob in &blobs {
        write_varint(&mut header, blob.len() as u64);
    }
    let mut file = std::io::BufWriter::new(File::create(path)?);
    file.write_all(&header)?;
    for blob in &blobs {
        file.write_all(blob)?;
    }
    file.flush()?;
    Ok(())
}

/// Read-only view of `docs.repo`; texts are decompressed on demand.
#[derive(Debug)]
pub struct DocRepo {
    path: PathBuf,
    file: File,
    /// Per-document (absolute offset, compressed length).
    ranges: Vec<(u64, u64)>,
}

impl DocRepo {
    pub fn open(path: &Path) -> Result<DocRepo> {
        let file = File::open(path)?;
        let mut head = Vec::new();
        {
            let mut r = std::io::BufReader::new(&file);
            let mut magic = [0u8; 4];
            r.read_exact(&mut magic)
                .map_err(|_| Error::format(path, 0, "file too short for magic"))?;
            if magic != REPO_MAGIC {
                return Err(Error::format(path, 0, "bad magic"));
            }
            r.take(10 * (1 << 20)).read_to_end(&mut head)?;
        }
        let mut pos = 0usize;
        let doc_count = read_varint(&head, &mut pos)
            .map_err(|e| Error::format(path, 4 + pos as u64, e.to_string()))?;
        let mut lens = Vec::with_capacity(doc_count as usize);
        for _ in 0..doc_count {
            lens.push(
                read_varint(&head, &mut pos)
                    .map_err(|e| Error::format(path, 4 + pos as u64, e.to_string()))?,
            );
        }
        let mut offset = 4 + pos as u64;
        let ranges = lens
            .into_iter()
            .map(|len| {
                let range = (offset, len);
                offset += len;
                range
            })
            .collect();
        Ok(DocRepo {
            path: path.to_owned(),
            file,
            ranges,
        })
    }

    pub fn doc_count(&self) -> u32 {
        self.ranges.len() as u32
    }

    pub fn text(&self, doc: u32) -> Result<String> {
        let &(offset, len) = self.ranges.get(doc as usize).ok_or_else(|| {
            Error::format(&self.path, 0, format!("document {doc} out of range"))
        })?;
        let mut compressed = vec![0u8; len as usize];
        self.file.read_exact_at(&mut compressed, offset)?;
        let mut text = String::new();
        DeflateDecoder::new(&compressed[..])
            .read_to_string(&mut text)
            .map_err(|e| Error::format(&self.path, offset, format!("deflate: {e}")))?;
        Ok(text)
    }

    /// Words `s.saturating_sub(margin) ..= e + margin` of the document,
    /// joined by single spaces.
    pub fn snippet(&self, doc: u32, s: u32, e: u32, margin: u32) -> Result<String> {
        let text = self.text(doc)?;
        let lo = s.saturating_sub(margin);
        let hi = e.saturating_add(margin);
        let mut words = Vec::new();
        crate::lexicon::each_token(&text, |word, pos| {
            if pos >= lo && pos <= hi {
                words.push(word.to_owned());
            }
        })?;
        Ok(words.join(" "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_and_snippet() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("docs.repo");
        let docs = vec![
            "to be or not to be or".to_owned(),
            "".to_owned(),
            "Who, are you?".to_owned(),
        ];
        write_repo(&path, &docs).unwrap();
        let repo = DocRepo::open(&path).unwrap();
        assert_eq!(repo.doc_count(), 3);
        for (i, d) in docs.iter().enumerate() {
            assert_eq!(&repo.text(i as u32).unwrap(), d);
        }
        assert_eq!(repo.snippet(0, 2, 3, 2).unwrap(), "to be or not to be");
        assert_eq!(repo.snippet(0, 0, 0, 2).unwrap(), "to be or");
    }
}
