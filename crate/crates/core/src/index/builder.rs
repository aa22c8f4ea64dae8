//! Index construction: per-document posting generation fans out across
//! workers, batches spill sorted runs, and a sequential k-way merge fixes the
//! final on-disk order so builds are bit-for-bit reproducible.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::index::format::{
    self, encode_block1, encode_block2, encode_block3, read_rec1, read_rec2, read_rec3,
    write_rec1, write_rec2, write_rec3, DeltaState, Family, FamilyStats, Manifest,
};
use crate::index::postings::{
    pair_occurrence_lists, Posting1, Posting2, Posting3, PairKey, TripleKey,
};
use crate::index::repo;
use crate::index::varint::{write_varint, VarintError};
use crate::index::IndexConfig;
use crate::lexicon::{each_token, lemmatize, Dictionary, LemmaClass, Lexicon, LexiconConfig};

#[derive(Debug, Clone)]
pub struct BuildOptions {
    /// Documents per spill batch; 0 picks the default.
    pub batch_size: usize,
    /// Worker threads for posting generation; 0 uses all cores.
    pub threads: usize,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            batch_size: 0,
            threads: 0,
        }
    }
}

const DEFAULT_BATCH_SIZE: usize = 256;

#[derive(Debug, Clone)]
pub struct BuildSummary {
    pub doc_count: u32,
    pub lemma_count: u32,
    pub families: Vec<(Family, FamilyStats)>,
}

/// Build every enabled index family plus repository and manifest in `out_dir`.
/// Documents are identified by their position in `docs`.
pub fn build_index(
    docs: &[String],
    dict: &Dictionary,
    cfg: &IndexConfig,
    opts: &BuildOptions,
    out_dir: &Path,
) -> Result<BuildSummary> {
    cfg.validate()?;
    if docs.len() as u64 > u32::MAX as u64 {
        return Err(Error::InvalidConfig(format!(
            "{} documents exceed the 32-bit id space",
            docs.len()
        )));
    }
    std::fs::create_dir_all(out_dir)?;

    match opts.threads {
        0 => build_inner(docs, dict, cfg, opts, out_dir),
        n => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?
            .install(|| build_inner(docs, dict, cfg, opts, out_dir)),
    }
}

fn build_inner(
    docs: &[String],
    dict: &Dictionary,
    cfg: &IndexConfig,
    opts: &BuildOptions,
    out_dir: &Path,
) -> Result<BuildSummary> {
    let batch_size = if opts.batch_size == 0 {
        DEFAULT_BATCH_SIZE
    } else {
        opts.batch_size
    };

    // Pass 1: global lemma occurrence counts, then the interned lexicon in
    // frequency order.
    let counts = docs
        .par_iter()
        .enumerate()
        .map(|(doc, text)| count_doc_lemmas(doc as u32, text, dict))
        .try_reduce(HashMap::new, |mut a, b| {
            for (lemma, n) in b {
                *a.entry(lemma).or_insert(0) += n;
            }
            Ok(a)
        })?;
    let lexicon = Lexicon::from_counts(&counts);
    drop(counts);

    let lex_cfg = LexiconConfig {
        sw_count: cfg.sw_count,
        fu_count: cfg.fu_count,
    };
    let is_stop: Vec<bool> = (0..lexicon.len() as u32)
        .map(|i| lexicon.class_of(crate::lexicon::LemmaId(i), &lex_cfg) == LemmaClass::Stop)
        .collect();

    // Pass 2: batched posting generation spilling sorted runs.
    let tmp_dir = out_dir.join(".build-tmp");
    if tmp_dir.exists() {
        std::fs::remove_dir_all(&tmp_dir)?;
    }
    std::fs::create_dir_all(&tmp_dir)?;

    let mut runs1: Vec<PathBuf> = Vec::new();
    let mut runs2: Vec<PathBuf> = Vec::new();
    let mut runs3: Vec<PathBuf> = Vec::new();
    for (batch_idx, chunk) in docs.chunks(batch_size).enumerate() {
        let base = (batch_idx * batch_size) as u32;
        let per_doc: Vec<Result<DocPostings>> = chunk
            .par_iter()
            .enumerate()
            .map(|(i, text)| {
                generate_doc_postings(base + i as u32, text, dict, &lexicon, &is_stop, cfg)
            })
            .collect();

        let mut flat1: Vec<([u32; 3], Posting1)> = Vec::new();
        let mut flat2: Vec<([u32; 3], Posting2)> = Vec::new();
        let mut flat3: Vec<([u32; 3], Posting3)> = Vec::new();
        for doc in per_doc {
            let doc = doc?;
            flat1.extend(doc.ordinary);
            flat2.extend(doc.pairs);
            flat3.extend(doc.triples);
        }
        flat1.sort_unstable();
        flat2.sort_unstable();
        flat3.sort_unstable();

        if cfg.families.ordinary && !flat1.is_empty() {
            runs1.push(spill_run(&tmp_dir, Family::Ordinary, batch_idx, &flat1, write_rec1)?);
        }
        if cfg.families.pair && !flat2.is_empty() {
            runs2.push(spill_run(&tmp_dir, Family::Pair, batch_idx, &flat2, write_rec2)?);
        }
        if cfg.families.triple && !flat3.is_empty() {
            runs3.push(spill_run(&tmp_dir, Family::Triple, batch_idx, &flat3, write_rec3)?);
        }
    }

    // Sequential merge per family fixes the final order.
    let mut family_stats = Vec::new();
    if cfg.families.ordinary {
        let stats = merge_runs(
            &runs1,
            Family::Ordinary,
            &tmp_dir,
            out_dir,
            read_rec1,
            encode_block1,
        )?;
        family_stats.push((Family::Ordinary, stats));
    }
    if cfg.families.pair {
        let stats = merge_runs(
            &runs2,
            Family::Pair,
            &tmp_dir,
            out_dir,
            read_rec2,
            encode_block2,
        )?;
        family_stats.push((Family::Pair, stats));
    }
    if cfg.families.triple {
        let stats = merge_runs(
            &runs3,
            Family::Triple,
            &tmp_dir,
            out_dir,
            read_rec3,
            encode_block3,
        )?;
        family_stats.push((Family::Triple, stats));
    }
    std::fs::remove_dir_all(&tmp_dir)?;

    format::write_lexicon(&out_dir.join(format::LEXICON_FILE), &lexicon, dict)?;
    repo::write_repo(&out_dir.join(format::REPO_FILE), docs)?;

    let mut checksums = std::collections::BTreeMap::new();
    let mut families = std::collections::BTreeMap::new();
    for (family, stats) in &family_stats {
        checksums.insert(
            family.file_name().to_owned(),
            format::sha256_file(&out_dir.join(family.file_name()))?,
        );
        families.insert(family.name().to_owned(), stats.clone());
    }
    for name in [format::LEXICON_FILE, format::REPO_FILE] {
        checksums.insert(name.to_owned(), format::sha256_file(&out_dir.join(name))?);
    }
    let manifest = Manifest {
        format_version: format::FORMAT_VERSION,
        max_distance: cfg.max_distance,
        sw_count: cfg.sw_count,
        fu_count: cfg.fu_count,
        doc_count: docs.len() as u32,
        lemma_count: lexicon.len() as u32,
        families,
        checksums,
    };
    manifest.write(out_dir)?;

    Ok(BuildSummary {
        doc_count: docs.len() as u32,
        lemma_count: lexicon.len() as u32,
        families: family_stats,
    })
}

fn count_doc_lemmas(doc: u32, text: &str, dict: &Dictionary) -> Result<HashMap<String, u64>> {
    let mut counts = HashMap::new();
    each_token(text, |word, _| {
        for lemma in lemmatize(word, dict) {
            match counts.get_mut(lemma) {
                Some(n) => *n += 1,
                None => {
                    counts.insert(lemma.to_owned(), 1u64);
                }
            }
        }
    })
    .map_err(|_| Error::DocumentTooLarge { doc })?;
    Ok(counts)
}

struct DocPostings {
    ordinary: Vec<([u32; 3], Posting1)>,
    pairs: Vec<([u32; 3], Posting2)>,
    triples: Vec<([u32; 3], Posting3)>,
}

fn key1(l: u32) -> [u32; 3] {
    [l, 0, 0]
}

fn key2(k: PairKey) -> [u32; 3] {
    [k.w.0, k.v.0, 0]
}

fn key3(k: TripleKey) -> [u32; 3] {
    [k.f.0, k.s.0, k.t.0]
}

fn generate_doc_postings(
    doc: u32,
    text: &str,
    dict: &Dictionary,
    lexicon: &Lexicon,
    is_stop: &[bool],
    cfg: &IndexConfig,
) -> Result<DocPostings> {
    // CSR layout of lemma ids per position; interleaved stop subset for the
    // window scans.
    let mut ids_flat: Vec<u32> = Vec::new();
    let mut offsets: Vec<u32> = vec![0];
    each_token(text, |word, _| {
        for lemma in lemmatize(word, dict) {
            let id = lexicon
                .id_of(lemma)
                .expect("lexicon interned every corpus lemma");
            ids_flat.push(id.0);
        }
        offsets.push(ids_flat.len() as u32);
    })
    .map_err(|_| Error::DocumentTooLarge { doc })?;
    let n_pos = offsets.len() - 1;
    let at = |p: usize| &ids_flat[offsets[p] as usize..offsets[p + 1] as usize];

    let mut out = DocPostings {
        ordinary: Vec::new(),
        pairs: Vec::new(),
        triples: Vec::new(),
    };

    if cfg.families.ordinary {
        for p in 0..n_pos {
            for &id in at(p) {
                out.ordinary.push((key1(id), Posting1 { id: doc, p: p as u32 }));
            }
        }
    }

    if !cfg.families.pair && !cfg.families.triple {
        return Ok(out);
    }

    let fl = lexicon.fl_list();
    let ord_of = |id: u32| fl.ord_key(crate::lexicon::LemmaId(id));
    let md = cfg.max_distance as usize;

    // Per-anchor window candidates: (lemma, its window positions ascending),
    // restricted to stop lemmas ranked at or above the anchor lemma.
    let mut cands: Vec<(u32, Vec<u32>)> = Vec::new();
    for pf in 0..n_pos {
        let lo = pf.saturating_sub(md);
        let hi = (pf + md).min(n_pos.saturating_sub(1));
        for &f in at(pf) {
            if !is_stop[f as usize] {
                continue;
            }
            let f_ord = ord_of(f);
            cands.clear();
            for p in lo..=hi {
                if p == pf {
                    continue;
                }
                for &l in at(p) {
                    if !is_stop[l as usize] || ord_of(l) < f_ord {
                        continue;
                    }
                    match cands.iter_mut().find(|(c, _)| *c == l) {
                        Some((_, poss)) => poss.push(p as u32),
                        None => cands.push((l, vec![p as u32])),
                    }
                }
            }
            if cands.is_empty() {
                continue;
            }
            cands.sort_by_key(|&(l, _)| ord_of(l));

            if cfg.families.pair {
                for (v, poss) in &cands {
                    let key = key2(PairKey {
                        w: crate::lexicon::LemmaId(f),
                        v: crate::lexicon::LemmaId(*v),
                    });
                    for &pv in poss {
                        out.pairs.push((
                            key,
                            Posting2 {
                                id: doc,
                                p: pf as u32,
                                d: (pv as i64 - pf as i64) as i32,
                            },
                        ));
                    }
                }
            }
            if cfg.families.triple {
                for i in 0..cands.len() {
                    for j in i..cands.len() {
                        let key = key3(TripleKey {
                            f: crate::lexicon::LemmaId(f),
                            s: crate::lexicon::LemmaId(cands[i].0),
                            t: crate::lexicon::LemmaId(cands[j].0),
                        });
                        for (ps, pt) in pair_occurrence_lists(&cands[i].1, &cands[j].1) {
                            out.triples.push((
                                key,
                                Posting3 {
                                    id: doc,
                                    p: pf as u32,
                                    d1: (ps as i64 - pf as i64) as i32,
                                    d2: (pt as i64 - pf as i64) as i32,
                                },
                            ));
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Spill runs and merge
// ---------------------------------------------------------------------------

/// Run format, one group per key: components, posting count, block byte
/// length, then the delta-coded block (state reset per key).
fn spill_run<P: Copy>(
    tmp_dir: &Path,
    family: Family,
    batch_idx: usize,
    flat: &[([u32; 3], P)],
    write_rec: fn(&mut Vec<u8>, &mut DeltaState, P),
) -> Result<PathBuf> {
    let path = tmp_dir.join(format!("{}.run{:06}", family.name(), batch_idx));
    let mut w = BufWriter::new(File::create(&path)?);
    let arity = family.arity();
    let mut head = Vec::new();
    let mut block = Vec::new();
    let mut i = 0;
    while i < flat.len() {
        let key = flat[i].0;
        let mut j = i;
        block.clear();
        let mut state = DeltaState::default();
        while j < flat.len() && flat[j].0 == key {
            write_rec(&mut block, &mut state, flat[j].1);
            j += 1;
        }
        head.clear();
        for &c in key.iter().take(arity) {
            write_varint(&mut head, c as u64);
        }
        write_varint(&mut head, (j - i) as u64);
        write_varint(&mut head, block.len() as u64);
        w.write_all(&head)?;
        w.write_all(&block)?;
        i = j;
    }
    w.flush()?;
    Ok(path)
}

struct RunReader {
    reader: BufReader<File>,
    path: PathBuf,
    arity: usize,
    /// Key, posting count, and block bytes of the current group.
    current: Option<([u32; 3], u64, Vec<u8>)>,
}

impl RunReader {
    fn open(path: &Path, arity: usize) -> Result<RunReader> {
        let mut r = RunReader {
            reader: BufReader::new(File::open(path)?),
            path: path.to_owned(),
            arity,
            current: None,
        };
        r.advance()?;
        Ok(r)
    }

    fn read_varint(&mut self) -> Result<Option<u64>> {
        let mut value = 0u64;
        let mut shift = 0u32;
        let mut first = true;
        loop {
            let mut byte = [0u8; 1];
            match self.reader.read(&mut byte)? {
                0 if first => return Ok(None),
                0 => return Err(Error::format(&self.path, 0, "truncated run")),
                _ => {}
            }
            first = false;
            value |= u64::from(byte[0] & 0x7f) << shift;
            if byte[0] & 0x80 == 0 {
                return Ok(Some(value));
            }
            shift += 7;
            if shift > 63 {
                return Err(Error::format(&self.path, 0, "varint exceeds 64 bits"));
            }
        }
    }

    fn advance(&mut self) -> Result<()> {
        let first = match self.read_varint()? {
            None => {
                self.current = None;
                return Ok(());
            }
            Some(v) => v,
        };
        let mut key = [0u32; 3];
        key[0] = first as u32;
        for slot in key.iter_mut().take(self.arity).skip(1) {
            *slot = self
                .read_varint()?
                .ok_or_else(|| Error::format(&self.path, 0, "truncated run key"))?
                as u32;
        }
        let count = self
            .read_varint()?
            .ok_or_else(|| Error::format(&self.path, 0, "truncated run count"))?;
        let len = self
            .read_varint()?
            .ok_or_else(|| Error::format(&self.path, 0, "truncated run length"))?;
        let mut block = vec![0u8; len as usize];
        self.reader.read_exact(&mut block)?;
        self.current = Some((key, count, block));
        Ok(())
    }
}

fn merge_runs<P: Copy + Ord>(
    runs: &[PathBuf],
    family: Family,
    tmp_dir: &Path,
    out_dir: &Path,
    read_rec: fn(&[u8], &mut usize, &mut DeltaState) -> Result<P, VarintError>,
    encode_block: fn(&[P]) -> Vec<u8>,
) -> Result<FamilyStats> {
    let mut readers: Vec<RunReader> = runs
        .iter()
        .map(|p| RunReader::open(p, family.arity()))
        .collect::<Result<_>>()?;

    let blocks_path = tmp_dir.join(format!("{}.blocks", family.name()));
    let mut blocks = BufWriter::new(File::create(&blocks_path)?);
    let mut entries: Vec<(u32, u32, u32, u64, u64)> = Vec::new();
    let mut posting_count = 0u64;
    let mut postings: Vec<P> = Vec::new();
    loop {
        // Runs were spilled from ascending document batches, so for one key
        // the run order is the final posting order.
        let min_key = readers
            .iter()
            .filter_map(|r| r.current.as_ref().map(|(k, _, _)| *k))
            .min();
        let min_key = match min_key {
            None => break,
            Some(k) => k,
        };
        postings.clear();
        for reader in readers.iter_mut() {
            let matches = matches!(reader.current.as_ref(), Some((k, _, _)) if *k == min_key);
            if !matches {
                continue;
            }
            let (_, count, block) = reader.current.take().expect("checked above");
            let mut pos = 0;
            let mut state = DeltaState::default();
            for _ in 0..count {
                let rec = read_rec(&block, &mut pos, &mut state)
                    .map_err(|e| Error::format(&reader.path, pos as u64, e.to_string()))?;
                postings.push(rec);
            }
            reader.advance()?;
        }
        debug_assert!(postings.windows(2).all(|w| w[0] < w[1]));
        let block = encode_block(&postings);
        blocks.write_all(&block)?;
        entries.push((
            min_key[0],
            min_key[1],
            min_key[2],
            postings.len() as u64,
            block.len() as u64,
        ));
        posting_count += postings.len() as u64;
    }
    blocks.flush()?;
    drop(blocks);

    let final_path = out_dir.join(family.file_name());
    let mut blocks_in = File::open(&blocks_path)?;
    let bytes = format::write_family_file(&final_path, family, &entries, &mut blocks_in)?;
    Ok(FamilyStats {
        key_count: entries.len() as u64,
        posting_count,
        bytes,
    })
}
