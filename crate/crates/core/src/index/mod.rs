//! Posting data model, index construction, and the on-disk index format.

pub mod builder;
pub mod cursor;
pub mod format;
pub mod postings;
pub mod repo;
pub mod varint;

use std::fs::File;
use std::os::unix::fs::FileExt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lexicon::{Dictionary, Lexicon, LexiconConfig};
use cursor::{Cursor1, Cursor2, Cursor3};
use format::{Family, FamilyTable, Manifest};
use postings::{PairKey, TripleKey};

pub use builder::{build_index, BuildOptions, BuildSummary};

/// Which index families a build produces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Families {
    pub ordinary: bool,
    pub pair: bool,
    pub triple: bool,
}

impl Default for Families {
    fn default() -> Self {
        Families {
            ordinary: true,
            pair: true,
            triple: true,
        }
    }
}

/// Build-time parameters of one index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexConfig {
    pub max_distance: u32,
    pub sw_count: u32,
    pub fu_count: u32,
    pub families: Families,
}

impl IndexConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_distance < 1 {
            return Err(Error::InvalidConfig("max_distance must be at least 1".into()));
        }
        Ok(())
    }

    pub fn lexicon_config(&self) -> LexiconConfig {
        LexiconConfig {
            sw_count: self.sw_count,
            fu_count: self.fu_count,
        }
    }
}

impl Default for IndexConfig {
    fn default() -> Self {
        IndexConfig {
            max_distance: 5,
            sw_count: 700,
            fu_count: 2100,
            families: Families::default(),
        }
    }
}

struct FamilyReader {
    file: File,
    path: PathBuf,
    table: FamilyTable,
}

impl FamilyReader {
    fn open(path: &Path) -> Result<FamilyReader> {
        let table = format::read_family_table(path)?;
        Ok(FamilyReader {
            file: File::open(path)?,
            path: path.to_owned(),
            table,
        })
    }

    /// Load one key's block; `(bytes, count, absolute offset)`.
    fn load_block(&self, key: [u32; 3]) -> Result<Option<(Vec<u8>, u64, u64)>> {
        let entry = match self.table.find(key) {
            None => return Ok(None),
            Some(e) => *e,
        };
        let mut block = vec![0u8; entry.len as usize];
        let abs = self.table.posting_base + entry.offset;
        self.file.read_exact_at(&mut block, abs)?;
        Ok(Some((block, entry.count, abs)))
    }
}

/// An opened, immutable index directory.
pub struct Index {
    dir: PathBuf,
    manifest: Manifest,
    lexicon: Lexicon,
    dictionary: Dictionary,
    ordinary: Option<FamilyReader>,
    pairs: Option<FamilyReader>,
    triples: Option<FamilyReader>,
    repo: repo::DocRepo,
}

impl Index {
    pub fn open(dir: &Path) -> Result<Index> {
        let manifest = Manifest::read(dir)?;
        let (lexicon, dictionary) = format::read_lexicon(&dir.join(format::LEXICON_FILE))?;
        let open_family = |family: Family| -> Result<Option<FamilyReader>> {
            if manifest.families.contains_key(family.name()) {
                Ok(Some(FamilyReader::open(&dir.join(family.file_name()))?))
            } else {
                Ok(None)
            }
        };
        Ok(Index {
            dir: dir.to_owned(),
            ordinary: open_family(Family::Ordinary)?,
            pairs: open_family(Family::Pair)?,
            triples: open_family(Family::Triple)?,
            repo: repo::DocRepo::open(&dir.join(format::REPO_FILE))?,
            manifest,
            lexicon,
            dictionary,
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn manifest(&self) -> &Manifest {
        &self.manifest
    }

    pub fn lexicon(&self) -> &Lexicon {
        &self.lexicon
    }

    pub fn dictionary(&self) -> &Dictionary {
        &self.dictionary
    }

    pub fn repo(&self) -> &repo::DocRepo {
        &self.repo
    }

    pub fn max_distance(&self) -> u32 {
        self.manifest.max_distance
    }

    pub fn lexicon_config(&self) -> LexiconConfig {
        LexiconConfig {
            sw_count: self.manifest.sw_count,
            fu_count: self.manifest.fu_count,
        }
    }

    pub fn has_family(&self, family: Family) -> bool {
        match family {
            Family::Ordinary => self.ordinary.is_some(),
            Family::Pair => self.pairs.is_some(),
            Family::Triple => self.triples.is_some(),
        }
    }

    fn family(&self, family: Family) -> Result<&FamilyReader> {
        let reader = match family {
            Family::Ordinary => &self.ordinary,
            Family::Pair => &self.pairs,
            Family::Triple => &self.triples,
        };
        reader.as_ref().ok_or_else(|| Error::MissingFamily {
            dir: self.dir.clone(),
            family: family.name(),
        })
    }

    /// Cursor over the ordinary postings of one lemma; exhausted if absent.
    pub fn open_cursor_ordinary(&self, lemma: crate::lexicon::LemmaId) -> Result<Cursor1> {
        let reader = self.family(Family::Ordinary)?;
        Ok(match reader.load_block([lemma.0, 0, 0])? {
            None => Cursor1::exhausted(),
            Some((block, count, base)) => Cursor1::new(block, count, reader.path.clone(), base),
        })
    }

    pub fn open_cursor_pair(&self, key: PairKey) -> Result<Cursor2> {
        let reader = self.family(Family::Pair)?;
        Ok(match reader.load_block([key.w.0, key.v.0, 0])? {
            None => Cursor2::exhausted(),
            Some((block, count, base)) => Cursor2::new(block, count, reader.path.clone(), base),
        })
    }

    pub fn open_cursor_triple(&self, key: TripleKey) -> Result<Cursor3> {
        let reader = self.family(Family::Triple)?;
        Ok(match reader.load_block([key.f.0, key.s.0, key.t.0])? {
            None => Cursor3::exhausted(),
            Some((block, count, base)) => Cursor3::new(block, count, reader.path.clone(), base),
        })
    }

    /// Key table of one family, for stats and verification.
    pub fn family_table(&self, family: Family) -> Result<&FamilyTable> {
        Ok(&self.family(family)?.table)
    }
}
