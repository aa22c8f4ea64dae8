//! Tokenization, lemmatization, and the frequency-ordered lemma list.
//!
//! Every word of every document is kept: high-frequency lemmas are *classified*
//! (stop / frequently used / ordinary) by their rank in the frequency-sorted
//! lemma list, never discarded.

use std::collections::HashMap;
use std::io::BufRead;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Surrogate id of a lemma inside one index. Ids are dense from 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LemmaId(pub u32);

impl std::fmt::Display for LemmaId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Frequency rank used for lemmas too rare to rank.
pub const RARE_SENTINEL: u32 = u32::MAX;

/// Frequency class of a lemma, cut from its rank by [`LexiconConfig`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LemmaClass {
    Stop,
    FrequentlyUsed,
    Ordinary,
}

/// Rank cut-offs separating stop, frequently used, and ordinary lemmas.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LexiconConfig {
    pub sw_count: u32,
    pub fu_count: u32,
}

/// Classify a frequency rank.
///
/// Total and monotone: the stop zone precedes the frequently-used zone, which
/// precedes the ordinary zone.
pub fn classify(fl: u32, cfg: &LexiconConfig) -> LemmaClass {
    let fl = fl as u64;
    if fl < cfg.sw_count as u64 {
        LemmaClass::Stop
    } else if fl < cfg.sw_count as u64 + cfg.fu_count as u64 {
        LemmaClass::FrequentlyUsed
    } else {
        LemmaClass::Ordinary
    }
}

/// Split text into lowercased words with their ordinal positions.
///
/// A word is a maximal run of Unicode letters/digits; everything else
/// separates. Positions count words from 0 with no gaps.
pub fn tokenize(text: &str) -> Vec<(String, u32)> {
    let mut out = Vec::new();
    each_token(text, |word, pos| out.push((word.to_owned(), pos)))
        .expect("in-memory tokenization cannot overflow here");
    out
}

/// Streaming form of [`tokenize`]: calls `sink(word, position)` per word and
/// returns the word count. Errors if the text holds more than 2^32 words.
pub fn each_token(text: &str, mut sink: impl FnMut(&str, u32)) -> Result<u64> {
    let mut count: u64 = 0;
    let mut scratch = String::new();
    let mut rest = text;
    while let Some(start) = rest.find(|c: char| c.is_alphanumeric()) {
        rest = &rest[start..];
        let end = rest
            .find(|c: char| !c.is_alphanumeric())
            .unwrap_or(rest.len());
        let raw = &rest[..end];
        rest = &rest[end..];
        if count > u32::MAX as u64 {
            return Err(Error::DocumentTooLarge { doc: 0 });
        }
        if raw.bytes().all(|b| b.is_ascii_lowercase() || b.is_ascii_digit()) {
            sink(raw, count as u32);
        } else {
            scratch.clear();
            scratch.extend(raw.chars().flat_map(char::to_lowercase));
            sink(&scratch, count as u32);
        }
        count += 1;
    }
    Ok(count)
}

/// Surface word to lemma alternatives. Absent words lemmatize to themselves.
#[derive(Debug, Clone, Default)]
pub struct Dictionary {
    entries: HashMap<String, Vec<String>>,
}

impl Dictionary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, word: impl Into<String>, lemmas: Vec<String>) {
        let mut lemmas = lemmas;
        let mut seen = std::collections::HashSet::new();
        lemmas.retain(|l| seen.insert(l.clone()));
        if !lemmas.is_empty() {
            self.entries.insert(word.into(), lemmas);
        }
    }

    /// Parse the TSV form: one `word<TAB>lemma1,lemma2` entry per line.
    /// Blank lines and `#` comments are skipped.
    pub fn from_tsv(reader: impl BufRead) -> Result<Self> {
        let mut dict = Self::new();
        for line in reader.lines() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (word, lemmas) = line.split_once('\t').ok_or_else(|| {
                Error::InvalidConfig(format!("dictionary line without a tab: {line:?}"))
            })?;
            let lemmas: Vec<String> = lemmas
                .split(',')
                .map(|l| l.trim().to_lowercase())
                .filter(|l| !l.is_empty())
                .collect();
            if lemmas.is_empty() {
                return Err(Error::InvalidConfig(format!(
                    "dictionary entry {word:?} has no lemmas"
                )));
            }
            dict.insert(word.trim().to_lowercase(), lemmas);
        }
        Ok(dict)
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, &[String])> {
        self.entries.iter().map(|(w, l)| (w.as_str(), l.as_slice()))
    }

    pub fn get(&self, word: &str) -> Option<&[String]> {
        self.entries.get(word).map(Vec::as_slice)
    }
}

/// Lemma alternatives of a word, in dictionary order; the word itself when
/// the dictionary has no entry.
pub fn lemmatize<'a>(word: &'a str, dict: &'a Dictionary) -> Lemmas<'a> {
    match dict.get(word) {
        Some(list) => Lemmas::Listed(list.iter()),
        None => Lemmas::Identity(Some(word)),
    }
}

pub enum Lemmas<'a> {
    Listed(std::slice::Iter<'a, String>),
    Identity(Option<&'a str>),
}

impl<'a> Iterator for Lemmas<'a> {
    type Item = &'a str;

    fn next(&mut self) -> Option<&'a str> {
        match self {
            Lemmas::Listed(it) => it.next().map(String::as_str),
            Lemmas::Identity(w) => w.take(),
        }
    }
}

/// Frequency ranks of all lemmas, indexed by lemma id.
///
/// Rank 0 is the most frequent lemma; ties break by ascending lemma text.
/// Lemmas below the minimum count share [`RARE_SENTINEL`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlList {
    ranks: Vec<u32>,
}

impl FlList {
    /// Rank lemmas by descending occurrence count.
    ///
    /// `texts[i]` and `counts[i]` describe the lemma with id `i`; the returned
    /// list maps ids to ranks.
    pub fn build(texts: &[String], counts: &[u64], min_count: u64) -> FlList {
        assert_eq!(texts.len(), counts.len());
        let mut order: Vec<u32> = (0..texts.len() as u32)
            .filter(|&i| counts[i as usize] >= min_count.max(1))
            .collect();
        order.sort_by(|&a, &b| {
            counts[b as usize]
                .cmp(&counts[a as usize])
                .then_with(|| texts[a as usize].cmp(&texts[b as usize]))
        });
        let mut ranks = vec![RARE_SENTINEL; texts.len()];
        for (rank, &id) in order.iter().enumerate() {
            ranks[id as usize] = rank as u32;
        }
        FlList { ranks }
    }

    /// Build from explicit ranks (fixtures, index loading).
    pub fn from_ranks(ranks: Vec<u32>) -> FlList {
        FlList { ranks }
    }

    pub fn fl(&self, id: LemmaId) -> u32 {
        self.ranks.get(id.0 as usize).copied().unwrap_or(RARE_SENTINEL)
    }

    pub fn ranks(&self) -> &[u32] {
        &self.ranks
    }

    pub fn len(&self) -> usize {
        self.ranks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranks.is_empty()
    }

    /// Ordering key used everywhere a key must be normalized: rank first,
    /// lemma id as the deterministic tie-break among rare lemmas.
    pub fn ord_key(&self, id: LemmaId) -> (u32, u32) {
        (self.fl(id), id.0)
    }
}

/// Standalone form of the rank construction, for callers holding plain maps.
pub fn build_fl_list(counts: &HashMap<String, u64>, min_count: u64) -> (Vec<String>, FlList) {
    let mut entries: Vec<(&String, u64)> = counts.iter().map(|(t, &c)| (t, c)).collect();
    entries.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    let texts: Vec<String> = entries.iter().map(|(t, _)| (*t).clone()).collect();
    let counts_by_id: Vec<u64> = entries.iter().map(|(_, c)| *c).collect();
    let fl = FlList::build(&texts, &counts_by_id, min_count);
    (texts, fl)
}

/// The interned lemma table of one index: id <-> text, per-lemma corpus
/// counts, and the frequency ranks.
#[derive(Debug, Clone)]
pub struct Lexicon {
    texts: Vec<String>,
    ids: HashMap<String, LemmaId>,
    counts: Vec<u64>,
    fl: FlList,
}

impl Lexicon {
    /// Intern lemmas sorted by (count desc, text asc), so ids are
    /// deterministic for a given corpus and equal to the frequency rank.
    pub fn from_counts(counts: &HashMap<String, u64>) -> Lexicon {
        let (texts, fl) = build_fl_list(counts, 1);
        Self::from_parts(texts.clone(), texts.iter().map(|t| counts[t]).collect(), fl)
    }

    pub fn from_parts(texts: Vec<String>, counts: Vec<u64>, fl: FlList) -> Lexicon {
        let ids = texts
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), LemmaId(i as u32)))
            .collect();
        Lexicon {
            texts,
            ids,
            counts,
            fl,
        }
    }

    pub fn id_of(&self, text: &str) -> Option<LemmaId> {
        self.ids.get(text).copied()
    }

    pub fn text_of(&self, id: LemmaId) -> &str {
        &self.texts[id.0 as usize]
    }

    pub fn count_of(&self, id: LemmaId) -> u64 {
        self.counts[id.0 as usize]
    }

    pub fn fl_list(&self) -> &FlList {
        &self.fl
    }

    pub fn len(&self) -> usize {
        self.texts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.texts.is_empty()
    }

    pub fn texts(&self) -> &[String] {
        &self.texts
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn class_of(&self, id: LemmaId, cfg: &LexiconConfig) -> LemmaClass {
        classify(self.fl.fl(id), cfg)
    }

    /// Ids of all lemmas classified [`LemmaClass::Stop`].
    pub fn stop_lemmas(&self, cfg: &LexiconConfig) -> Vec<LemmaId> {
        (0..self.texts.len() as u32)
            .map(LemmaId)
            .filter(|&id| self.class_of(id, cfg) == LemmaClass::Stop)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokenize_word_positions() {
        let toks = tokenize("to be or not to be or");
        let expect = [
            ("to", 0),
            ("be", 1),
            ("or", 2),
            ("not", 3),
            ("to", 4),
            ("be", 5),
            ("or", 6),
        ];
        assert_eq!(toks.len(), expect.len());
        for ((w, p), (ew, ep)) in toks.iter().zip(expect) {
            assert_eq!((w.as_str(), *p), (ew, ep));
        }
    }

    #[test]
    fn tokenize_empty() {
        assert!(tokenize("").is_empty());
    }

    #[test]
    fn tokenize_punctuation_and_case() {
        let toks = tokenize("Who, are you?");
        assert_eq!(
            toks,
            vec![
                ("who".to_owned(), 0),
                ("are".to_owned(), 1),
                ("you".to_owned(), 2)
            ]
        );
    }

    #[test]
    fn tokenize_digits_are_letters() {
        let toks = tokenize("a1b2-c3");
        assert_eq!(toks, vec![("a1b2".to_owned(), 0), ("c3".to_owned(), 1)]);
    }

    #[test]
    fn lemmatize_dictionary_hit_and_miss() {
        let mut dict = Dictionary::new();
        dict.insert("are", vec!["are".into(), "be".into()]);
        dict.insert("mine", vec!["mine".into(), "my".into()]);
        let got: Vec<&str> = lemmatize("are", &dict).collect();
        assert_eq!(got, vec!["are", "be"]);
        let got: Vec<&str> = lemmatize("mine", &dict).collect();
        assert_eq!(got, vec!["mine", "my"]);
        let got: Vec<&str> = lemmatize("xqzzy", &dict).collect();
        assert_eq!(got, vec!["xqzzy"]);
    }

    #[test]
    fn fl_list_sort_and_tie_break() {
        let counts: HashMap<String, u64> =
            [("a", 100u64), ("b", 50), ("c", 50)].map(|(t, c)| (t.to_owned(), c)).into();
        let (texts, fl) = build_fl_list(&counts, 1);
        assert_eq!(texts, vec!["a", "b", "c"]);
        assert_eq!(fl.ranks(), &[0, 1, 2]);
    }

    #[test]
    fn fl_list_empty() {
        let counts = HashMap::new();
        let (texts, fl) = build_fl_list(&counts, 1);
        assert!(texts.is_empty());
        assert!(fl.is_empty());
    }

    #[test]
    fn fl_list_rare_sentinel() {
        let texts = vec!["common".to_owned(), "rare".to_owned()];
        let fl = FlList::build(&texts, &[10, 1], 5);
        assert_eq!(fl.fl(LemmaId(0)), 0);
        assert_eq!(fl.fl(LemmaId(1)), RARE_SENTINEL);
    }

    #[test]
    fn classify_zones() {
        let cfg = LexiconConfig {
            sw_count: 700,
            fu_count: 2100,
        };
        assert_eq!(classify(293, &cfg), LemmaClass::Stop);
        assert_eq!(classify(699, &cfg), LemmaClass::Stop);
        assert_eq!(classify(700, &cfg), LemmaClass::FrequentlyUsed);
        assert_eq!(classify(2799, &cfg), LemmaClass::FrequentlyUsed);
        assert_eq!(classify(2800, &cfg), LemmaClass::Ordinary);
        assert_eq!(classify(RARE_SENTINEL, &cfg), LemmaClass::Ordinary);

        let zero_sw = LexiconConfig {
            sw_count: 0,
            fu_count: 10,
        };
        assert_eq!(classify(0, &zero_sw), LemmaClass::FrequentlyUsed);
    }

    #[test]
    fn classify_is_monotone_step() {
        let cfg = LexiconConfig {
            sw_count: 3,
            fu_count: 4,
        };
        let mut last = LemmaClass::Stop;
        for fl in 0..20u32 {
            let class = classify(fl, &cfg);
            let zone = |c: LemmaClass| match c {
                LemmaClass::Stop => 0,
                LemmaClass::FrequentlyUsed => 1,
                LemmaClass::Ordinary => 2,
            };
            assert!(zone(class) >= zone(last));
            last = class;
        }
    }

    #[test]
    fn fixture_stop_classification() {
        // Rank fixture consistent with who=293, are=268, be=21, you=47.
        let cfg = LexiconConfig {
            sw_count: 700,
            fu_count: 2100,
        };
        for fl in [293u32, 268, 21, 47] {
            assert_eq!(classify(fl, &cfg), LemmaClass::Stop);
        }
    }

    #[test]
    fn dictionary_tsv_roundtrip() {
        let tsv = "are\tare,be\nmine\tmine,my\n# comment\n\n";
        let dict = Dictionary::from_tsv(tsv.as_bytes()).unwrap();
        assert_eq!(dict.get("are").unwrap(), &["are", "be"]);
        assert_eq!(dict.get("mine").unwrap(), &["mine", "my"]);
        assert!(dict.get("other").is_none());
    }
}
