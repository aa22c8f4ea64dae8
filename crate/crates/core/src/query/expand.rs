//! Query expansion: one subquery per combination of lemma alternatives.

use crate::error::{Error, Result};
use crate::lexicon::{lemmatize, tokenize, Dictionary, Lexicon, LemmaId};

/// Hard cap on the lemma-alternative product.
pub const MAX_SUBQUERIES: usize = 64;

/// One lemma of a subquery, resolved against the index lexicon when possible.
/// Lemmas absent from the lexicon occur nowhere in the corpus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubLemma {
    pub text: String,
    pub id: Option<LemmaId>,
}

/// A fully disambiguated query: exactly one lemma per original query word.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subquery {
    pub lemmas: Vec<SubLemma>,
}

impl Subquery {
    pub fn len(&self) -> usize {
        self.lemmas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lemmas.is_empty()
    }

    /// Lemma ids when every lemma is known; None otherwise.
    pub fn ids(&self) -> Option<Vec<LemmaId>> {
        self.lemmas.iter().map(|l| l.id).collect()
    }
}

/// Expand a query string into the product of its words' lemma alternatives,
/// earlier words varying slowest, alternatives in dictionary order.
pub fn expand_query(query: &str, dict: &Dictionary, lexicon: &Lexicon) -> Result<Vec<Subquery>> {
    let words = tokenize(query);
    if words.is_empty() {
        return Err(Error::EmptyQuery);
    }
    let alternatives: Vec<Vec<String>> = words
        .iter()
        .map(|(word, _)| lemmatize(word, dict).map(str::to_owned).collect())
        .collect();
    let count = alternatives
        .iter()
        .try_fold(1usize, |acc, alts| acc.checked_mul(alts.len()))
        .unwrap_or(usize::MAX);
    if count > MAX_SUBQUERIES {
        return Err(Error::TooManySubqueries {
            count,
            limit: MAX_SUBQUERIES,
        });
    }

    let mut subqueries = Vec::with_capacity(count);
    let mut picks = vec![0usize; alternatives.len()];
    loop {
        let lemmas = alternatives
            .iter()
            .zip(&picks)
            .map(|(alts, &i)| {
                let text = alts[i].clone();
                let id = lexicon.id_of(&text);
                SubLemma { text, id }
            })
            .collect();
        subqueries.push(Subquery { lemmas });
        // Odometer increment, last word fastest.
        let mut slot = picks.len();
        loop {
            if slot == 0 {
                return Ok(subqueries);
            }
            slot -= 1;
            picks[slot] += 1;
            if picks[slot] < alternatives[slot].len() {
                break;
            }
            picks[slot] = 0;
        }
    }
}
