//! Word/id vocabulary with frequency counts.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Frequency-filtered vocabulary. Ids are dense, ordered by descending
/// count with ties broken by first occurrence in the corpus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    words: Vec<String>,
    counts: Vec<u64>,
    index: BTreeMap<String, u32>,
    min_count: u64,
    total_tokens: u64,
}

/// Incremental token counter feeding [`Vocabulary`].
#[derive(Debug, Default, Clone)]
pub struct VocabBuilder {
    // token -> (count, first position)
    counts: BTreeMap<String, (u64, u64)>,
    seen: u64,
}

impl VocabBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, token: &str) {
        let pos = self.seen;
        self.seen += 1;
        if let Some(entry) = self.counts.get_mut(token) {
            entry.0 += 1;
        } else {
            self.counts.insert(String::from(token), (1, pos));
        }
    }

    pub fn tokens_seen(&self) -> u64 {
        self.seen
    }

    pub fn build(self, min_count: u64) -> Result<Vocabulary> {
        if min_count == 0 {
            return Err(Error::InvalidConfig("min_count must be at least 1"));
        }
        if self.seen == 0 {
            return Err(Error::EmptyCorpus);
        }
        let mut kept: Vec<(String, u64, u64)> = self
            .counts
            .into_iter()
            .filter(|(_, (c, _))| *c >= min_count)
            .map(|(w, (c, first))| (w, c, first))
            .collect();
        kept.sort_by(|a, b| b.1.cmp(&a.1).then(a.2.cmp(&b.2)));
        let (words, counts) = kept.into_iter().map(|(w, c, _)| (w, c)).unzip();
        Vocabulary::from_ordered(words, counts, min_count)
    }
}

/// Counts `tokens` and keeps those occurring at least `min_count` times.
pub fn build_vocabulary<'a, I>(tokens: I, min_count: u64) -> Result<Vocabulary>
where
    I: IntoIterator<Item = &'a str>,
{
    let mut b = VocabBuilder::new();
    for t in tokens {
        b.add(t);
    }
    b.build(min_count)
}

impl Vocabulary {
    /// Builds from words already in id order. Duplicate words are rejected.
    pub fn from_ordered(words: Vec<String>, counts: Vec<u64>, min_count: u64) -> Result<Self> {
        if words.len() != counts.len() {
            return Err(Error::DimensionMismatch(words.len(), counts.len()));
        }
        if words.len() > u32::MAX as usize {
            return Err(Error::InvalidConfig("vocabulary too large"));
        }
        let mut index = BTreeMap::new();
        for (i, w) in words.iter().enumerate() {
            if index.insert(w.clone(), i as u32).is_some() {
                return Err(Error::InvalidConfig("duplicate word in vocabulary"));
            }
        }
        let total_tokens = counts.iter().sum();
        Ok(Vocabulary {
            words,
            counts,
            index,
            min_count,
            total_tokens,
        })
    }

    /// Lookup-only vocabulary for stored models; every count is 1.
    pub fn from_words(words: Vec<String>) -> Result<Self> {
        let counts = alloc::vec![1; words.len()];
        Self::from_ordered(words, counts, 1)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn id(&self, word: &str) -> Option<u32> {
        self.index.get(word).copied()
    }

    pub fn word(&self, id: u32) -> Option<&str> {
        self.words.get(id as usize).map(String::as_str)
    }

    pub fn count(&self, id: u32) -> u64 {
        self.counts[id as usize]
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn min_count(&self) -> u64 {
        self.min_count
    }

    /// Sum of counts of retained words.
    pub fn total_tokens(&self) -> u64 {
        self.total_tokens
    }

    /// Relative frequency of `id` among retained tokens.
    pub fn frequency(&self, id: u32) -> f64 {
        self.counts[id as usize] as f64 / self.total_tokens as f64
    }
}
