//! Negative-sampling table, frequent-word subsampling and (focal, context)
//! pair generation.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::vocab::Vocabulary;

/// Exponent applied to unigram counts for negative sampling.
pub const UNIGRAM_POWER: f64 = 0.75;
pub const DEFAULT_TABLE_SIZE: usize = 100_000_000;
pub const DEFAULT_SUBSAMPLE: f64 = 1e-3;
/// Sentences longer than this are cut into several sentences.
pub const MAX_SENTENCE_LEN: usize = 1000;

/// Flat table of word ids; each word owns a contiguous block of slots
/// proportional to `count^0.75`, and every word owns at least one slot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NegativeSamplingTable {
    table: Vec<u32>,
    distinct: usize,
}

impl NegativeSamplingTable {
    pub fn build(vocab: &Vocabulary, table_size: usize) -> Result<Self> {
        Self::from_counts(vocab.counts(), table_size)
    }

    pub fn from_counts(counts: &[u64], table_size: usize) -> Result<Self> {
        let n = counts.len();
        if n == 0 {
            return Err(Error::EmptyVocabulary);
        }
        if table_size < n {
            return Err(Error::TableTooSmall {
                size: table_size,
                vocab: n,
            });
        }
        let weights: Vec<f64> = counts
            .iter()
            .map(|&c| libm::pow(c as f64, UNIGRAM_POWER))
            .collect();
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(Error::EmptyVocabulary);
        }
        let ideal: Vec<f64> = weights
            .iter()
            .map(|w| w / total * table_size as f64)
            .collect();
        let mut slots: Vec<usize> = ideal
            .iter()
            .map(|&x| (libm::floor(x) as usize).max(1))
            .collect();
        let mut assigned: usize = slots.iter().sum();

        if assigned < table_size {
            // largest remainders first, ties to the lower id
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| {
                let ra = ideal[a] - slots[a] as f64;
                let rb = ideal[b] - slots[b] as f64;
                rb.partial_cmp(&ra)
                    .unwrap_or(core::cmp::Ordering::Equal)
                    .then(a.cmp(&b))
            });
            let mut k = 0;
            while assigned < table_size {
                slots[order[k % n]] += 1;
                assigned += 1;
                k += 1;
            }
        }
        while assigned > table_size {
            // minimum-one bumps overflowed; take back from the most over-served words
            let mut order: Vec<usize> = (0..n).filter(|&i| slots[i] > 1).collect();
            order.sort_by(|&a, &b| {
                let ea = slots[a] as f64 - ideal[a];
                let eb = slots[b] as f64 - ideal[b];
                eb.partial_cmp(&ea)
                    .unwrap_or(core::cmp::Ordering::Equal)
                    .then(a.cmp(&b))
            });
            for i in order {
                if assigned == table_size {
                    break;
                }
                slots[i] -= 1;
                assigned -= 1;
            }
        }

        let mut table = Vec::with_capacity(table_size);
        for (id, &s) in slots.iter().enumerate() {
            table.extend(core::iter::repeat_n(id as u32, s));
        }
        Ok(NegativeSamplingTable { table, distinct: n })
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.table
    }

    /// Number of distinct words in the table.
    pub fn distinct_words(&self) -> usize {
        self.distinct
    }

    #[inline]
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        self.table[rng.gen_range(0..self.table.len())]
    }

    /// Appends up to `k` negatives for `context` to `out`.
    ///
    /// With [`NegativePolicy::Redraw`] exactly `k` ids distinct from
    /// `context` are produced; with [`NegativePolicy::Skip`] colliding draws
    /// are dropped, as word2vec.c does.
    pub fn draw_negatives<R: Rng + ?Sized>(
        &self,
        context: u32,
        k: usize,
        policy: NegativePolicy,
        rng: &mut R,
        out: &mut Vec<u32>,
    ) -> Result<()> {
        match policy {
            NegativePolicy::Redraw => {
                if self.distinct < 2 {
                    return Err(Error::DegenerateVocabulary);
                }
                for _ in 0..k {
                    loop {
                        let w = self.draw(rng);
                        if w != context {
                            out.push(w);
                            break;
                        }
                    }
                }
            }
            NegativePolicy::Skip => {
                for _ in 0..k {
                    let w = self.draw(rng);
                    if w != context {
                        out.push(w);
                    }
                }
            }
        }
        Ok(())
    }
}

/// What to do when a sampled negative equals the true context word.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NegativePolicy {
    #[default]
    Redraw,
    Skip,
}

/// Probability of keeping a token of relative frequency `freq` under
/// threshold `t`: `min(1, sqrt(t/f) + t/f)`.
pub fn subsample_keep_probability(freq: f64, t: f64) -> f64 {
    let r = t / freq;
    (libm::sqrt(r) + r).min(1.0)
}

/// Drops frequent tokens from `ids` in place.
pub fn subsample_in_place<R: Rng + ?Sized>(
    ids: &mut Vec<u32>,
    vocab: &Vocabulary,
    t: Option<f64>,
    rng: &mut R,
) {
    let Some(t) = t else { return };
    let total = vocab.total_tokens() as f64;
    ids.retain(|&id| {
        let keep = subsample_keep_probability(vocab.count(id) as f64 / total, t);
        keep >= 1.0 || rng.gen::<f64>() < keep
    });
}

/// Calls `f(focal, context)` for every pair of a (subsampled) sentence, in
/// focal-position order. With `dynamic` the reach for each focal token is
/// drawn uniformly from `1..=window`.
pub fn for_each_pair<R: Rng + ?Sized, F: FnMut(u32, u32)>(
    sentence: &[u32],
    window: usize,
    dynamic: bool,
    rng: &mut R,
    mut f: F,
) {
    if window == 0 {
        return;
    }
    for (pos, &focal) in sentence.iter().enumerate() {
        let reach = if dynamic {
            rng.gen_range(1..=window)
        } else {
            window
        };
        let lo = pos.saturating_sub(reach);
        let hi = (pos + reach).min(sentence.len() - 1);
        for (c, &ctx) in sentence.iter().enumerate().take(hi + 1).skip(lo) {
            if c != pos {
                f(focal, ctx);
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairConfig {
    pub window: usize,
    pub dynamic_window: bool,
    /// Subsampling threshold `t`; `None` disables subsampling.
    pub subsample: Option<f64>,
    pub negatives: usize,
    pub policy: NegativePolicy,
}

impl Default for PairConfig {
    fn default() -> Self {
        PairConfig {
            window: 5,
            dynamic_window: true,
            subsample: Some(DEFAULT_SUBSAMPLE),
            negatives: 5,
            policy: NegativePolicy::Redraw,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrainingExample {
    pub focal: u32,
    pub context: u32,
    pub negatives: Vec<u32>,
}

/// Pulls id sentences from `sentences` and yields training examples.
/// `Ok(None)` marks the end of the epoch.
pub struct TrainingPairStream<'a, I, R> {
    sentences: I,
    table: &'a NegativeSamplingTable,
    vocab: &'a Vocabulary,
    config: PairConfig,
    rng: R,
    pending: Vec<(u32, u32)>,
    next: usize,
    tokens_read: u64,
}

impl<'a, I, R> TrainingPairStream<'a, I, R>
where
    I: Iterator<Item = Vec<u32>>,
    R: Rng,
{
    pub fn new(
        sentences: I,
        vocab: &'a Vocabulary,
        table: &'a NegativeSamplingTable,
        config: PairConfig,
        rng: R,
    ) -> Result<Self> {
        if config.negatives == 0 {
            return Err(Error::InvalidConfig("need at least one negative"));
        }
        if vocab.is_empty() {
            return Err(Error::EmptyVocabulary);
        }
        Ok(TrainingPairStream {
            sentences,
            table,
            vocab,
            config,
            rng,
            pending: Vec::new(),
            next: 0,
            tokens_read: 0,
        })
    }

    /// In-vocabulary tokens consumed so far, before subsampling.
    pub fn tokens_read(&self) -> u64 {
        self.tokens_read
    }

    pub fn next_pair(&mut self) -> Option<(u32, u32)> {
        while self.next >= self.pending.len() {
            let mut sentence = self.sentences.next()?;
            self.tokens_read += sentence.len() as u64;
            subsample_in_place(
                &mut sentence,
                self.vocab,
                self.config.subsample,
                &mut self.rng,
            );
            self.pending.clear();
            self.next = 0;
            let pending = &mut self.pending;
            for_each_pair(
                &sentence,
                self.config.window,
                self.config.dynamic_window,
                &mut self.rng,
                |f, c| pending.push((f, c)),
            );
        }
        let p = self.pending[self.next];
        self.next += 1;
        Some(p)
    }

    pub fn next_example(&mut self) -> Result<Option<TrainingExample>> {
        let Some((focal, context)) = self.next_pair() else {
            return Ok(None);
        };
        let mut negatives = vec![];
        self.table.draw_negatives(
            context,
            self.config.negatives,
            self.config.policy,
            &mut self.rng,
            &mut negatives,
        )?;
        Ok(Some(TrainingExample {
            focal,
            context,
            negatives,
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;
    use crate::vocab::build_vocabulary;
    use alloc::collections::BTreeSet;

    fn counts_of(t: &NegativeSamplingTable, id: u32) -> usize {
        t.as_slice().iter().filter(|&&x| x == id).count()
    }

    #[test]
    fn table_proportions() {
        // 9^0.75 / (9^0.75 + 1) = 5.196152 / 6.196152
        let t = NegativeSamplingTable::from_counts(&[9, 1], 1_000_000).unwrap();
        let frac = counts_of(&t, 0) as f64 / t.len() as f64;
        let expected = libm::pow(9.0, 0.75) / (libm::pow(9.0, 0.75) + 1.0);
        assert!((expected - 0.838_60).abs() < 1e-4);
        assert!((frac - expected).abs() < 1e-6);

        let t = NegativeSamplingTable::from_counts(&[1, 1], 1000).unwrap();
        assert_eq!(counts_of(&t, 0), 500);
        assert_eq!(counts_of(&t, 1), 500);

        let t = NegativeSamplingTable::from_counts(&[16], 37).unwrap();
        assert!(t.as_slice().iter().all(|&x| x == 0));
        assert_eq!(t.len(), 37);
    }

    #[test]
    fn table_blocks_contiguous_and_nonempty() {
        let counts: Vec<u64> = (0..50).map(|i| 1 + (1000 / (i + 1)) as u64).collect();
        let t = NegativeSamplingTable::from_counts(&counts, 60).unwrap();
        assert_eq!(t.len(), 60);
        for id in 0..50u32 {
            assert!(counts_of(&t, id) >= 1);
        }
        assert!(t.as_slice().windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn table_size_errors() {
        assert_eq!(
            NegativeSamplingTable::from_counts(&[1, 2, 3], 2),
            Err(Error::TableTooSmall { size: 2, vocab: 3 })
        );
        assert_eq!(
            NegativeSamplingTable::from_counts(&[], 2),
            Err(Error::EmptyVocabulary)
        );
    }

    #[test]
    fn keep_probability_examples() {
        let t = 1e-3;
        assert_eq!(subsample_keep_probability(t, t), 1.0);
        assert!((subsample_keep_probability(4.0 * t, t) - 0.75).abs() < 1e-12);
        assert!((subsample_keep_probability(100.0 * t, t) - 0.11).abs() < 1e-12);
    }

    #[test]
    fn window_one_pairs() {
        let mut rng = stream_rng(0, 0);
        let mut pairs = BTreeSet::new();
        for_each_pair(&[0, 1, 2], 1, false, &mut rng, |f, c| {
            pairs.insert((f, c));
        });
        let expected: BTreeSet<_> = [(1, 0), (1, 2), (0, 1), (2, 1)].into_iter().collect();
        assert_eq!(pairs, expected);
    }

    #[test]
    fn stream_examples_have_k_negatives() {
        let vocab = build_vocabulary("a b c a b c a".split_whitespace(), 1).unwrap();
        let table = NegativeSamplingTable::build(&vocab, 100).unwrap();
        let sentences = vec![vec![0u32, 1, 2, 0]].into_iter();
        let cfg = PairConfig {
            subsample: None,
            ..PairConfig::default()
        };
        let mut s =
            TrainingPairStream::new(sentences, &vocab, &table, cfg, stream_rng(1, 0)).unwrap();
        let mut n = 0;
        while let Some(ex) = s.next_example().unwrap() {
            assert_eq!(ex.negatives.len(), 5);
            assert!(ex.negatives.iter().all(|&w| w != ex.context));
            n += 1;
        }
        assert!(n > 0);
        assert_eq!(s.tokens_read(), 4);
    }

    #[test]
    fn single_word_vocabulary_is_degenerate() {
        let vocab = build_vocabulary(["x", "x"], 1).unwrap();
        let table = NegativeSamplingTable::build(&vocab, 10).unwrap();
        let sentences = vec![vec![0u32, 0]].into_iter();
        let cfg = PairConfig {
            subsample: None,
            dynamic_window: false,
            ..PairConfig::default()
        };
        let mut s =
            TrainingPairStream::new(sentences, &vocab, &table, cfg, stream_rng(1, 0)).unwrap();
        assert_eq!(s.next_example(), Err(Error::DegenerateVocabulary));
    }

    #[test]
    fn skip_policy_drops_collisions() {
        let t = NegativeSamplingTable::from_counts(&[1, 1], 2).unwrap();
        let mut rng = stream_rng(3, 0);
        let mut out = vec![];
        t.draw_negatives(0, 200, NegativePolicy::Skip, &mut rng, &mut out)
            .unwrap();
        assert!(out.len() < 200 && out.iter().all(|&w| w == 1));
    }

    proptest::proptest! {
        #[test]
        fn pairs_stay_within_window(
            sentence in proptest::collection::vec(0u32..20, 1..60),
            window in 1usize..8,
            dynamic: bool,
            seed: u64,
        ) {
            let mut rng = stream_rng(seed, 0);
            // recover positions by using position-tagged ids
            let tagged: Vec<u32> = (0..sentence.len() as u32).collect();
            let mut ok = true;
            for_each_pair(&tagged, window, dynamic, &mut rng, |f, c| {
                ok &= (f as i64 - c as i64).unsigned_abs() as usize <= window && f != c;
            });
            proptest::prop_assert!(ok);
        }

        #[test]
        fn huge_threshold_keeps_everything(sentence in proptest::collection::vec(0u32..3, 0..50), seed: u64) {
            let vocab = build_vocabulary("a a a a b b c".split_whitespace(), 1).unwrap();
            let mut ids = sentence.clone();
            subsample_in_place(&mut ids, &vocab, Some(1e9), &mut stream_rng(seed, 0));
            proptest::prop_assert_eq!(ids, sentence);
        }
    }
}
