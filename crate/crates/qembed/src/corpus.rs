//! Corpus streaming: whitespace tokens, newline-delimited sentences, byte-range
//! partitions for parallel readers, and the vocabulary file.
//!
//! A reader for the byte range `[start, end)` yields exactly the tokens whose
//! first byte lies in that range, so the partitions of a file cover every
//! token once. Sentences crossing a partition boundary are split there.

use std::fs::File;
use std::io::{self, BufRead, BufReader, Cursor, Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use qembed_core::sampling::MAX_SENTENCE_LEN;
use qembed_core::vocab::VocabBuilder;
use qembed_core::Vocabulary;

use crate::error::{Error, IoContext, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CorpusOptions {
    pub lowercase: bool,
    /// Longer runs of tokens without a newline are cut into pieces.
    pub max_sentence_len: usize,
}

impl Default for CorpusOptions {
    fn default() -> Self {
        CorpusOptions {
            lowercase: true,
            max_sentence_len: MAX_SENTENCE_LEN,
        }
    }
}

/// Where the training text comes from.
#[derive(Debug, Clone)]
pub enum CorpusSource {
    File(PathBuf),
    Memory(Arc<[u8]>),
}

type DynReader = Box<dyn BufRead + Send>;

impl CorpusSource {
    pub fn file(path: impl Into<PathBuf>) -> Self {
        CorpusSource::File(path.into())
    }

    pub fn from_text(text: &str) -> Self {
        CorpusSource::Memory(Arc::from(text.as_bytes()))
    }

    pub fn len(&self) -> Result<u64> {
        match self {
            CorpusSource::File(p) => Ok(std::fs::metadata(p).at(p)?.len()),
            CorpusSource::Memory(b) => Ok(b.len() as u64),
        }
    }

    pub fn is_empty(&self) -> Result<bool> {
        Ok(self.len()? == 0)
    }

    fn describe(&self) -> PathBuf {
        match self {
            CorpusSource::File(p) => p.clone(),
            CorpusSource::Memory(_) => PathBuf::from("<memory>"),
        }
    }

    fn open_at(&self, offset: u64) -> Result<DynReader> {
        match self {
            CorpusSource::File(p) => {
                let mut f = File::open(p).at(p)?;
                f.seek(SeekFrom::Start(offset)).at(p)?;
                Ok(Box::new(BufReader::with_capacity(1 << 16, f)))
            }
            CorpusSource::Memory(b) => {
                let mut c = Cursor::new(Arc::clone(b));
                c.set_position(offset);
                Ok(Box::new(c))
            }
        }
    }

    /// Reader over the tokens starting in `[start, end)`.
    pub fn open_range(
        &self,
        start: u64,
        end: u64,
        opts: CorpusOptions,
    ) -> Result<SentenceReader<DynReader>> {
        if start == 0 {
            return Ok(SentenceReader::new(self.open_at(0)?, 0, end, opts));
        }
        let mut r = self.open_at(start - 1)?;
        let mut prev = [0u8; 1];
        let n = r.read(&mut prev).at(&self.describe())?;
        let mut pos = start - 1 + n as u64;
        if n == 1 && !prev[0].is_ascii_whitespace() {
            // mid-token: the token belongs to the previous range
            pos += skip_token(&mut r).at(&self.describe())?;
        }
        Ok(SentenceReader::new(r, pos, end, opts))
    }

    pub fn sentences(&self, opts: CorpusOptions) -> Result<SentenceReader<DynReader>> {
        self.open_range(0, u64::MAX, opts)
    }

    /// `parts` contiguous byte ranges covering the source.
    pub fn partitions(&self, parts: usize) -> Result<Vec<(u64, u64)>> {
        Ok(partition(self.len()?, parts))
    }
}

fn skip_token<R: BufRead>(r: &mut R) -> io::Result<u64> {
    let mut skipped = 0u64;
    loop {
        let buf = r.fill_buf()?;
        if buf.is_empty() {
            return Ok(skipped);
        }
        match buf.iter().position(|b| b.is_ascii_whitespace()) {
            Some(n) => {
                r.consume(n);
                return Ok(skipped + n as u64);
            }
            None => {
                let n = buf.len();
                r.consume(n);
                skipped += n as u64;
            }
        }
    }
}

/// Splits `len` bytes into `parts` near-equal contiguous ranges.
pub fn partition(len: u64, parts: usize) -> Vec<(u64, u64)> {
    let parts = parts.max(1) as u64;
    (0..parts)
        .map(|i| {
            (
                len * i / parts,
                if i + 1 == parts {
                    u64::MAX
                } else {
                    len * (i + 1) / parts
                },
            )
        })
        .collect()
}

/// Streams sentences of string tokens.
pub struct SentenceReader<R> {
    inner: R,
    pos: u64,
    end: u64,
    opts: CorpusOptions,
    token: Vec<u8>,
    done: bool,
}

impl<R: BufRead> SentenceReader<R> {
    pub fn new(inner: R, pos: u64, end: u64, opts: CorpusOptions) -> Self {
        SentenceReader {
            inner,
            pos,
            end,
            opts,
            token: Vec::new(),
            done: false,
        }
    }

    fn flush_token(&mut self, sentence: &mut Vec<String>) {
        if self.token.is_empty() {
            return;
        }
        let s = String::from_utf8_lossy(&self.token);
        sentence.push(if self.opts.lowercase {
            s.to_lowercase()
        } else {
            s.into_owned()
        });
        self.token.clear();
    }

    /// Next non-empty sentence, or `None` at the end of the range.
    pub fn next_sentence(&mut self) -> io::Result<Option<Vec<String>>> {
        let cap = self.opts.max_sentence_len.max(1);
        let mut sentence = Vec::new();
        while !self.done {
            let buf = self.inner.fill_buf()?;
            if buf.is_empty() {
                self.done = true;
                self.flush_token(&mut sentence);
                break;
            }
            let mut used = 0;
            let mut boundary = false;
            let mut stop = false;
            for &b in buf {
                if b.is_ascii_whitespace() {
                    used += 1;
                    if !self.token.is_empty() {
                        let s = String::from_utf8_lossy(&self.token);
                        sentence.push(if self.opts.lowercase {
                            s.to_lowercase()
                        } else {
                            s.into_owned()
                        });
                        self.token.clear();
                    }
                    if b == b'\n' || sentence.len() >= cap {
                        boundary = true;
                        break;
                    }
                } else {
                    if self.token.is_empty() && self.pos + used as u64 >= self.end {
                        stop = true;
                        break;
                    }
                    self.token.push(b);
                    used += 1;
                }
            }
            self.inner.consume(used);
            self.pos += used as u64;
            if stop {
                self.done = true;
            }
            if (boundary || stop) && !sentence.is_empty() {
                break;
            }
        }
        Ok(if sentence.is_empty() {
            None
        } else {
            Some(sentence)
        })
    }
}

impl<R: BufRead> Iterator for SentenceReader<R> {
    type Item = io::Result<Vec<String>>;

    fn next(&mut self) -> Option<Self::Item> {
        self.next_sentence().transpose()
    }
}

/// Maps token sentences to id sentences, dropping out-of-vocabulary tokens.
/// The first read error ends the stream and is kept in `error`.
pub struct IdSentences<'a, R> {
    reader: SentenceReader<R>,
    vocab: &'a Vocabulary,
    pub error: Option<io::Error>,
}

impl<'a, R: BufRead> IdSentences<'a, R> {
    pub fn new(reader: SentenceReader<R>, vocab: &'a Vocabulary) -> Self {
        IdSentences {
            reader,
            vocab,
            error: None,
        }
    }
}

impl<R: BufRead> Iterator for IdSentences<'_, R> {
    type Item = Vec<u32>;

    fn next(&mut self) -> Option<Vec<u32>> {
        loop {
            match self.reader.next_sentence() {
                Ok(Some(s)) => {
                    let ids: Vec<u32> = s.iter().filter_map(|w| self.vocab.id(w)).collect();
                    if !ids.is_empty() {
                        return Some(ids);
                    }
                }
                Ok(None) => return None,
                Err(e) => {
                    self.error = Some(e);
                    return None;
                }
            }
        }
    }
}

/// Counts every token of the source.
pub fn build_vocabulary(
    source: &CorpusSource,
    min_count: u64,
    opts: CorpusOptions,
) -> Result<Vocabulary> {
    let mut b = VocabBuilder::new();
    for s in source.sentences(opts)? {
        for t in s.at(&source.describe())? {
            b.add(&t);
        }
    }
    Ok(b.build(min_count)?)
}

/// One `word<TAB>count` line per word, in id order.
pub fn write_vocabulary<W: Write>(vocab: &Vocabulary, mut w: W) -> io::Result<()> {
    for (word, count) in vocab.words().iter().zip(vocab.counts()) {
        writeln!(w, "{word}\t{count}")?;
    }
    w.flush()
}

pub fn save_vocabulary(vocab: &Vocabulary, path: &Path) -> Result<()> {
    let f = File::create(path).at(path)?;
    write_vocabulary(vocab, std::io::BufWriter::new(f)).at(path)
}

/// Reads a vocabulary file; ids follow line order and `min_count` is the
/// smallest count present.
pub fn read_vocabulary<R: BufRead>(r: R) -> Result<Vocabulary> {
    let mut words = Vec::new();
    let mut counts = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let parse_err = |message: &str| Error::Parse {
            line: i + 1,
            message: message.to_string(),
        };
        let (w, c) = line
            .split_once('\t')
            .ok_or_else(|| parse_err("expected word<TAB>count"))?;
        let c: u64 = c
            .trim()
            .parse()
            .map_err(|_| parse_err("count is not an integer"))?;
        words.push(w.to_string());
        counts.push(c);
    }
    if words.is_empty() {
        return Err(qembed_core::Error::EmptyVocabulary.into());
    }
    let min = counts.iter().copied().min().unwrap_or(1).max(1);
    Ok(Vocabulary::from_ordered(words, counts, min)?)
}

pub fn load_vocabulary(path: &Path) -> Result<Vocabulary> {
    let f = File::open(path).at(path)?;
    read_vocabulary(BufReader::new(f))
}
