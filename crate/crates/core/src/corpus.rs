//! Corpus statistics: vocabulary, training pairs, the co-occurrence index and
//! the negative-sampling table.
//!
//! The corpus is plain UTF-8 text split on whitespace. Windows never cross a
//! line break.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use rand::Rng as _;

use crate::rng::{rng_from_seed, Rng};
use crate::{Error, Result};

/// Word ↔ id table shared by words and contexts.
///
/// Ids are dense and assigned in descending count order, ties broken
/// lexicographically.
#[derive(Clone, Debug, PartialEq)]
pub struct Vocab {
    words: Vec<String>,
    counts: Vec<u64>,
    index: HashMap<String, u32>,
    total_tokens: u64,
    min_count: u64,
}

impl Vocab {
    /// Build a vocabulary from raw token counts.
    pub fn from_counts(counts: HashMap<String, u64>, total_tokens: u64, min_count: u64) -> Result<Self> {
        let mut kept: Vec<(String, u64)> = counts.into_iter().filter(|(_, c)| *c >= min_count).collect();
        if kept.is_empty() {
            return Err(Error::Data("vocabulary is empty after pruning".into()));
        }
        kept.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));

        let mut words = Vec::with_capacity(kept.len());
        let mut word_counts = Vec::with_capacity(kept.len());
        let mut index = HashMap::with_capacity(kept.len());
        for (id, (word, count)) in kept.into_iter().enumerate() {
            index.insert(word.clone(), id as u32);
            words.push(word);
            word_counts.push(count);
        }

        Ok(Vocab {
            words,
            counts: word_counts,
            index,
            total_tokens,
            min_count,
        })
    }

    /// Count tokens from a reader and prune those below `min_count`.
    pub fn from_reader<R: BufRead>(reader: R, min_count: u64) -> Result<Self> {
        let mut counts: HashMap<String, u64> = HashMap::new();
        let mut total = 0u64;
        for line in reader.lines() {
            let line = line?;
            for token in line.split_whitespace() {
                total += 1;
                match counts.get_mut(token) {
                    Some(c) => *c += 1,
                    None => {
                        counts.insert(token.to_owned(), 1);
                    }
                }
            }
        }
        Vocab::from_counts(counts, total, min_count)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn word(&self, id: u32) -> &str {
        &self.words[id as usize]
    }

    pub fn count(&self, id: u32) -> u64 {
        self.counts[id as usize]
    }

    pub fn id(&self, word: &str) -> Option<u32> {
        self.index.get(word).copied()
    }

    /// Raw number of corpus tokens, including pruned ones.
    pub fn total_tokens(&self) -> u64 {
        self.total_tokens
    }

    pub fn min_count(&self) -> u64 {
        self.min_count
    }

    /// Write the vocabulary as TSV: a header line, then `word TAB count` in
    /// id order.
    pub fn write<W: Write>(&self, mut writer: W) -> Result<()> {
        writeln!(writer, "#vocab\t{}\t{}\t{}", self.len(), self.total_tokens, self.min_count)?;
        for (word, count) in self.words.iter().zip(&self.counts) {
            writeln!(writer, "{}\t{}", word, count)?;
        }
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut writer = BufWriter::new(file);
        self.write(&mut writer)?;
        writer.flush()?;
        Ok(())
    }

    /// Read a vocabulary written by [`Vocab::save`]. Ids follow file order.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let reader = BufReader::new(File::open(path).map_err(|e| Error::io(path, e))?);
        let mut lines = reader.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::format(path, 1, "missing header"))??;
        let fields: Vec<&str> = header.split('\t').collect();
        if fields.len() != 4 || fields[0] != "#vocab" {
            return Err(Error::format(path, 1, "malformed vocabulary header"));
        }
        let parse = |s: &str| s.parse::<u64>().map_err(|_| Error::format(path, 1, "malformed vocabulary header"));
        let expected = parse(fields[1])? as usize;
        let total_tokens = parse(fields[2])?;
        let min_count = parse(fields[3])?;

        let mut words = Vec::with_capacity(expected);
        let mut counts = Vec::with_capacity(expected);
        let mut index = HashMap::with_capacity(expected);
        for (lineno, line) in lines.enumerate() {
            let line = line?;
            let mut parts = line.split('\t');
            let (Some(word), Some(count), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(Error::format(path, lineno + 2, "expected `word TAB count`"));
            };
            let count = count
                .parse::<u64>()
                .map_err(|_| Error::format(path, lineno + 2, "invalid count"))?;
            if index.insert(word.to_owned(), words.len() as u32).is_some() {
                return Err(Error::format(path, lineno + 2, format!("duplicate word {:?}", word)));
            }
            words.push(word.to_owned());
            counts.push(count);
        }
        if words.len() != expected {
            return Err(Error::format(
                path,
                1,
                format!("header announces {} words, body has {}", expected, words.len()),
            ));
        }
        if words.is_empty() {
            return Err(Error::Data("vocabulary is empty".into()));
        }
        Ok(Vocab {
            words,
            counts,
            index,
            total_tokens,
            min_count,
        })
    }
}

/// Count the tokens of a corpus file.
pub fn build_vocab(corpus_path: impl AsRef<Path>, min_count: u64) -> Result<Vocab> {
    let path = corpus_path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Vocab::from_reader(BufReader::new(file), min_count)
}

/// A corpus with tokens replaced by vocabulary ids. Out-of-vocabulary tokens
/// are dropped; line structure is kept.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EncodedCorpus {
    lines: Vec<Vec<u32>>,
}

impl EncodedCorpus {
    pub fn from_lines(lines: Vec<Vec<u32>>) -> Self {
        EncodedCorpus { lines }
    }

    pub fn from_reader<R: BufRead>(reader: R, vocab: &Vocab) -> Result<Self> {
        let mut lines = Vec::new();
        for line in reader.lines() {
            let line = line?;
            let ids: Vec<u32> = line.split_whitespace().filter_map(|t| vocab.id(t)).collect();
            if !ids.is_empty() {
                lines.push(ids);
            }
        }
        Ok(EncodedCorpus { lines })
    }

    pub fn read(path: impl AsRef<Path>, vocab: &Vocab) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        EncodedCorpus::from_reader(BufReader::new(file), vocab)
    }

    pub fn lines(&self) -> &[Vec<u32>] {
        &self.lines
    }

    pub fn n_tokens(&self) -> usize {
        self.lines.iter().map(Vec::len).sum()
    }

    /// Number of pairs [`pair_stream`] yields without subsampling.
    pub fn n_pairs(&self, window: usize) -> u64 {
        self.lines.iter().map(|l| line_pair_count(l.len(), window)).sum()
    }
}

/// Pairs produced by a line of `len` tokens with a symmetric window.
pub fn line_pair_count(len: usize, window: usize) -> u64 {
    (0..len)
        .map(|i| (i.min(window) + (len - 1 - i).min(window)) as u64)
        .sum()
}

/// Frequency-based token survival for subsampling.
///
/// A token with relative frequency `f` survives with probability
/// `min(1, sqrt(t/f) + t/f)`.
#[derive(Clone, Debug)]
pub struct Subsampler {
    keep: Vec<f64>,
}

impl Subsampler {
    pub fn new(vocab: &Vocab, threshold: f64) -> Self {
        let total = vocab.total_tokens().max(1) as f64;
        let keep = vocab
            .counts()
            .iter()
            .map(|&c| {
                let ratio = threshold * total / c as f64;
                (ratio.sqrt() + ratio).min(1.0)
            })
            .collect();
        Subsampler { keep }
    }

    pub fn keep_probability(&self, id: u32) -> f64 {
        self.keep[id as usize]
    }
}

/// Iterator over `(word, context)` id pairs.
///
/// For every line, subsampling decisions are drawn token by token in order,
/// then each surviving position yields its neighbours from left to right.
pub struct PairStream<'a> {
    lines: std::slice::Iter<'a, Vec<u32>>,
    window: usize,
    subsampler: Option<Subsampler>,
    rng: Rng,
    current: Vec<u32>,
    pos: usize,
    offset: usize,
}

impl<'a> PairStream<'a> {
    fn advance_line(&mut self) -> bool {
        loop {
            let Some(line) = self.lines.next() else {
                return false;
            };
            self.current.clear();
            match &self.subsampler {
                Some(sub) => {
                    for &id in line {
                        if self.rng.random::<f64>() < sub.keep_probability(id) {
                            self.current.push(id);
                        }
                    }
                }
                None => self.current.extend_from_slice(line),
            }
            if self.current.len() >= 2 {
                self.pos = 0;
                self.offset = 0;
                return true;
            }
        }
    }
}

impl Iterator for PairStream<'_> {
    type Item = (u32, u32);

    fn next(&mut self) -> Option<(u32, u32)> {
        loop {
            if self.pos < self.current.len() {
                let len = self.current.len();
                let lo = self.pos.saturating_sub(self.window);
                let hi = (self.pos + self.window).min(len - 1);
                let span = hi - lo + 1;
                while self.offset < span {
                    let j = lo + self.offset;
                    self.offset += 1;
                    if j != self.pos {
                        return Some((self.current[self.pos], self.current[j]));
                    }
                }
                self.pos += 1;
                self.offset = 0;
            } else if !self.advance_line() {
                return None;
            }
        }
    }
}

/// Stream training pairs over an encoded corpus.
///
/// `subsample_t = 0` disables subsampling. The stream is fully determined by
/// the corpus and `seed`.
pub fn pair_stream<'a>(
    corpus: &'a EncodedCorpus,
    vocab: &Vocab,
    window: usize,
    subsample_t: f64,
    seed: u64,
) -> Result<PairStream<'a>> {
    if window == 0 {
        return Err(Error::InvalidArgument("window must be at least 1".into()));
    }
    if !(0.0..=1.0).contains(&subsample_t) {
        return Err(Error::InvalidArgument(format!(
            "subsampling threshold {} outside [0, 1]",
            subsample_t
        )));
    }
    let subsampler = (subsample_t > 0.0).then(|| Subsampler::new(vocab, subsample_t));
    Ok(PairStream {
        lines: corpus.lines().iter(),
        window,
        subsampler,
        rng: rng_from_seed(seed),
        current: Vec::new(),
        pos: 0,
        offset: 0,
    })
}

/// Default cap on distinct (context, word) pairs held while building a
/// [`CoocIndex`].
pub const DEFAULT_COOC_BUDGET: usize = 50_000_000;

const COOC_MAGIC: &[u8; 4] = b"HVCI";
const COOC_VERSION: u8 = 1;

/// Exact membership structure over `(context, word)` pairs.
///
/// Stored as compressed rows: for each context, the sorted list of words that
/// co-occurred with it at least `min_pair_count` times.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoocIndex {
    offsets: Vec<usize>,
    words: Vec<u32>,
    min_pair_count: u32,
}

impl CoocIndex {
    /// Build from sorted, deduplicated `(context, word)` pairs.
    fn from_sorted_pairs(n_contexts: usize, pairs: &[(u32, u32)], min_pair_count: u32) -> Self {
        let mut offsets = vec![0usize; n_contexts + 1];
        for &(c, _) in pairs {
            offsets[c as usize + 1] += 1;
        }
        for i in 0..n_contexts {
            offsets[i + 1] += offsets[i];
        }
        let words = pairs.iter().map(|&(_, w)| w).collect();
        CoocIndex {
            offsets,
            words,
            min_pair_count,
        }
    }

    /// Whether `word` occurred within the window of `context`.
    pub fn contains(&self, context: u32, word: u32) -> bool {
        let c = context as usize;
        if c + 1 >= self.offsets.len() {
            return false;
        }
        self.words[self.offsets[c]..self.offsets[c + 1]]
            .binary_search(&word)
            .is_ok()
    }

    /// Words co-occurring with `context`, sorted.
    pub fn words_of(&self, context: u32) -> &[u32] {
        let c = context as usize;
        if c + 1 >= self.offsets.len() {
            return &[];
        }
        &self.words[self.offsets[c]..self.offsets[c + 1]]
    }

    pub fn n_contexts(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn min_pair_count(&self) -> u32 {
        self.min_pair_count
    }

    /// All `(context, word)` pairs in sorted order.
    pub fn pairs(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        (0..self.n_contexts()).flat_map(move |c| self.words_of(c as u32).iter().map(move |&w| (c as u32, w)))
    }

    /// Binary layout: magic `HVCI`, version byte, `n_contexts` (u64),
    /// `min_pair_count` (u32), `n_pairs` (u64), then sorted `(c, w)` pairs as
    /// little-endian u32.
    pub fn write<W: Write>(&self, mut writer: W) -> Result<()> {
        writer.write_all(COOC_MAGIC)?;
        writer.write_all(&[COOC_VERSION])?;
        writer.write_all(&(self.n_contexts() as u64).to_le_bytes())?;
        writer.write_all(&self.min_pair_count.to_le_bytes())?;
        writer.write_all(&(self.len() as u64).to_le_bytes())?;
        for (c, w) in self.pairs() {
            writer.write_all(&c.to_le_bytes())?;
            writer.write_all(&w.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read<R: Read>(mut reader: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        reader.read_exact(&mut magic)?;
        if &magic != COOC_MAGIC {
            return Err(Error::Data("not a co-occurrence index file".into()));
        }
        let mut version = [0u8; 1];
        reader.read_exact(&mut version)?;
        if version[0] != COOC_VERSION {
            return Err(Error::Data(format!("unsupported co-occurrence index version {}", version[0])));
        }
        let n_contexts = read_u64(&mut reader)? as usize;
        let min_pair_count = read_u32(&mut reader)?;
        let n_pairs = read_u64(&mut reader)? as usize;
        let mut pairs = Vec::with_capacity(n_pairs.min(1 << 24));
        for _ in 0..n_pairs {
            let c = read_u32(&mut reader)?;
            let w = read_u32(&mut reader)?;
            if c as usize >= n_contexts {
                return Err(Error::Data(format!("context id {} out of range", c)));
            }
            pairs.push((c, w));
        }
        if pairs.windows(2).any(|p| p[0] >= p[1]) {
            return Err(Error::Data("co-occurrence pairs are not strictly sorted".into()));
        }
        Ok(CoocIndex::from_sorted_pairs(n_contexts, &pairs, min_pair_count))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut writer = BufWriter::new(file);
        self.write(&mut writer)?;
        writer.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        CoocIndex::read(BufReader::new(file))
    }
}

pub(crate) fn read_u32<R: Read>(reader: &mut R) -> Result<u32> {
    let mut buf = [0u8; 4];
    reader.read_exact(&mut buf)?;
    Ok(u32::from_le_bytes(buf))
}

pub(crate) fn read_u64<R: Read>(reader: &mut R) -> Result<u64> {
    let mut buf = [0u8; 8];
    reader.read_exact(&mut buf)?;
    Ok(u64::from_le_bytes(buf))
}

/// Build the co-occurrence index with the same windows as [`pair_stream`]
/// without subsampling.
///
/// Fails with [`Error::MemoryBudget`] once more than `budget` distinct pairs
/// are seen.
pub fn build_cooc_index(
    corpus: &EncodedCorpus,
    vocab: &Vocab,
    window: usize,
    min_pair_count: u32,
    budget: usize,
) -> Result<CoocIndex> {
    if window == 0 {
        return Err(Error::InvalidArgument("window must be at least 1".into()));
    }
    let mut counts: HashMap<u64, u32> = HashMap::new();
    for line in corpus.lines() {
        for (i, &w) in line.iter().enumerate() {
            let lo = i.saturating_sub(window);
            let hi = (i + window).min(line.len() - 1);
            for (j, &c) in line.iter().enumerate().take(hi + 1).skip(lo) {
                if j == i {
                    continue;
                }
                let key = ((c as u64) << 32) | w as u64;
                match counts.get_mut(&key) {
                    Some(n) => *n = n.saturating_add(1),
                    None => {
                        if counts.len() >= budget {
                            return Err(Error::MemoryBudget { budget });
                        }
                        counts.insert(key, 1);
                    }
                }
            }
        }
    }

    let min = min_pair_count.max(1);
    let mut pairs: Vec<(u32, u32)> = counts
        .into_iter()
        .filter(|&(_, n)| n >= min)
        .map(|(key, _)| ((key >> 32) as u32, key as u32))
        .collect();
    pairs.sort_unstable();
    Ok(CoocIndex::from_sorted_pairs(vocab.len(), &pairs, min))
}

/// Cumulative distribution for drawing negative samples with probability
/// proportional to `count^alpha`.
#[derive(Clone, Debug)]
pub struct NegTable {
    cumulative: Vec<f64>,
    alpha: f64,
}

impl NegTable {
    /// Probability of drawing `id`.
    pub fn probability(&self, id: u32) -> f64 {
        let i = id as usize;
        let prev = if i == 0 { 0.0 } else { self.cumulative[i - 1] };
        self.cumulative[i] - prev
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn len(&self) -> usize {
        self.cumulative.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cumulative.is_empty()
    }

    /// Draw one word id.
    pub fn sample<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        let u: f64 = rng.random();
        let idx = self.cumulative.partition_point(|&p| p <= u);
        idx.min(self.cumulative.len() - 1) as u32
    }
}

pub fn build_neg_table(vocab: &Vocab, alpha: f64) -> Result<NegTable> {
    if vocab.is_empty() {
        return Err(Error::InvalidArgument("cannot sample from an empty vocabulary".into()));
    }
    if alpha.is_nan() || alpha < 0.0 {
        return Err(Error::InvalidArgument(format!("negative-sampling exponent {} < 0", alpha)));
    }
    let weights: Vec<f64> = vocab.counts().iter().map(|&c| (c as f64).powf(alpha)).collect();
    let total: f64 = weights.iter().sum();
    let mut acc = 0.0;
    let mut cumulative: Vec<f64> = weights
        .iter()
        .map(|w| {
            acc += w;
            acc / total
        })
        .collect();
    if let Some(last) = cumulative.last_mut() {
        *last = 1.0;
    }
    Ok(NegTable { cumulative, alpha })
}
