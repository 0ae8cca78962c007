//! Joint training of skip-gram with negative sampling and the two
//! hierarchical hypernymy objectives.
//!
//! For every streamed `(w, c)` pair the trainer
//!
//! 1. takes an SGNS step on `w`'s word vector and the context vectors of `c`
//!    and the sampled negatives,
//! 2. if `w` has hypernyms, splits those that co-occur with `c` into
//!    `h_plus` (the context is closer to `w` than to the hypernym by at least
//!    the margin) and `h_minus` (all others),
//! 3. pulls `w` and each hypernym in `h_plus` together, averaged over
//!    `h_plus` ([`hyper_attract_step`]),
//! 4. pulls each hypernym in `h_minus` and `w` together, unnormalized
//!    ([`hyper_generality_step`]).
//!
//! Both hierarchical terms minimize `1 - cos(x, y)` for the related pair and
//! `cos(x, n)` for `k` freshly sampled negatives `n` per related pair, where
//! `x` is the first argument of the pair (`w` for attraction, the hypernym
//! for generality). All three objectives share one linearly decaying
//! learning rate.

use std::io::Write;
use std::sync::atomic::{AtomicU64, Ordering};

use crate::corpus::{build_neg_table, line_pair_count, pair_stream, CoocIndex, EncodedCorpus, NegTable, Vocab};
use crate::embeddings::{dot, init_store, EmbeddingStore, VectorTables};
use crate::hyperbase::HypernymResource;
use crate::rng::{derive_seed, derived_rng, Rng};
use crate::{Error, Result};

/// Ratio of the final to the initial learning rate.
pub const MIN_LR_RATIO: f64 = 1e-4;

/// Training hyperparameters.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub dims: usize,
    pub window: usize,
    /// Negative samples per positive pair, for all three objectives.
    pub negatives: usize,
    pub learning_rate: f64,
    /// Margin separating `h_plus` from `h_minus`.
    pub margin: f64,
    pub epochs: usize,
    /// Exponent of the negative-sampling distribution.
    pub neg_exponent: f64,
    /// Subsampling threshold; 0 disables subsampling.
    pub subsample: f64,
    pub workers: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            dims: 100,
            window: 5,
            negatives: 15,
            learning_rate: 0.025,
            margin: 0.05,
            epochs: 5,
            neg_exponent: 0.75,
            subsample: 0.0,
            workers: 1,
            seed: 1,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::InvalidArgument(m.to_owned()));
        if self.dims == 0 {
            return fail("dimension must be at least 1");
        }
        if self.window == 0 {
            return fail("window must be at least 1");
        }
        if self.negatives == 0 {
            return fail("number of negatives must be at least 1");
        }
        if !self.learning_rate.is_finite() || self.learning_rate <= 0.0 {
            return fail("learning rate must be positive");
        }
        if self.margin.is_nan() || self.margin < 0.0 {
            return fail("margin must be non-negative");
        }
        if self.epochs == 0 {
            return fail("epochs must be at least 1");
        }
        if self.neg_exponent.is_nan() || self.neg_exponent < 0.0 {
            return fail("negative-sampling exponent must be non-negative");
        }
        if !(0.0..=1.0).contains(&self.subsample) {
            return fail("subsampling threshold must lie in [0, 1]");
        }
        if self.workers == 0 {
            return fail("workers must be at least 1");
        }
        Ok(())
    }
}

/// Margin-based split of a word's co-occurring hypernyms.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PartitionResult {
    pub h_plus: Vec<u32>,
    pub h_minus: Vec<u32>,
}

/// Mean per-pair losses of one epoch.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EpochLoss {
    pub epoch: usize,
    pub pairs: u64,
    pub sgns: f64,
    pub attract: f64,
    pub generality: f64,
    pub attract_events: u64,
    pub generality_events: u64,
}

impl EpochLoss {
    pub fn combined(&self) -> f64 {
        self.sgns + self.attract + self.generality
    }
}

/// Write the per-epoch loss log as CSV.
pub fn write_loss_csv<W: Write>(mut writer: W, losses: &[EpochLoss]) -> Result<()> {
    writeln!(writer, "epoch,sgns_loss,attract_loss,generality_loss")?;
    for l in losses {
        writeln!(writer, "{},{},{},{}", l.epoch, l.sgns, l.attract, l.generality)?;
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub struct TrainOutput {
    pub store: EmbeddingStore,
    pub losses: Vec<EpochLoss>,
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `ln σ(x)`, stable for large |x|.
fn log_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        -(-x).exp().ln_1p()
    } else {
        x - x.exp().ln_1p()
    }
}

/// Cosine that treats a zero-norm side as orthogonal.
fn cosine_or_zero(x: &[f64], y: &[f64]) -> f64 {
    let nx = dot(x, x).sqrt();
    let ny = dot(y, y).sqrt();
    if nx == 0.0 || ny == 0.0 {
        0.0
    } else {
        dot(x, y) / (nx * ny)
    }
}

/// Add `scale · ∂cos(x, y)/∂x` to `out`; returns `cos(x, y)`.
///
/// `∂cos/∂x = y / (|x||y|) - cos · x / |x|²`
fn add_cosine_grad(x: &[f64], y: &[f64], scale: f64, out: &mut [f64]) -> f64 {
    let xx = dot(x, x);
    let yy = dot(y, y);
    if xx == 0.0 || yy == 0.0 {
        return 0.0;
    }
    let inv = 1.0 / (xx.sqrt() * yy.sqrt());
    let cos = dot(x, y) * inv;
    let a = scale * inv;
    let b = scale * cos / xx;
    for ((o, &xi), &yi) in out.iter_mut().zip(x).zip(y) {
        *o += a * yi - b * xi;
    }
    cos
}

/// Gradient accumulator keyed by word id, so that a step applies the exact
/// gradient at the pre-step point even when ids repeat.
#[derive(Default)]
struct GradBuffer {
    dims: usize,
    ids: Vec<u32>,
    grads: Vec<f64>,
}

impl GradBuffer {
    fn reset(&mut self, dims: usize) {
        self.dims = dims;
        self.ids.clear();
        self.grads.clear();
    }

    fn slot(&mut self, id: u32) -> &mut [f64] {
        let d = self.dims;
        let pos = match self.ids.iter().position(|&i| i == id) {
            Some(p) => p,
            None => {
                self.ids.push(id);
                self.grads.resize(self.grads.len() + d, 0.0);
                self.ids.len() - 1
            }
        };
        &mut self.grads[pos * d..(pos + 1) * d]
    }

    /// `word(id) -= lr · grad(id)` for every touched id.
    fn apply<T: VectorTables>(&self, store: &mut T, lr: f64) {
        let d = self.dims;
        for (k, &id) in self.ids.iter().enumerate() {
            let g = &self.grads[k * d..(k + 1) * d];
            for (x, gi) in store.word_mut(id).iter_mut().zip(g) {
                *x -= lr * gi;
            }
        }
    }
}

/// Reusable scratch space for the update steps.
#[derive(Default)]
pub struct Workspace {
    word: Vec<f64>,
    word_grad: Vec<f64>,
    grads: GradBuffer,
    x: Vec<f64>,
    y: Vec<f64>,
}

impl Workspace {
    pub fn new() -> Self {
        Self::default()
    }

    /// One SGNS update for the observed pair `(w, c)`.
    ///
    /// Returns `-ln σ(w·c) - Σ ln σ(-w·n)` evaluated before the update.
    /// Negatives equal to `c` are skipped.
    pub fn sgns_step<T: VectorTables>(&mut self, store: &mut T, w: u32, c: u32, negatives: &[u32], lr: f64) -> f64 {
        let d = store.dims();
        self.word.clear();
        self.word.extend_from_slice(store.word(w));
        self.word_grad.clear();
        self.word_grad.resize(d, 0.0);

        let mut loss = 0.0;
        let targets = std::iter::once((c, true)).chain(negatives.iter().filter(|&&n| n != c).map(|&n| (n, false)));
        for (target, positive) in targets {
            let ctx = store.context(target);
            let f = dot(&self.word, ctx);
            let (l, g) = if positive {
                (-log_sigmoid(f), (1.0 - sigmoid(f)) * lr)
            } else {
                (-log_sigmoid(-f), -sigmoid(f) * lr)
            };
            loss += l;
            for (acc, &ci) in self.word_grad.iter_mut().zip(ctx) {
                *acc += g * ci;
            }
            for (ci, &wi) in store.context_mut(target).iter_mut().zip(&self.word) {
                *ci += g * wi;
            }
        }
        for (wi, gi) in store.word_mut(w).iter_mut().zip(&self.word_grad) {
            *wi += gi;
        }
        loss
    }

    /// Accumulate the gradient of `weight · (1 - cos(x, y))` and of
    /// `weight · cos(x, n)` for each negative into the buffer; returns the
    /// loss.
    fn accumulate_pair<T: VectorTables>(&mut self, store: &T, x: u32, y: u32, negatives: &[u32], weight: f64) -> f64 {
        self.x.clear();
        self.x.extend_from_slice(store.word(x));
        self.y.clear();
        self.y.extend_from_slice(store.word(y));

        // d(1 - cos)/dx = -dcos/dx
        let cos = add_cosine_grad(&self.x, &self.y, -weight, self.grads.slot(x));
        add_cosine_grad(&self.y, &self.x, -weight, self.grads.slot(y));
        let mut loss = weight * (1.0 - cos);

        for &n in negatives {
            if n == x || n == y {
                continue;
            }
            self.y.clear();
            self.y.extend_from_slice(store.word(n));
            let cos = add_cosine_grad(&self.x, &self.y, weight, self.grads.slot(x));
            add_cosine_grad(&self.y, &self.x, weight, self.grads.slot(n));
            loss += weight * cos;
        }
        loss
    }

    /// Attraction between `w` and its `h_plus` hypernyms, averaged over the
    /// set. `negatives` holds `k` ids per hypernym, in set order.
    pub fn hyper_attract_step<T: VectorTables>(
        &mut self,
        store: &mut T,
        w: u32,
        h_plus: &[u32],
        negatives: &[u32],
        lr: f64,
    ) -> f64 {
        if h_plus.is_empty() {
            return 0.0;
        }
        let k = negatives.len() / h_plus.len();
        debug_assert_eq!(k * h_plus.len(), negatives.len());
        let weight = 1.0 / h_plus.len() as f64;
        self.grads.reset(store.dims());
        let mut loss = 0.0;
        for (i, &u) in h_plus.iter().enumerate() {
            loss += self.accumulate_pair(store, w, u, &negatives[i * k..(i + 1) * k], weight);
        }
        self.grads.apply(store, lr);
        loss
    }

    /// Attraction of each `h_minus` hypernym towards `w`, summed without
    /// normalization. Negatives are pushed away from the hypernym.
    pub fn hyper_generality_step<T: VectorTables>(
        &mut self,
        store: &mut T,
        w: u32,
        h_minus: &[u32],
        negatives: &[u32],
        lr: f64,
    ) -> f64 {
        if h_minus.is_empty() {
            return 0.0;
        }
        let k = negatives.len() / h_minus.len();
        debug_assert_eq!(k * h_minus.len(), negatives.len());
        self.grads.reset(store.dims());
        let mut loss = 0.0;
        for (i, &v) in h_minus.iter().enumerate() {
            loss += self.accumulate_pair(store, v, w, &negatives[i * k..(i + 1) * k], 1.0);
        }
        self.grads.apply(store, lr);
        loss
    }
}

/// One SGNS update; see [`Workspace::sgns_step`].
pub fn sgns_step<T: VectorTables>(store: &mut T, w: u32, c: u32, negatives: &[u32], lr: f64) -> f64 {
    Workspace::new().sgns_step(store, w, c, negatives, lr)
}

/// See [`Workspace::hyper_attract_step`].
pub fn hyper_attract_step<T: VectorTables>(store: &mut T, w: u32, h_plus: &[u32], negatives: &[u32], lr: f64) -> f64 {
    Workspace::new().hyper_attract_step(store, w, h_plus, negatives, lr)
}

/// See [`Workspace::hyper_generality_step`].
pub fn hyper_generality_step<T: VectorTables>(
    store: &mut T,
    w: u32,
    h_minus: &[u32],
    negatives: &[u32],
    lr: f64,
) -> f64 {
    Workspace::new().hyper_generality_step(store, w, h_minus, negatives, lr)
}

/// Split the hypernyms of `w` that co-occur with `c` by the margin test
/// `cos(w, c) - cos(u, c) >= margin`.
///
/// Cosines pair word vectors with the context vector of `c`.
pub fn partition_hypernyms<T: VectorTables>(
    store: &T,
    w: u32,
    c: u32,
    hypernyms: &[u32],
    cooc: &CoocIndex,
    margin: f64,
) -> PartitionResult {
    let mut result = PartitionResult::default();
    partition_into(store, w, c, hypernyms, cooc, margin, &mut result);
    result
}

fn partition_into<T: VectorTables>(
    store: &T,
    w: u32,
    c: u32,
    hypernyms: &[u32],
    cooc: &CoocIndex,
    margin: f64,
    out: &mut PartitionResult,
) {
    out.h_plus.clear();
    out.h_minus.clear();
    if hypernyms.is_empty() {
        return;
    }
    let ctx = store.context(c);
    let cos_wc = cosine_or_zero(store.word(w), ctx);
    for &u in hypernyms {
        if !cooc.contains(c, u) {
            continue;
        }
        if cos_wc - cosine_or_zero(store.word(u), ctx) >= margin {
            out.h_plus.push(u);
        } else {
            out.h_minus.push(u);
        }
    }
}

/// Hypernym supervision for [`train`].
#[derive(Clone, Copy)]
struct Hierarchy<'a> {
    resource: &'a HypernymResource,
    cooc: &'a CoocIndex,
}

/// Train hierarchical embeddings.
///
/// The resource must already be filtered against the evaluation datasets.
/// An empty resource degenerates to plain SGNS.
pub fn train(
    corpus: &EncodedCorpus,
    vocab: &Vocab,
    resource: &HypernymResource,
    cooc: &CoocIndex,
    config: &TrainConfig,
) -> Result<TrainOutput> {
    if !resource.is_filtered() {
        return Err(Error::InvalidArgument(
            "hypernym resource must be filtered against evaluation datasets before training".into(),
        ));
    }
    if cooc.n_contexts() != vocab.len() {
        return Err(Error::InvalidArgument(format!(
            "co-occurrence index covers {} contexts, vocabulary has {} words",
            cooc.n_contexts(),
            vocab.len()
        )));
    }
    if resource.is_empty() {
        log::warn!("hypernym resource is empty; training plain SGNS");
    }
    run(corpus, vocab, Some(Hierarchy { resource, cooc }), config)
}

/// Plain skip-gram with negative sampling.
pub fn train_sgns(corpus: &EncodedCorpus, vocab: &Vocab, config: &TrainConfig) -> Result<TrainOutput> {
    run(corpus, vocab, None, config)
}

const STREAM_PAIRS: u64 = 0;
const STREAM_NEGATIVES: u64 = 1;
const STREAM_INIT: u64 = 2;

/// Expected number of pairs per epoch, used for learning-rate decay.
///
/// Exact without subsampling; with subsampling each line's surviving length
/// is approximated by its expected length.
fn expected_pairs(corpus: &EncodedCorpus, vocab: &Vocab, config: &TrainConfig) -> f64 {
    if config.subsample == 0.0 {
        return corpus.n_pairs(config.window) as f64;
    }
    let sub = crate::corpus::Subsampler::new(vocab, config.subsample);
    corpus
        .lines()
        .iter()
        .map(|line| {
            let kept: f64 = line.iter().map(|&id| sub.keep_probability(id)).sum();
            line_pair_count(kept.round() as usize, config.window) as f64
        })
        .sum()
}

fn run(
    corpus: &EncodedCorpus,
    vocab: &Vocab,
    hierarchy: Option<Hierarchy<'_>>,
    config: &TrainConfig,
) -> Result<TrainOutput> {
    config.validate()?;
    let neg_table = build_neg_table(vocab, config.neg_exponent)?;
    let mut store = init_store(vocab, config.dims, derive_seed(config.seed, &[STREAM_INIT]))?;
    let total = (expected_pairs(corpus, vocab, config) * config.epochs as f64).max(1.0);
    let processed = AtomicU64::new(0);

    let shards: Vec<EncodedCorpus> = if config.workers > 1 {
        (0..config.workers)
            .map(|i| {
                EncodedCorpus::from_lines(
                    corpus
                        .lines()
                        .iter()
                        .skip(i)
                        .step_by(config.workers)
                        .cloned()
                        .collect(),
                )
            })
            .collect()
    } else {
        Vec::new()
    };

    let mut losses = Vec::with_capacity(config.epochs);
    for epoch in 0..config.epochs {
        let ctx = EpochContext {
            vocab,
            hierarchy,
            neg_table: &neg_table,
            config,
            epoch,
            total,
            processed: &processed,
        };
        let sums = if config.workers == 1 {
            ctx.run_worker(&mut store, corpus, 0)?
        } else {
            let dims = store.dims();
            let rows = store.len();
            let (words, contexts) = store.tables_mut();
            let handle = HogwildTables {
                words: words.as_mut_ptr(),
                contexts: contexts.as_mut_ptr(),
                dims,
                rows,
            };
            let results: Vec<Result<LossSums>> = std::thread::scope(|scope| {
                let workers: Vec<_> = shards
                    .iter()
                    .enumerate()
                    .map(|(i, shard)| {
                        let ctx = &ctx;
                        let mut tables = handle;
                        scope.spawn(move || ctx.run_worker(&mut tables, shard, i as u64))
                    })
                    .collect();
                workers
                    .into_iter()
                    .map(|h| h.join().expect("training worker panicked"))
                    .collect()
            });
            let mut sums = LossSums::default();
            for r in results {
                sums.merge(&r?);
            }
            sums
        };

        if !store.is_finite() {
            return Err(Error::Numeric(format!("non-finite vector entries after epoch {}", epoch + 1)));
        }
        let loss = sums.into_epoch_loss(epoch + 1);
        log::info!(
            "epoch {}: pairs={} sgns={:.5} attract={:.5} generality={:.5}",
            loss.epoch,
            loss.pairs,
            loss.sgns,
            loss.attract,
            loss.generality
        );
        losses.push(loss);
    }

    Ok(TrainOutput { store, losses })
}

#[derive(Default)]
struct LossSums {
    pairs: u64,
    sgns: f64,
    attract: f64,
    generality: f64,
    attract_events: u64,
    generality_events: u64,
}

impl LossSums {
    fn merge(&mut self, other: &LossSums) {
        self.pairs += other.pairs;
        self.sgns += other.sgns;
        self.attract += other.attract;
        self.generality += other.generality;
        self.attract_events += other.attract_events;
        self.generality_events += other.generality_events;
    }

    fn into_epoch_loss(self, epoch: usize) -> EpochLoss {
        let n = self.pairs.max(1) as f64;
        EpochLoss {
            epoch,
            pairs: self.pairs,
            sgns: self.sgns / n,
            attract: self.attract / n,
            generality: self.generality / n,
            attract_events: self.attract_events,
            generality_events: self.generality_events,
        }
    }
}

struct EpochContext<'a> {
    vocab: &'a Vocab,
    hierarchy: Option<Hierarchy<'a>>,
    neg_table: &'a NegTable,
    config: &'a TrainConfig,
    epoch: usize,
    total: f64,
    processed: &'a AtomicU64,
}

impl EpochContext<'_> {
    fn learning_rate(&self, processed: u64) -> f64 {
        let progress = (processed as f64 / self.total).min(1.0);
        self.config.learning_rate * (1.0 - (1.0 - MIN_LR_RATIO) * progress)
    }

    fn draw(&self, rng: &mut Rng, n: usize, out: &mut Vec<u32>) {
        out.clear();
        out.extend((0..n).map(|_| self.neg_table.sample(rng)));
    }

    fn run_worker<T: VectorTables>(&self, store: &mut T, corpus: &EncodedCorpus, worker: u64) -> Result<LossSums> {
        let config = self.config;
        let k = config.negatives;
        let epoch = self.epoch as u64;
        let stream_seed = derive_seed(config.seed, &[STREAM_PAIRS, epoch, worker]);
        let mut neg_rng = derived_rng(config.seed, &[STREAM_NEGATIVES, epoch, worker]);

        let mut ws = Workspace::new();
        let mut sums = LossSums::default();
        let mut negatives = Vec::with_capacity(k);
        let mut hier_negatives = Vec::new();
        let mut parts = PartitionResult::default();

        for (w, c) in pair_stream(corpus, self.vocab, config.window, config.subsample, stream_seed)? {
            let lr = self.learning_rate(self.processed.fetch_add(1, Ordering::Relaxed));
            self.draw(&mut neg_rng, k, &mut negatives);
            sums.sgns += ws.sgns_step(store, w, c, &negatives, lr);
            sums.pairs += 1;

            let Some(h) = self.hierarchy else { continue };
            let hypers = h.resource.hypernyms_of(w);
            if hypers.is_empty() {
                continue;
            }
            partition_into(store, w, c, hypers, h.cooc, config.margin, &mut parts);
            if !parts.h_plus.is_empty() {
                self.draw(&mut neg_rng, k * parts.h_plus.len(), &mut hier_negatives);
                sums.attract += ws.hyper_attract_step(store, w, &parts.h_plus, &hier_negatives, lr);
                sums.attract_events += 1;
            }
            if !parts.h_minus.is_empty() {
                self.draw(&mut neg_rng, k * parts.h_minus.len(), &mut hier_negatives);
                sums.generality += ws.hyper_generality_step(store, w, &parts.h_minus, &hier_negatives, lr);
                sums.generality_events += 1;
            }
        }
        Ok(sums)
    }
}

/// Unsynchronized view of the store shared by training workers.
///
/// Rows are updated without locking, word2vec-style; each worker holds its
/// own copy of the handle.
#[derive(Clone, Copy)]
struct HogwildTables {
    words: *mut f64,
    contexts: *mut f64,
    dims: usize,
    rows: usize,
}

// SAFETY: the pointers refer to tables that outlive the scoped worker threads;
// concurrent row updates are the accepted lock-free SGD race.
unsafe impl Send for HogwildTables {}
unsafe impl Sync for HogwildTables {}

impl HogwildTables {
    fn row(&self, base: *mut f64, id: u32) -> *mut f64 {
        assert!((id as usize) < self.rows, "row {} out of range", id);
        // SAFETY: id < rows, so the row lies inside the table.
        unsafe { base.add(id as usize * self.dims) }
    }
}

impl VectorTables for HogwildTables {
    fn dims(&self) -> usize {
        self.dims
    }

    fn word(&self, id: u32) -> &[f64] {
        unsafe { std::slice::from_raw_parts(self.row(self.words, id), self.dims) }
    }

    fn word_mut(&mut self, id: u32) -> &mut [f64] {
        unsafe { std::slice::from_raw_parts_mut(self.row(self.words, id), self.dims) }
    }

    fn context(&self, id: u32) -> &[f64] {
        unsafe { std::slice::from_raw_parts(self.row(self.contexts, id), self.dims) }
    }

    fn context_mut(&mut self, id: u32) -> &mut [f64] {
        unsafe { std::slice::from_raw_parts_mut(self.row(self.contexts, id), self.dims) }
    }
}
