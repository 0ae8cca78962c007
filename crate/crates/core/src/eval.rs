//! Evaluation protocols: AP ranking, directionality, threshold
//! classification and graded entailment.
//!
//! Out-of-vocabulary pairs are skipped and counted in ranking, classification
//! and graded tasks. In the directionality task they count as errors.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use crate::embeddings::EmbeddingStore;
use crate::measures::{direction, hyper_score, Direction, Measure};
use crate::rng::derived_rng;
use crate::{Error, Result};

/// One labeled pair of a relation dataset.
#[derive(Clone, Debug, PartialEq)]
pub struct RelationPair {
    pub u: String,
    pub v: String,
    pub relation: String,
    pub score: Option<f64>,
}

impl RelationPair {
    pub fn new(u: impl Into<String>, v: impl Into<String>, relation: impl Into<String>, score: Option<f64>) -> Self {
        RelationPair {
            u: u.into(),
            v: v.into(),
            relation: relation.into(),
            score,
        }
    }
}

/// Labeled word pairs, optionally with graded scores.
#[derive(Clone, Debug, PartialEq)]
pub struct RelationDataset {
    name: String,
    pairs: Vec<RelationPair>,
}

impl RelationDataset {
    pub fn new(name: impl Into<String>, pairs: Vec<RelationPair>) -> Self {
        RelationDataset {
            name: name.into(),
            pairs,
        }
    }

    /// Parse `u TAB v TAB relation [TAB score]` lines.
    pub fn from_reader<R: BufRead>(name: impl Into<String>, reader: R, source: &Path) -> Result<Self> {
        let mut pairs = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').map(str::trim).collect();
            let score = match fields.len() {
                3 => None,
                4 => Some(
                    fields[3]
                        .parse::<f64>()
                        .map_err(|_| Error::format(source, i + 1, format!("invalid score {:?}", fields[3])))?,
                ),
                n => {
                    return Err(Error::format(
                        source,
                        i + 1,
                        format!("expected 3 or 4 tab-separated columns, found {}", n),
                    ))
                }
            };
            if fields[..3].iter().any(|f| f.is_empty()) {
                return Err(Error::format(source, i + 1, "empty field"));
            }
            pairs.push(RelationPair::new(fields[0], fields[1], fields[2], score));
        }
        Ok(RelationDataset::new(name, pairs))
    }

    /// Load a dataset file; the name is the file stem.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "dataset".to_owned());
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        RelationDataset::from_reader(name, BufReader::new(file), path)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn pairs(&self) -> &[RelationPair] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Distinct relation labels, sorted.
    pub fn labels(&self) -> BTreeSet<&str> {
        self.pairs.iter().map(|p| p.relation.as_str()).collect()
    }

    /// Check that every label belongs to `allowed`.
    pub fn check_labels(&self, allowed: &[&str]) -> Result<()> {
        match self.pairs.iter().find(|p| !allowed.contains(&p.relation.as_str())) {
            Some(p) => Err(Error::Data(format!(
                "dataset {}: label {:?} not in {:?}",
                self.name, p.relation, allowed
            ))),
            None => Ok(()),
        }
    }

    /// Check that every pair has a score inside `[lo, hi]`.
    pub fn check_scores(&self, lo: f64, hi: f64) -> Result<()> {
        for p in &self.pairs {
            match p.score {
                Some(s) if (lo..=hi).contains(&s) => {}
                Some(s) => {
                    return Err(Error::Data(format!(
                        "dataset {}: score {} of ({}, {}) outside [{}, {}]",
                        self.name, s, p.u, p.v, lo, hi
                    )))
                }
                None => {
                    return Err(Error::Data(format!(
                        "dataset {}: pair ({}, {}) has no graded score",
                        self.name, p.u, p.v
                    )))
                }
            }
        }
        Ok(())
    }

    /// Keep pairs whose label is in `labels`.
    pub fn restrict(&self, labels: &[&str]) -> RelationDataset {
        RelationDataset {
            name: self.name.clone(),
            pairs: self
                .pairs
                .iter()
                .filter(|p| labels.contains(&p.relation.as_str()))
                .cloned()
                .collect(),
        }
    }
}

/// Average precision of a scored list.
///
/// Sorting is by descending score and stable, so tied items keep their input
/// order.
pub fn average_precision(scored: &[(f64, bool)]) -> Result<f64> {
    if scored.iter().any(|(s, _)| s.is_nan()) {
        return Err(Error::InvalidArgument("NaN score".into()));
    }
    let n_targets = scored.iter().filter(|(_, t)| *t).count();
    if n_targets == 0 {
        return Err(Error::InvalidArgument("average precision needs at least one target".into()));
    }
    let mut order: Vec<usize> = (0..scored.len()).collect();
    order.sort_by(|&a, &b| scored[b].0.partial_cmp(&scored[a].0).expect("no NaN"));
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (rank, &i) in order.iter().enumerate() {
        if scored[i].1 {
            hits += 1;
            sum += hits as f64 / (rank + 1) as f64;
        }
    }
    Ok(sum / n_targets as f64)
}

#[derive(Clone, Debug, PartialEq)]
pub struct RankingReport {
    pub dataset: String,
    pub target: String,
    /// Contrasted labels, or `all`.
    pub against: String,
    pub measure: Measure,
    pub ap: f64,
    pub pairs: usize,
    pub targets: usize,
    pub oov: usize,
}

impl RankingReport {
    pub const CSV_HEADER: &'static str = "dataset,target,against,measure,ap,pairs,targets,oov";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            crate::measures::csv_field(&self.dataset),
            crate::measures::csv_field(&self.target),
            crate::measures::csv_field(&self.against),
            self.measure.name(),
            self.ap,
            self.pairs,
            self.targets,
            self.oov
        )
    }
}

/// Rank `target` pairs against pairs labeled with one of `against`
/// (`None` = every other label) by `measure`, and report AP.
pub fn eval_ranking(
    store: &EmbeddingStore,
    dataset: &RelationDataset,
    target: &str,
    against: Option<&[&str]>,
    measure: Measure,
) -> Result<RankingReport> {
    let mut scored = Vec::new();
    let mut oov = 0;
    for p in dataset.pairs() {
        let is_target = p.relation == target;
        if !is_target {
            if let Some(labels) = against {
                if !labels.contains(&p.relation.as_str()) {
                    continue;
                }
            }
        }
        match measure.score(store, &p.u, &p.v) {
            Ok(s) => scored.push((s, is_target)),
            Err(Error::UnknownToken(_)) => oov += 1,
            Err(e) => return Err(e),
        }
    }
    if oov > 0 {
        log::warn!("{}: skipped {} out-of-vocabulary pairs", dataset.name(), oov);
    }
    let ap = average_precision(&scored)?;
    Ok(RankingReport {
        dataset: dataset.name().to_owned(),
        target: target.to_owned(),
        against: against.map_or_else(|| "all".to_owned(), |l| l.join("+")),
        measure,
        ap,
        pairs: scored.len(),
        targets: scored.iter().filter(|(_, t)| *t).count(),
        oov,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct DirectionalityReport {
    pub accuracy: f64,
    pub correct: usize,
    pub total: usize,
    pub oov: usize,
}

impl DirectionalityReport {
    pub const CSV_HEADER: &'static str = "accuracy,correct,total,oov";

    pub fn csv_row(&self) -> String {
        format!("{},{},{},{}", self.accuracy, self.correct, self.total, self.oov)
    }
}

/// Fraction of gold `(hyponym, hypernym)` pairs whose hypernym has the larger
/// norm. Ties and out-of-vocabulary pairs count as wrong.
pub fn eval_directionality(store: &EmbeddingStore, pairs: &[(String, String)]) -> Result<DirectionalityReport> {
    if pairs.is_empty() {
        return Err(Error::InvalidArgument("no pairs to evaluate".into()));
    }
    let mut correct = 0;
    let mut oov = 0;
    for (u, v) in pairs {
        match direction(store, u, v) {
            Ok(Direction::UIsHyponym) => correct += 1,
            Ok(_) => {}
            Err(Error::UnknownToken(_)) => oov += 1,
            Err(e) => return Err(e),
        }
    }
    Ok(DirectionalityReport {
        accuracy: correct as f64 / pairs.len() as f64,
        correct,
        total: pairs.len(),
        oov,
    })
}

/// Gold or predicted class in threshold classification.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PairClass {
    Hyper,
    ReversedHyper,
    Other,
}

/// Two-way (hyper vs other) or three-way (hyper vs reversed vs other)
/// classification.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClassScheme {
    TwoWay,
    ThreeWay,
}

impl ClassScheme {
    pub fn from_count(classes: usize) -> Result<Self> {
        match classes {
            2 => Ok(ClassScheme::TwoWay),
            3 => Ok(ClassScheme::ThreeWay),
            n => Err(Error::InvalidArgument(format!("classes must be 2 or 3, got {}", n))),
        }
    }

    /// Map a dataset label to a gold class. In two-way mode `rhyper`
    /// belongs to `other`.
    pub fn gold(self, label: &str) -> Result<PairClass> {
        match (label, self) {
            ("hyper", _) => Ok(PairClass::Hyper),
            ("rhyper", ClassScheme::ThreeWay) => Ok(PairClass::ReversedHyper),
            ("rhyper", ClassScheme::TwoWay) | ("other", _) => Ok(PairClass::Other),
            (other, _) => Err(Error::Data(format!(
                "label {:?} is not one of hyper, rhyper, other",
                other
            ))),
        }
    }

    /// Predicted class; `None` when a three-way direction is undecided.
    pub fn predict(self, score: f64, direction: Direction, threshold: f64) -> Option<PairClass> {
        if score < threshold {
            return Some(PairClass::Other);
        }
        match self {
            ClassScheme::TwoWay => Some(PairClass::Hyper),
            ClassScheme::ThreeWay => match direction {
                Direction::UIsHyponym => Some(PairClass::Hyper),
                Direction::VIsHyponym => Some(PairClass::ReversedHyper),
                Direction::Undecided => None,
            },
        }
    }
}

#[derive(Clone, Debug)]
pub struct ThresholdConfig {
    pub scheme: ClassScheme,
    pub iterations: usize,
    pub sample_frac: f64,
    pub seed: u64,
    /// Resampling attempts when a sample holds a single class.
    pub max_retries: usize,
}

impl Default for ThresholdConfig {
    fn default() -> Self {
        ThresholdConfig {
            scheme: ClassScheme::TwoWay,
            iterations: 1000,
            sample_frac: 0.02,
            seed: 1,
            max_retries: 100,
        }
    }
}

/// A pair prepared for threshold classification.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClassifiedItem {
    pub score: f64,
    pub direction: Direction,
    pub gold: PairClass,
}

fn accuracy_at(items: &[ClassifiedItem], idx: &[usize], scheme: ClassScheme, threshold: f64) -> f64 {
    let correct = idx
        .iter()
        .filter(|&&i| scheme.predict(items[i].score, items[i].direction, threshold) == Some(items[i].gold))
        .count();
    correct as f64 / idx.len() as f64
}

/// Threshold maximizing accuracy on `idx`. Candidates are `-∞`, the
/// midpoints between consecutive distinct scores, and `+∞`, tried in
/// ascending order; the first best wins.
pub fn best_threshold(items: &[ClassifiedItem], idx: &[usize], scheme: ClassScheme) -> (f64, f64) {
    let mut scores: Vec<f64> = idx.iter().map(|&i| items[i].score).collect();
    scores.sort_by(|a, b| a.partial_cmp(b).expect("no NaN scores"));
    scores.dedup();
    let mut candidates = Vec::with_capacity(scores.len() + 1);
    candidates.push(f64::NEG_INFINITY);
    candidates.extend(scores.windows(2).map(|w| 0.5 * (w[0] + w[1])));
    candidates.push(f64::INFINITY);

    let mut best = (f64::NEG_INFINITY, -1.0);
    for t in candidates {
        let acc = accuracy_at(items, idx, scheme, t);
        if acc > best.1 {
            best = (t, acc);
        }
    }
    best
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClassificationReport {
    pub classes: usize,
    pub mean: f64,
    pub std: f64,
    pub iterations: usize,
    pub pairs: usize,
    pub oov: usize,
    pub accuracies: Vec<f64>,
}

impl ClassificationReport {
    pub const CSV_HEADER: &'static str = "classes,mean_accuracy,std_accuracy,iterations,pairs,oov";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.classes, self.mean, self.std, self.iterations, self.pairs, self.oov
        )
    }
}

/// Score and label the dataset for threshold classification. Returns the
/// items and the number of skipped out-of-vocabulary pairs.
pub fn classification_items(
    store: &EmbeddingStore,
    dataset: &RelationDataset,
    scheme: ClassScheme,
) -> Result<(Vec<ClassifiedItem>, usize)> {
    let mut items = Vec::with_capacity(dataset.len());
    let mut oov = 0;
    for p in dataset.pairs() {
        let gold = scheme.gold(&p.relation)?;
        let scored = hyper_score(store, &p.u, &p.v).and_then(|s| Ok((s, direction(store, &p.u, &p.v)?)));
        match scored {
            Ok((score, direction)) => items.push(ClassifiedItem { score, direction, gold }),
            Err(Error::UnknownToken(_)) => oov += 1,
            Err(e) => return Err(e),
        }
    }
    Ok((items, oov))
}

/// Run the sampled-threshold protocol over prepared items.
///
/// Each iteration draws `ceil(sample_frac · N)` items without replacement
/// from a generator seeded by `(seed, iteration)`, learns a threshold on
/// them, and measures accuracy on the remaining items (on the sample itself
/// when nothing remains).
pub fn threshold_protocol(items: &[ClassifiedItem], config: &ThresholdConfig) -> Result<Vec<f64>> {
    let n = items.len();
    if n < 2 {
        return Err(Error::InvalidArgument("threshold classification needs at least 2 pairs".into()));
    }
    if !(config.sample_frac > 0.0 && config.sample_frac <= 1.0) {
        return Err(Error::InvalidArgument("sample fraction must lie in (0, 1]".into()));
    }
    let m = ((config.sample_frac * n as f64).ceil() as usize).clamp(1, n);
    let mut accuracies = Vec::with_capacity(config.iterations);
    for iteration in 0..config.iterations {
        let mut rng = derived_rng(config.seed, &[iteration as u64]);
        let mut sample = None;
        for _ in 0..=config.max_retries {
            let idx = rand::seq::index::sample(&mut rng, n, m).into_vec();
            let first = items[idx[0]].gold;
            if idx.iter().any(|&i| items[i].gold != first) {
                sample = Some(idx);
                break;
            }
        }
        let sample = sample.ok_or_else(|| {
            Error::Data(format!(
                "iteration {}: every sample of {} pairs held a single class",
                iteration, m
            ))
        })?;

        let (threshold, _) = best_threshold(items, &sample, config.scheme);
        let mut in_sample = vec![false; n];
        for &i in &sample {
            in_sample[i] = true;
        }
        let rest: Vec<usize> = (0..n).filter(|&i| !in_sample[i]).collect();
        let test = if rest.is_empty() { &sample } else { &rest };
        accuracies.push(accuracy_at(items, test, config.scheme, threshold));
    }
    Ok(accuracies)
}

/// Threshold classification on HyperScore (two-way) plus norm direction
/// (three-way).
pub fn eval_threshold_classification(
    store: &EmbeddingStore,
    dataset: &RelationDataset,
    config: &ThresholdConfig,
) -> Result<ClassificationReport> {
    let (items, oov) = classification_items(store, dataset, config.scheme)?;
    let accuracies = threshold_protocol(&items, config)?;
    let k = accuracies.len().max(1) as f64;
    let mean = accuracies.iter().sum::<f64>() / k;
    let std = (accuracies.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / k).sqrt();
    Ok(ClassificationReport {
        classes: match config.scheme {
            ClassScheme::TwoWay => 2,
            ClassScheme::ThreeWay => 3,
        },
        mean,
        std,
        iterations: accuracies.len(),
        pairs: items.len(),
        oov,
        accuracies,
    })
}

/// Ranks starting at 1, ties receiving the mean of their positions.
pub fn average_ranks(xs: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[a].partial_cmp(&xs[b]).expect("no NaN"));
    let mut ranks = vec![0.0; xs.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && xs[order[j + 1]] == xs[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = rank;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman's ρ: Pearson correlation of average ranks.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::InvalidArgument(format!("length mismatch: {} vs {}", xs.len(), ys.len())));
    }
    if xs.len() < 3 {
        return Err(Error::InvalidArgument("spearman needs at least 3 observations".into()));
    }
    if xs.iter().chain(ys).any(|x| x.is_nan()) {
        return Err(Error::InvalidArgument("NaN observation".into()));
    }
    let rx = average_ranks(xs);
    let ry = average_ranks(ys);
    let n = rx.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Numeric("spearman undefined for constant input".into()));
    }
    Ok(sxy / (sxx * syy).sqrt())
}

#[derive(Clone, Debug, PartialEq)]
pub struct GradedReport {
    pub dataset: String,
    pub rho: f64,
    pub pairs: usize,
    pub oov: usize,
}

impl GradedReport {
    pub const CSV_HEADER: &'static str = "dataset,spearman,pairs,oov";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{}",
            crate::measures::csv_field(&self.dataset),
            self.rho,
            self.pairs,
            self.oov
        )
    }
}

/// Spearman correlation between model scores and gold graded scores.
pub fn eval_graded(store: &EmbeddingStore, dataset: &RelationDataset, measure: Measure) -> Result<GradedReport> {
    let mut model = Vec::new();
    let mut gold = Vec::new();
    let mut oov = 0;
    for p in dataset.pairs() {
        let g = p.score.ok_or_else(|| {
            Error::Data(format!("dataset {}: pair ({}, {}) has no graded score", dataset.name(), p.u, p.v))
        })?;
        match measure.score(store, &p.u, &p.v) {
            Ok(s) => {
                model.push(s);
                gold.push(g);
            }
            Err(Error::UnknownToken(_)) => oov += 1,
            Err(e) => return Err(e),
        }
    }
    if oov > 0 {
        log::warn!("{}: skipped {} out-of-vocabulary pairs", dataset.name(), oov);
    }
    Ok(GradedReport {
        dataset: dataset.name().to_owned(),
        rho: spearman(&model, &gold)?,
        pairs: model.len(),
        oov,
    })
}

/// Fixed-width table with one row per result, for terminal summaries.
pub fn summary_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let line = |cells: Vec<&str>| -> String {
        cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{:<w$}", c, w = *w))
            .collect::<Vec<_>>()
            .join("  ")
            .trim_end()
            .to_owned()
    };
    let mut out = line(header.to_vec());
    out.push('\n');
    out.push_str(&widths.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>().join("  "));
    out.push('\n');
    for row in rows {
        out.push_str(&line(row.iter().map(String::as_str).collect()));
        out.push('\n');
    }
    out
}
