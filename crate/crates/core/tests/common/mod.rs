//! Oracles shared by the integration tests and the acceptance suite.
#![allow(dead_code)]

use hypervec::embeddings::VectorTables;
use hypervec::eval::{ClassScheme, ClassifiedItem, PairClass, ThresholdConfig};
use hypervec::rng::{derived_rng, rng_from_seed};
use hypervec::trainer::{hyper_attract_step, hyper_generality_step, sgns_step};
use hypervec::{Direction, EmbeddingStore};
use rand::seq::index::sample;
use rand::Rng as _;

pub const EPS: f64 = 1e-5;
pub const DIMS: usize = 10;

pub fn random_store(n: usize, dims: usize, rng: &mut impl rand::Rng) -> EmbeddingStore {
    let words = (0..n).map(|i| format!("v{}", i)).collect();
    let values = (0..n * dims).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut store = EmbeddingStore::from_rows(words, dims, values).unwrap();
    for id in 0..n as u32 {
        for x in store.context_mut(id) {
            *x = rng.random_range(-1.0..1.0);
        }
    }
    store
}

pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

pub fn dotp(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn cos(a: &[f64], b: &[f64]) -> f64 {
    dotp(a, b) / (dotp(a, a).sqrt() * dotp(b, b).sqrt())
}

pub fn sgns_loss(s: &EmbeddingStore, w: u32, c: u32, negatives: &[u32]) -> f64 {
    let mut loss = -sigmoid(dotp(s.word(w), s.context(c))).ln();
    for &n in negatives.iter().filter(|&&n| n != c) {
        loss -= sigmoid(-dotp(s.word(w), s.context(n))).ln();
    }
    loss
}

/// `Σ_y weight · [(1 - cos(x, y)) + Σ_n cos(x, n)]` with `x = w` for
/// attraction.
pub fn attract_loss(s: &EmbeddingStore, w: u32, set: &[u32], negatives: &[u32]) -> f64 {
    let k = negatives.len() / set.len();
    let weight = 1.0 / set.len() as f64;
    let mut loss = 0.0;
    for (i, &u) in set.iter().enumerate() {
        loss += weight * (1.0 - cos(s.word(w), s.word(u)));
        for &n in &negatives[i * k..(i + 1) * k] {
            if n != w && n != u {
                loss += weight * cos(s.word(w), s.word(n));
            }
        }
    }
    loss
}

/// Same form with `x = v`, the hypernym, and unit weight.
pub fn generality_loss(s: &EmbeddingStore, w: u32, set: &[u32], negatives: &[u32]) -> f64 {
    let k = negatives.len() / set.len();
    let mut loss = 0.0;
    for (i, &v) in set.iter().enumerate() {
        loss += 1.0 - cos(s.word(v), s.word(w));
        for &n in &negatives[i * k..(i + 1) * k] {
            if n != v && n != w {
                loss += cos(s.word(v), s.word(n));
            }
        }
    }
    loss
}

#[derive(Clone, Copy)]
pub enum Table {
    Word,
    Context,
}

pub fn entry(s: &mut EmbeddingStore, table: Table, id: u32, i: usize) -> &mut f64 {
    match table {
        Table::Word => &mut s.word_mut(id)[i],
        Table::Context => &mut s.context_mut(id)[i],
    }
}

/// Relative error between the gradient implied by one unit-rate step and a
/// central finite difference of `loss`, over the given rows.
pub fn gradient_error(
    store: &EmbeddingStore,
    rows: &[(Table, u32)],
    step: impl Fn(&mut EmbeddingStore),
    loss: impl Fn(&EmbeddingStore) -> f64,
) -> f64 {
    let mut after = store.clone();
    step(&mut after);
    let mut analytic = Vec::new();
    let mut numeric = Vec::new();
    for &(table, id) in rows {
        for i in 0..DIMS {
            let old = *entry(&mut store.clone(), table, id, i);
            analytic.push(old - *entry(&mut after, table, id, i));
            let mut plus = store.clone();
            *entry(&mut plus, table, id, i) += EPS;
            let mut minus = store.clone();
            *entry(&mut minus, table, id, i) -= EPS;
            numeric.push((loss(&plus) - loss(&minus)) / (2.0 * EPS));
        }
    }
    let diff: f64 = analytic.iter().zip(&numeric).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    let scale = dotp(&analytic, &analytic).sqrt().max(dotp(&numeric, &numeric).sqrt()).max(1e-8);
    diff / scale
}

pub fn distinct(rng: &mut impl rand::Rng, n: usize, k: usize) -> Vec<u32> {
    sample(rng, n, k).into_iter().map(|i| i as u32).collect()
}

/// Gradient errors of one SGNS step on `instances` random 10-d problems.
pub fn sgns_gradient_errors(instances: usize, seed: u64) -> Vec<f64> {
    let mut rng = rng_from_seed(seed);
    (0..instances)
        .map(|_| {
            let store = random_store(12, DIMS, &mut rng);
            let ids = distinct(&mut rng, 12, 6);
            let (w, c, negatives) = (ids[0], ids[1], ids[2..].to_vec());
            let mut rows = vec![(Table::Word, w), (Table::Context, c)];
            rows.extend(negatives.iter().map(|&n| (Table::Context, n)));
            gradient_error(
                &store,
                &rows,
                |s| {
                    sgns_step(s, w, c, &negatives, 1.0);
                },
                |s| sgns_loss(s, w, c, &negatives),
            )
        })
        .collect()
}

/// Gradient errors of one attraction (`generality = false`) or generality
/// step. Negatives may repeat and may hit `w` or a hypernym.
pub fn hierarchical_gradient_errors(instances: usize, seed: u64, generality: bool) -> Vec<f64> {
    let mut rng = rng_from_seed(seed);
    (0..instances)
        .map(|_| {
            let store = random_store(14, DIMS, &mut rng);
            let m = rng.random_range(1..=3);
            let k = rng.random_range(1..=4);
            let ids = distinct(&mut rng, 14, 1 + m);
            let (w, set) = (ids[0], ids[1..].to_vec());
            let negatives: Vec<u32> = (0..m * k).map(|_| rng.random_range(0..14)).collect();
            let rows: Vec<(Table, u32)> = (0..14).map(|id| (Table::Word, id)).collect();
            if generality {
                gradient_error(
                    &store,
                    &rows,
                    |s| {
                        hyper_generality_step(s, w, &set, &negatives, 1.0);
                    },
                    |s| generality_loss(s, w, &set, &negatives),
                )
            } else {
                gradient_error(
                    &store,
                    &rows,
                    |s| {
                        hyper_attract_step(s, w, &set, &negatives, 1.0);
                    },
                    |s| attract_loss(s, w, &set, &negatives),
                )
            }
        })
        .collect()
}

/// Precision at each target's rank, where a target is outranked by every
/// strictly higher score and by equal scores earlier in the list.
pub fn ap_oracle(scored: &[(f64, bool)]) -> f64 {
    let rank = |i: usize| {
        1 + (0..scored.len())
            .filter(|&j| scored[j].0 > scored[i].0 || (scored[j].0 == scored[i].0 && j < i))
            .count()
    };
    let targets: Vec<usize> = (0..scored.len()).filter(|&i| scored[i].1).collect();
    let mut sum = 0.0;
    for &i in &targets {
        let r = rank(i);
        let above = targets.iter().filter(|&&j| rank(j) <= r).count();
        sum += above as f64 / r as f64;
    }
    sum / targets.len() as f64
}

/// Random scored lists; even trials use integer scores to force ties.
pub fn random_ranking(rng: &mut impl rand::Rng, trial: usize) -> Vec<(f64, bool)> {
    let n = rng.random_range(1..60);
    let coarse = trial.is_multiple_of(2);
    let mut scored: Vec<(f64, bool)> = (0..n)
        .map(|_| {
            let s = if coarse { rng.random_range(0..5) as f64 } else { rng.random::<f64>() };
            (s, rng.random_bool(0.3))
        })
        .collect();
    scored[rng.random_range(0..n)].1 = true;
    scored
}

pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}

/// Mid-rank by counting: values below plus half the tied block.
pub fn count_ranks(xs: &[f64]) -> Vec<f64> {
    xs.iter()
        .map(|&x| {
            let below = xs.iter().filter(|&&y| y < x).count() as f64;
            let equal = xs.iter().filter(|&&y| y == x).count() as f64;
            below + (equal + 1.0) / 2.0
        })
        .collect()
}

pub fn spearman_oracle(xs: &[f64], ys: &[f64]) -> f64 {
    pearson(&count_ranks(xs), &count_ranks(ys))
}

/// Paired observations; even trials are drawn from a few integers.
pub fn random_observations(rng: &mut impl rand::Rng, trial: usize) -> (Vec<f64>, Vec<f64>) {
    let n = rng.random_range(3..50);
    let coarse = trial.is_multiple_of(2);
    let mut draw = || {
        if coarse {
            rng.random_range(0..6) as f64
        } else {
            rng.random_range(-1.0..1.0)
        }
    };
    let xs: Vec<f64> = (0..n).map(|_| draw()).collect();
    let ys: Vec<f64> = (0..n).map(|_| draw()).collect();
    (xs, ys)
}

/// Hyper, reversed and other items in turn; scores overlap between classes
/// and one direction in five is wrong.
pub fn threshold_fixture(n: usize, seed: u64, scheme: ClassScheme) -> Vec<ClassifiedItem> {
    let mut rng = rng_from_seed(seed);
    (0..n)
        .map(|i| {
            let gold = match i % 3 {
                0 => PairClass::Hyper,
                1 => PairClass::ReversedHyper,
                _ => PairClass::Other,
            };
            let base = if gold == PairClass::Other { 0.0 } else { 0.5 };
            let direction = match (gold, rng.random_bool(0.8)) {
                (PairClass::ReversedHyper, true) => Direction::VIsHyponym,
                (_, true) => Direction::UIsHyponym,
                (_, false) => Direction::VIsHyponym,
            };
            let gold = match (scheme, gold) {
                (ClassScheme::TwoWay, PairClass::ReversedHyper) => PairClass::Other,
                _ => gold,
            };
            ClassifiedItem {
                score: base + rng.random::<f64>(),
                direction,
                gold,
            }
        })
        .collect()
}

fn predicted(scheme: ClassScheme, item: &ClassifiedItem, t: f64) -> PairClass {
    if item.score < t {
        return PairClass::Other;
    }
    match (scheme, item.direction) {
        (ClassScheme::TwoWay, _) => PairClass::Hyper,
        (_, Direction::UIsHyponym) => PairClass::Hyper,
        (_, _) => PairClass::ReversedHyper,
    }
}

pub fn accuracy(items: &[ClassifiedItem], idx: &[usize], scheme: ClassScheme, t: f64) -> f64 {
    let ok = idx.iter().filter(|&&i| predicted(scheme, &items[i], t) == items[i].gold).count();
    ok as f64 / idx.len() as f64
}

/// Exhaustive search over every sample score and both infinities. The
/// lowest best cut is then placed halfway down to the next lower score, or
/// at `-∞` when nothing lies below it. Returns the threshold and its
/// accuracy.
pub fn oracle_threshold(items: &[ClassifiedItem], idx: &[usize], scheme: ClassScheme) -> (f64, f64) {
    let mut scores: Vec<f64> = idx.iter().map(|&i| items[i].score).collect();
    scores.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut candidates = vec![f64::NEG_INFINITY];
    candidates.extend(&scores);
    candidates.push(f64::INFINITY);
    let mut best = (f64::NEG_INFINITY, -1.0);
    for t in candidates {
        let acc = accuracy(items, idx, scheme, t);
        if acc > best.1 {
            best = (t, acc);
        }
    }
    let below = scores.iter().copied().rfind(|&s| s < best.0);
    let threshold = match below {
        _ if best.0 == f64::INFINITY => f64::INFINITY,
        Some(s) => 0.5 * (s + best.0),
        None => f64::NEG_INFINITY,
    };
    (threshold, best.1)
}

/// Scripted replay of the sampled-threshold protocol: the same per-iteration
/// generator and sampling calls, with the threshold chosen by exhaustive
/// search.
pub fn replay_threshold_protocol(items: &[ClassifiedItem], config: &ThresholdConfig) -> Vec<f64> {
    let n = items.len();
    let m = ((config.sample_frac * n as f64).ceil() as usize).clamp(1, n);
    (0..config.iterations)
        .map(|iteration| {
            let mut rng = derived_rng(config.seed, &[iteration as u64]);
            let drawn = loop {
                let idx = sample(&mut rng, n, m).into_vec();
                if idx.iter().any(|&i| items[i].gold != items[idx[0]].gold) {
                    break idx;
                }
            };
            let (t, _) = oracle_threshold(items, &drawn, config.scheme);
            let rest: Vec<usize> = (0..n).filter(|i| !drawn.contains(i)).collect();
            let test = if rest.is_empty() { &drawn } else { &rest };
            accuracy(items, test, config.scheme, t)
        })
        .collect()
}
