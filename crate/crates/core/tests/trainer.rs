use std::collections::BTreeSet;

use hypervec::corpus::{build_cooc_index, EncodedCorpus};
use hypervec::embeddings::VectorTables;
use hypervec::rng::rng_from_seed;
use hypervec::trainer::{
    hyper_attract_step, hyper_generality_step, partition_hypernyms, sgns_step, train, train_sgns, write_loss_csv,
    TrainConfig,
};
use hypervec::{EmbeddingStore, Error, HypernymResource, Vocab};
use rand::Rng as _;

mod common;

use common::{attract_loss, cos, distinct, dotp, generality_loss, random_store, sgns_loss, Table, DIMS};

#[test]
fn sgns_gradient_matches_finite_differences() {
    let worst = common::sgns_gradient_errors(200, 1).into_iter().fold(0.0, f64::max);
    assert!(worst < 1e-4, "relative error {}", worst);
}

#[test]
fn attract_gradient_matches_finite_differences() {
    let worst = common::hierarchical_gradient_errors(200, 2, false).into_iter().fold(0.0, f64::max);
    assert!(worst < 1e-4, "relative error {}", worst);
}

#[test]
fn generality_gradient_matches_finite_differences() {
    let worst = common::hierarchical_gradient_errors(200, 3, true).into_iter().fold(0.0, f64::max);
    assert!(worst < 1e-4, "relative error {}", worst);
}

#[test]
fn steps_report_the_pre_update_loss() {
    let mut rng = rng_from_seed(4);
    for _ in 0..50 {
        let store = random_store(10, DIMS, &mut rng);
        let ids = distinct(&mut rng, 10, 4);
        let negatives: Vec<u32> = (0..6).map(|_| rng.random_range(0..10)).collect();
        let set = [ids[1], ids[2]];

        // repeated context negatives would see their own update, so keep
        // them distinct here; c itself is skipped
        let ctx_negatives = [ids[1], ids[2], ids[3]];
        let mut s = store.clone();
        let got = sgns_step(&mut s, ids[0], ids[1], &ctx_negatives, 0.1);
        assert!((got - sgns_loss(&store, ids[0], ids[1], &ctx_negatives)).abs() < 1e-12);

        let mut s = store.clone();
        let got = hyper_attract_step(&mut s, ids[0], &set, &negatives, 0.1);
        assert!((got - attract_loss(&store, ids[0], &set, &negatives)).abs() < 1e-12);

        let mut s = store.clone();
        let got = hyper_generality_step(&mut s, ids[0], &set, &negatives, 0.1);
        assert!((got - generality_loss(&store, ids[0], &set, &negatives)).abs() < 1e-12);
    }
}

fn changed_rows(a: &EmbeddingStore, b: &EmbeddingStore, table: Table) -> BTreeSet<u32> {
    (0..a.len() as u32)
        .filter(|&id| match table {
            Table::Word => a.word(id) != b.word(id),
            Table::Context => a.context(id) != b.context(id),
        })
        .collect()
}

#[test]
fn steps_touch_only_their_rows() {
    let mut rng = rng_from_seed(5);
    for _ in 0..50 {
        let store = random_store(30, DIMS, &mut rng);
        let ids = distinct(&mut rng, 30, 10);
        let (w, set, negatives) = (ids[0], &ids[1..3], &ids[3..9]);
        let allowed: BTreeSet<u32> = ids[..9].iter().copied().collect();

        for generality in [false, true] {
            let mut s = store.clone();
            if generality {
                hyper_generality_step(&mut s, w, set, negatives, 0.05);
            } else {
                hyper_attract_step(&mut s, w, set, negatives, 0.05);
            }
            assert_eq!(changed_rows(&store, &s, Table::Word), allowed);
            assert!(changed_rows(&store, &s, Table::Context).is_empty());
        }

        let mut s = store.clone();
        sgns_step(&mut s, w, ids[1], negatives, 0.05);
        assert_eq!(changed_rows(&store, &s, Table::Word), BTreeSet::from([w]));
        let mut ctx: BTreeSet<u32> = negatives.iter().copied().collect();
        ctx.insert(ids[1]);
        assert_eq!(changed_rows(&store, &s, Table::Context), ctx);
    }
}

fn word_corpus(lines: usize, vocab_size: usize, seed: u64) -> String {
    let mut rng = rng_from_seed(seed);
    let mut out = String::new();
    for _ in 0..lines {
        let len = rng.random_range(2..12);
        let words: Vec<String> = (0..len).map(|_| format!("v{}", rng.random_range(0..vocab_size))).collect();
        out.push_str(&words.join(" "));
        out.push('\n');
    }
    out
}

#[test]
fn partition_matches_brute_force() {
    let text = word_corpus(60, 30, 6);
    let vocab = Vocab::from_reader(text.as_bytes(), 1).unwrap();
    let corpus = EncodedCorpus::from_reader(text.as_bytes(), &vocab).unwrap();
    let cooc = build_cooc_index(&corpus, &vocab, 2, 1, 1_000_000).unwrap();
    let n = vocab.len();
    let mut rng = rng_from_seed(7);
    for trial in 0..500 {
        let mut store = random_store(n, DIMS, &mut rng);
        if trial % 10 == 0 {
            // a zero context counts as orthogonal to everything
            let c = rng.random_range(0..n as u32);
            store.context_mut(c).fill(0.0);
        }
        let w = rng.random_range(0..n as u32);
        let c = rng.random_range(0..n as u32);
        let hypers = distinct(&mut rng, n, 6);
        let margin = rng.random_range(-0.5..0.5);
        let got = partition_hypernyms(&store, w, c, &hypers, &cooc, margin);

        let cos0 = |a: &[f64], b: &[f64]| if dotp(b, b) == 0.0 { 0.0 } else { cos(a, b) };
        let (mut plus, mut minus) = (Vec::new(), Vec::new());
        for &u in &hypers {
            if cooc.contains(c, u) {
                if cos0(store.word(w), store.context(c)) - cos0(store.word(u), store.context(c)) >= margin {
                    plus.push(u);
                } else {
                    minus.push(u);
                }
            }
        }
        assert_eq!(got.h_plus, plus);
        assert_eq!(got.h_minus, minus);

        let all: BTreeSet<u32> = got.h_plus.iter().chain(&got.h_minus).copied().collect();
        assert_eq!(all.len(), got.h_plus.len() + got.h_minus.len());
        let expected: BTreeSet<u32> = hypers.iter().copied().filter(|&u| cooc.contains(c, u)).collect();
        assert_eq!(all, expected);
    }
}

fn small_setup(seed: u64) -> (Vocab, EncodedCorpus) {
    let text = word_corpus(400, 40, seed);
    let vocab = Vocab::from_reader(text.as_bytes(), 1).unwrap();
    let corpus = EncodedCorpus::from_reader(text.as_bytes(), &vocab).unwrap();
    (vocab, corpus)
}

fn small_config() -> TrainConfig {
    TrainConfig {
        dims: 12,
        epochs: 2,
        negatives: 4,
        window: 3,
        ..Default::default()
    }
}

fn chain_resource(vocab: &Vocab) -> HypernymResource {
    let pairs = (0..20).map(|i| (vocab.id(&format!("v{}", i)).unwrap(), vocab.id(&format!("v{}", i + 20)).unwrap()));
    HypernymResource::from_id_pairs(vocab, pairs).filter_eval_pairs(&[]).0
}

#[test]
fn single_worker_training_is_deterministic() {
    let (vocab, corpus) = small_setup(8);
    let cooc = build_cooc_index(&corpus, &vocab, 3, 1, 1_000_000).unwrap();
    let resource = chain_resource(&vocab);
    let config = small_config();
    let a = train(&corpus, &vocab, &resource, &cooc, &config).unwrap();
    let b = train(&corpus, &vocab, &resource, &cooc, &config).unwrap();
    assert_eq!(a.store, b.store);
    assert_eq!(a.losses, b.losses);
    assert!(a.losses.iter().all(|l| l.attract_events + l.generality_events > 0));

    let other = train(&corpus, &vocab, &resource, &cooc, &TrainConfig { seed: 2, ..config }).unwrap();
    assert_ne!(other.store, a.store);
}

#[test]
fn empty_resource_degenerates_to_sgns() {
    let (vocab, corpus) = small_setup(9);
    let cooc = build_cooc_index(&corpus, &vocab, 3, 1, 1_000_000).unwrap();
    let config = small_config();
    let hyper = train(&corpus, &vocab, &HypernymResource::empty(&vocab), &cooc, &config).unwrap();
    let plain = train_sgns(&corpus, &vocab, &config).unwrap();
    assert_eq!(hyper.store, plain.store);
    assert_eq!(hyper.losses, plain.losses);
}

#[test]
fn training_preconditions() {
    let (vocab, corpus) = small_setup(10);
    let cooc = build_cooc_index(&corpus, &vocab, 3, 1, 1_000_000).unwrap();
    let unfiltered = HypernymResource::from_id_pairs(&vocab, [(0, 1)]);
    assert!(matches!(
        train(&corpus, &vocab, &unfiltered, &cooc, &small_config()),
        Err(Error::InvalidArgument(_))
    ));

    let (other_vocab, other_corpus) = small_setup(11);
    let _ = other_corpus;
    let mismatched = build_cooc_index(
        &EncodedCorpus::from_lines(vec![vec![0, 1]]),
        &Vocab::from_reader("a b".as_bytes(), 1).unwrap(),
        2,
        1,
        100,
    )
    .unwrap();
    assert!(matches!(
        train(&corpus, &vocab, &HypernymResource::empty(&other_vocab), &mismatched, &small_config()),
        Err(Error::InvalidArgument(_))
    ));
    assert!(train_sgns(&corpus, &vocab, &TrainConfig { dims: 0, ..small_config() }).is_err());
}

#[test]
fn parallel_training_runs() {
    let (vocab, corpus) = small_setup(12);
    let cooc = build_cooc_index(&corpus, &vocab, 3, 1, 1_000_000).unwrap();
    let resource = chain_resource(&vocab);
    let out = train(&corpus, &vocab, &resource, &cooc, &TrainConfig { workers: 3, ..small_config() }).unwrap();
    assert!(out.store.is_finite());
    let single = train(&corpus, &vocab, &resource, &cooc, &small_config()).unwrap();
    assert_eq!(out.losses[0].pairs, single.losses[0].pairs);
}

#[test]
fn loss_csv_layout() {
    let (vocab, corpus) = small_setup(13);
    let out = train_sgns(&corpus, &vocab, &small_config()).unwrap();
    let mut buf = Vec::new();
    write_loss_csv(&mut buf, &out.losses).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "epoch,sgns_loss,attract_loss,generality_loss");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("1,"));
}
