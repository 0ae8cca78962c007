//! Train on a generated taxonomy corpus and print the hierarchy metrics for
//! HyperVec and for plain SGNS on the same data.
//!
//! Usage: `synthetic_run [sentences_per_word] [dims] [epochs] [negatives] [workers]`

use std::time::Instant;

use hypervec::corpus::{build_cooc_index, EncodedCorpus, Vocab, DEFAULT_COOC_BUDGET};
use hypervec::embeddings::norm;
use hypervec::eval::{eval_directionality, eval_ranking};
use hypervec::measures::Measure;
use hypervec::synthetic::{generate_corpus, split, SplitConfig, SyntheticConfig, Taxonomy};
use hypervec::trainer::{train, train_sgns, TrainConfig};
use hypervec::{EmbeddingStore, HypernymResource, RelationDataset};

fn norm_share(store: &EmbeddingStore, pairs: &[(String, String)]) -> f64 {
    let ok = pairs
        .iter()
        .filter(|(u, v)| norm(store.vector(v).unwrap()) > norm(store.vector(u).unwrap()))
        .count();
    ok as f64 / pairs.len() as f64
}

fn mean_score(store: &EmbeddingStore, dataset: &RelationDataset, label: &str, measure: Measure) -> f64 {
    let scores: Vec<f64> = dataset
        .pairs()
        .iter()
        .filter(|p| p.relation == label)
        .map(|p| measure.score(store, &p.u, &p.v).unwrap())
        .collect();
    scores.iter().sum::<f64>() / scores.len() as f64
}

fn main() -> hypervec::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let arg = |i: usize, d: usize| args.get(i).and_then(|s| s.parse().ok()).unwrap_or(d);
    let synth = SyntheticConfig {
        sentences_per_word: arg(1, SyntheticConfig::default().sentences_per_word),
        ..Default::default()
    };
    let taxonomy = Taxonomy::build(&synth);
    let text = generate_corpus(&taxonomy, &synth).join("\n");
    let vocab = Vocab::from_reader(text.as_bytes(), 1)?;
    let corpus = EncodedCorpus::from_reader(text.as_bytes(), &vocab)?;
    println!("tokens={} vocab={}", corpus.n_tokens(), vocab.len());
    let s = split(&taxonomy, &SplitConfig::default())?;

    let config = TrainConfig {
        dims: arg(2, 100),
        epochs: arg(3, 5),
        negatives: arg(4, 15),
        workers: arg(5, 1),
        ..Default::default()
    };
    let cooc = build_cooc_index(&corpus, &vocab, config.window, 1, DEFAULT_COOC_BUDGET)?;
    let ids = s.resource.iter().map(|(a, b)| (vocab.id(a).unwrap(), vocab.id(b).unwrap()));
    let (resource, report) =
        HypernymResource::from_id_pairs(&vocab, ids).filter_eval_pairs(&[s.detection.clone(), s.classification.clone()]);
    println!("resource kept={} removed={}", report.kept, report.removed);

    let t = Instant::now();
    let out = train(&corpus, &vocab, &resource, &cooc, &config)?;
    println!("hypervec trained in {:.1?}", t.elapsed());
    for l in &out.losses {
        println!("  epoch {} combined loss {:.4}", l.epoch, l.combined());
    }
    let t = Instant::now();
    let sgns = train_sgns(&corpus, &vocab, &config)?;
    println!("sgns trained in {:.1?}", t.elapsed());

    for (name, store, measure) in [("hypervec", &out.store, Measure::HyperScore), ("sgns", &sgns.store, Measure::Cosine)] {
        let ap = eval_ranking(store, &s.detection, "hyper", None, measure)?.ap;
        let means: Vec<String> = ["hyper", "coord", "random"]
            .iter()
            .map(|l| format!("{}={:.3}", l, mean_score(store, &s.detection, l, measure)))
            .collect();
        println!(
            "{}: train-norm={:.3} held-out-norm={:.3} AP={:.3} dir={:.3} mean {}",
            name,
            norm_share(store, &s.resource),
            norm_share(store, &s.held_out),
            ap,
            eval_directionality(store, &s.held_out)?.accuracy,
            means.join(" ")
        );
    }
    Ok(())
}
