use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, ValueEnum};
use serde::Serialize;

use hypervec::corpus::{build_cooc_index, build_vocab, DEFAULT_COOC_BUDGET};
use hypervec::embeddings::VectorTables;
use hypervec::eval::{
    eval_directionality, eval_graded as graded, eval_ranking, eval_threshold_classification, summary_table,
    ClassScheme, ClassificationReport, DirectionalityReport, GradedReport, RankingReport, ThresholdConfig,
};
use hypervec::hyperbase::{load_resource, ResourceSummary};
use hypervec::measures::{read_pairs, score_pairs, write_features, write_scored, Measure};
use hypervec::synthetic::{self, SplitConfig, SyntheticConfig, Taxonomy};
use hypervec::trainer::{self, write_loss_csv, TrainConfig};
use hypervec::xling::{fit_mapping, DEFAULT_LAMBDA};
use hypervec::{
    BilingualLexicon, CoocIndex, EmbeddingStore, EncodedCorpus, HypernymResource, MappingModel, RelationDataset,
    Vocab,
};

use crate::manifest::{manifest_path, RunManifest};
use crate::Global;

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MeasureArg {
    Hyperscore,
    Cosine,
}

impl From<MeasureArg> for Measure {
    fn from(m: MeasureArg) -> Self {
        match m {
            MeasureArg::Hyperscore => Measure::HyperScore,
            MeasureArg::Cosine => Measure::Cosine,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StoreFormat {
    Text,
    Binary,
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))
}

/// Write `text` to `out`, or to stdout. A manifest is written next to a
/// file output.
fn emit(text: &str, out: Option<&Path>, mut manifest: RunManifest) -> Result<()> {
    match out {
        Some(path) => {
            fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))?;
            manifest.output("result", path)?;
            manifest.write(&manifest_path(path))
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}

fn load_store(path: &Path) -> Result<EmbeddingStore> {
    EmbeddingStore::load(path).with_context(|| format!("loading embeddings from {}", path.display()))
}

fn load_dataset(path: &Path) -> Result<RelationDataset> {
    RelationDataset::load(path).with_context(|| format!("loading dataset {}", path.display()))
}

#[derive(Args, Debug, Serialize)]
pub struct BuildArgs {
    /// Tokenized corpus, one sentence per line
    #[arg(long)]
    pub corpus: PathBuf,

    /// Directory for vocab.tsv, cooc.bin and manifest.json
    #[arg(long)]
    pub out_dir: PathBuf,

    /// Drop words seen fewer times
    #[arg(long, env = "HYPERVEC_MIN_COUNT", default_value_t = 5)]
    pub min_count: u64,

    /// Symmetric context window
    #[arg(long, env = "HYPERVEC_WINDOW", default_value_t = 5)]
    pub window: usize,

    /// Minimum co-occurrence count for an index entry
    #[arg(long, env = "HYPERVEC_MIN_PAIR_COUNT", default_value_t = 1)]
    pub min_pair_count: u32,

    /// Maximum number of distinct pairs held while counting
    #[arg(long, env = "HYPERVEC_COOC_BUDGET", default_value_t = DEFAULT_COOC_BUDGET)]
    pub cooc_budget: usize,
}

pub fn build(g: &Global, a: &BuildArgs) -> Result<()> {
    let mut manifest = RunManifest::new("build", g, a)?;
    manifest.input("corpus", &a.corpus)?;
    let vocab = build_vocab(&a.corpus, a.min_count)?;
    let corpus = EncodedCorpus::read(&a.corpus, &vocab)?;
    let cooc = build_cooc_index(&corpus, &vocab, a.window, a.min_pair_count, a.cooc_budget)?;

    create_dir(&a.out_dir)?;
    let vocab_path = a.out_dir.join("vocab.tsv");
    let cooc_path = a.out_dir.join("cooc.bin");
    vocab.save(&vocab_path)?;
    cooc.save(&cooc_path)?;
    manifest.output("vocab", &vocab_path)?;
    manifest.output("cooc", &cooc_path)?;
    manifest.write(&a.out_dir.join("manifest.json"))?;
    eprintln!(
        "vocabulary: {} words ({} tokens); co-occurrence index: {} pairs",
        vocab.len(),
        vocab.total_tokens(),
        cooc.len()
    );
    Ok(())
}

#[derive(Args, Debug, Serialize)]
pub struct TrainArgs {
    /// Tokenized corpus, one sentence per line
    #[arg(long)]
    pub corpus: PathBuf,

    /// Directory for embeddings, losses, resource report and manifest
    #[arg(long)]
    pub out_dir: PathBuf,

    /// Vocabulary from `build`; rebuilt from the corpus when absent
    #[arg(long)]
    pub vocab: Option<PathBuf>,

    /// Co-occurrence index from `build`; rebuilt from the corpus when absent
    #[arg(long)]
    pub cooc: Option<PathBuf>,

    /// Hypernym resource, `hyponym TAB hypernym` per line. Without it the
    /// run is plain skip-gram with negative sampling
    #[arg(long)]
    pub resource: Option<PathBuf>,

    /// Evaluation datasets whose pairs are removed from the resource
    #[arg(long, value_delimiter = ',')]
    pub filter: Vec<PathBuf>,

    /// Add the transitive closure of the resource before filtering
    #[arg(long)]
    pub closure: bool,

    /// Drop words seen fewer times (when building the vocabulary)
    #[arg(long, env = "HYPERVEC_MIN_COUNT", default_value_t = 5)]
    pub min_count: u64,

    /// Embedding dimensionality
    #[arg(long, env = "HYPERVEC_DIMS", default_value_t = 100)]
    pub dims: usize,

    /// Symmetric context window
    #[arg(long, env = "HYPERVEC_WINDOW", default_value_t = 5)]
    pub window: usize,

    /// Negative samples per observed pair
    #[arg(long, env = "HYPERVEC_NEGATIVES", default_value_t = 15)]
    pub negatives: usize,

    /// Initial learning rate, decayed linearly
    #[arg(long, env = "HYPERVEC_LR", default_value_t = 0.025)]
    pub learning_rate: f64,

    /// Margin of the hypernym partition test
    #[arg(long, env = "HYPERVEC_MARGIN", default_value_t = 0.05)]
    pub margin: f64,

    /// Passes over the corpus
    #[arg(long, env = "HYPERVEC_EPOCHS", default_value_t = 5)]
    pub epochs: usize,

    /// Exponent of the negative-sampling distribution
    #[arg(long, env = "HYPERVEC_NEG_EXPONENT", default_value_t = 0.75)]
    pub neg_exponent: f64,

    /// Subsampling threshold; 0 disables subsampling
    #[arg(long, env = "HYPERVEC_SUBSAMPLE", default_value_t = 0.0)]
    pub subsample: f64,

    /// Minimum co-occurrence count (when building the index)
    #[arg(long, env = "HYPERVEC_MIN_PAIR_COUNT", default_value_t = 1)]
    pub min_pair_count: u32,

    /// Maximum number of distinct pairs held while counting
    #[arg(long, env = "HYPERVEC_COOC_BUDGET", default_value_t = DEFAULT_COOC_BUDGET)]
    pub cooc_budget: usize,
}

pub fn train(g: &Global, a: &TrainArgs) -> Result<()> {
    let mut manifest = RunManifest::new("train", g, a)?;
    manifest.input("corpus", &a.corpus)?;
    let config = TrainConfig {
        dims: a.dims,
        window: a.window,
        negatives: a.negatives,
        learning_rate: a.learning_rate,
        margin: a.margin,
        epochs: a.epochs,
        neg_exponent: a.neg_exponent,
        subsample: a.subsample,
        workers: g.effective_workers(),
        seed: g.seed,
    };
    config.validate()?;

    let vocab = match &a.vocab {
        Some(path) => {
            manifest.input("vocab", path)?;
            Vocab::load(path)?
        }
        None => build_vocab(&a.corpus, a.min_count)?,
    };
    let corpus = EncodedCorpus::read(&a.corpus, &vocab)?;

    let mut summary = ResourceSummary::default();
    let resource = match &a.resource {
        Some(path) => {
            manifest.input("resource", path)?;
            let (loaded, load) = load_resource(path, &vocab)?;
            summary.load = load;
            let resource = if a.closure {
                let closed = loaded.transitive_closure()?;
                summary.closure_added = Some(closed.pair_count() - loaded.pair_count());
                closed
            } else {
                loaded
            };
            let mut datasets = Vec::with_capacity(a.filter.len());
            for (i, path) in a.filter.iter().enumerate() {
                manifest.input(&format!("filter{}", i), path)?;
                datasets.push(load_dataset(path)?);
            }
            let (filtered, report) = resource.filter_eval_pairs(&datasets);
            summary.filter = report;
            filtered
        }
        None => {
            if !a.filter.is_empty() {
                log::warn!("--filter has no effect without --resource");
            }
            HypernymResource::empty(&vocab)
        }
    };
    summary.hyponyms = resource.hyponym_count();
    summary.hypernyms = resource.hypernym_count();

    let output = if resource.is_empty() {
        if a.resource.is_some() {
            log::warn!("no resource pairs left after loading and filtering; training plain SGNS");
        }
        trainer::train_sgns(&corpus, &vocab, &config)?
    } else {
        let cooc = match &a.cooc {
            Some(path) => {
                manifest.input("cooc", path)?;
                CoocIndex::load(path)?
            }
            None => build_cooc_index(&corpus, &vocab, a.window, a.min_pair_count, a.cooc_budget)?,
        };
        trainer::train(&corpus, &vocab, &resource, &cooc, &config)?
    };

    create_dir(&a.out_dir)?;
    let text_path = a.out_dir.join("embeddings.txt");
    let bin_path = a.out_dir.join("embeddings.bin");
    let loss_path = a.out_dir.join("losses.csv");
    let report_path = a.out_dir.join("resource_report.txt");
    output.store.save_text(&text_path)?;
    output.store.save_binary(&bin_path)?;
    let mut losses = Vec::new();
    write_loss_csv(&mut losses, &output.losses)?;
    fs::write(&loss_path, &losses).with_context(|| format!("cannot write {}", loss_path.display()))?;
    fs::write(&report_path, summary.to_string())
        .with_context(|| format!("cannot write {}", report_path.display()))?;
    for (name, path) in [
        ("embeddings_text", &text_path),
        ("embeddings_binary", &bin_path),
        ("losses", &loss_path),
        ("resource_report", &report_path),
    ] {
        manifest.output(name, path)?;
    }
    manifest.write(&a.out_dir.join("manifest.json"))?;

    let rows: Vec<Vec<String>> = output
        .losses
        .iter()
        .map(|l| {
            vec![
                l.epoch.to_string(),
                format!("{:.4}", l.sgns),
                format!("{:.4}", l.attract),
                format!("{:.4}", l.generality),
                format!("{:.4}", l.combined()),
            ]
        })
        .collect();
    eprint!("{}", summary);
    eprint!("{}", summary_table(&["epoch", "sgns", "attract", "generality", "combined"], &rows));
    Ok(())
}

#[derive(Args, Debug, Serialize)]
pub struct ScoreArgs {
    /// Embedding store (text or binary)
    #[arg(long)]
    pub embeddings: PathBuf,

    /// Pairs `u TAB v`; further columns are ignored
    #[arg(long)]
    pub pairs: PathBuf,

    /// Output file; stdout when absent
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn read_pair_file(path: &Path) -> Result<Vec<(String, String)>> {
    let file = fs::File::open(path).with_context(|| format!("cannot read {}", path.display()))?;
    Ok(read_pairs(std::io::BufReader::new(file), path)?)
}

pub fn score(g: &Global, a: &ScoreArgs) -> Result<()> {
    let mut manifest = RunManifest::new("score", g, a)?;
    manifest.input("embeddings", &a.embeddings)?;
    manifest.input("pairs", &a.pairs)?;
    let store = load_store(&a.embeddings)?;
    let pairs = read_pair_file(&a.pairs)?;
    let scored = score_pairs(&store, &pairs)?;
    let mut buf = Vec::new();
    write_scored(&mut buf, &scored)?;
    emit(&String::from_utf8(buf)?, a.out.as_deref(), manifest)?;
    eprintln!("scored {} pairs", scored.len());
    Ok(())
}

#[derive(Args, Debug, Serialize)]
pub struct EvalApArgs {
    /// Embedding store (text or binary)
    #[arg(long)]
    pub embeddings: PathBuf,

    /// Labeled pairs `u TAB v TAB relation`
    #[arg(long)]
    pub dataset: PathBuf,

    /// Relation ranked as relevant
    #[arg(long, default_value = "hyper")]
    pub target: String,

    /// Relations ranked against the target; every other relation when absent
    #[arg(long, value_delimiter = ',')]
    pub against: Option<Vec<String>>,

    /// Pair score
    #[arg(long, value_enum, env = "HYPERVEC_MEASURE", default_value_t = MeasureArg::Hyperscore)]
    pub measure: MeasureArg,

    /// Output file; stdout when absent
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn eval_ap(g: &Global, a: &EvalApArgs) -> Result<()> {
    let mut manifest = RunManifest::new("eval-ap", g, a)?;
    manifest.input("embeddings", &a.embeddings)?;
    manifest.input("dataset", &a.dataset)?;
    let store = load_store(&a.embeddings)?;
    let dataset = load_dataset(&a.dataset)?;
    let against: Option<Vec<&str>> = a.against.as_ref().map(|l| l.iter().map(String::as_str).collect());
    let report = eval_ranking(&store, &dataset, &a.target, against.as_deref(), a.measure.into())?;
    emit(&format!("{}\n{}\n", RankingReport::CSV_HEADER, report.csv_row()), a.out.as_deref(), manifest)?;
    eprint!(
        "{}",
        summary_table(
            &["dataset", "target", "against", "measure", "AP", "pairs", "oov"],
            &[vec![
                report.dataset.clone(),
                report.target.clone(),
                report.against.clone(),
                report.measure.name().to_owned(),
                format!("{:.4}", report.ap),
                report.pairs.to_string(),
                report.oov.to_string(),
            ]],
        )
    );
    Ok(())
}

#[derive(Args, Debug, Serialize)]
pub struct EvalDirArgs {
    /// Embedding store (text or binary)
    #[arg(long)]
    pub embeddings: PathBuf,

    /// Gold `hyponym TAB hypernym` pairs
    #[arg(long)]
    pub pairs: PathBuf,

    /// Only use rows whose third column equals this relation
    #[arg(long)]
    pub relation: Option<String>,

    /// Output file; stdout when absent
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn eval_dir(g: &Global, a: &EvalDirArgs) -> Result<()> {
    let mut manifest = RunManifest::new("eval-dir", g, a)?;
    manifest.input("embeddings", &a.embeddings)?;
    manifest.input("pairs", &a.pairs)?;
    let store = load_store(&a.embeddings)?;
    let pairs = match &a.relation {
        Some(rel) => load_dataset(&a.pairs)?
            .pairs()
            .iter()
            .filter(|p| &p.relation == rel)
            .map(|p| (p.u.clone(), p.v.clone()))
            .collect(),
        None => read_pair_file(&a.pairs)?,
    };
    let report = eval_directionality(&store, &pairs)?;
    emit(
        &format!("{}\n{}\n", DirectionalityReport::CSV_HEADER, report.csv_row()),
        a.out.as_deref(),
        manifest,
    )?;
    eprintln!(
        "directionality accuracy {:.4} ({} of {}, {} out of vocabulary)",
        report.accuracy, report.correct, report.total, report.oov
    );
    Ok(())
}

#[derive(Args, Debug, Serialize)]
pub struct EvalClsArgs {
    /// Embedding store (text or binary)
    #[arg(long)]
    pub embeddings: PathBuf,

    /// Pairs labeled `hyper`, `rhyper` or `other`
    #[arg(long)]
    pub dataset: PathBuf,

    /// 2: hypernym vs other; 3: hypernym, reversed hypernym, other
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u8).range(2..=3))]
    pub classes: u8,

    /// Tuning/testing rounds
    #[arg(long, env = "HYPERVEC_CLS_ITERATIONS", default_value_t = 1000)]
    pub iterations: usize,

    /// Fraction of pairs used to tune the threshold in each round
    #[arg(long, env = "HYPERVEC_CLS_SAMPLE", default_value_t = 0.02)]
    pub sample_frac: f64,

    /// Resampling attempts when a tuning sample holds a single class
    #[arg(long, default_value_t = 100)]
    pub max_retries: usize,

    /// Output file; stdout when absent
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn eval_cls(g: &Global, a: &EvalClsArgs) -> Result<()> {
    let mut manifest = RunManifest::new("eval-cls", g, a)?;
    manifest.input("embeddings", &a.embeddings)?;
    manifest.input("dataset", &a.dataset)?;
    let store = load_store(&a.embeddings)?;
    let dataset = load_dataset(&a.dataset)?;
    let config = ThresholdConfig {
        scheme: ClassScheme::from_count(a.classes as usize)?,
        iterations: a.iterations,
        sample_frac: a.sample_frac,
        seed: g.seed,
        max_retries: a.max_retries,
    };
    let report = eval_threshold_classification(&store, &dataset, &config)?;
    emit(
        &format!("{}\n{}\n", ClassificationReport::CSV_HEADER, report.csv_row()),
        a.out.as_deref(),
        manifest,
    )?;
    eprintln!(
        "{}-way accuracy {:.4} ± {:.4} over {} rounds ({} pairs, {} out of vocabulary)",
        report.classes, report.mean, report.std, report.iterations, report.pairs, report.oov
    );
    Ok(())
}

#[derive(Args, Debug, Serialize)]
pub struct EvalGradedArgs {
    /// Embedding store (text or binary)
    #[arg(long)]
    pub embeddings: PathBuf,

    /// Pairs `u TAB v TAB relation TAB score`
    #[arg(long)]
    pub dataset: PathBuf,

    /// Pair score
    #[arg(long, value_enum, env = "HYPERVEC_MEASURE", default_value_t = MeasureArg::Hyperscore)]
    pub measure: MeasureArg,

    /// Output file; stdout when absent
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn eval_graded(g: &Global, a: &EvalGradedArgs) -> Result<()> {
    let mut manifest = RunManifest::new("eval-graded", g, a)?;
    manifest.input("embeddings", &a.embeddings)?;
    manifest.input("dataset", &a.dataset)?;
    let store = load_store(&a.embeddings)?;
    let dataset = load_dataset(&a.dataset)?;
    let report = graded(&store, &dataset, a.measure.into())?;
    emit(&format!("{}\n{}\n", GradedReport::CSV_HEADER, report.csv_row()), a.out.as_deref(), manifest)?;
    eprintln!(
        "{}: spearman {:.4} over {} pairs ({} out of vocabulary)",
        report.dataset, report.rho, report.pairs, report.oov
    );
    Ok(())
}

#[derive(Args, Debug, Serialize)]
pub struct MapArgs {
    /// Source-language embeddings
    #[arg(long)]
    pub source: PathBuf,

    /// Target embeddings the source is mapped into
    #[arg(long)]
    pub target: PathBuf,

    /// Translation pairs `source TAB target [TAB count]`
    #[arg(long)]
    pub lexicon: PathBuf,

    /// Ridge penalty
    #[arg(long, env = "HYPERVEC_LAMBDA", default_value_t = DEFAULT_LAMBDA)]
    pub lambda: f64,

    /// Output mapping file
    #[arg(long)]
    pub out: PathBuf,
}

pub fn map(g: &Global, a: &MapArgs) -> Result<()> {
    let mut manifest = RunManifest::new("map", g, a)?;
    manifest.input("source", &a.source)?;
    manifest.input("target", &a.target)?;
    manifest.input("lexicon", &a.lexicon)?;
    let source = load_store(&a.source)?;
    let target = load_store(&a.target)?;
    let lexicon = BilingualLexicon::load(&a.lexicon)?;
    let (model, report) = fit_mapping(&source, &target, &lexicon, a.lambda)?;
    model.save(&a.out)?;
    manifest.output("mapping", &a.out)?;
    manifest.write(&manifest_path(&a.out))?;
    eprintln!(
        "fitted {}x{} mapping on {} pairs ({} skipped), |W| = {:.4}",
        model.source_dim(),
        model.target_dim(),
        report.rows,
        report.skipped,
        model.frobenius_norm()
    );
    Ok(())
}

#[derive(Args, Debug, Serialize)]
pub struct ProjectArgs {
    /// Mapping from `map`
    #[arg(long)]
    pub model: PathBuf,

    /// Source-language embeddings
    #[arg(long)]
    pub source: PathBuf,

    /// Output store
    #[arg(long)]
    pub out: PathBuf,

    /// Output store format
    #[arg(long, value_enum, default_value_t = StoreFormat::Text)]
    pub format: StoreFormat,
}

pub fn project(g: &Global, a: &ProjectArgs) -> Result<()> {
    let mut manifest = RunManifest::new("project", g, a)?;
    manifest.input("model", &a.model)?;
    manifest.input("source", &a.source)?;
    let model = MappingModel::load(&a.model)?;
    let source = load_store(&a.source)?;
    let projected = hypervec::xling::project(&model, &source)?;
    match a.format {
        StoreFormat::Text => projected.save_text(&a.out)?,
        StoreFormat::Binary => projected.save_binary(&a.out)?,
    }
    manifest.output("embeddings", &a.out)?;
    manifest.write(&manifest_path(&a.out))?;
    eprintln!("projected {} words into {} dimensions", projected.len(), projected.dims());
    Ok(())
}

#[derive(Args, Debug, Serialize)]
pub struct FeaturesArgs {
    /// Embedding store (text or binary)
    #[arg(long)]
    pub embeddings: PathBuf,

    /// Pairs `u TAB v`; further columns are ignored
    #[arg(long)]
    pub pairs: PathBuf,

    /// Output file; stdout when absent
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn features(g: &Global, a: &FeaturesArgs) -> Result<()> {
    let mut manifest = RunManifest::new("features", g, a)?;
    manifest.input("embeddings", &a.embeddings)?;
    manifest.input("pairs", &a.pairs)?;
    let store = load_store(&a.embeddings)?;
    let pairs = read_pair_file(&a.pairs)?;
    let mut buf = Vec::new();
    write_features(&mut buf, &store, &pairs)?;
    emit(&String::from_utf8(buf)?, a.out.as_deref(), manifest)?;
    eprintln!("wrote features for {} pairs", pairs.len());
    Ok(())
}

#[derive(Args, Debug, Serialize)]
pub struct SynthArgs {
    /// Output directory
    #[arg(long)]
    pub out_dir: PathBuf,

    /// Top-level categories
    #[arg(long, default_value_t = 5)]
    pub tops: usize,

    /// Children per top-level category
    #[arg(long, default_value_t = 3)]
    pub mids_per_top: usize,

    /// Leaves per middle category
    #[arg(long, default_value_t = 8)]
    pub leaves_per_mid: usize,

    /// Sentences generated per taxonomy word
    #[arg(long, default_value_t = 1000)]
    pub sentences_per_word: usize,

    /// Hypernym pairs in the training resource
    #[arg(long, default_value_t = 200)]
    pub train_pairs: usize,

    /// Hypernym pairs held out for evaluation
    #[arg(long, default_value_t = 50)]
    pub held_out_pairs: usize,

    /// Co-hyponym and unrelated pairs, each, in the evaluation datasets
    #[arg(long, default_value_t = 50)]
    pub negative_pairs: usize,
}

pub fn synth(g: &Global, a: &SynthArgs) -> Result<()> {
    let mut manifest = RunManifest::new("synth", g, a)?;
    let config = SyntheticConfig {
        tops: a.tops,
        mids_per_top: a.mids_per_top,
        leaves_per_mid: a.leaves_per_mid,
        sentences_per_word: a.sentences_per_word,
        seed: g.seed,
        ..Default::default()
    };
    let taxonomy = Taxonomy::build(&config);
    let split = synthetic::split(
        &taxonomy,
        &SplitConfig {
            train_pairs: a.train_pairs,
            held_out_pairs: a.held_out_pairs,
            cohyponym_pairs: a.negative_pairs,
            random_pairs: a.negative_pairs,
            seed: g.seed,
        },
    )?;
    let lines = synthetic::generate_corpus(&taxonomy, &config);

    create_dir(&a.out_dir)?;
    let files = [
        ("corpus", a.out_dir.join("corpus.txt")),
        ("resource", a.out_dir.join("resource.tsv")),
        ("held_out", a.out_dir.join("held_out.tsv")),
        ("detection", a.out_dir.join("detection.tsv")),
        ("classification", a.out_dir.join("classification.tsv")),
    ];
    synthetic::write_lines(&files[0].1, &lines)?;
    synthetic::write_pairs(&files[1].1, &split.resource)?;
    synthetic::write_pairs(&files[2].1, &split.held_out)?;
    synthetic::write_dataset(&files[3].1, &split.detection)?;
    synthetic::write_dataset(&files[4].1, &split.classification)?;
    for (name, path) in &files {
        manifest.output(name, path)?;
    }
    manifest.write(&a.out_dir.join("manifest.json"))?;
    eprintln!(
        "{} taxonomy words, {} sentences, {} resource pairs, {} held-out pairs",
        taxonomy.len(),
        lines.len(),
        split.resource.len(),
        split.held_out.len()
    );
    Ok(())
}
