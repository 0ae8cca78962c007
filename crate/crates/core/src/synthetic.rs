//! Synthetic taxonomy corpora for end-to-end checks and demos.
//!
//! A three-level taxonomy (top → mid → leaf) is generated together with a
//! corpus that follows distributional inclusion: every node owns a few
//! distinctive context words, a leaf is mentioned with the contexts of its
//! ancestors and its own, and an inner node is mentioned with the contexts
//! of its ancestors, its own, and those of its whole subtree. Hyponym
//! contexts are therefore a subset of their hypernyms' contexts. General
//! words are mentioned more often than specific ones, and a pool of filler
//! words stands in for topic-neutral vocabulary.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng as _;

use crate::eval::{RelationDataset, RelationPair};
use crate::rng::derived_rng;
use crate::{Error, Result};

#[derive(Clone, Debug)]
pub struct SyntheticConfig {
    pub tops: usize,
    pub mids_per_top: usize,
    pub leaves_per_mid: usize,
    /// Distinctive context words owned by each node.
    pub features_per_node: usize,
    /// Sentences per taxonomy word.
    pub sentences_per_word: usize,
    /// Context words per sentence, besides the subject.
    pub context_len: usize,
    /// Size of a pool of topic-neutral filler words.
    pub filler_words: usize,
    /// Probability that a context slot holds a filler word.
    pub filler_rate: f64,
    /// Probability that a context slot of an inner node is filled with the
    /// distinctive context of one of its descendants rather than with a
    /// context of its own path to the root.
    pub subtree_rate: f64,
    /// Sentence multipliers for top, middle and leaf nodes.
    pub level_weights: [usize; 3],
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            tops: 5,
            mids_per_top: 3,
            leaves_per_mid: 8,
            features_per_node: 6,
            sentences_per_word: 1000,
            context_len: 5,
            filler_words: 500,
            filler_rate: 0.3,
            subtree_rate: 0.5,
            level_weights: [4, 2, 1],
            seed: 7,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Level {
    Top,
    Mid,
    Leaf,
}

/// Taxonomy nodes in breadth-first order.
#[derive(Clone, Debug)]
pub struct Taxonomy {
    names: Vec<String>,
    parents: Vec<Option<usize>>,
    levels: Vec<Level>,
    features: Vec<Vec<String>>,
}

impl Taxonomy {
    pub fn build(config: &SyntheticConfig) -> Self {
        let mut t = Taxonomy {
            names: Vec::new(),
            parents: Vec::new(),
            levels: Vec::new(),
            features: Vec::new(),
        };
        let push = |t: &mut Taxonomy, name: String, parent: Option<usize>, level: Level| {
            let features = (0..config.features_per_node).map(|i| format!("ctx_{}_{}", name, i)).collect();
            t.names.push(name);
            t.parents.push(parent);
            t.levels.push(level);
            t.features.push(features);
            t.names.len() - 1
        };
        for a in 0..config.tops {
            let top = push(&mut t, format!("top{}", a), None, Level::Top);
            for b in 0..config.mids_per_top {
                let mid = push(&mut t, format!("mid{}x{}", a, b), Some(top), Level::Mid);
                for c in 0..config.leaves_per_mid {
                    push(&mut t, format!("leaf{}x{}x{}", a, b, c), Some(mid), Level::Leaf);
                }
            }
        }
        t
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, node: usize) -> &str {
        &self.names[node]
    }

    pub fn level(&self, node: usize) -> Level {
        self.levels[node]
    }

    pub fn parent(&self, node: usize) -> Option<usize> {
        self.parents[node]
    }

    pub fn ancestors(&self, node: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut cur = self.parents[node];
        while let Some(p) = cur {
            out.push(p);
            cur = self.parents[p];
        }
        out
    }

    fn descendants(&self, node: usize) -> Vec<usize> {
        (0..self.len()).filter(|&n| self.ancestors(n).contains(&node)).collect()
    }

    /// Context words a node is mentioned with.
    pub fn contexts(&self, node: usize) -> Vec<String> {
        let mut nodes = self.ancestors(node);
        nodes.push(node);
        nodes.extend(self.descendants(node));
        nodes.iter().flat_map(|&n| self.features[n].iter().cloned()).collect()
    }

    /// Every `(hyponym, hypernym)` pair of the closed taxonomy.
    pub fn hypernym_pairs(&self) -> Vec<(String, String)> {
        (0..self.len())
            .flat_map(|n| {
                self.ancestors(n)
                    .into_iter()
                    .map(move |a| (self.names[n].clone(), self.names[a].clone()))
            })
            .collect()
    }

    /// Leaves sharing a parent.
    pub fn cohyponym_pairs(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        for a in 0..self.len() {
            for b in a + 1..self.len() {
                if self.levels[a] == Level::Leaf && self.parents[a] == self.parents[b] && self.levels[b] == Level::Leaf {
                    out.push((self.names[a].clone(), self.names[b].clone()));
                }
            }
        }
        out
    }

    /// Pairs of words under different top nodes.
    pub fn unrelated_pairs(&self) -> Vec<(String, String)> {
        let root = |n: usize| *self.ancestors(n).last().unwrap_or(&n);
        let mut out = Vec::new();
        for a in 0..self.len() {
            for b in 0..self.len() {
                if a != b && root(a) != root(b) {
                    out.push((self.names[a].clone(), self.names[b].clone()));
                }
            }
        }
        out
    }
}

/// Generate corpus lines for a taxonomy.
pub fn generate_corpus(taxonomy: &Taxonomy, config: &SyntheticConfig) -> Vec<String> {
    let mut rng = derived_rng(config.seed, &[0]);
    let fillers: Vec<String> = (0..config.filler_words).map(|i| format!("filler{}", i)).collect();
    let paths: Vec<Vec<&str>> = (0..taxonomy.len())
        .map(|n| {
            let mut nodes = taxonomy.ancestors(n);
            nodes.push(n);
            nodes.iter().flat_map(|&a| taxonomy.features[a].iter().map(String::as_str)).collect()
        })
        .collect();
    let below: Vec<Vec<usize>> = (0..taxonomy.len()).map(|n| taxonomy.descendants(n)).collect();

    let mut subjects: Vec<usize> = (0..taxonomy.len())
        .flat_map(|n| {
            let weight = match taxonomy.level(n) {
                Level::Top => config.level_weights[0],
                Level::Mid => config.level_weights[1],
                Level::Leaf => config.level_weights[2],
            };
            std::iter::repeat_n(n, config.sentences_per_word * weight)
        })
        .collect();
    subjects.shuffle(&mut rng);

    let mut lines = Vec::with_capacity(subjects.len());
    let mut tokens: Vec<&str> = Vec::with_capacity(config.context_len + 1);
    for subject in subjects {
        tokens.clear();
        for _ in 0..config.context_len {
            let word = if !fillers.is_empty() && rng.random::<f64>() < config.filler_rate {
                fillers.choose(&mut rng).map(String::as_str)
            } else if !below[subject].is_empty() && rng.random::<f64>() < config.subtree_rate {
                let d = *below[subject].choose(&mut rng).expect("non-empty subtree");
                taxonomy.features[d].choose(&mut rng).map(String::as_str)
            } else {
                paths[subject].choose(&mut rng).copied()
            };
            tokens.push(word.expect("non-empty context pool"));
        }
        let at = rng.random_range(0..=tokens.len());
        tokens.insert(at, taxonomy.name(subject));
        lines.push(tokens.join(" "));
    }
    lines
}

pub fn write_lines(path: impl AsRef<Path>, lines: &[String]) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for line in lines {
        writeln!(w, "{}", line)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_pairs(path: impl AsRef<Path>, pairs: &[(String, String)]) -> Result<()> {
    let lines: Vec<String> = pairs.iter().map(|(a, b)| format!("{}\t{}", a, b)).collect();
    write_lines(path, &lines)
}

pub fn write_dataset(path: impl AsRef<Path>, dataset: &RelationDataset) -> Result<()> {
    let lines: Vec<String> = dataset
        .pairs()
        .iter()
        .map(|p| match p.score {
            Some(s) => format!("{}\t{}\t{}\t{}", p.u, p.v, p.relation, s),
            None => format!("{}\t{}\t{}", p.u, p.v, p.relation),
        })
        .collect();
    write_lines(path, &lines)
}

/// Sizes of the supervision / evaluation split.
#[derive(Clone, Debug)]
pub struct SplitConfig {
    pub train_pairs: usize,
    pub held_out_pairs: usize,
    pub cohyponym_pairs: usize,
    pub random_pairs: usize,
    pub seed: u64,
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig {
            train_pairs: 200,
            held_out_pairs: 50,
            cohyponym_pairs: 50,
            random_pairs: 50,
            seed: 11,
        }
    }
}

/// Disjoint training resource and evaluation pairs drawn from a taxonomy.
#[derive(Clone, Debug)]
pub struct Split {
    /// `(hyponym, hypernym)` supervision pairs.
    pub resource: Vec<(String, String)>,
    /// `(hyponym, hypernym)` pairs kept out of the resource.
    pub held_out: Vec<(String, String)>,
    /// Held-out pairs labeled `hyper`, plus `coord` and `random` pairs.
    pub detection: RelationDataset,
    /// Held-out pairs as `hyper`, the same pairs reversed as `rhyper`, and
    /// co-hyponym and random pairs as `other`.
    pub classification: RelationDataset,
}

pub fn split(taxonomy: &Taxonomy, config: &SplitConfig) -> Result<Split> {
    let mut rng = derived_rng(config.seed, &[1]);
    let mut hyper = taxonomy.hypernym_pairs();
    if hyper.len() < config.train_pairs + config.held_out_pairs {
        return Err(Error::InvalidArgument(format!(
            "taxonomy has {} hypernym pairs, need {}",
            hyper.len(),
            config.train_pairs + config.held_out_pairs
        )));
    }
    hyper.shuffle(&mut rng);
    let held_out: Vec<_> = hyper[..config.held_out_pairs].to_vec();
    let resource: Vec<_> = hyper[config.held_out_pairs..config.held_out_pairs + config.train_pairs].to_vec();

    let mut coord = taxonomy.cohyponym_pairs();
    coord.shuffle(&mut rng);
    coord.truncate(config.cohyponym_pairs);
    let mut random = taxonomy.unrelated_pairs();
    random.shuffle(&mut rng);
    random.truncate(config.random_pairs);

    let labeled = |pairs: &[(String, String)], label: &str| -> Vec<RelationPair> {
        pairs
            .iter()
            .map(|(u, v)| RelationPair::new(u.as_str(), v.as_str(), label, None))
            .collect()
    };
    let mut detection = labeled(&held_out, "hyper");
    detection.extend(labeled(&coord, "coord"));
    detection.extend(labeled(&random, "random"));

    let reversed: Vec<(String, String)> = held_out.iter().map(|(u, v)| (v.clone(), u.clone())).collect();
    let mut classification = labeled(&held_out, "hyper");
    classification.extend(labeled(&reversed, "rhyper"));
    classification.extend(labeled(&coord, "other"));
    classification.extend(labeled(&random, "other"));

    Ok(Split {
        resource,
        held_out,
        detection: RelationDataset::new("synthetic-detection", detection),
        classification: RelationDataset::new("synthetic-classification", classification),
    })
}
