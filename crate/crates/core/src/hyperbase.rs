//! The hyponym→hypernym resource used as training supervision.
//!
//! Pipeline order is load → optional closure → filter, so that no evaluation
//! pair can be reintroduced by the closure.

use std::collections::HashSet;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use crate::corpus::Vocab;
use crate::eval::RelationDataset;
use crate::{Error, Result};

/// Hypernym lists indexed by vocabulary id.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HypernymResource {
    words: Vec<String>,
    hypernyms: Vec<Vec<u32>>,
    filtered: bool,
}

/// Counts gathered while loading a resource file.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct LoadReport {
    pub kept: usize,
    pub dropped_oov: usize,
    pub duplicates: usize,
    pub self_pairs: usize,
}

/// Counts gathered while removing evaluation pairs.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct FilterReport {
    pub kept: usize,
    pub removed: usize,
}

impl HypernymResource {
    /// A resource without pairs. Trivially free of evaluation pairs.
    pub fn empty(vocab: &Vocab) -> Self {
        HypernymResource {
            words: vocab.words().to_vec(),
            hypernyms: vec![Vec::new(); vocab.len()],
            filtered: true,
        }
    }

    /// Build from `(hyponym, hypernym)` id pairs. Self-pairs and duplicates
    /// are dropped.
    pub fn from_id_pairs(vocab: &Vocab, pairs: impl IntoIterator<Item = (u32, u32)>) -> Self {
        let mut hypernyms = vec![Vec::new(); vocab.len()];
        for (hypo, hyper) in pairs {
            if hypo != hyper {
                hypernyms[hypo as usize].push(hyper);
            }
        }
        for list in &mut hypernyms {
            list.sort_unstable();
            list.dedup();
        }
        HypernymResource {
            words: vocab.words().to_vec(),
            hypernyms,
            filtered: false,
        }
    }

    /// Read `hyponym TAB hypernym` lines. Pairs with an out-of-vocabulary
    /// member are dropped and counted.
    pub fn from_reader<R: BufRead>(reader: R, vocab: &Vocab, source: &Path) -> Result<(Self, LoadReport)> {
        let mut report = LoadReport::default();
        let mut pairs = Vec::new();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 2 {
                return Err(Error::format(
                    source,
                    lineno + 1,
                    format!("expected 2 tab-separated columns, found {}", fields.len()),
                ));
            }
            let (hypo, hyper) = (fields[0].trim(), fields[1].trim());
            match (vocab.id(hypo), vocab.id(hyper)) {
                (Some(a), Some(b)) if a == b => report.self_pairs += 1,
                (Some(a), Some(b)) => pairs.push((a, b)),
                _ => report.dropped_oov += 1,
            }
        }
        let seen = pairs.len();
        let resource = HypernymResource::from_id_pairs(vocab, pairs);
        report.kept = resource.pair_count();
        report.duplicates = seen - report.kept;
        Ok((resource, report))
    }

    pub fn hypernyms_of(&self, word: u32) -> &[u32] {
        self.hypernyms.get(word as usize).map_or(&[], Vec::as_slice)
    }

    pub fn pair_count(&self) -> usize {
        self.hypernyms.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.pair_count() == 0
    }

    pub fn hyponym_count(&self) -> usize {
        self.hypernyms.iter().filter(|h| !h.is_empty()).count()
    }

    pub fn hypernym_count(&self) -> usize {
        let set: HashSet<u32> = self.hypernyms.iter().flatten().copied().collect();
        set.len()
    }

    /// Whether evaluation pairs have been removed.
    pub fn is_filtered(&self) -> bool {
        self.filtered
    }

    pub fn contains(&self, hypo: u32, hyper: u32) -> bool {
        self.hypernyms_of(hypo).binary_search(&hyper).is_ok()
    }

    /// All `(hyponym, hypernym)` id pairs in sorted order.
    pub fn pairs(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.hypernyms
            .iter()
            .enumerate()
            .flat_map(|(w, hs)| hs.iter().map(move |&h| (w as u32, h)))
    }

    /// All `(hyponym, hypernym)` pairs as tokens.
    pub fn word_pairs(&self) -> impl Iterator<Item = (&str, &str)> + '_ {
        self.pairs()
            .map(|(a, b)| (self.words[a as usize].as_str(), self.words[b as usize].as_str()))
    }

    /// Add every ancestor reachable through stored edges.
    ///
    /// Fails on a cycle, naming the words along it.
    pub fn transitive_closure(&self) -> Result<HypernymResource> {
        const UNVISITED: u8 = 0;
        const ACTIVE: u8 = 1;
        const DONE: u8 = 2;

        let n = self.hypernyms.len();
        let mut state = vec![UNVISITED; n];
        let mut closed: Vec<Vec<u32>> = vec![Vec::new(); n];

        for root in 0..n {
            if state[root] != UNVISITED {
                continue;
            }
            // Iterative post-order DFS; the stack holds (node, next edge).
            let mut stack: Vec<(usize, usize)> = vec![(root, 0)];
            state[root] = ACTIVE;
            while let Some(top) = stack.last_mut() {
                let node = top.0;
                if let Some(&next) = self.hypernyms[node].get(top.1) {
                    top.1 += 1;
                    let next = next as usize;
                    match state[next] {
                        UNVISITED => {
                            state[next] = ACTIVE;
                            stack.push((next, 0));
                        }
                        ACTIVE => {
                            let start = stack.iter().position(|&(v, _)| v == next).unwrap_or(0);
                            let mut cycle: Vec<String> =
                                stack[start..].iter().map(|&(v, _)| self.words[v].clone()).collect();
                            cycle.push(self.words[next].clone());
                            return Err(Error::Cycle(cycle));
                        }
                        _ => {}
                    }
                } else {
                    let mut ancestors: Vec<u32> = Vec::new();
                    for &parent in &self.hypernyms[node] {
                        ancestors.push(parent);
                        ancestors.extend_from_slice(&closed[parent as usize]);
                    }
                    ancestors.sort_unstable();
                    ancestors.dedup();
                    closed[node] = ancestors;
                    state[node] = DONE;
                    stack.pop();
                }
            }
        }

        Ok(HypernymResource {
            words: self.words.clone(),
            hypernyms: closed,
            filtered: false,
        })
    }

    /// Remove every pair that appears in any dataset, in either order.
    pub fn filter_eval_pairs(&self, datasets: &[RelationDataset]) -> (HypernymResource, FilterReport) {
        let mut banned: HashSet<(&str, &str)> = HashSet::new();
        for dataset in datasets {
            for pair in dataset.pairs() {
                banned.insert((pair.u.as_str(), pair.v.as_str()));
                banned.insert((pair.v.as_str(), pair.u.as_str()));
            }
        }

        let mut report = FilterReport::default();
        let hypernyms = self
            .hypernyms
            .iter()
            .enumerate()
            .map(|(w, hs)| {
                let hypo = self.words[w].as_str();
                hs.iter()
                    .copied()
                    .filter(|&h| {
                        let keep = !banned.contains(&(hypo, self.words[h as usize].as_str()));
                        if keep {
                            report.kept += 1;
                        } else {
                            report.removed += 1;
                        }
                        keep
                    })
                    .collect()
            })
            .collect();

        (
            HypernymResource {
                words: self.words.clone(),
                hypernyms,
                filtered: true,
            },
            report,
        )
    }
}

/// Load a resource TSV against a vocabulary.
pub fn load_resource(path: impl AsRef<Path>, vocab: &Vocab) -> Result<(HypernymResource, LoadReport)> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    HypernymResource::from_reader(BufReader::new(file), vocab, path)
}

/// Summary of the resource pipeline, written next to training outputs.
#[derive(Clone, Debug, Default)]
pub struct ResourceSummary {
    pub load: LoadReport,
    pub closure_added: Option<usize>,
    pub filter: FilterReport,
    pub hyponyms: usize,
    pub hypernyms: usize,
}

impl fmt::Display for ResourceSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "pairs loaded:        {}", self.load.kept)?;
        writeln!(f, "dropped (oov):       {}", self.load.dropped_oov)?;
        writeln!(f, "dropped (duplicate): {}", self.load.duplicates)?;
        writeln!(f, "dropped (self-pair): {}", self.load.self_pairs)?;
        match self.closure_added {
            Some(n) => writeln!(f, "added by closure:    {}", n)?,
            None => writeln!(f, "added by closure:    (closure disabled)")?,
        }
        writeln!(f, "removed (eval):      {}", self.filter.removed)?;
        writeln!(f, "pairs kept:          {}", self.filter.kept)?;
        writeln!(f, "hyponyms:            {}", self.hyponyms)?;
        writeln!(f, "hypernyms:           {}", self.hypernyms)
    }
}
