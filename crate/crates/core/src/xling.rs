//! Linear mapping of a foreign embedding space into a trained space.
//!
//! The mapping `W` minimizes `‖XW − Y‖² + λ‖W‖²` over a bilingual lexicon,
//! where rows of `X` are source vectors and rows of `Y` the vectors of their
//! translations. It is solved through the normal equations
//! `(XᵀX + λI) W = XᵀY` with a Cholesky factorization.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use nalgebra::DMatrix;

use crate::corpus::read_u64;
use crate::embeddings::{read_f64s, write_file, EmbeddingStore, VectorTables, FORMAT_VERSION};
use crate::eval::{eval_ranking, RankingReport, RelationDataset};
use crate::measures::Measure;
use crate::{Error, Result};

const MAPPING_MAGIC: &[u8; 4] = b"HVMP";

/// Default ridge penalty.
pub const DEFAULT_LAMBDA: f64 = 1e-2;

/// One translation per source word.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct BilingualLexicon {
    entries: Vec<(String, String)>,
}

impl BilingualLexicon {
    /// Build from `(source, target, count)` candidates, keeping the
    /// highest-count target for each source (first seen on ties). Entries
    /// keep the order in which sources first appear.
    pub fn from_candidates(candidates: impl IntoIterator<Item = (String, String, f64)>) -> Self {
        let mut best: HashMap<String, usize> = HashMap::new();
        let mut entries: Vec<(String, String, f64)> = Vec::new();
        for (source, target, count) in candidates {
            match best.get(&source) {
                Some(&i) => {
                    if count > entries[i].2 {
                        entries[i].1 = target;
                        entries[i].2 = count;
                    }
                }
                None => {
                    best.insert(source.clone(), entries.len());
                    entries.push((source, target, count));
                }
            }
        }
        BilingualLexicon {
            entries: entries.into_iter().map(|(s, t, _)| (s, t)).collect(),
        }
    }

    /// Parse `source TAB target [TAB count]` lines.
    pub fn from_reader<R: BufRead>(reader: R, source: &Path) -> Result<Self> {
        let mut candidates = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').map(str::trim).collect();
            let count = match fields.len() {
                2 => 1.0,
                3 => fields[2]
                    .parse::<f64>()
                    .map_err(|_| Error::format(source, i + 1, format!("invalid count {:?}", fields[2])))?,
                n => {
                    return Err(Error::format(
                        source,
                        i + 1,
                        format!("expected 2 or 3 tab-separated columns, found {}", n),
                    ))
                }
            };
            candidates.push((fields[0].to_owned(), fields[1].to_owned(), count));
        }
        Ok(BilingualLexicon::from_candidates(candidates))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        BilingualLexicon::from_reader(BufReader::new(file), path)
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Projection matrix from a `source_dim` space into a `target_dim` space.
#[derive(Clone, Debug, PartialEq)]
pub struct MappingModel {
    /// Row-major `source_dim × target_dim`.
    weights: Vec<f64>,
    lambda: f64,
    source_dim: usize,
    target_dim: usize,
}

/// Lexicon coverage of a fit.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct FitReport {
    pub rows: usize,
    pub skipped: usize,
}

impl MappingModel {
    pub fn new(weights: Vec<f64>, source_dim: usize, target_dim: usize, lambda: f64) -> Result<Self> {
        if weights.len() != source_dim * target_dim {
            return Err(Error::InvalidArgument(format!(
                "{}x{} mapping needs {} weights, got {}",
                source_dim,
                target_dim,
                source_dim * target_dim,
                weights.len()
            )));
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::Numeric("mapping has non-finite weights".into()));
        }
        Ok(MappingModel {
            weights,
            lambda,
            source_dim,
            target_dim,
        })
    }

    pub fn identity(dims: usize) -> Self {
        let mut weights = vec![0.0; dims * dims];
        for i in 0..dims {
            weights[i * dims + i] = 1.0;
        }
        MappingModel {
            weights,
            lambda: 0.0,
            source_dim: dims,
            target_dim: dims,
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, row: usize, col: usize) -> f64 {
        self.weights[row * self.target_dim + col]
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn source_dim(&self) -> usize {
        self.source_dim
    }

    pub fn target_dim(&self) -> usize {
        self.target_dim
    }

    /// Frobenius norm of `W`.
    pub fn frobenius_norm(&self) -> f64 {
        self.weights.iter().map(|w| w * w).sum::<f64>().sqrt()
    }

    /// `x W` for a single source vector.
    pub fn apply(&self, x: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for (i, &xi) in x.iter().enumerate() {
            let row = &self.weights[i * self.target_dim..(i + 1) * self.target_dim];
            for (o, &w) in out.iter_mut().zip(row) {
                *o += xi * w;
            }
        }
    }

    /// Binary layout: magic `HVMP`, version byte, `d₁` (u64), `d₂` (u64),
    /// `d₁·d₂` row-major little-endian f64 weights, then λ as f64.
    pub fn write<W: Write>(&self, mut writer: W) -> Result<()> {
        writer.write_all(MAPPING_MAGIC)?;
        writer.write_all(&[FORMAT_VERSION])?;
        writer.write_all(&(self.source_dim as u64).to_le_bytes())?;
        writer.write_all(&(self.target_dim as u64).to_le_bytes())?;
        for w in &self.weights {
            writer.write_all(&w.to_le_bytes())?;
        }
        writer.write_all(&self.lambda.to_le_bytes())?;
        Ok(())
    }

    pub fn read<R: Read>(mut reader: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        reader.read_exact(&mut magic)?;
        if &magic != MAPPING_MAGIC {
            return Err(Error::Data("not a mapping file".into()));
        }
        let mut version = [0u8; 1];
        reader.read_exact(&mut version)?;
        if version[0] != FORMAT_VERSION {
            return Err(Error::Data(format!("unsupported mapping format version {}", version[0])));
        }
        let d1 = read_u64(&mut reader)? as usize;
        let d2 = read_u64(&mut reader)? as usize;
        let n = d1
            .checked_mul(d2)
            .ok_or_else(|| Error::Data("mapping size overflows".into()))?;
        let weights = read_f64s(&mut reader, n)?;
        let lambda = read_f64s(&mut reader, 1)?[0];
        MappingModel::new(weights, d1, d2, lambda)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        write_file(path.as_ref(), |w| self.write(w))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        MappingModel::read(BufReader::new(file))
    }
}

/// Ridge solution of `(XᵀX + λI) W = XᵀY` for explicit row-major `X`
/// (`n × d₁`) and `Y` (`n × d₂`).
pub fn solve_ridge(x: &[f64], y: &[f64], n: usize, d1: usize, d2: usize, lambda: f64) -> Result<MappingModel> {
    if lambda.is_nan() || lambda < 0.0 {
        return Err(Error::InvalidArgument(format!("lambda must be non-negative, got {}", lambda)));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("no training rows for the mapping".into()));
    }
    let xm = DMatrix::from_row_slice(n, d1, x);
    let ym = DMatrix::from_row_slice(n, d2, y);
    let xt = xm.transpose();
    let gram = &xt * &xm + DMatrix::<f64>::identity(d1, d1) * lambda;
    let rhs = &xt * &ym;
    let chol = gram.cholesky().ok_or_else(|| {
        Error::Numeric(if lambda == 0.0 {
            "normal equations are singular; use lambda > 0".to_owned()
        } else {
            "normal equations are not positive definite".to_owned()
        })
    })?;
    let w = chol.solve(&rhs);
    let mut weights = Vec::with_capacity(d1 * d2);
    for i in 0..d1 {
        for j in 0..d2 {
            weights.push(w[(i, j)]);
        }
    }
    MappingModel::new(weights, d1, d2, lambda)
}

/// Fit the mapping on lexicon entries present in both stores.
pub fn fit_mapping(
    source: &EmbeddingStore,
    target: &EmbeddingStore,
    lexicon: &BilingualLexicon,
    lambda: f64,
) -> Result<(MappingModel, FitReport)> {
    let d1 = source.dims();
    let d2 = target.dims();
    let mut x = Vec::new();
    let mut y = Vec::new();
    let mut report = FitReport::default();
    for (s, t) in lexicon.entries() {
        match (source.id(s), target.id(t)) {
            (Some(i), Some(j)) => {
                x.extend_from_slice(source.word(i));
                y.extend_from_slice(target.word(j));
                report.rows += 1;
            }
            _ => report.skipped += 1,
        }
    }
    if report.rows < d1 {
        log::warn!(
            "only {} lexicon rows for a {}-dimensional source space; the mapping is underdetermined",
            report.rows,
            d1
        );
    }
    let model = solve_ridge(&x, &y, report.rows, d1, d2, lambda)?;
    Ok((model, report))
}

/// Replace every source word vector `x` by `xW`.
pub fn project(model: &MappingModel, source: &EmbeddingStore) -> Result<EmbeddingStore> {
    if source.dims() != model.source_dim() {
        return Err(Error::InvalidArgument(format!(
            "mapping expects {}-dimensional vectors, store has {}",
            model.source_dim(),
            source.dims()
        )));
    }
    let d2 = model.target_dim();
    let mut values = vec![0.0; source.len() * d2];
    for (i, out) in values.chunks_mut(d2).enumerate() {
        model.apply(source.word(i as u32), out);
    }
    EmbeddingStore::from_rows(source.words().to_vec(), d2, values)
}

/// HyperScore ranking over a projected store.
pub fn eval_projected(
    projected: &EmbeddingStore,
    dataset: &RelationDataset,
    target: &str,
    against: Option<&[&str]>,
) -> Result<RankingReport> {
    eval_ranking(projected, dataset, target, against, Measure::HyperScore)
}
