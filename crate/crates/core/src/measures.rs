//! HyperScore, directionality and pair features over a trained store.
//!
//! `hyper_score(u, v) = cos(u, v) · ‖v‖ / ‖u‖` is high when `u` is a hyponym
//! of `v`: the pair is similar and `v` has the larger norm.

use std::fmt;
use std::io::{BufRead, Write};
use std::path::Path;
use std::str::FromStr;

use crate::embeddings::{cosine, dot, norm, EmbeddingStore};
use crate::{Error, Result};

/// Which member of a pair is predicted to be the hyponym.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Direction {
    UIsHyponym,
    VIsHyponym,
    /// Norms are exactly equal.
    Undecided,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::UIsHyponym => "u_is_hyponym",
            Direction::VIsHyponym => "v_is_hyponym",
            Direction::Undecided => "undecided",
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Pair scoring function used by the ranking evaluations.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Measure {
    #[default]
    HyperScore,
    Cosine,
}

impl Measure {
    pub fn score(self, store: &EmbeddingStore, u: &str, v: &str) -> Result<f64> {
        match self {
            Measure::HyperScore => hyper_score(store, u, v),
            Measure::Cosine => cosine(store.vector(u)?, store.vector(v)?),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Measure::HyperScore => "hyperscore",
            Measure::Cosine => "cosine",
        }
    }
}

impl FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hyperscore" => Ok(Measure::HyperScore),
            "cosine" => Ok(Measure::Cosine),
            other => Err(Error::InvalidArgument(format!("unknown measure {:?}", other))),
        }
    }
}

/// `cos(u, v) · ‖v‖ / ‖u‖`.
pub fn hyper_score(store: &EmbeddingStore, u: &str, v: &str) -> Result<f64> {
    let x = store.vector(u)?;
    let y = store.vector(v)?;
    let nx = norm(x);
    let ny = norm(y);
    if nx == 0.0 || ny == 0.0 {
        return Err(Error::ZeroNorm);
    }
    let cos = (dot(x, y) / (nx * ny)).clamp(-1.0, 1.0);
    Ok(cos * ny / nx)
}

/// The word with the larger norm is the hypernym.
pub fn direction(store: &EmbeddingStore, u: &str, v: &str) -> Result<Direction> {
    let nu = norm(store.vector(u)?);
    let nv = norm(store.vector(v)?);
    Ok(if nv > nu {
        Direction::UIsHyponym
    } else if nu > nv {
        Direction::VIsHyponym
    } else {
        Direction::Undecided
    })
}

/// Supervised-classification features `[v - u, cos(u, v), ‖u‖, ‖v‖]`.
pub fn pair_features(store: &EmbeddingStore, u: &str, v: &str) -> Result<Vec<f64>> {
    let x = store.vector(u)?;
    let y = store.vector(v)?;
    let mut features: Vec<f64> = y.iter().zip(x).map(|(b, a)| b - a).collect();
    features.push(cosine(x, y)?);
    features.push(norm(x));
    features.push(norm(y));
    Ok(features)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScoredPair {
    pub u: String,
    pub v: String,
    pub score: f64,
    pub direction: Direction,
}

/// Score every pair; the first out-of-vocabulary token aborts.
pub fn score_pairs(store: &EmbeddingStore, pairs: &[(String, String)]) -> Result<Vec<ScoredPair>> {
    pairs
        .iter()
        .map(|(u, v)| {
            Ok(ScoredPair {
                u: u.clone(),
                v: v.clone(),
                score: hyper_score(store, u, v)?,
                direction: direction(store, u, v)?,
            })
        })
        .collect()
}

/// Read `u TAB v` lines; extra columns are ignored.
pub fn read_pairs<R: BufRead>(reader: R, source: &Path) -> Result<Vec<(String, String)>> {
    let mut pairs = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split('\t');
        match (fields.next(), fields.next()) {
            (Some(u), Some(v)) if !u.trim().is_empty() && !v.trim().is_empty() => {
                pairs.push((u.trim().to_owned(), v.trim().to_owned()))
            }
            _ => return Err(Error::format(source, i + 1, "expected `u TAB v`")),
        }
    }
    Ok(pairs)
}

/// `u TAB v TAB score TAB direction`.
pub fn write_scored<W: Write>(mut writer: W, scored: &[ScoredPair]) -> Result<()> {
    for p in scored {
        writeln!(writer, "{}\t{}\t{}\t{}", p.u, p.v, p.score, p.direction)?;
    }
    Ok(())
}

pub(crate) fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

/// Feature export for external classifiers: a header line, then one CSV row
/// `u,v,f_0,…,f_{d+2}` per pair.
pub fn write_features<W: Write>(mut writer: W, store: &EmbeddingStore, pairs: &[(String, String)]) -> Result<()> {
    let d = crate::embeddings::VectorTables::dims(store);
    let mut header = vec!["u".to_owned(), "v".to_owned()];
    header.extend((0..d).map(|i| format!("diff_{}", i)));
    header.extend(["cos".to_owned(), "norm_u".to_owned(), "norm_v".to_owned()]);
    writeln!(writer, "{}", header.join(","))?;
    for (u, v) in pairs {
        let features = pair_features(store, u, v)?;
        write!(writer, "{},{}", csv_field(u), csv_field(v))?;
        for x in features {
            write!(writer, ",{}", x)?;
        }
        writeln!(writer)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn store(rows: &[(&str, &[f64])]) -> EmbeddingStore {
        let dims = rows[0].1.len();
        EmbeddingStore::from_rows(
            rows.iter().map(|(w, _)| w.to_string()).collect(),
            dims,
            rows.iter().flat_map(|(_, r)| r.iter().copied()).collect(),
        )
        .unwrap()
    }

    #[test]
    fn hyper_score_examples() {
        let s = store(&[("u", &[1.0, 0.0]), ("v", &[2.0, 0.0]), ("o", &[0.0, 1.0]), ("x", &[1.0, 1.0])]);
        assert!((hyper_score(&s, "u", "v").unwrap() - 2.0).abs() < 1e-12);
        assert!(hyper_score(&s, "u", "o").unwrap().abs() < 1e-12);
        assert!((hyper_score(&s, "x", "v").unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hyper_score_errors() {
        let s = store(&[("u", &[1.0, 0.0]), ("z", &[0.0, 0.0])]);
        assert!(matches!(hyper_score(&s, "u", "nope"), Err(Error::UnknownToken(t)) if t == "nope"));
        assert!(matches!(hyper_score(&s, "u", "z"), Err(Error::ZeroNorm)));
    }

    #[test]
    fn direction_examples() {
        let s = store(&[("u", &[1.0, 0.0]), ("v", &[0.0, 2.0]), ("w", &[0.0, 1.0])]);
        assert_eq!(direction(&s, "u", "v").unwrap(), Direction::UIsHyponym);
        assert_eq!(direction(&s, "v", "u").unwrap(), Direction::VIsHyponym);
        assert_eq!(direction(&s, "u", "w").unwrap(), Direction::Undecided);
        assert_eq!(direction(&s, "u", "u").unwrap(), Direction::Undecided);
    }

    #[test]
    fn features_layout() {
        let s = store(&[("u", &[1.0, 0.0]), ("v", &[0.0, 1.0])]);
        assert_eq!(pair_features(&s, "u", "v").unwrap(), vec![-1.0, 1.0, 0.0, 1.0, 1.0]);
        let same = pair_features(&s, "u", "u").unwrap();
        assert_eq!(&same[..2], &[0.0, 0.0]);
        assert!((same[2] - 1.0).abs() < 1e-12);
        assert_eq!(same[3], same[4]);
    }

    #[test]
    fn features_csv() {
        let s = store(&[("u", &[1.0, 0.0]), ("v", &[0.0, 1.0])]);
        let mut buf = Vec::new();
        write_features(&mut buf, &s, &[("u".into(), "v".into())]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "u,v,diff_0,diff_1,cos,norm_u,norm_v");
        assert_eq!(lines.next().unwrap(), "u,v,-1,1,0,1,1");
    }

    #[test]
    fn scored_tsv() {
        let s = store(&[("u", &[1.0, 0.0]), ("v", &[2.0, 0.0])]);
        let scored = score_pairs(&s, &[("u".into(), "v".into())]).unwrap();
        let mut buf = Vec::new();
        write_scored(&mut buf, &scored).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "u\tv\t2\tu_is_hyponym\n");
    }

    #[test]
    fn read_pairs_rejects_single_column() {
        assert!(read_pairs("a\tb\nc\n".as_bytes(), Path::new("p.tsv")).is_err());
        assert_eq!(read_pairs("a\tb\trel\n".as_bytes(), Path::new("p.tsv")).unwrap().len(), 1);
    }

    #[test]
    fn csv_quoting() {
        assert_eq!(csv_field("a,b"), "\"a,b\"");
        assert_eq!(csv_field("plain"), "plain");
    }
}
