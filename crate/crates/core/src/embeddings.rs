//! Dense word and context vectors, vector math, and persistence.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use rand::Rng as _;

use crate::corpus::{read_u32, read_u64, Vocab};
use crate::rng::rng_from_seed;
use crate::{Error, Result};

pub(crate) const EMBEDDING_MAGIC: &[u8; 4] = b"HVEC";
pub(crate) const FORMAT_VERSION: u8 = 1;

pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// Euclidean norm.
pub fn norm(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

/// Cosine similarity. Zero-norm inputs are an error.
pub fn cosine(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::InvalidArgument(format!(
            "dimension mismatch: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    let nx = norm(x);
    let ny = norm(y);
    if nx == 0.0 || ny == 0.0 {
        return Err(Error::ZeroNorm);
    }
    Ok((dot(x, y) / (nx * ny)).clamp(-1.0, 1.0))
}

/// Row access shared by the owned store and the trainer's worker handles.
pub trait VectorTables {
    fn dims(&self) -> usize;
    fn word(&self, id: u32) -> &[f64];
    fn word_mut(&mut self, id: u32) -> &mut [f64];
    fn context(&self, id: u32) -> &[f64];
    fn context_mut(&mut self, id: u32) -> &mut [f64];
}

/// Word and context vector tables over a vocabulary.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingStore {
    words: Vec<String>,
    index: HashMap<String, u32>,
    dims: usize,
    word_vectors: Vec<f64>,
    context_vectors: Vec<f64>,
}

impl EmbeddingStore {
    /// Build a store from a word list and a row-major word-vector table.
    /// Context vectors start at zero.
    pub fn from_rows(words: Vec<String>, dims: usize, word_vectors: Vec<f64>) -> Result<Self> {
        if dims == 0 {
            return Err(Error::InvalidArgument("dimension must be at least 1".into()));
        }
        if word_vectors.len() != words.len() * dims {
            return Err(Error::InvalidArgument(format!(
                "{} words of dimension {} need {} values, got {}",
                words.len(),
                dims,
                words.len() * dims,
                word_vectors.len()
            )));
        }
        let mut index = HashMap::with_capacity(words.len());
        for (i, w) in words.iter().enumerate() {
            if index.insert(w.clone(), i as u32).is_some() {
                return Err(Error::Data(format!("duplicate token {:?}", w)));
            }
        }
        let context_vectors = vec![0.0; word_vectors.len()];
        Ok(EmbeddingStore {
            words,
            index,
            dims,
            word_vectors,
            context_vectors,
        })
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn id(&self, token: &str) -> Option<u32> {
        self.index.get(token).copied()
    }

    /// Word vector of a token.
    pub fn vector(&self, token: &str) -> Result<&[f64]> {
        let id = self
            .id(token)
            .ok_or_else(|| Error::UnknownToken(token.to_owned()))?;
        Ok(self.word(id))
    }

    pub fn word_table(&self) -> &[f64] {
        &self.word_vectors
    }

    pub fn context_table(&self) -> &[f64] {
        &self.context_vectors
    }

    pub(crate) fn tables_mut(&mut self) -> (&mut [f64], &mut [f64]) {
        (&mut self.word_vectors, &mut self.context_vectors)
    }

    /// Multiply every word vector by `factor`.
    pub fn scale(&mut self, factor: f64) {
        self.word_vectors.iter_mut().for_each(|x| *x *= factor);
    }

    /// Whether every word and context entry is finite.
    pub fn is_finite(&self) -> bool {
        self.word_vectors
            .iter()
            .chain(&self.context_vectors)
            .all(|x| x.is_finite())
    }

    /// Write `count dim` then one `token v1 … vd` line per word. Values are
    /// printed in shortest round-trip form.
    pub fn write_text<W: Write>(&self, mut writer: W) -> Result<()> {
        writeln!(writer, "{} {}", self.len(), self.dims)?;
        for (i, word) in self.words.iter().enumerate() {
            write!(writer, "{}", word)?;
            for x in self.word(i as u32) {
                write!(writer, " {}", x)?;
            }
            writeln!(writer)?;
        }
        Ok(())
    }

    pub fn read_text<R: BufRead>(reader: R, source: &Path) -> Result<Self> {
        let mut lines = reader.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::format(source, 1, "missing header"))??;
        let mut parts = header.split_whitespace();
        let (Some(count), Some(dims), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(Error::format(source, 1, "header must be `count dim`"));
        };
        let count: usize = count
            .parse()
            .map_err(|_| Error::format(source, 1, "invalid word count"))?;
        let dims: usize = dims
            .parse()
            .map_err(|_| Error::format(source, 1, "invalid dimension"))?;
        if dims == 0 {
            return Err(Error::format(source, 1, "dimension must be at least 1"));
        }

        let mut words = Vec::with_capacity(count);
        let mut values = Vec::with_capacity(count * dims);
        for (i, line) in lines.enumerate() {
            let lineno = i + 2;
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let mut fields = line.split_whitespace();
            let token = fields.next().expect("non-empty line");
            let before = values.len();
            for field in fields {
                let x: f64 = field
                    .parse()
                    .map_err(|_| Error::format(source, lineno, format!("invalid value {:?}", field)))?;
                values.push(x);
            }
            if values.len() - before != dims {
                return Err(Error::format(
                    source,
                    lineno,
                    format!("expected {} values, found {}", dims, values.len() - before),
                ));
            }
            words.push(token.to_owned());
        }
        if words.len() != count {
            return Err(Error::format(
                source,
                1,
                format!("header announces {} words, body has {}", count, words.len()),
            ));
        }
        EmbeddingStore::from_rows(words, dims, values)
    }

    /// Binary layout: magic `HVEC`, version byte, `d` (u64), `|V|` (u64),
    /// `|V|·d` little-endian f64 word-vector entries row by row, then the
    /// tokens as u32 length + UTF-8 bytes.
    pub fn write_binary<W: Write>(&self, mut writer: W) -> Result<()> {
        writer.write_all(EMBEDDING_MAGIC)?;
        writer.write_all(&[FORMAT_VERSION])?;
        writer.write_all(&(self.dims as u64).to_le_bytes())?;
        writer.write_all(&(self.len() as u64).to_le_bytes())?;
        for x in &self.word_vectors {
            writer.write_all(&x.to_le_bytes())?;
        }
        for word in &self.words {
            writer.write_all(&(word.len() as u32).to_le_bytes())?;
            writer.write_all(word.as_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut reader: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        reader.read_exact(&mut magic)?;
        if &magic != EMBEDDING_MAGIC {
            return Err(Error::Data("not a binary embedding file".into()));
        }
        let mut version = [0u8; 1];
        reader.read_exact(&mut version)?;
        if version[0] != FORMAT_VERSION {
            return Err(Error::Data(format!("unsupported embedding format version {}", version[0])));
        }
        let dims = read_u64(&mut reader)? as usize;
        let count = read_u64(&mut reader)? as usize;
        let n = count
            .checked_mul(dims)
            .ok_or_else(|| Error::Data("embedding table size overflows".into()))?;
        let values = read_f64s(&mut reader, n)?;
        let mut words = Vec::with_capacity(count);
        for _ in 0..count {
            let len = read_u32(&mut reader)? as usize;
            let mut bytes = vec![0u8; len];
            reader.read_exact(&mut bytes)?;
            words.push(String::from_utf8(bytes).map_err(|_| Error::Data("token is not UTF-8".into()))?);
        }
        EmbeddingStore::from_rows(words, dims, values)
    }

    pub fn save_text(&self, path: impl AsRef<Path>) -> Result<()> {
        write_file(path.as_ref(), |w| self.write_text(w))
    }

    pub fn save_binary(&self, path: impl AsRef<Path>) -> Result<()> {
        write_file(path.as_ref(), |w| self.write_binary(w))
    }

    /// Load either format, detected from the magic bytes.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut reader = BufReader::new(file);
        let head = reader.fill_buf()?;
        if head.starts_with(EMBEDDING_MAGIC) {
            EmbeddingStore::read_binary(reader)
        } else {
            EmbeddingStore::read_text(reader, path)
        }
    }
}

impl VectorTables for EmbeddingStore {
    fn dims(&self) -> usize {
        self.dims
    }

    fn word(&self, id: u32) -> &[f64] {
        let start = id as usize * self.dims;
        &self.word_vectors[start..start + self.dims]
    }

    fn word_mut(&mut self, id: u32) -> &mut [f64] {
        let start = id as usize * self.dims;
        &mut self.word_vectors[start..start + self.dims]
    }

    fn context(&self, id: u32) -> &[f64] {
        let start = id as usize * self.dims;
        &self.context_vectors[start..start + self.dims]
    }

    fn context_mut(&mut self, id: u32) -> &mut [f64] {
        let start = id as usize * self.dims;
        &mut self.context_vectors[start..start + self.dims]
    }
}

pub(crate) fn read_f64s<R: Read>(reader: &mut R, n: usize) -> Result<Vec<f64>> {
    let mut values = Vec::with_capacity(n.min(1 << 26));
    let mut buf = [0u8; 8];
    for _ in 0..n {
        reader.read_exact(&mut buf)?;
        values.push(f64::from_le_bytes(buf));
    }
    Ok(values)
}

pub(crate) fn write_file(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut writer = BufWriter::new(file);
    f(&mut writer)?;
    writer.flush()?;
    Ok(())
}

/// Initialize a store word2vec-style: word entries uniform in
/// `[-0.5/d, 0.5/d]`, context vectors zero.
pub fn init_store(vocab: &Vocab, dims: usize, seed: u64) -> Result<EmbeddingStore> {
    if dims == 0 {
        return Err(Error::InvalidArgument("dimension must be at least 1".into()));
    }
    let mut rng = rng_from_seed(seed);
    let half = 0.5 / dims as f64;
    let values = (0..vocab.len() * dims)
        .map(|_| rng.random_range(-half..half))
        .collect();
    EmbeddingStore::from_rows(vocab.words().to_vec(), dims, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_store() -> EmbeddingStore {
        EmbeddingStore::from_rows(
            vec!["a".into(), "b".into(), "c".into()],
            2,
            vec![1.0, 0.0, 0.25, -3.5, 1e-17, 123456.789],
        )
        .unwrap()
    }

    #[test]
    fn cosine_examples() {
        assert_eq!(cosine(&[1.0, 0.0], &[1.0, 0.0]).unwrap(), 1.0);
        assert_eq!(cosine(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        let c = cosine(&[1.0, 1.0], &[2.0, 0.0]).unwrap();
        assert!((c - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        assert!(matches!(cosine(&[0.0, 0.0], &[1.0, 0.0]), Err(Error::ZeroNorm)));
        assert!(cosine(&[1.0], &[1.0, 0.0]).is_err());
    }

    #[test]
    fn norm_examples() {
        assert_eq!(norm(&[0.0, 0.0]), 0.0);
        assert_eq!(norm(&[3.0, 4.0]), 5.0);
    }

    #[test]
    fn init_is_deterministic_and_bounded() {
        let vocab = Vocab::from_reader("a b c d".as_bytes(), 1).unwrap();
        let s1 = init_store(&vocab, 100, 7).unwrap();
        let s2 = init_store(&vocab, 100, 7).unwrap();
        assert_eq!(s1, s2);
        assert!(s1.word_table().iter().all(|x| x.abs() <= 0.005));
        assert!(s1.context_table().iter().all(|&x| x == 0.0));
        assert_ne!(s1, init_store(&vocab, 100, 8).unwrap());
    }

    #[test]
    fn binary_round_trip_is_exact() {
        let store = small_store();
        let mut buf = Vec::new();
        store.write_binary(&mut buf).unwrap();
        let back = EmbeddingStore::read_binary(buf.as_slice()).unwrap();
        assert_eq!(back.word_table(), store.word_table());
        assert_eq!(back.words(), store.words());
    }

    #[test]
    fn text_round_trip() {
        let store = small_store();
        let mut buf = Vec::new();
        store.write_text(&mut buf).unwrap();
        assert!(String::from_utf8_lossy(&buf).starts_with("3 2\n"));
        let back = EmbeddingStore::read_text(buf.as_slice(), Path::new("x.txt")).unwrap();
        for (a, b) in back.word_table().iter().zip(store.word_table()) {
            assert!((a - b).abs() <= 1e-6);
        }
    }

    #[test]
    fn text_count_mismatch_is_an_error() {
        let text = "3 2\na 1 0\nb 0 1\n";
        assert!(matches!(
            EmbeddingStore::read_text(text.as_bytes(), Path::new("x.txt")),
            Err(Error::Format { line: 1, .. })
        ));
    }

    #[test]
    fn text_dimension_mismatch_is_an_error() {
        let text = "2 2\na 1 0\nb 0 1 5\n";
        assert!(matches!(
            EmbeddingStore::read_text(text.as_bytes(), Path::new("x.txt")),
            Err(Error::Format { line: 3, .. })
        ));
        let text = "1 2\na 1 x\n";
        assert!(EmbeddingStore::read_text(text.as_bytes(), Path::new("x.txt")).is_err());
    }

    #[test]
    fn load_detects_format() {
        let dir = tempfile::tempdir().unwrap();
        let store = small_store();
        let bin = dir.path().join("e.bin");
        let txt = dir.path().join("e.txt");
        store.save_binary(&bin).unwrap();
        store.save_text(&txt).unwrap();
        assert_eq!(EmbeddingStore::load(&bin).unwrap().word_table(), store.word_table());
        assert_eq!(EmbeddingStore::load(&txt).unwrap().words(), store.words());
    }

    #[test]
    fn vector_lookup() {
        let store = small_store();
        assert_eq!(store.vector("b").unwrap(), &[0.25, -3.5]);
        assert!(matches!(store.vector("zzz"), Err(Error::UnknownToken(t)) if t == "zzz"));
    }
}
