//! Static word-vector lookup and the span similarity kernel.
//!
//! Vectors are read from the word2vec text format: an optional `count dim`
//! header followed by one `word c1 c2 ... cd` row per line. Components are
//! stored as `f32`; all arithmetic on them is carried out in `f64`.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use crate::error::{EmbeddingFormatError, Error, Result};

/// Immutable word → vector table of a fixed dimension.
#[derive(Debug, Clone)]
pub struct EmbeddingStore {
    dim: usize,
    index: HashMap<String, usize>,
    words: Vec<String>,
    data: Vec<f32>,
}

impl EmbeddingStore {
    /// Builds a store from in-memory rows. The first occurrence of a word wins.
    pub fn from_entries<W, V>(dim: usize, entries: impl IntoIterator<Item = (W, V)>) -> Result<Self>
    where
        W: Into<String>,
        V: AsRef<[f32]>,
    {
        if dim == 0 {
            return Err(Error::Config("embedding dimension must be positive".into()));
        }
        let mut store = EmbeddingStore::empty(dim);
        for (row, (word, vector)) in entries.into_iter().enumerate() {
            let vector = vector.as_ref();
            let line = row + 1;
            if vector.len() != dim {
                return Err(Error::EmbeddingFormat {
                    line,
                    kind: EmbeddingFormatError::DimensionMismatch {
                        expected: dim,
                        found: vector.len(),
                    },
                });
            }
            if let Some(bad) = vector.iter().find(|v| !v.is_finite()) {
                return Err(Error::EmbeddingFormat {
                    line,
                    kind: EmbeddingFormatError::NonFinite(bad.to_string()),
                });
            }
            store.insert(word.into(), vector);
        }
        if store.is_empty() {
            return Err(Error::EmbeddingFormat {
                line: 0,
                kind: EmbeddingFormatError::Empty,
            });
        }
        Ok(store)
    }

    fn empty(dim: usize) -> Self {
        EmbeddingStore {
            dim,
            index: HashMap::new(),
            words: Vec::new(),
            data: Vec::new(),
        }
    }

    fn insert(&mut self, word: String, vector: &[f32]) {
        if self.index.contains_key(&word) {
            return;
        }
        self.index.insert(word.clone(), self.words.len());
        self.words.push(word);
        self.data.extend_from_slice(vector);
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read(BufReader::new(file)).map_err(|e| match e {
            Error::Io { source, .. } => Error::io(path, source),
            other => other,
        })
    }

    pub fn parse_str(text: &str) -> Result<Self> {
        Self::read(text.as_bytes())
    }

    /// Parses the text vector format. The header is optional; without it
    /// the dimension is taken from the first row.
    pub fn read<R: BufRead>(reader: R) -> Result<Self> {
        let mut store: Option<EmbeddingStore> = None;
        let mut header_seen = false;
        let mut row = Vec::new();
        for (idx, line) in reader.lines().enumerate() {
            let line_no = idx + 1;
            let line = line.map_err(|e| Error::io("<embeddings>", e))?;
            let mut fields = line.split_whitespace();
            let Some(word) = fields.next() else {
                continue;
            };
            let rest: Vec<&str> = fields.collect();

            if store.is_none() && !header_seen {
                header_seen = true;
                if rest.len() == 1 {
                    if let (Ok(_count), Ok(dim)) = (word.parse::<usize>(), rest[0].parse::<usize>()) {
                        if dim == 0 {
                            return Err(format_err(line_no, EmbeddingFormatError::BadHeader));
                        }
                        store = Some(EmbeddingStore::empty(dim));
                        continue;
                    }
                }
            }

            let expected = store.as_ref().map_or(rest.len(), |s| s.dim);
            if rest.len() != expected || expected == 0 {
                return Err(format_err(
                    line_no,
                    EmbeddingFormatError::DimensionMismatch {
                        expected: expected.max(1),
                        found: rest.len(),
                    },
                ));
            }
            row.clear();
            for tok in &rest {
                let value: f32 = tok
                    .parse()
                    .map_err(|_| format_err(line_no, EmbeddingFormatError::NonNumeric((*tok).to_owned())))?;
                if !value.is_finite() {
                    return Err(format_err(line_no, EmbeddingFormatError::NonFinite((*tok).to_owned())));
                }
                row.push(value);
            }
            store
                .get_or_insert_with(|| EmbeddingStore::empty(expected))
                .insert(word.to_owned(), &row);
        }
        match store {
            Some(s) if !s.is_empty() => Ok(s),
            _ => Err(format_err(0, EmbeddingFormatError::Empty)),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Words in first-seen file order.
    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.words.iter().map(String::as_str)
    }

    pub fn get(&self, word: &str) -> Option<&[f32]> {
        let row = *self.index.get(word)?;
        Some(&self.data[row * self.dim..(row + 1) * self.dim])
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }

    /// Looks every word up once, for repeated span averaging over the same sequence.
    pub fn resolve<'a, S: AsRef<str>>(&'a self, words: &[S]) -> Vec<Option<&'a [f32]>> {
        words.iter().map(|w| self.get(w.as_ref())).collect()
    }
}

fn format_err(line: usize, kind: EmbeddingFormatError) -> Error {
    Error::EmbeddingFormat { line, kind }
}

/// Mean of the in-vocabulary vectors of a span and how many were found.
#[derive(Debug, Clone, PartialEq)]
pub struct SpanVector {
    pub vector: Vec<f64>,
    pub support: usize,
}

impl SpanVector {
    pub fn zero(dim: usize) -> Self {
        SpanVector {
            vector: vec![0.0; dim],
            support: 0,
        }
    }

    pub fn norm(&self) -> f64 {
        self.vector.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

/// Averages the vectors of the words found in `store`; OOV words are skipped.
pub fn average_embedding<S: AsRef<str>>(store: &EmbeddingStore, words: &[S]) -> SpanVector {
    average_resolved(&store.resolve(words), store.dim())
}

/// [`average_embedding`] over rows already looked up with [`EmbeddingStore::resolve`].
pub fn average_resolved(rows: &[Option<&[f32]>], dim: usize) -> SpanVector {
    let mut span = SpanVector::zero(dim);
    for row in rows.iter().flatten() {
        for (acc, &x) in span.vector.iter_mut().zip(row.iter()) {
            *acc += f64::from(x);
        }
        span.support += 1;
    }
    if span.support > 0 {
        let n = span.support as f64;
        span.vector.iter_mut().for_each(|x| *x /= n);
    }
    span
}

/// Cosine of the angle between two span vectors.
///
/// Returns `None` when either side has zero norm (including empty or
/// all-OOV spans); callers score that as similarity 0.
pub fn cosine_similarity(u: &SpanVector, v: &SpanVector) -> Option<f64> {
    if u.support == 0 || v.support == 0 {
        return None;
    }
    cosine(&u.vector, &v.vector)
}

pub fn cosine(u: &[f64], v: &[f64]) -> Option<f64> {
    debug_assert_eq!(u.len(), v.len());
    let mut dot = 0.0;
    let mut uu = 0.0;
    let mut vv = 0.0;
    for (a, b) in u.iter().zip(v) {
        dot += a * b;
        uu += a * a;
        vv += b * b;
    }
    if uu == 0.0 || vv == 0.0 {
        return None;
    }
    // Rounding can push parallel vectors a few ulps past 1.
    Some((dot / (uu.sqrt() * vv.sqrt())).clamp(-1.0, 1.0))
}
