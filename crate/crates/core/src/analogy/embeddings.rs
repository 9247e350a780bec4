use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::numcore::Vector;

/// Word vectors with an injective token index.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    vocab: Vec<String>,
    index: HashMap<String, usize>,
    rows: Vec<Vector>,
    norms: Vec<f64>,
    normalized: bool,
}

impl EmbeddingTable {
    pub fn from_rows(vocab: Vec<String>, rows: Vec<Vector>, normalize: bool) -> Result<Self> {
        if vocab.len() != rows.len() || vocab.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "{} tokens for {} rows",
                vocab.len(),
                rows.len()
            )));
        }
        let dim = rows[0].dim();
        if let Some(r) = rows.iter().find(|r| r.dim() != dim) {
            return Err(Error::ShapeMismatch {
                expected: dim,
                got: r.dim(),
            });
        }
        let mut index = HashMap::with_capacity(vocab.len());
        for (i, tok) in vocab.iter().enumerate() {
            if index.insert(tok.clone(), i).is_some() {
                return Err(Error::InvalidArgument(format!("duplicate token {tok:?}")));
            }
        }
        let mut table = Self {
            vocab,
            index,
            norms: rows.iter().map(Vector::norm).collect(),
            rows,
            normalized: false,
        };
        if normalize {
            table.normalize();
        }
        Ok(table)
    }

    /// Scales every nonzero row to unit L2 norm.
    pub fn normalize(&mut self) {
        for (row, norm) in self.rows.iter_mut().zip(&mut self.norms) {
            if *norm > 0.0 {
                *row = row.scale(1.0 / *norm);
                *norm = row.norm();
            }
        }
        self.normalized = true;
    }

    pub fn len(&self) -> usize {
        self.vocab.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vocab.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.rows[0].dim()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn vocab(&self) -> &[String] {
        &self.vocab
    }

    pub fn token(&self, i: usize) -> &str {
        &self.vocab[i]
    }

    pub fn index_of(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn lookup(&self, token: &str) -> Result<usize> {
        self.index_of(token)
            .ok_or_else(|| Error::UnknownToken(token.to_string()))
    }

    pub fn row(&self, i: usize) -> &Vector {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[Vector] {
        &self.rows
    }

    /// Cosine of `query` against every row; zero rows score -inf.
    pub fn cosines(&self, query: &Vector) -> Result<Vec<f64>> {
        if query.dim() != self.dim() {
            return Err(Error::ShapeMismatch {
                expected: self.dim(),
                got: query.dim(),
            });
        }
        let qn = query.norm();
        if qn == 0.0 {
            return Err(Error::ZeroVector);
        }
        Ok(self
            .rows
            .iter()
            .zip(&self.norms)
            .map(|(row, &n)| {
                if n == 0.0 {
                    f64::NEG_INFINITY
                } else {
                    let dot: f64 = row.iter().zip(query.iter()).map(|(a, b)| a * b).sum();
                    dot / (n * qn)
                }
            })
            .collect())
    }

    /// Most cosine-similar token outside `exclude`; ties go to the lowest index.
    pub fn nearest(&self, query: &Vector, exclude: &[usize]) -> Result<Option<usize>> {
        let cos = self.cosines(query)?;
        Ok(argmax_excluding(&cos, exclude))
    }

    /// Writes the table in word2vec text format.
    pub fn write_word2vec(&self, path: &Path) -> Result<()> {
        let mut out = BufWriter::new(File::create(path)?);
        writeln!(out, "{} {}", self.len(), self.dim())?;
        for (tok, row) in self.vocab.iter().zip(&self.rows) {
            write!(out, "{tok}")?;
            for v in row {
                // shortest round-trip representation
                write!(out, " {v:?}")?;
            }
            writeln!(out)?;
        }
        out.flush()?;
        Ok(())
    }
}

pub(crate) fn argmax_excluding(scores: &[f64], exclude: &[usize]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &s) in scores.iter().enumerate() {
        if exclude.contains(&i) {
            continue;
        }
        if best.is_none_or(|(_, b)| s > b) {
            best = Some((i, s));
        }
    }
    best.map(|(i, _)| i)
}

/// Reads a word2vec text file: a `count dim` header, then one
/// `token v1 .. v_dim` line per word.
pub fn load_embeddings(path: &Path, normalize: bool) -> Result<EmbeddingTable> {
    let file = File::open(path)?;
    let parse_err = |line: usize, msg: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        msg,
    };
    let mut lines = BufReader::new(file).lines();
    let header = lines
        .next()
        .ok_or_else(|| parse_err(1, "missing header".into()))??;
    let fields: Vec<&str> = header.split_whitespace().collect();
    let (count, dim) = match fields.as_slice() {
        [c, d] => match (c.parse::<usize>(), d.parse::<usize>()) {
            (Ok(c), Ok(d)) if d > 0 => (c, d),
            _ => return Err(parse_err(1, format!("malformed header {header:?}"))),
        },
        _ => return Err(parse_err(1, format!("malformed header {header:?}, expected \"count dim\""))),
    };

    let mut vocab = Vec::with_capacity(count);
    let mut rows = Vec::with_capacity(count);
    let mut seen: HashMap<String, usize> = HashMap::with_capacity(count);
    for (i, line) in lines.enumerate() {
        let lineno = i + 2;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let token = parts.next().unwrap().to_string();
        let values: Vec<f64> = parts
            .map(|p| p.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| parse_err(lineno, format!("bad number: {e}")))?;
        if values.len() != dim {
            return Err(parse_err(
                lineno,
                format!("expected {dim} values for {token:?}, found {}", values.len()),
            ));
        }
        if let Some(first) = seen.insert(token.clone(), lineno) {
            return Err(parse_err(
                lineno,
                format!("duplicate token {token:?} (first seen on line {first})"),
            ));
        }
        let row = Vector::new(values).map_err(|e| parse_err(lineno, e.to_string()))?;
        vocab.push(token);
        rows.push(row);
    }
    if vocab.len() != count {
        return Err(parse_err(
            1,
            format!("header declares {count} words, file has {}", vocab.len()),
        ));
    }
    EmbeddingTable::from_rows(vocab, rows, normalize)
}
