use std::fs;
use std::path::Path;

use rand::seq::index::sample;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::analogy::embeddings::EmbeddingTable;
use crate::error::{Error, Result};
use crate::harness::{stream_rng, DATA_STREAM};

/// One analogy question `a : b = c : ?`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalogyExample {
    pub category: String,
    pub a: String,
    pub b: String,
    pub c: String,
    /// Acceptable answers; the first one is the training target.
    pub d_candidates: Vec<String>,
}

impl AnalogyExample {
    pub fn new(category: &str, a: &str, b: &str, c: &str, d: &[&str]) -> Self {
        Self {
            category: category.to_string(),
            a: a.to_string(),
            b: b.to_string(),
            c: c.to_string(),
            d_candidates: d.iter().map(|s| s.to_string()).collect(),
        }
    }

    /// Vocabulary indices of `a`, `b`, `c` and of every candidate.
    pub fn resolve(&self, table: &EmbeddingTable) -> Result<ResolvedExample> {
        if self.d_candidates.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "{}:{} = {}:? has no answer candidates",
                self.a, self.b, self.c
            )));
        }
        Ok(ResolvedExample {
            a: table.lookup(&self.a)?,
            b: table.lookup(&self.b)?,
            c: table.lookup(&self.c)?,
            d: self
                .d_candidates
                .iter()
                .map(|t| table.lookup(t))
                .collect::<Result<_>>()?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResolvedExample {
    pub a: usize,
    pub b: usize,
    pub c: usize,
    pub d: Vec<usize>,
}

/// A word and its accepted related words, e.g. `mammal` / `canine`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationPair {
    pub first: String,
    pub second: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationCategory {
    pub name: String,
    pub pairs: Vec<RelationPair>,
}

impl RelationCategory {
    /// Drops pairs whose first word is unknown and alternatives that are
    /// unknown; pairs left without alternatives are dropped too.
    pub fn restrict_to(&self, table: &EmbeddingTable) -> Self {
        let pairs = self
            .pairs
            .iter()
            .filter(|p| table.index_of(&p.first).is_some())
            .filter_map(|p| {
                let second: Vec<String> = p
                    .second
                    .iter()
                    .filter(|w| table.index_of(w).is_some())
                    .cloned()
                    .collect();
                (!second.is_empty()).then(|| RelationPair {
                    first: p.first.clone(),
                    second,
                })
            })
            .collect();
        Self {
            name: self.name.clone(),
            pairs,
        }
    }
}

/// Parses TSV lines `word1<TAB>word2[/alt...]`. Blank lines and lines
/// starting with `#` are skipped.
pub fn parse_relations(name: &str, text: &str, path: &Path) -> Result<RelationCategory> {
    let mut pairs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |msg: String| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            msg,
        };
        let (first, rest) = line
            .split_once('\t')
            .ok_or_else(|| err(format!("expected word1<TAB>word2, got {line:?}")))?;
        let first = first.trim();
        let second: Vec<String> = rest
            .split('/')
            .map(str::trim)
            .filter(|w| !w.is_empty())
            .map(String::from)
            .collect();
        if first.is_empty() || second.is_empty() || rest.contains('\t') {
            return Err(err(format!("malformed relation line {line:?}")));
        }
        pairs.push(RelationPair {
            first: first.to_string(),
            second,
        });
    }
    Ok(RelationCategory {
        name: name.to_string(),
        pairs,
    })
}

/// Loads one category from a file, or one category per file (sorted by
/// name) from a directory. Category names are file stems.
pub fn load_relations(path: &Path) -> Result<Vec<RelationCategory>> {
    let load_file = |p: &Path| -> Result<RelationCategory> {
        let name = p
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        parse_relations(&name, &fs::read_to_string(p)?, p)
    };
    if path.is_dir() {
        let mut files: Vec<_> = fs::read_dir(path)?
            .map(|e| e.map(|e| e.path()))
            .collect::<std::result::Result<_, _>>()?;
        files.retain(|p| p.is_file());
        files.sort();
        files.iter().map(|p| load_file(p)).collect()
    } else {
        Ok(vec![load_file(path)?])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitConfig {
    pub train: f64,
    pub validation: f64,
    /// Cap on examples drawn per category for the training split.
    pub max_train_per_category: Option<usize>,
    /// Cap on examples drawn per category for validation and test.
    pub max_eval_per_category: Option<usize>,
}

impl Default for SplitConfig {
    fn default() -> Self {
        Self {
            train: 0.6,
            validation: 0.2,
            max_train_per_category: None,
            max_eval_per_category: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AnalogySplits {
    pub train: Vec<AnalogyExample>,
    pub validation: Vec<AnalogyExample>,
    pub test: Vec<AnalogyExample>,
}

/// Questions from every ordered combination of two distinct pairs:
/// `(p, q)` gives `p.first : p.second[0] = q.first : q.second`.
pub fn pair_combinations(category: &str, pairs: &[RelationPair]) -> Vec<AnalogyExample> {
    let mut out = Vec::new();
    for (i, p) in pairs.iter().enumerate() {
        for (j, q) in pairs.iter().enumerate() {
            if i != j {
                out.push(AnalogyExample {
                    category: category.to_string(),
                    a: p.first.clone(),
                    b: p.second[0].clone(),
                    c: q.first.clone(),
                    d_candidates: q.second.clone(),
                });
            }
        }
    }
    out
}

/// Seeded per-category split of the pairs, followed by the pair
/// combinations inside each part. No pair is shared between parts.
pub fn split_relations(categories: &[RelationCategory], cfg: &SplitConfig, seed: u64) -> Result<AnalogySplits> {
    if !(cfg.train >= 0.0 && cfg.validation >= 0.0 && cfg.train + cfg.validation <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "split fractions {} / {} must be nonnegative with sum <= 1",
            cfg.train, cfg.validation
        )));
    }
    let mut rng = stream_rng(seed, DATA_STREAM);
    let mut splits = AnalogySplits::default();
    for cat in categories {
        let mut pairs = cat.pairs.clone();
        pairs.shuffle(&mut rng);
        let n = pairs.len();
        let n_train = (cfg.train * n as f64).floor() as usize;
        let n_val = (cfg.validation * n as f64).floor() as usize;
        let parts = [
            (&pairs[..n_train], cfg.max_train_per_category, &mut splits.train),
            (&pairs[n_train..n_train + n_val], cfg.max_eval_per_category, &mut splits.validation),
            (&pairs[n_train + n_val..], cfg.max_eval_per_category, &mut splits.test),
        ];
        for (part, cap, dest) in parts {
            let mut all = pair_combinations(&cat.name, part);
            if let Some(cap) = cap.filter(|&c| c < all.len()) {
                let mut keep = sample(&mut rng, all.len(), cap).into_vec();
                keep.sort_unstable();
                all = keep.into_iter().map(|i| all[i].clone()).collect();
            }
            dest.extend(all);
        }
    }
    Ok(splits)
}
