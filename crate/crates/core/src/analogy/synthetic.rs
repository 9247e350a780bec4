use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::analogy::embeddings::EmbeddingTable;
use crate::analogy::relations::{RelationCategory, RelationPair};
use crate::error::{Error, Result};
use crate::harness::{stream_rng, ANALOGY_STREAM};
use crate::invertible::CouplingFlow;
use crate::numcore::Vector;

/// Vocabulary with a hidden group structure: word `w{i}_{k}` has latent
/// code `u_i + r_k` and embedding `truth^-1(u_i + r_k)`, so every true
/// analogy is `truth^-1(truth(b) - truth(a) + truth(c))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntheticAnalogyConfig {
    pub bases: usize,
    pub relations: usize,
    pub dim: usize,
    pub flow_layers: usize,
    pub flow_hidden: usize,
    /// Weight scale of the ground-truth coupling subnets.
    pub flow_scale: f64,
    pub base_std: f64,
    pub relation_std: f64,
}

impl Default for SyntheticAnalogyConfig {
    fn default() -> Self {
        Self {
            bases: 200,
            relations: 10,
            dim: 8,
            flow_layers: 2,
            flow_hidden: 16,
            flow_scale: 0.9,
            base_std: 1.0,
            relation_std: 1.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticAnalogy {
    pub table: EmbeddingTable,
    pub truth: CouplingFlow,
    /// Category `k` (for `k >= 1`) pairs `w{i}_0` with `w{i}_{k}`.
    pub categories: Vec<RelationCategory>,
}

pub fn synthetic_token(base: usize, relation: usize) -> String {
    format!("w{base}_{relation}")
}

/// Builds the vocabulary of `bases * relations` words, unnormalized.
pub fn synthetic_analogy(cfg: &SyntheticAnalogyConfig, seed: u64) -> Result<SyntheticAnalogy> {
    if cfg.bases < 2 || cfg.relations < 2 {
        return Err(Error::InvalidArgument("need at least two bases and two relations".into()));
    }
    let mut rng = stream_rng(seed, ANALOGY_STREAM);
    let truth = CouplingFlow::random(cfg.dim, cfg.flow_layers, cfg.flow_hidden, cfg.flow_scale, &mut rng)?;
    let draw = |std: f64, rng: &mut rand_chacha::ChaCha8Rng| -> Result<Vec<f64>> {
        let normal = Normal::new(0.0, std).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        Ok((0..cfg.dim).map(|_| normal.sample(rng)).collect())
    };
    let bases = (0..cfg.bases).map(|_| draw(cfg.base_std, &mut rng)).collect::<Result<Vec<_>>>()?;
    let rels = (0..cfg.relations)
        .map(|_| draw(cfg.relation_std, &mut rng))
        .collect::<Result<Vec<_>>>()?;

    let mut vocab = Vec::with_capacity(cfg.bases * cfg.relations);
    let mut rows = Vec::with_capacity(cfg.bases * cfg.relations);
    for (i, u) in bases.iter().enumerate() {
        for (k, r) in rels.iter().enumerate() {
            let z = Vector::new(u.iter().zip(r).map(|(a, b)| a + b).collect())?;
            vocab.push(synthetic_token(i, k));
            rows.push(truth.inverse(&z)?);
        }
    }
    let categories = (1..cfg.relations)
        .map(|k| RelationCategory {
            name: format!("r0_to_r{k}"),
            pairs: (0..cfg.bases)
                .map(|i| RelationPair {
                    first: synthetic_token(i, 0),
                    second: vec![synthetic_token(i, k)],
                })
                .collect(),
        })
        .collect();
    Ok(SyntheticAnalogy {
        table: EmbeddingTable::from_rows(vocab, rows, false)?,
        truth,
        categories,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn truth_solves_every_analogy() {
        let cfg = SyntheticAnalogyConfig {
            bases: 5,
            relations: 3,
            ..Default::default()
        };
        let s = synthetic_analogy(&cfg, 2).unwrap();
        assert_eq!(s.table.len(), 15);
        assert_eq!(s.categories.len(), 2);
        let t = &s.table;
        let row = |tok: &str| t.row(t.index_of(tok).unwrap());
        let phi = |v: &Vector| s.truth.forward(v).unwrap();
        let (a, b, c, d) = (row("w1_0"), row("w1_2"), row("w3_0"), row("w3_2"));
        let z = phi(b).sub(&phi(a)).unwrap().add(&phi(c)).unwrap();
        let pred = s.truth.inverse(&z).unwrap();
        assert!(pred.max_abs_diff(d).unwrap() < 1e-8);
    }
}
