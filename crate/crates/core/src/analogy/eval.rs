use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analogy::embeddings::{argmax_excluding, EmbeddingTable};
use crate::analogy::model::{AnalogyKind, AnalogyModel};
use crate::analogy::relations::AnalogyExample;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExampleOutcome {
    pub category: String,
    pub a: String,
    pub b: String,
    pub c: String,
    /// `None` when the model output is the zero vector.
    pub predicted: Option<String>,
    pub correct: bool,
    /// 1-based rank of the best-ranked acceptable answer among the allowed
    /// candidates; `None` if every answer was excluded.
    pub rank: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CategoryScore {
    pub correct: usize,
    pub total: usize,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalogyReport {
    pub kind: AnalogyKind,
    pub exclude_abc: bool,
    pub accuracy: f64,
    pub correct: usize,
    pub total: usize,
    pub per_category: BTreeMap<String, CategoryScore>,
    pub examples: Vec<ExampleOutcome>,
}

/// Ranked retrieval: the prediction is the vocabulary token with the
/// highest cosine to the model output (lowest index on ties), searched over
/// the whole vocabulary or over it minus `a`, `b`, `c`.
pub fn evaluate_analogy(
    model: &AnalogyModel,
    table: &EmbeddingTable,
    test: &[AnalogyExample],
    exclude_abc: bool,
) -> Result<AnalogyReport> {
    if test.is_empty() {
        return Err(Error::InvalidArgument("analogy test set is empty".into()));
    }
    let resolved = test
        .iter()
        .map(|e| e.resolve(table))
        .collect::<Result<Vec<_>>>()?;

    let outcomes: Vec<ExampleOutcome> = test
        .par_iter()
        .zip(resolved.par_iter())
        .map(|(ex, r)| -> Result<ExampleOutcome> {
            let out = model.apply(table.row(r.a), table.row(r.b), table.row(r.c))?;
            let exclude: Vec<usize> = if exclude_abc { vec![r.a, r.b, r.c] } else { Vec::new() };
            let (predicted, rank) = match table.cosines(&out) {
                Ok(cos) => {
                    let best = argmax_excluding(&cos, &exclude);
                    let rank = r
                        .d
                        .iter()
                        .filter(|d| !exclude.contains(d))
                        .map(|&d| {
                            1 + (0..cos.len())
                                .filter(|t| !exclude.contains(t))
                                .filter(|&t| cos[t] > cos[d] || (cos[t] == cos[d] && t < d))
                                .count()
                        })
                        .min();
                    (best, rank)
                }
                Err(Error::ZeroVector) => (None, None),
                Err(e) => return Err(e),
            };
            Ok(ExampleOutcome {
                category: ex.category.clone(),
                a: ex.a.clone(),
                b: ex.b.clone(),
                c: ex.c.clone(),
                predicted: predicted.map(|i| table.token(i).to_string()),
                correct: predicted.is_some_and(|p| r.d.contains(&p)),
                rank,
            })
        })
        .collect::<Result<_>>()?;

    let mut per_category: BTreeMap<String, CategoryScore> = BTreeMap::new();
    for o in &outcomes {
        let s = per_category.entry(o.category.clone()).or_insert(CategoryScore {
            correct: 0,
            total: 0,
            accuracy: 0.0,
        });
        s.total += 1;
        s.correct += o.correct as usize;
    }
    for s in per_category.values_mut() {
        s.accuracy = s.correct as f64 / s.total as f64;
    }
    let correct = outcomes.iter().filter(|o| o.correct).count();
    Ok(AnalogyReport {
        kind: model.kind(),
        exclude_abc,
        accuracy: correct as f64 / outcomes.len() as f64,
        correct,
        total: outcomes.len(),
        per_category,
        examples: outcomes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numcore::Vector;

    fn table() -> EmbeddingTable {
        let rows = [[1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [2.0, 1.0], [-1.0, 0.5]];
        EmbeddingTable::from_rows(
            ["do", "did", "split", "go", "went"].iter().map(|s| s.to_string()).collect(),
            rows.iter().map(|r| Vector::new(r.to_vec()).unwrap()).collect(),
            false,
        )
        .unwrap()
    }

    #[test]
    fn exact_hit_is_correct() {
        // b - a + c = (0,1) - (1,0) + (1,1) = (0,2), nearest "did"
        let ex = AnalogyExample::new("past", "do", "did", "split", &["did"]);
        let r = evaluate_analogy(&AnalogyModel::Wv { dim: 2 }, &table(), &[ex], false).unwrap();
        assert_eq!(r.correct, 1);
        assert_eq!(r.examples[0].rank, Some(1));
    }

    #[test]
    fn exclusion_makes_identity_answers_unreachable() {
        // do:do = split:split; WV returns split exactly
        let ex = AnalogyExample::new("past", "do", "do", "split", &["split"]);
        let m = AnalogyModel::Wv { dim: 2 };
        let full = evaluate_analogy(&m, &table(), std::slice::from_ref(&ex), false).unwrap();
        assert_eq!(full.accuracy, 1.0);
        let excl = evaluate_analogy(&m, &table(), &[ex], true).unwrap();
        assert_eq!(excl.accuracy, 0.0);
        assert_eq!(excl.examples[0].rank, None);
        assert!(excl.exclude_abc);
    }

    #[test]
    fn per_category_counts() {
        let t = table();
        let test = [
            AnalogyExample::new("x", "do", "do", "split", &["split"]),
            AnalogyExample::new("x", "do", "do", "go", &["went"]),
            AnalogyExample::new("y", "do", "do", "go", &["go"]),
        ];
        let r = evaluate_analogy(&AnalogyModel::Wv { dim: 2 }, &t, &test, false).unwrap();
        assert_eq!(r.per_category["x"].correct, 1);
        assert_eq!(r.per_category["x"].total, 2);
        assert_eq!(r.per_category["y"].accuracy, 1.0);
        assert!((r.accuracy - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn unknown_token_is_an_error() {
        let ex = AnalogyExample::new("x", "do", "zzz", "go", &["went"]);
        assert!(matches!(
            evaluate_analogy(&AnalogyModel::Wv { dim: 2 }, &table(), &[ex], false),
            Err(Error::UnknownToken(_))
        ));
    }
}
