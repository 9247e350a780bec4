//! Word-analogy pipeline: embedding tables, relation files, the three
//! analogy functions, cosine-loss training and ranked retrieval.

mod embeddings;
mod eval;
mod model;
mod relations;
mod synthetic;

pub use embeddings::{load_embeddings, EmbeddingTable};
pub use eval::{evaluate_analogy, AnalogyReport, CategoryScore, ExampleOutcome};
pub use model::{
    analogy_fn, train_analogy, train_analogy_model, AnalogyConfig, AnalogyKind, AnalogyMlp, AnalogyModel,
    AnalogyTrainReport,
};
pub use relations::{
    load_relations, pair_combinations, parse_relations, split_relations, AnalogyExample, AnalogySplits,
    RelationCategory, RelationPair, ResolvedExample, SplitConfig,
};
pub use synthetic::{synthetic_analogy, synthetic_token, SyntheticAnalogy, SyntheticAnalogyConfig};
