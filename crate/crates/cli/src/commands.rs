use std::path::Path;

use abelian_core::abelian::{size_gen_bound, SizeGenBound};
use abelian_core::algebra::{classify, Classification, SymPoly2};
use abelian_core::analogy::{
    evaluate_analogy, load_embeddings, load_relations, split_relations, synthetic_analogy, train_analogy,
    AnalogyConfig, AnalogyExample, AnalogyKind, AnalogyModel, AnalogySplits, EmbeddingTable, SplitConfig,
    SyntheticAnalogyConfig,
};
use abelian_core::harness::{
    load_checkpoint, random_search, run_experiment, save_checkpoint, write_results_csv, write_results_json,
    Checkpoint, ModelHyper, ModelKind, SearchSpace, SplitSizes, SyntheticSplits, SyntheticTask, TrainConfig,
    DEFAULT_TRIALS,
};
use serde::Serialize;

use crate::config::ConfigEcho;
use crate::{AnalogyArgs, BoundArgs, ClassifyArgs, CliError, Globals, SyntheticArgs};

fn echo<T: Serialize>(g: &Globals, subcommand: &'static str, resolved: T) -> Result<(), CliError> {
    let echo = ConfigEcho {
        subcommand,
        seed: g.seed,
        threads: g.threads,
        config_file: g.config_file.clone(),
        resolved,
    };
    write_results_json(&g.out.join("config.json"), &echo)?;
    Ok(())
}

fn usage<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Usage(e.to_string())
}

fn parse_models(names: &[String]) -> Result<Vec<ModelKind>, CliError> {
    if names.is_empty() {
        return Err(CliError::Usage("no model given".into()));
    }
    names.iter().map(|m| m.trim().parse().map_err(usage)).collect()
}

fn split_sizes(g: &Globals, a: &SyntheticArgs) -> SplitSizes {
    let f = &g.file.synthetic;
    let d = SplitSizes::default();
    SplitSizes {
        train: a.train.or(f.train).unwrap_or(d.train),
        validation: a.validation.or(f.validation).unwrap_or(d.validation),
        small_test: a.small_test.or(f.small_test).unwrap_or(d.small_test),
        large_test: a.large_test.or(f.large_test).unwrap_or(d.large_test),
    }
}

fn train_config(g: &Globals, a: &SyntheticArgs, kind: ModelKind) -> Result<TrainConfig, CliError> {
    let f = &g.file.synthetic;
    let mut cfg = TrainConfig::new(kind, g.seed);
    cfg.epochs = a.epochs.or(f.epochs).unwrap_or(cfg.epochs);
    cfg.batch_size = a.batch_size.or(f.batch_size).unwrap_or(cfg.batch_size);
    cfg.lr = a.lr.or(f.lr).unwrap_or(cfg.lr);
    cfg.weight_decay = a.weight_decay.or(f.weight_decay).unwrap_or(cfg.weight_decay);
    cfg.model = match cfg.model {
        ModelHyper::Monotonic { groups, units } => ModelHyper::Monotonic {
            groups: a.groups.or(f.groups).unwrap_or(groups),
            units: a.units.or(f.units).unwrap_or(units),
        },
        ModelHyper::DeepSets { layers, hidden, middle } => ModelHyper::DeepSets {
            layers: a.layers.or(f.layers).unwrap_or(layers),
            hidden: a.hidden.or(f.hidden).unwrap_or(hidden),
            middle: a.middle.or(f.middle).unwrap_or(middle),
        },
    };
    cfg.validate().map_err(usage)?;
    Ok(cfg)
}

fn trials(g: &Globals, a: &SyntheticArgs) -> usize {
    a.trials.or(g.file.synthetic.trials).unwrap_or(DEFAULT_TRIALS)
}

#[derive(Serialize)]
struct SyntheticEcho {
    task: SyntheticTask,
    sizes: SplitSizes,
    search: bool,
    trials: Option<usize>,
    runs: Vec<TrainConfig>,
}

pub fn synthetic(g: &Globals, a: &SyntheticArgs) -> Result<(), CliError> {
    let task: SyntheticTask = a.task.parse().map_err(usage)?;
    let kinds = parse_models(&a.model)?;
    let sizes = split_sizes(g, a);
    let configs = kinds
        .iter()
        .map(|&k| train_config(g, a, k))
        .collect::<Result<Vec<_>, _>>()?;
    let splits = SyntheticSplits::generate(task, sizes, g.seed)?;

    let mut results = Vec::new();
    let mut runs = Vec::new();
    for (&kind, base) in kinds.iter().zip(configs) {
        let cfg = if a.search {
            let outcome = random_search(&splits, kind, &SearchSpace::default(), trials(g, a), &base)?;
            write_results_json(&g.out.join(format!("search_{task}_{kind}.json")), &outcome)?;
            outcome.best
        } else {
            base
        };
        let (model, mut result) = run_experiment(&splits, kind, &cfg)?;
        if a.no_timing {
            result.wall_clock_s = 0.0;
        }
        save_checkpoint(&Checkpoint::from(model), &g.out.join(format!("{task}_{kind}.abnn")))?;
        println!(
            "{task} {kind}: small rmse {:.6e}, large rmse {:.6e}",
            result.rmse_small, result.rmse_large
        );
        results.push(result);
        runs.push(cfg);
    }
    write_results_csv(&g.out.join("results.csv"), &results)?;
    write_results_json(&g.out.join("results.json"), &results)?;
    echo(
        g,
        "synthetic",
        SyntheticEcho {
            task,
            sizes,
            search: a.search,
            trials: a.search.then(|| trials(g, a)),
            runs,
        },
    )
}

pub fn search(g: &Globals, a: &SyntheticArgs) -> Result<(), CliError> {
    let task: SyntheticTask = a.task.parse().map_err(usage)?;
    let kinds = parse_models(&a.model)?;
    let sizes = split_sizes(g, a);
    let n = trials(g, a);
    let configs = kinds
        .iter()
        .map(|&k| train_config(g, a, k))
        .collect::<Result<Vec<_>, _>>()?;
    let splits = SyntheticSplits::generate(task, sizes, g.seed)?;
    for (&kind, base) in kinds.iter().zip(&configs) {
        let outcome = random_search(&splits, kind, &SearchSpace::default(), n, base)?;
        let best = &outcome.trials[outcome.best_index];
        println!(
            "{task} {kind}: best trial {} of {n}, validation rmse {:.6e}, {:?}",
            outcome.best_index,
            best.validation_rmse.unwrap_or(f64::NAN),
            outcome.best.model
        );
        write_results_json(&g.out.join(format!("search_{task}_{kind}.json")), &outcome)?;
    }
    echo(
        g,
        "search",
        SyntheticEcho {
            task,
            sizes,
            search: true,
            trials: Some(n),
            runs: configs,
        },
    )
}

/// Parses `c00,c01;c10,c11`.
pub fn parse_grid(text: &str) -> Result<SymPoly2, CliError> {
    let rows = text
        .split(';')
        .map(|row| {
            row.split(',')
                .map(|c| {
                    c.trim()
                        .parse::<f64>()
                        .map_err(|e| CliError::Usage(format!("bad coefficient {c:?}: {e}")))
                })
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    SymPoly2::new(rows).map_err(usage)
}

#[derive(Serialize)]
struct ClassifyReport {
    grid: SymPoly2,
    classification: Classification,
    summary: String,
}

pub fn classify_poly(g: &Globals, a: &ClassifyArgs) -> Result<(), CliError> {
    let grid = parse_grid(&a.grid)?;
    let classification = classify(&grid)?;
    let summary = classification.to_string();
    println!("{summary}");
    write_results_json(
        &g.out.join("classification.json"),
        &ClassifyReport {
            grid: grid.clone(),
            classification,
            summary,
        },
    )?;
    echo(g, "classify-poly", grid)
}

fn analogy_config(g: &Globals, a: &AnalogyArgs, kind: AnalogyKind) -> AnalogyConfig {
    let f = &g.file.analogy;
    let mut cfg = AnalogyConfig::default_for(kind, g.seed);
    cfg.epochs = a.epochs.or(f.epochs).unwrap_or(cfg.epochs);
    cfg.batch_size = a.batch_size.or(f.batch_size).unwrap_or(cfg.batch_size);
    cfg.lr = a.lr.or(f.lr).unwrap_or(cfg.lr);
    cfg.weight_decay = a.weight_decay.or(f.weight_decay).unwrap_or(cfg.weight_decay);
    cfg.layers = a.layers.or(f.layers).unwrap_or(cfg.layers);
    cfg.hidden = a.hidden.or(f.hidden).unwrap_or(cfg.hidden);
    cfg
}

fn split_config(g: &Globals, a: &AnalogyArgs) -> SplitConfig {
    let f = &g.file.analogy;
    let d = SplitConfig::default();
    SplitConfig {
        train: a.train_fraction.or(f.train_fraction).unwrap_or(d.train),
        validation: a.validation_fraction.or(f.validation_fraction).unwrap_or(d.validation),
        max_train_per_category: a.max_train_per_category.or(f.max_train_per_category),
        max_eval_per_category: a.max_eval_per_category.or(f.max_eval_per_category),
    }
}

fn require_file(path: &Path) -> Result<(), CliError> {
    if path.exists() {
        Ok(())
    } else {
        Err(CliError::Usage(format!("no such file: {}", path.display())))
    }
}

/// Embeddings plus the seeded train/validation/test questions.
fn analogy_data(g: &Globals, a: &AnalogyArgs) -> Result<(EmbeddingTable, AnalogySplits), CliError> {
    let (table, categories) = if a.synthetic {
        let syn = synthetic_analogy(&SyntheticAnalogyConfig::default(), g.seed)?;
        (syn.table, syn.categories)
    } else {
        let (emb, rel) = match (&a.embeddings, &a.relations) {
            (Some(e), Some(r)) => (e, r),
            _ => return Err(CliError::Usage("--embeddings and --relations are required".into())),
        };
        require_file(emb)?;
        require_file(rel)?;
        let table = load_embeddings(emb, true)?;
        let categories = load_relations(rel)?.iter().map(|c| c.restrict_to(&table)).collect();
        (table, categories)
    };
    let splits = split_relations(&categories, &split_config(g, a), g.seed)?;
    Ok((table, splits))
}

fn pick_split<'a>(splits: &'a AnalogySplits, name: &str) -> Result<&'a [AnalogyExample], CliError> {
    match name {
        "train" => Ok(&splits.train),
        "validation" => Ok(&splits.validation),
        "test" => Ok(&splits.test),
        _ => Err(CliError::Usage(format!(
            "unknown split {name:?}; valid splits: train, validation, test"
        ))),
    }
}

#[derive(Serialize)]
struct AnalogyEcho {
    kind: AnalogyKind,
    synthetic: bool,
    embeddings: Option<std::path::PathBuf>,
    relations: Option<std::path::PathBuf>,
    checkpoint: Option<std::path::PathBuf>,
    exclude_abc: bool,
    split: SplitConfig,
    evaluated: String,
    train: Option<AnalogyConfig>,
    questions: [usize; 3],
}

impl AnalogyEcho {
    fn new(g: &Globals, a: &AnalogyArgs, kind: AnalogyKind, splits: &AnalogySplits) -> Self {
        Self {
            kind,
            synthetic: a.synthetic,
            embeddings: a.embeddings.clone(),
            relations: a.relations.clone(),
            checkpoint: a.checkpoint.clone(),
            exclude_abc: a.exclude_abc,
            split: split_config(g, a),
            evaluated: a.split.clone(),
            train: None,
            questions: [splits.train.len(), splits.validation.len(), splits.test.len()],
        }
    }
}

pub fn analogy_train(g: &Globals, a: &AnalogyArgs) -> Result<(), CliError> {
    let kind: AnalogyKind = a.kind.parse().map_err(usage)?;
    let (table, splits) = analogy_data(g, a)?;
    let cfg = analogy_config(g, a, kind);
    let (model, report) = train_analogy(kind, &table, &splits.train, &cfg)?;
    if !splits.validation.is_empty() {
        let val = evaluate_analogy(&model, &table, &splits.validation, a.exclude_abc)?;
        println!(
            "{kind}: validation accuracy {:.4} ({}/{})",
            val.accuracy, val.correct, val.total
        );
    }
    save_checkpoint(&Checkpoint::from(model), &g.out.join(format!("analogy_{kind}.abnn")))?;
    write_results_json(&g.out.join(format!("analogy_train_{kind}.json")), &report)?;
    let mut e = AnalogyEcho::new(g, a, kind, &splits);
    e.train = Some(cfg);
    echo(g, "analogy-train", e)
}

pub fn analogy_eval(g: &Globals, a: &AnalogyArgs) -> Result<(), CliError> {
    let kind: AnalogyKind = a.kind.parse().map_err(usage)?;
    let model = match (&a.checkpoint, kind) {
        (Some(p), _) => {
            require_file(p)?;
            load_checkpoint(p)?.into_analogy_model(kind)?
        }
        (None, AnalogyKind::Wv) => AnalogyModel::Wv { dim: 0 },
        (None, _) => return Err(CliError::Usage(format!("--checkpoint is required for kind {kind}"))),
    };
    let (table, splits) = analogy_data(g, a)?;
    let model = match model {
        AnalogyModel::Wv { .. } => AnalogyModel::Wv { dim: table.dim() },
        m => m,
    };
    let questions = pick_split(&splits, &a.split)?;
    let report = evaluate_analogy(&model, &table, questions, a.exclude_abc)?;
    println!(
        "{kind} {}: accuracy {:.4} ({}/{})",
        a.split, report.accuracy, report.correct, report.total
    );
    write_results_json(&g.out.join(format!("analogy_eval_{kind}.json")), &report)?;
    echo(g, "analogy-eval", AnalogyEcho::new(g, a, kind, &splits))
}

#[derive(Serialize)]
struct BoundReport {
    inputs: SizeGenBound,
    bound: f64,
}

pub fn bound(g: &Globals, a: &BoundArgs) -> Result<(), CliError> {
    let inputs = SizeGenBound {
        epsilon: a.epsilon,
        a: a.a,
        b: a.b,
        k1: a.k1,
        k2: a.k2,
    };
    let bound = size_gen_bound(&inputs)?;
    println!("{bound}");
    write_results_json(&g.out.join("bound.json"), &BoundReport { inputs, bound })?;
    echo(g, "bound", inputs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parsing() {
        let p = parse_grid("0, 1; 1, 0.5").unwrap();
        assert_eq!(p.coeff(1, 1), 0.5);
        assert_eq!(p.degree(), 1);
        assert!(matches!(parse_grid("1,2;3"), Err(CliError::Usage(_))));
        assert!(matches!(parse_grid("1,x;1,1"), Err(CliError::Usage(_))));
    }
}
