use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::harness::train::ExperimentResult;

/// One line of the results CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub task: String,
    pub model: String,
    pub split: String,
    pub rmse: f64,
    pub seed: u64,
    pub wall_clock_s: f64,
}

impl ResultRow {
    /// The `small` and `large` test rows of one experiment.
    pub fn from_result(r: &ExperimentResult) -> [ResultRow; 2] {
        let row = |split: &str, rmse: f64| ResultRow {
            task: r.task.to_string(),
            model: r.model.to_string(),
            split: split.to_string(),
            rmse,
            seed: r.seed,
            wall_clock_s: r.wall_clock_s,
        };
        [row("small", r.rmse_small), row("large", r.rmse_large)]
    }
}

/// CSV with columns `task,model,split,rmse,seed,wall_clock_s`.
pub fn write_results_csv(path: &Path, results: &[ExperimentResult]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in results {
        for row in ResultRow::from_result(r) {
            w.serialize(row)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Pretty-printed JSON of any serializable log, newline-terminated.
pub fn write_results_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::model::ModelKind;
    use crate::harness::task::SyntheticTask;
    use crate::harness::train::TrainConfig;

    fn result() -> ExperimentResult {
        ExperimentResult {
            task: SyntheticTask::Add,
            model: ModelKind::Agn,
            seed: 7,
            rmse_validation: 0.5,
            rmse_small: 0.25,
            rmse_large: 2.0,
            loss_curve: vec![1.0, 0.5],
            wall_clock_s: 0.0,
            config: TrainConfig::new(ModelKind::Agn, 7),
        }
    }

    #[test]
    fn csv_has_small_and_large_rows() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.csv");
        write_results_csv(&p, &[result()]).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        assert_eq!(
            text,
            "task,model,split,rmse,seed,wall_clock_s\nadd,agn,small,0.25,7,0.0\nadd,agn,large,2.0,7,0.0\n"
        );
    }

    #[test]
    fn json_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.json");
        write_results_json(&p, &[result()]).unwrap();
        let back: Vec<ExperimentResult> = serde_json::from_str(&std::fs::read_to_string(&p).unwrap()).unwrap();
        assert_eq!(back, vec![result()]);
    }
}
