use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::CliError;

/// Contents of a `--config` TOML file. Every field is optional; flags
/// override it and built-in defaults fill the rest.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
    #[serde(default)]
    pub synthetic: SyntheticFile,
    #[serde(default)]
    pub analogy: AnalogyFile,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticFile {
    pub epochs: Option<usize>,
    pub batch_size: Option<usize>,
    pub lr: Option<f64>,
    pub weight_decay: Option<f64>,
    pub train: Option<usize>,
    pub validation: Option<usize>,
    pub small_test: Option<usize>,
    pub large_test: Option<usize>,
    pub trials: Option<usize>,
    pub groups: Option<usize>,
    pub units: Option<usize>,
    pub layers: Option<usize>,
    pub hidden: Option<usize>,
    pub middle: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalogyFile {
    pub epochs: Option<usize>,
    pub batch_size: Option<usize>,
    pub lr: Option<f64>,
    pub weight_decay: Option<f64>,
    pub layers: Option<usize>,
    pub hidden: Option<usize>,
    pub train_fraction: Option<f64>,
    pub validation_fraction: Option<f64>,
    pub max_train_per_category: Option<usize>,
    pub max_eval_per_category: Option<usize>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Usage(format!("bad config {}: {e}", path.display())))
    }
}

/// The settings a run actually used, written to `config.json` in the
/// output directory.
#[derive(Debug, Clone, Serialize)]
pub struct ConfigEcho<T: Serialize> {
    pub subcommand: &'static str,
    pub seed: u64,
    pub threads: Option<usize>,
    pub config_file: Option<PathBuf>,
    pub resolved: T,
}
