use std::path::Path;

use graphglove::glove::DenseConfig;
use graphglove::train::TrainConfig;
use graphglove::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub workers: Option<usize>,
    pub vocab: VocabSection,
    pub cooc: CoocSection,
    pub dense: DenseConfig,
    pub train: TrainConfig,
    pub analyze: AnalyzeSection,
    pub variance: VarianceSection,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct VocabSection {
    pub max_size: usize,
    pub min_count: u64,
}

impl Default for VocabSection {
    fn default() -> Self {
        VocabSection { max_size: 50_000, min_count: 1 }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct CoocSection {
    pub window: usize,
}

impl Default for CoocSection {
    fn default() -> Self {
        CoocSection { window: 10 }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalyzeSection {
    pub top: usize,
    pub eigen_tol: f64,
    pub eigen_max_iter: usize,
    pub cw_iterations: usize,
    pub affinity: graphglove::analysis::Affinity,
    pub samples: usize,
    pub min_cluster_size: usize,
    pub seed: u64,
}

impl Default for AnalyzeSection {
    fn default() -> Self {
        AnalyzeSection {
            top: 100,
            eigen_tol: 1e-10,
            eigen_max_iter: 10_000,
            cw_iterations: 50,
            affinity: Default::default(),
            samples: graphglove::analysis::DEFAULT_SAMPLES,
            min_cluster_size: graphglove::analysis::MIN_CLUSTER_SIZE,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct VarianceSection {
    pub seeds: Vec<u64>,
}

impl Default for VarianceSection {
    fn default() -> Self {
        VarianceSection { seeds: vec![0, 1, 2, 3, 4] }
    }
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else { return Ok(FileConfig::default()) };
        let text = std::fs::read_to_string(path).map_err(|source| Error::File { path: path.to_path_buf(), source })?;
        toml::from_str(&text).map_err(|e| Error::Format { what: format!("config {}", path.display()), message: e.to_string() })
    }
}

/// Assigns `value` to `target` when the flag was given.
pub fn set<T>(target: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *target = v;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_sections_keep_defaults() {
        let c: FileConfig = toml::from_str("[train]\nlambda = 0.5\nsteps = 7\n[vocab]\nmax_size = 10\n").unwrap();
        assert_eq!((c.train.lambda, c.train.steps, c.train.b_anchors), (0.5, 7, 64));
        assert_eq!((c.vocab.max_size, c.vocab.min_count), (10, 1));
        assert_eq!(c.cooc.window, 10);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = toml::from_str::<FileConfig>("[vocab]\nmax_sise = 3\n").unwrap_err().to_string();
        assert!(err.contains("max_sise"), "{err}");
    }
}
