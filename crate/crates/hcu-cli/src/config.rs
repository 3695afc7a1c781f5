//! Run configuration: a single JSON document governs a run. The only
//! behavior-affecting inputs outside it are the `--config` and
//! `--output-dir` flags, so a manifest plus the config reproduces a run.
//!
//! Relative paths resolve against the directory containing the config file.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};

use hcu_core::colocation::CrawlConfig;
use hcu_core::corpus::LikertScale;
use hcu_core::labels::Strategy;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub scale: ScaleConfig,
    pub paths: PathsConfig,
    #[serde(default = "default_strategies")]
    pub strategies: Vec<String>,
    #[serde(default)]
    pub metrics: MetricsConfig,
    #[serde(default)]
    pub crawl: CrawlSection,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScaleConfig {
    pub low: i32,
    pub high: i32,
}

impl Default for ScaleConfig {
    fn default() -> Self {
        ScaleConfig { low: 1, high: 9 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathsConfig {
    pub annotations: PathBuf,
    pub sounds: PathBuf,
    pub lexicon_dir: PathBuf,
    pub embeddings: Vec<EmbeddingConfig>,
    #[serde(default = "default_cache_dir")]
    pub cache_dir: PathBuf,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmbeddingConfig {
    /// `word2vec` (text format) or `numberbatch` (gzip text format).
    pub source: String,
    pub path: PathBuf,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricsConfig {
    #[serde(default = "default_knn_k")]
    pub knn_k: usize,
    #[serde(default = "default_z_threshold")]
    pub z_threshold: f64,
    #[serde(default = "default_percentile_low")]
    pub percentile_low: f64,
    #[serde(default = "default_percentile_high")]
    pub percentile_high: f64,
    #[serde(default = "default_n_splits")]
    pub n_splits: usize,
    #[serde(default = "default_split_metric")]
    pub split_metric: String,
}

impl Default for MetricsConfig {
    fn default() -> Self {
        MetricsConfig {
            knn_k: default_knn_k(),
            z_threshold: default_z_threshold(),
            percentile_low: default_percentile_low(),
            percentile_high: default_percentile_high(),
            n_splits: default_n_splits(),
            split_metric: default_split_metric(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrawlSection {
    #[serde(default = "default_relations")]
    pub relations: Vec<String>,
    #[serde(default = "default_depth")]
    pub depth: u8,
    #[serde(default = "default_max_edges")]
    pub max_edges_per_node: usize,
    #[serde(default = "default_interval")]
    pub request_interval_ms: u64,
    #[serde(default = "default_endpoint")]
    pub endpoint: String,
}

impl Default for CrawlSection {
    fn default() -> Self {
        CrawlSection {
            relations: default_relations(),
            depth: default_depth(),
            max_edges_per_node: default_max_edges(),
            request_interval_ms: default_interval(),
            endpoint: default_endpoint(),
        }
    }
}

fn default_strategies() -> Vec<String> {
    Strategy::ALL.iter().map(|s| s.as_str().to_string()).collect()
}

fn default_cache_dir() -> PathBuf {
    PathBuf::from("conceptnet_cache")
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_knn_k() -> usize {
    3
}

fn default_z_threshold() -> f64 {
    2.5
}

fn default_percentile_low() -> f64 {
    15.0
}

fn default_percentile_high() -> f64 {
    85.0
}

fn default_n_splits() -> usize {
    5
}

fn default_split_metric() -> String {
    "hcu_bits".to_string()
}

fn default_relations() -> Vec<String> {
    CrawlConfig::default().relations
}

fn default_depth() -> u8 {
    CrawlConfig::default().depth
}

fn default_max_edges() -> usize {
    CrawlConfig::default().max_edges_per_node
}

fn default_interval() -> u64 {
    CrawlConfig::default().request_interval_ms
}

fn default_endpoint() -> String {
    CrawlConfig::default().endpoint
}

impl RunConfig {
    /// Parses the config file and resolves every relative path against the
    /// file's directory. `output_dir_override` (the `--output-dir` flag)
    /// resolves against the current directory instead.
    pub fn load(path: &Path, output_dir_override: Option<&Path>) -> anyhow::Result<RunConfig> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        let mut config: RunConfig = serde_json::from_str(&text)
            .with_context(|| format!("cannot parse config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let resolve = |p: &PathBuf| -> PathBuf {
            if p.is_absolute() {
                p.clone()
            } else {
                base.join(p)
            }
        };
        config.paths.annotations = resolve(&config.paths.annotations);
        config.paths.sounds = resolve(&config.paths.sounds);
        config.paths.lexicon_dir = resolve(&config.paths.lexicon_dir);
        config.paths.cache_dir = resolve(&config.paths.cache_dir);
        config.paths.output_dir = match output_dir_override {
            Some(dir) => dir.to_path_buf(),
            None => resolve(&config.paths.output_dir),
        };
        for embedding in &mut config.paths.embeddings {
            embedding.path = resolve(&embedding.path);
        }
        Ok(config)
    }

    pub fn likert_scale(&self) -> anyhow::Result<LikertScale> {
        LikertScale::new(self.scale.low, self.scale.high)
            .map_err(|e| anyhow::anyhow!("scale: {e}"))
    }

    pub fn parsed_strategies(&self) -> anyhow::Result<Vec<Strategy>> {
        if self.strategies.is_empty() {
            bail!("strategies: list is empty");
        }
        self.strategies
            .iter()
            .map(|s| {
                s.parse::<Strategy>()
                    .map_err(|e| anyhow::anyhow!("strategies: {e}"))
            })
            .collect()
    }

    pub fn crawl_config(&self) -> CrawlConfig {
        CrawlConfig {
            relations: self.crawl.relations.clone(),
            depth: self.crawl.depth,
            max_edges_per_node: self.crawl.max_edges_per_node,
            request_interval_ms: self.crawl.request_interval_ms,
            endpoint: self.crawl.endpoint.clone(),
        }
    }
}
