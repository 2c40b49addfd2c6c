//! Experiment configuration: the JSON config file, the fixed mode-label
//! vocabulary, and resolution of labels into concrete pipeline configs.

use divsumm::argument::ArgumentBackendConfig;
use divsumm::embed::EmbeddingBackendConfig;
use divsumm::rouge::RefStrategy;
use divsumm::summarize::{Backends, ClusteringKind, SummaryConfig, SummaryMode};
use serde::{Deserialize, Serialize};

/// Labels the runner understands. Each one resolves to a full
/// `SummaryConfig` on top of the shared base settings, and
/// [`label_for_config`] maps the config back to the label.
///
///   full+kmeans  args+kmeans  args+agglomerative
///   mix-<nonarg-%>  diverse-<weight>
pub const DEFAULT_MODES: [&str; 6] = [
    "full+kmeans",
    "args+kmeans",
    "args+agglomerative",
    "mix-33.3",
    "mix-50",
    "mix-66.7",
];

fn default_modes() -> Vec<String> {
    DEFAULT_MODES.iter().map(|s| s.to_string()).collect()
}

fn default_embedding() -> EmbeddingBackendConfig {
    EmbeddingBackendConfig::HashedTfidf { dim: 1024 }
}

fn default_classifier() -> Option<ArgumentBackendConfig> {
    Some(ArgumentBackendConfig::default())
}

fn default_rouge() -> RefStrategy {
    RefStrategy::Best
}

/// Shared pipeline settings: every `SummaryConfig` field except `mode`,
/// which comes from the mode label. Kept in sync with the library defaults
/// by a test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BaseSummaryConfig {
    pub total_budget_chars: usize,
    pub mix_nonarg_budget_chars: usize,
    pub max_sentence_chars: usize,
    pub clustering: ClusteringKind,
    pub k: usize,
    pub diversity_weight: f64,
    pub select_count: Option<usize>,
    pub include_diagonal: bool,
    pub cluster_in_full_mode: bool,
    pub seed: u64,
}

impl Default for BaseSummaryConfig {
    fn default() -> Self {
        let lib = SummaryConfig::default();
        Self {
            total_budget_chars: lib.total_budget_chars,
            mix_nonarg_budget_chars: lib.mix_nonarg_budget_chars,
            max_sentence_chars: lib.max_sentence_chars,
            clustering: lib.clustering,
            k: lib.k,
            diversity_weight: lib.diversity_weight,
            select_count: lib.select_count,
            include_diagonal: lib.include_diagonal,
            cluster_in_full_mode: lib.cluster_in_full_mode,
            seed: lib.seed,
        }
    }
}

impl BaseSummaryConfig {
    fn with_mode(&self, mode: SummaryMode) -> SummaryConfig {
        SummaryConfig {
            mode,
            total_budget_chars: self.total_budget_chars,
            mix_nonarg_budget_chars: self.mix_nonarg_budget_chars,
            max_sentence_chars: self.max_sentence_chars,
            clustering: self.clustering,
            k: self.k,
            diversity_weight: self.diversity_weight,
            select_count: self.select_count,
            include_diagonal: self.include_diagonal,
            cluster_in_full_mode: self.cluster_in_full_mode,
            seed: self.seed,
        }
    }
}

/// Top-level config file. Missing fields fall back to the standard
/// six-mode experiment matrix, so `{}` is a complete config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub modes: Vec<String>,
    pub summary: BaseSummaryConfig,
    pub embedding: EmbeddingBackendConfig,
    /// `null` disables classification; modes that need it then fail.
    pub classifier: Option<ArgumentBackendConfig>,
    pub rouge: RefStrategy,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            modes: default_modes(),
            summary: BaseSummaryConfig::default(),
            embedding: default_embedding(),
            classifier: default_classifier(),
            rouge: default_rouge(),
        }
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, String> {
        let config: Self = serde_json::from_str(text).map_err(|e| e.to_string())?;
        if config.modes.is_empty() {
            return Err("modes: list must not be empty".into());
        }
        for label in &config.modes {
            parse_label(label).map_err(|e| format!("modes: {e}"))?;
        }
        Ok(config)
    }

    pub fn backends(&self) -> Backends {
        Backends {
            embedding: self.embedding.clone(),
            classifier: self.classifier.clone(),
        }
    }
}

pub enum LabeledMode {
    Full(ClusteringKind),
    Args(ClusteringKind),
    /// Non-argument share of the total budget, in percent.
    Mix(f64),
    Diverse(f64),
}

pub fn parse_label(label: &str) -> Result<LabeledMode, String> {
    match label {
        "full+kmeans" => return Ok(LabeledMode::Full(ClusteringKind::KMeans)),
        "full+agglomerative" => return Ok(LabeledMode::Full(ClusteringKind::Agglomerative)),
        "args+kmeans" => return Ok(LabeledMode::Args(ClusteringKind::KMeans)),
        "args+agglomerative" => return Ok(LabeledMode::Args(ClusteringKind::Agglomerative)),
        _ => {}
    }
    if let Some(pct) = label.strip_prefix("mix-") {
        let pct: f64 = pct
            .parse()
            .map_err(|_| format!("bad percentage in mode label {label:?}"))?;
        if !(0.0..100.0).contains(&pct) || pct == 0.0 {
            return Err(format!("mix percentage must be in (0, 100), got {pct}"));
        }
        return Ok(LabeledMode::Mix(pct));
    }
    if let Some(weight) = label.strip_prefix("diverse-") {
        let weight: f64 = weight
            .parse()
            .map_err(|_| format!("bad weight in mode label {label:?}"))?;
        if weight < 0.0 {
            return Err(format!("diversity weight must be non-negative, got {weight}"));
        }
        return Ok(LabeledMode::Diverse(weight));
    }
    Err(format!(
        "unknown mode label {label:?} (expected full+kmeans, args+kmeans, args+agglomerative, mix-<pct>, or diverse-<weight>)"
    ))
}

pub fn config_for_label(label: &str, base: &BaseSummaryConfig) -> Result<SummaryConfig, String> {
    let mut config = match parse_label(label)? {
        LabeledMode::Full(clustering) => {
            let mut c = base.with_mode(SummaryMode::Full);
            c.clustering = clustering;
            c
        }
        LabeledMode::Args(clustering) => {
            let mut c = base.with_mode(SummaryMode::OnlyArguments);
            c.clustering = clustering;
            c
        }
        LabeledMode::Mix(pct) => {
            let mut c = base.with_mode(SummaryMode::Mix);
            c.mix_nonarg_budget_chars =
                (c.total_budget_chars as f64 * pct / 100.0).round() as usize;
            c
        }
        LabeledMode::Diverse(weight) => {
            let mut c = base.with_mode(SummaryMode::Diverse);
            c.diversity_weight = weight;
            c
        }
    };
    config.seed = base.seed;
    config.validate().map_err(|e| e.to_string())?;
    Ok(config)
}

/// Inverse of [`config_for_label`]: every emitted label is reconstructible
/// from the report's config echo.
#[cfg(test)]
pub fn label_for_config(config: &SummaryConfig) -> String {
    let clustering = match config.clustering {
        ClusteringKind::KMeans => "kmeans",
        ClusteringKind::Agglomerative => "agglomerative",
    };
    match config.mode {
        SummaryMode::Full => format!("full+{clustering}"),
        SummaryMode::OnlyArguments => format!("args+{clustering}"),
        SummaryMode::Mix => {
            let pct =
                config.mix_nonarg_budget_chars as f64 / config.total_budget_chars as f64 * 100.0;
            let mut text = format!("{pct:.1}");
            if let Some(trimmed) = text.strip_suffix(".0") {
                text = trimmed.to_string();
            }
            format!("mix-{text}")
        }
        SummaryMode::Diverse => format!("diverse-{}", config.diversity_weight),
    }
}

/// `SUMM_REMOTE_TIMEOUT_MS` overrides the timeout of every remote backend.
pub fn apply_timeout_override(
    embedding: &mut EmbeddingBackendConfig,
    classifier: &mut Option<ArgumentBackendConfig>,
) -> Result<(), String> {
    let Ok(raw) = std::env::var("SUMM_REMOTE_TIMEOUT_MS") else {
        return Ok(());
    };
    let ms: u64 = raw
        .parse()
        .map_err(|_| format!("SUMM_REMOTE_TIMEOUT_MS must be an integer, got {raw:?}"))?;
    if let EmbeddingBackendConfig::Remote { timeout_ms, .. } = embedding {
        *timeout_ms = ms;
    }
    if let Some(config) = classifier {
        if let divsumm::argument::ArgumentBackend::Remote { timeout_ms, .. } = &mut config.backend
        {
            *timeout_ms = ms;
        }
    }
    Ok(())
}
