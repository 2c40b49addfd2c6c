//! Argument/non-argument classification of sentences, the pipeline's
//! selection stage.
//!
//! Backends mirror the embedding module: a self-contained lexicon baseline,
//! a JSONL score file for precomputed classifier outputs, and a remote HTTP
//! service. All of them reduce to a score in [0, 1] per sentence; the
//! threshold turns scores into the binary split.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Sentence;
use crate::rouge::tokenize;

#[derive(Debug, Error)]
pub enum ArgError {
    #[error("no score for sentence key {0}")]
    MissingScore(String),
    #[error("classifier score {0} outside [0, 1]")]
    InvalidScore(f64),
    #[error("threshold {0} outside [0, 1]")]
    InvalidThreshold(f64),
    #[error("labels do not align with sentences: {0}")]
    AlignmentError(String),
    #[error("score file {path} line {line}: {message}")]
    ParseError {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("duplicate score key {0}")]
    DuplicateKey(String),
    #[error("lexicon has no markers")]
    EmptyLexicon,
    #[error("remote call failed with status {status}: {body}")]
    RemoteError { status: u16, body: String },
    #[error("remote endpoint unreachable: {0}")]
    RemoteTransport(String),
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

/// Classification result for one sentence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArgLabel {
    pub sentence_global_index: usize,
    /// Probability-like argumentativeness in [0, 1].
    pub score: f64,
    /// Always equals `score >= threshold` for the run's threshold.
    pub is_argument: bool,
}

/// Which classifier produces the scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ArgumentBackend {
    /// Marker-counting baseline. `path` overrides the built-in lexicon.
    Lexicon {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        path: Option<PathBuf>,
    },
    ScoreFile { path: PathBuf },
    Remote {
        endpoint: String,
        #[serde(default = "default_timeout_ms")]
        timeout_ms: u64,
    },
}

fn default_timeout_ms() -> u64 {
    30_000
}

fn default_threshold() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArgumentBackendConfig {
    #[serde(flatten)]
    pub backend: ArgumentBackend,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
}

impl Default for ArgumentBackendConfig {
    fn default() -> Self {
        Self {
            backend: ArgumentBackend::Lexicon { path: None },
            threshold: default_threshold(),
        }
    }
}

/// Argument markers as token sequences. Matching is case-insensitive and
/// whole-word: a marker hits wherever its token sequence occurs in the
/// sentence's token sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct Lexicon {
    markers: Vec<Vec<String>>,
}

const BUILTIN_LEXICON: &str = include_str!("../data/argument_lexicon.txt");

impl Lexicon {
    /// One marker per line; `#` starts a comment; blank lines are skipped.
    pub fn parse(text: &str) -> Result<Self, ArgError> {
        let mut markers = Vec::new();
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            markers.push(tokenize(line));
        }
        if markers.is_empty() {
            return Err(ArgError::EmptyLexicon);
        }
        Ok(Self { markers })
    }

    pub fn from_file(path: &Path) -> Result<Self, ArgError> {
        let text = std::fs::read_to_string(path).map_err(|source| ArgError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    /// The lexicon shipped with the crate.
    pub fn builtin() -> Self {
        Self::parse(BUILTIN_LEXICON).expect("built-in lexicon is non-empty")
    }

    /// Number of marker occurrences in the text, counting every position
    /// where a marker's token sequence starts.
    pub fn hits(&self, text: &str) -> usize {
        let tokens = tokenize(text);
        let mut hits = 0;
        for marker in &self.markers {
            if marker.len() > tokens.len() {
                continue;
            }
            for window in tokens.windows(marker.len()) {
                if window == marker.as_slice() {
                    hits += 1;
                }
            }
        }
        hits
    }

    /// min(1, hits / 3): three marker occurrences saturate the score.
    pub fn score(&self, text: &str) -> f64 {
        (self.hits(text) as f64 / 3.0).min(1.0)
    }
}

/// Scores one sentence with the built-in lexicon.
pub fn lexicon_score(sentence: &Sentence) -> f64 {
    Lexicon::builtin().score(&sentence.text)
}

#[derive(Deserialize)]
struct ScoreLine {
    key: String,
    score: f64,
}

/// Parses a JSONL score file: one `{"key": ..., "score": f}` per line.
pub fn load_score_file(path: &Path) -> Result<HashMap<String, f64>, ArgError> {
    let text = std::fs::read_to_string(path).map_err(|source| ArgError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut map = HashMap::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let parsed: ScoreLine = serde_json::from_str(line).map_err(|e| ArgError::ParseError {
            path: path.to_path_buf(),
            line: idx + 1,
            message: e.to_string(),
        })?;
        if map.contains_key(&parsed.key) {
            return Err(ArgError::DuplicateKey(parsed.key));
        }
        map.insert(parsed.key, parsed.score);
    }
    Ok(map)
}

#[derive(Serialize)]
struct ClassifyRequest<'a> {
    texts: Vec<&'a str>,
}

#[derive(Deserialize)]
struct ClassifyResponse {
    scores: Vec<f64>,
}

fn body_excerpt(body: &str) -> String {
    body.chars().take(200).collect()
}

fn remote_classify(endpoint: &str, timeout_ms: u64, texts: Vec<&str>) -> Result<Vec<f64>, ArgError> {
    let n_texts = texts.len();
    let client = reqwest::blocking::Client::builder()
        .timeout(Duration::from_millis(timeout_ms))
        .build()
        .map_err(|e| ArgError::RemoteTransport(e.to_string()))?;
    let url = format!("{}/classify", endpoint.trim_end_matches('/'));
    let response = client
        .post(&url)
        .json(&ClassifyRequest { texts })
        .send()
        .map_err(|e| ArgError::RemoteTransport(e.to_string()))?;

    let status = response.status().as_u16();
    let body = response
        .text()
        .map_err(|e| ArgError::RemoteTransport(e.to_string()))?;
    if status != 200 {
        return Err(ArgError::RemoteError {
            status,
            body: body_excerpt(&body),
        });
    }
    let parsed: ClassifyResponse =
        serde_json::from_str(&body).map_err(|_| ArgError::RemoteError {
            status,
            body: body_excerpt(&body),
        })?;
    if parsed.scores.len() != n_texts {
        return Err(ArgError::RemoteError {
            status,
            body: format!("expected {} scores, got {}", n_texts, parsed.scores.len()),
        });
    }
    Ok(parsed.scores)
}

/// Labels every sentence through the configured backend. Output is
/// order-aligned with the input.
pub fn classify_arguments(
    config: &ArgumentBackendConfig,
    sentences: &[Sentence],
) -> Result<Vec<ArgLabel>, ArgError> {
    assert!(!sentences.is_empty());
    let threshold = config.threshold;
    if !(0.0..=1.0).contains(&threshold) {
        return Err(ArgError::InvalidThreshold(threshold));
    }

    let scores: Vec<f64> = match &config.backend {
        ArgumentBackend::Lexicon { path } => {
            let lexicon = match path {
                Some(p) => Lexicon::from_file(p)?,
                None => Lexicon::builtin(),
            };
            sentences.iter().map(|s| lexicon.score(&s.text)).collect()
        }
        ArgumentBackend::ScoreFile { path } => {
            let map = load_score_file(path)?;
            let mut out = Vec::with_capacity(sentences.len());
            for sentence in sentences {
                let key = sentence.key();
                let score = *map.get(&key).ok_or(ArgError::MissingScore(key))?;
                out.push(score);
            }
            out
        }
        ArgumentBackend::Remote {
            endpoint,
            timeout_ms,
        } => {
            let texts: Vec<&str> = sentences.iter().map(|s| s.text.as_str()).collect();
            remote_classify(endpoint, *timeout_ms, texts)?
        }
    };

    let mut labels = Vec::with_capacity(sentences.len());
    for (sentence, score) in sentences.iter().zip(scores) {
        if !(0.0..=1.0).contains(&score) {
            return Err(ArgError::InvalidScore(score));
        }
        labels.push(ArgLabel {
            sentence_global_index: sentence.global_index,
            score,
            is_argument: score >= threshold,
        });
    }
    Ok(labels)
}

/// Splits sentences by label into (arguments, non-arguments). Both sides
/// keep the input order; every sentence lands in exactly one side.
pub fn partition(
    sentences: &[Sentence],
    labels: &[ArgLabel],
) -> Result<(Vec<Sentence>, Vec<Sentence>), ArgError> {
    if sentences.len() != labels.len() {
        return Err(ArgError::AlignmentError(format!(
            "{} labels for {} sentences",
            labels.len(),
            sentences.len()
        )));
    }
    for (sentence, label) in sentences.iter().zip(labels) {
        if sentence.global_index != label.sentence_global_index {
            return Err(ArgError::AlignmentError(format!(
                "label for sentence {} paired with sentence {}",
                label.sentence_global_index, sentence.global_index
            )));
        }
    }
    let mut arguments = Vec::new();
    let mut non_arguments = Vec::new();
    for (sentence, label) in sentences.iter().zip(labels) {
        if label.is_argument {
            arguments.push(sentence.clone());
        } else {
            non_arguments.push(sentence.clone());
        }
    }
    Ok((arguments, non_arguments))
}
