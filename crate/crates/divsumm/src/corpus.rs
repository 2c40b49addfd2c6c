//! Topic corpora: loading from disk, sentence segmentation, head truncation.
//!
//! A topic lives in a directory shaped like
//!
//! ```text
//! <topic>/
//!   articles/*.txt     required, one article per file, UTF-8
//!   refs/*.txt         optional reference summaries
//!   manifest.json      optional {"name": ..., "notes": ...}, metadata only
//! ```
//!
//! Documents and references are ordered by filename (lexicographic byte
//! order) so a topic loads identically regardless of the filesystem's native
//! listing order.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::{RandomSource, Xorshift64Star};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("missing or empty articles/ directory under {0}")]
    MissingArticles(PathBuf),
    #[error("empty document (whitespace only): {0}")]
    EmptyDocument(PathBuf),
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed manifest {path}: {message}")]
    Manifest { path: PathBuf, message: String },
}

/// One source article.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    /// Filename stem, unique within a topic.
    pub id: String,
    pub text: String,
    /// Position within the topic's sorted directory listing.
    pub source_order: usize,
}

/// A segmented unit of source text with provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sentence {
    pub doc_id: String,
    pub index_in_doc: usize,
    /// Position in the topic-wide flattened sentence list.
    pub global_index: usize,
    pub text: String,
    /// Character (not byte) count of `text`.
    pub char_len: usize,
}

impl Sentence {
    /// Key used by embedding and score files: `<doc_id>#<index_in_doc>`.
    pub fn key(&self) -> String {
        format!("{}#{}", self.doc_id, self.index_in_doc)
    }
}

/// A set of topically related documents plus optional reference summaries.
#[derive(Debug, Clone, PartialEq)]
pub struct Topic {
    pub name: String,
    pub documents: Vec<Document>,
    /// Reference summary texts; may be empty (evaluation then unavailable).
    pub references: Vec<String>,
}

/// Optional topic metadata. Parsed for validity only; loading never lets it
/// influence processing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicManifest {
    pub name: String,
    #[serde(default)]
    pub notes: String,
}

fn read_text(path: &Path) -> Result<String, CorpusError> {
    std::fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// `.txt` files under `dir`, sorted by filename in byte order.
fn txt_files_sorted(dir: &Path) -> Result<Vec<PathBuf>, CorpusError> {
    let entries = std::fs::read_dir(dir).map_err(|source| CorpusError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut files = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|source| CorpusError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        let path = entry.path();
        if path.is_file() && path.extension().is_some_and(|e| e == "txt") {
            files.push(path);
        }
    }
    files.sort_by(|a, b| a.file_name().cmp(&b.file_name()));
    Ok(files)
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

/// Loads a topic directory. Documents come from `articles/*.txt`, references
/// from `refs/*.txt`; both sorted by filename. The topic name is the
/// directory basename.
pub fn load_topic(dir_path: &Path) -> Result<Topic, CorpusError> {
    let articles_dir = dir_path.join("articles");
    if !articles_dir.is_dir() {
        return Err(CorpusError::MissingArticles(dir_path.to_path_buf()));
    }
    let article_files = txt_files_sorted(&articles_dir)?;
    if article_files.is_empty() {
        return Err(CorpusError::MissingArticles(dir_path.to_path_buf()));
    }

    let mut documents = Vec::with_capacity(article_files.len());
    for (source_order, path) in article_files.iter().enumerate() {
        let text = read_text(path)?;
        if text.trim().is_empty() {
            return Err(CorpusError::EmptyDocument(path.clone()));
        }
        documents.push(Document {
            id: stem(path),
            text,
            source_order,
        });
    }

    let refs_dir = dir_path.join("refs");
    let mut references = Vec::new();
    if refs_dir.is_dir() {
        for path in txt_files_sorted(&refs_dir)? {
            let text = read_text(&path)?;
            if text.trim().is_empty() {
                return Err(CorpusError::EmptyDocument(path.clone()));
            }
            references.push(text);
        }
    }

    let name = dir_path
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();

    Ok(Topic {
        name,
        documents,
        references,
    })
}

/// Parses `manifest.json` if present. Metadata only.
pub fn read_manifest(dir_path: &Path) -> Result<Option<TopicManifest>, CorpusError> {
    let path = dir_path.join("manifest.json");
    if !path.is_file() {
        return Ok(None);
    }
    let text = read_text(&path)?;
    let manifest = serde_json::from_str(&text).map_err(|e| CorpusError::Manifest {
        path,
        message: e.to_string(),
    })?;
    Ok(Some(manifest))
}

/// Tokens that end with a period without ending a sentence.
const ABBREVIATIONS: [&str; 12] = [
    "Mr.", "Mrs.", "Dr.", "St.", "U.S.", "vs.", "etc.", "e.g.", "i.e.", "Jr.", "Sr.", "Prof.",
];

fn is_terminator(c: char) -> bool {
    matches!(c, '.' | '!' | '?')
}

/// Splits raw text into trimmed sentences.
///
/// Boundary rule: a sentence ends after `.`, `!` or `?` when the terminator
/// is followed by whitespace and then an uppercase letter, or by end of
/// text, except when the token ending at the terminator is a guarded
/// abbreviation. Degenerate input (no terminator) yields a single sentence;
/// whitespace-only input yields none.
pub fn segment_text(text: &str) -> Vec<String> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut sentences = Vec::new();
    let mut start = 0usize; // byte offset of the current sentence start

    let mut i = 0;
    while i < chars.len() {
        let (byte_pos, c) = chars[i];
        if is_terminator(c) {
            // Token ending at this terminator, for the abbreviation guard.
            let token_start = chars[..i]
                .iter()
                .rposition(|&(_, ch)| ch.is_whitespace())
                .map(|p| chars[p].0 + chars[p].1.len_utf8())
                .unwrap_or(start);
            let token = &text[token_start..byte_pos + c.len_utf8()];
            let guarded = c == '.' && ABBREVIATIONS.contains(&token);

            // What follows: a whitespace run, then either an uppercase
            // letter or end of text.
            let mut j = i + 1;
            while j < chars.len() && chars[j].1.is_whitespace() {
                j += 1;
            }
            let at_end = j == chars.len();
            let ws_followed = j > i + 1 || at_end;
            let upper_next = !at_end && chars[j].1.is_uppercase();

            if !guarded && ws_followed && (upper_next || at_end) {
                let sentence = text[start..byte_pos + c.len_utf8()].trim();
                if !sentence.is_empty() {
                    sentences.push(sentence.to_string());
                }
                start = if at_end { text.len() } else { chars[j].0 };
                i = j;
                continue;
            }
        }
        i += 1;
    }

    let tail = text[start..].trim();
    if !tail.is_empty() {
        sentences.push(tail.to_string());
    }
    sentences
}

/// Segments one document. `global_index` is document-local here (equal to
/// `index_in_doc`); [`topic_sentences`] assigns topic-wide indices.
pub fn segment_sentences(doc: &Document) -> Vec<Sentence> {
    segment_text(&doc.text)
        .into_iter()
        .enumerate()
        .map(|(idx, text)| {
            let char_len = text.chars().count();
            Sentence {
                doc_id: doc.id.clone(),
                index_in_doc: idx,
                global_index: idx,
                text,
                char_len,
            }
        })
        .collect()
}

/// All sentences of a topic in document order, with contiguous global
/// indices from 0.
pub fn topic_sentences(topic: &Topic) -> Vec<Sentence> {
    let mut out = Vec::new();
    for doc in &topic.documents {
        for mut sentence in segment_sentences(doc) {
            sentence.global_index = out.len();
            out.push(sentence);
        }
    }
    out
}

/// Takes whole sentences from the front of `text` until the cumulative
/// whitespace-delimited word count reaches `n_words`.
fn head_words(text: &str, n_words: usize) -> String {
    let mut taken = Vec::new();
    let mut words = 0usize;
    for sentence in segment_text(text) {
        words += sentence.split_whitespace().count();
        taken.push(sentence);
        if words >= n_words {
            break;
        }
    }
    taken.join(" ")
}

/// Selects up to `n_docs` documents uniformly without replacement (seeded)
/// and concatenates roughly the first `n_words` words of each, extended to
/// the end of the sentence in progress. Selection order follows
/// `source_order`. The result is a synthetic document `<topic>-truncated`.
pub fn truncate_heads(topic: &Topic, n_docs: usize, n_words: usize, seed: u64) -> Document {
    assert!(n_docs >= 1 && n_words >= 1);
    let mut rng = Xorshift64Star::seeded(seed);
    let picked = rng.sample_indices(topic.documents.len(), n_docs);
    let parts: Vec<String> = picked
        .iter()
        .map(|&i| head_words(&topic.documents[i].text, n_words))
        .collect();
    Document {
        id: format!("{}-truncated", topic.name),
        text: parts.join(" "),
        source_order: 0,
    }
}
