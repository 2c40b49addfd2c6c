//! Sentence embeddings behind interchangeable backends, plus the similarity
//! primitives used by clustering and the diversity penalty.
//!
//! Three backends produce vectors:
//!
//! - `hashed_tfidf`: deterministic feature-hashed tf-idf, no model files
//! - `file`: precomputed vectors from a JSONL file keyed by sentence
//! - `remote`: an HTTP service speaking `POST <endpoint>/embed`
//!
//! The hashed backend is bit-reproducible: the hash is FNV-1a (64-bit),
//! accumulation walks tokens in sorted order, and idf depends only on
//! corpus-level counts, so the same topic always embeds to the same bits.

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Sentence;
use crate::rouge::tokenize;

#[derive(Debug, Error)]
pub enum EmbedError {
    #[error("embedding dim must be at least 8, got {0}")]
    InvalidDim(usize),
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("zero vector has no direction")]
    ZeroVector,
    #[error("non-finite value in embedding")]
    NonFinite,
    #[error("no embedding for sentence key {0}")]
    MissingEmbedding(String),
    #[error("embedding file {path} line {line}: {message}")]
    ParseError {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("duplicate embedding key {0}")]
    DuplicateKey(String),
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

/// A fixed-length real vector. Construction rejects NaN and infinities, so
/// downstream arithmetic never has to re-check.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingVector {
    values: Vec<f64>,
}

impl EmbeddingVector {
    pub fn new(values: Vec<f64>) -> Result<Self, EmbedError> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(EmbedError::NonFinite);
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn l2_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Which similarity to compute between two vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    /// Raw inner product. Default for the diversity penalty.
    Dot,
    /// Angle-based, scale-invariant. Default for clustering.
    Cosine,
}

/// Symmetric n-by-n similarity matrix, stored row-major. Each unordered
/// pair is computed once and mirrored, so symmetry is exact, not approximate.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl SimilarityMatrix {
    /// Builds from a function of (i, j), evaluated only for i ≤ j.
    pub fn from_fn<E>(n: usize, mut f: impl FnMut(usize, usize) -> Result<f64, E>) -> Result<Self, E> {
        assert!(n >= 1);
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = f(i, j)?;
                entries[i * n + j] = v;
                entries[j * n + i] = v;
            }
        }
        Ok(Self { n, entries })
    }

    /// Builds from explicit rows. Panics unless the matrix is square,
    /// finite, and exactly symmetric.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Self {
        let n = rows.len();
        assert!(n >= 1);
        assert!(rows.iter().all(|r| r.len() == n));
        let entries: Vec<f64> = rows.into_iter().flatten().collect();
        assert!(entries.iter().all(|v| v.is_finite()));
        let m = Self { n, entries };
        for i in 0..n {
            for j in 0..i {
                assert!(m.get(i, j) == m.get(j, i), "asymmetric at ({i}, {j})");
            }
        }
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        assert!(i < self.n && j < self.n);
        self.entries[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        assert!(i < self.n);
        &self.entries[i * self.n..(i + 1) * self.n]
    }
}

/// Backend selection. Exactly the fields for the chosen kind exist.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EmbeddingBackendConfig {
    HashedTfidf { dim: usize },
    File { path: PathBuf },
    Remote {
        endpoint: String,
        #[serde(default = "default_timeout_ms")]
        timeout_ms: u64,
    },
}

fn default_timeout_ms() -> u64 {
    30_000
}

/// FNV-1a over the token's UTF-8 bytes.
pub fn fnv1a64(data: &str) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for byte in data.as_bytes() {
        hash ^= u64::from(*byte);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// Maps a token to its feature bucket and sign. The bucket is the hash mod
/// `dim`; the sign comes from the hash's top bit, which is independent of
/// the bucket for any dim below 2^63.
pub fn token_bucket(token: &str, dim: usize) -> (usize, f64) {
    let hash = fnv1a64(token);
    let bucket = (hash % dim as u64) as usize;
    let sign = if hash >> 63 == 0 { 1.0 } else { -1.0 };
    (bucket, sign)
}

/// Inverse document frequency over a topic's sentences: ln(1 + N/df).
pub fn idf(n_sentences: usize, df: usize) -> f64 {
    (1.0 + n_sentences as f64 / df as f64).ln()
}

/// Feature-hashed tf-idf embeddings for a whole topic at once. idf counts
/// come from the given sentences, so the vectors are a function of the
/// topic, not of any global state.
///
/// A sentence with no alphanumeric characters embeds to the zero vector.
pub fn hashed_tfidf_embed(
    corpus_sentences: &[Sentence],
    dim: usize,
) -> Result<Vec<EmbeddingVector>, EmbedError> {
    if dim < 8 {
        return Err(EmbedError::InvalidDim(dim));
    }
    assert!(!corpus_sentences.is_empty());

    let tokenized: Vec<Vec<String>> = corpus_sentences
        .iter()
        .map(|s| tokenize(&s.text))
        .collect();

    let n = corpus_sentences.len();
    let mut df: HashMap<&str, usize> = HashMap::new();
    for tokens in &tokenized {
        let mut seen: Vec<&str> = tokens.iter().map(String::as_str).collect();
        seen.sort_unstable();
        seen.dedup();
        for t in seen {
            *df.entry(t).or_insert(0) += 1;
        }
    }

    let mut out = Vec::with_capacity(n);
    for tokens in &tokenized {
        // BTreeMap fixes the accumulation order, keeping float rounding
        // identical across runs.
        let mut tf: BTreeMap<&str, usize> = BTreeMap::new();
        for t in tokens {
            *tf.entry(t.as_str()).or_insert(0) += 1;
        }
        let mut values = vec![0.0; dim];
        for (token, count) in tf {
            let weight = count as f64 * idf(n, df[token]);
            let (bucket, sign) = token_bucket(token, dim);
            values[bucket] += sign * weight;
        }
        let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            for v in &mut values {
                *v /= norm;
            }
        }
        out.push(EmbeddingVector { values });
    }
    Ok(out)
}

#[derive(Deserialize)]
struct EmbeddingLine {
    key: String,
    vector: Vec<f64>,
}

/// Parses a JSONL embedding file: one `{"key": ..., "vector": [...]}` per
/// line, keys shaped `<doc_id>#<index_in_doc>`. Blank lines are skipped.
pub fn load_embedding_file(path: &Path) -> Result<HashMap<String, EmbeddingVector>, EmbedError> {
    let text = std::fs::read_to_string(path).map_err(|source| EmbedError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut map = HashMap::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let parsed: EmbeddingLine =
            serde_json::from_str(line).map_err(|e| EmbedError::ParseError {
                path: path.to_path_buf(),
                line: idx + 1,
                message: e.to_string(),
            })?;
        let vector = EmbeddingVector::new(parsed.vector).map_err(|_| EmbedError::ParseError {
            path: path.to_path_buf(),
            line: idx + 1,
            message: "non-finite value".to_string(),
        })?;
        if map.contains_key(&parsed.key) {
            return Err(EmbedError::DuplicateKey(parsed.key));
        }
        map.insert(parsed.key, vector);
    }
    Ok(map)
}

#[derive(Serialize)]
struct EmbedRequest<'a> {
    texts: Vec<&'a str>,
}

#[derive(Deserialize)]
struct EmbedResponse {
    vectors: Vec<Vec<f64>>,
}

fn body_excerpt(body: &str) -> String {
    body.chars().take(200).collect()
}

fn remote_embed(
    endpoint: &str,
    timeout_ms: u64,
    texts: Vec<&str>,
) -> Result<Vec<EmbeddingVector>, EmbedError> {
    let n_texts = texts.len();
    let client = reqwest::blocking::Client::builder()
        .timeout(Duration::from_millis(timeout_ms))
        .build()
        .map_err(|e| EmbedError::RemoteTransport(e.to_string()))?;
    let url = format!("{}/embed", endpoint.trim_end_matches('/'));
    let response = client
        .post(&url)
        .json(&EmbedRequest { texts })
        .send()
        .map_err(|e| EmbedError::RemoteTransport(e.to_string()))?;

    let status = response.status().as_u16();
    let body = response
        .text()
        .map_err(|e| EmbedError::RemoteTransport(e.to_string()))?;
    if status != 200 {
        return Err(EmbedError::RemoteError {
            status,
            body: body_excerpt(&body),
        });
    }
    let parsed: EmbedResponse = serde_json::from_str(&body).map_err(|_| EmbedError::RemoteError {
        status,
        body: body_excerpt(&body),
    })?;
    if parsed.vectors.len() != n_texts {
        return Err(EmbedError::RemoteError {
            status,
            body: format!("expected {} vectors, got {}", n_texts, parsed.vectors.len()),
        });
    }
    parsed.vectors.into_iter().map(EmbeddingVector::new).collect()
}

/// Embeds sentences through the configured backend. Output is order-aligned
/// with the input and dimension-checked.
pub fn embed_batch(
    config: &EmbeddingBackendConfig,
    sentences: &[Sentence],
) -> Result<Vec<EmbeddingVector>, EmbedError> {
    assert!(!sentences.is_empty());
    let vectors = match config {
        EmbeddingBackendConfig::HashedTfidf { dim } => hashed_tfidf_embed(sentences, *dim)?,
        EmbeddingBackendConfig::File { path } => {
            let map = load_embedding_file(path)?;
            let mut out = Vec::with_capacity(sentences.len());
            for sentence in sentences {
                let key = sentence.key();
                let vector = map
                    .get(&key)
                    .cloned()
                    .ok_or(EmbedError::MissingEmbedding(key))?;
                out.push(vector);
            }
            out
        }
        EmbeddingBackendConfig::Remote {
            endpoint,
            timeout_ms,
        } => {
            let texts: Vec<&str> = sentences.iter().map(|s| s.text.as_str()).collect();
            remote_embed(endpoint, *timeout_ms, texts)?
        }
    };
    let dim = vectors[0].dim();
    for v in &vectors {
        if v.dim() != dim {
            return Err(EmbedError::DimensionMismatch(dim, v.dim()));
        }
    }
    Ok(vectors)
}

pub fn dot(u: &EmbeddingVector, v: &EmbeddingVector) -> Result<f64, EmbedError> {
    if u.dim() != v.dim() {
        return Err(EmbedError::DimensionMismatch(u.dim(), v.dim()));
    }
    Ok(u.values
        .iter()
        .zip(&v.values)
        .map(|(a, b)| a * b)
        .sum())
}

/// dot(u, v) / (‖u‖ ‖v‖), clamped to [-1, 1].
pub fn cosine(u: &EmbeddingVector, v: &EmbeddingVector) -> Result<f64, EmbedError> {
    let nu = u.l2_norm();
    let nv = v.l2_norm();
    if nu == 0.0 || nv == 0.0 {
        return Err(EmbedError::ZeroVector);
    }
    Ok((dot(u, v)? / (nu * nv)).clamp(-1.0, 1.0))
}

/// Pairwise similarities under the chosen metric. Each unordered pair is
/// computed once, so the result is exactly symmetric.
pub fn pairwise_similarity(
    vectors: &[EmbeddingVector],
    metric: Metric,
) -> Result<SimilarityMatrix, EmbedError> {
    assert!(!vectors.is_empty());
    SimilarityMatrix::from_fn(vectors.len(), |i, j| match metric {
        Metric::Dot => dot(&vectors[i], &vectors[j]),
        Metric::Cosine => cosine(&vectors[i], &vectors[j]),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sent(doc: &str, idx: usize, text: &str) -> Sentence {
        Sentence {
            doc_id: doc.to_string(),
            index_in_doc: idx,
            global_index: idx,
            text: text.to_string(),
            char_len: text.chars().count(),
        }
    }

    fn vecf(values: &[f64]) -> EmbeddingVector {
        EmbeddingVector::new(values.to_vec()).unwrap()
    }

    #[test]
    fn non_finite_values_rejected() {
        assert!(matches!(
            EmbeddingVector::new(vec![1.0, f64::NAN]),
            Err(EmbedError::NonFinite)
        ));
        assert!(matches!(
            EmbeddingVector::new(vec![f64::INFINITY]),
            Err(EmbedError::NonFinite)
        ));
    }

    #[test]
    fn idf_single_sentence_corpus_is_ln_two() {
        assert!((idf(1, 1) - 2.0_f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn identical_sentences_embed_identically() {
        let sents = [sent("a", 0, "the cat sat"), sent("a", 1, "the cat sat")];
        let vs = hashed_tfidf_embed(&sents, 64).unwrap();
        assert_eq!(vs[0], vs[1]);
    }

    #[test]
    fn hashed_vectors_are_unit_norm() {
        let sents = [
            sent("a", 0, "some words about a harbor"),
            sent("a", 1, "entirely different content here"),
        ];
        for v in hashed_tfidf_embed(&sents, 64).unwrap() {
            assert!((v.l2_norm() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn dim_below_eight_rejected() {
        let sents = [sent("a", 0, "x")];
        assert!(matches!(
            hashed_tfidf_embed(&sents, 7),
            Err(EmbedError::InvalidDim(7))
        ));
    }

    #[test]
    fn idf_ratio_shows_in_components() {
        // df(cat)=2 of N=2 so idf=ln(2); df(dog)=1 so idf=ln(3). In the
        // first sentence both have tf=1, so the component magnitudes are in
        // ratio ln(2) : ln(3) after shared normalization.
        let sents = [sent("a", 0, "cat dog"), sent("a", 1, "cat")];
        let vs = hashed_tfidf_embed(&sents, 4096).unwrap();
        let (b_cat, _) = token_bucket("cat", 4096);
        let (b_dog, _) = token_bucket("dog", 4096);
        assert_ne!(b_cat, b_dog);
        let ratio = vs[0].values()[b_cat].abs() / vs[0].values()[b_dog].abs();
        assert!((ratio - 2.0_f64.ln() / 3.0_f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn disjoint_buckets_give_zero_cosine() {
        let a = "alpha beta gamma";
        let b = "delta epsilon zeta";
        let dim = 4096;
        let buckets_a: Vec<usize> = tokenize(a).iter().map(|t| token_bucket(t, dim).0).collect();
        let buckets_b: Vec<usize> = tokenize(b).iter().map(|t| token_bucket(t, dim).0).collect();
        assert!(
            buckets_a.iter().all(|x| !buckets_b.contains(x)),
            "chosen vocabularies collide: {buckets_a:?} vs {buckets_b:?}"
        );

        let sents = [sent("a", 0, a), sent("a", 1, b)];
        let vs = hashed_tfidf_embed(&sents, dim).unwrap();
        assert!(cosine(&vs[0], &vs[1]).unwrap().abs() < 1e-9);
    }

    #[test]
    fn same_text_cosine_is_one() {
        let sents = [sent("a", 0, "the cat sat"), sent("b", 0, "the cat sat")];
        let vs = hashed_tfidf_embed(&sents, 64).unwrap();
        assert!((cosine(&vs[0], &vs[1]).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn punctuation_only_sentence_embeds_to_zero() {
        let sents = [sent("a", 0, "?!"), sent("a", 1, "words")];
        let vs = hashed_tfidf_embed(&sents, 64).unwrap();
        assert_eq!(vs[0].l2_norm(), 0.0);
        assert!(matches!(
            cosine(&vs[0], &vs[1]),
            Err(EmbedError::ZeroVector)
        ));
        assert_eq!(dot(&vs[0], &vs[1]).unwrap(), 0.0);
    }

    #[test]
    fn reordering_sentences_permutes_rows_bit_exactly() {
        let texts = ["the cat sat", "a dog ran far", "birds fly south"];
        let fwd: Vec<Sentence> = texts
            .iter()
            .enumerate()
            .map(|(i, t)| sent("a", i, t))
            .collect();
        let rev: Vec<Sentence> = texts
            .iter()
            .rev()
            .enumerate()
            .map(|(i, t)| sent("a", i, t))
            .collect();
        let vf = hashed_tfidf_embed(&fwd, 256).unwrap();
        let vr = hashed_tfidf_embed(&rev, 256).unwrap();
        assert_eq!(vf[0], vr[2]);
        assert_eq!(vf[1], vr[1]);
        assert_eq!(vf[2], vr[0]);
    }

    #[test]
    fn dot_hand_values() {
        assert_eq!(dot(&vecf(&[1.0, 0.0]), &vecf(&[0.0, 1.0])).unwrap(), 0.0);
        assert_eq!(dot(&vecf(&[1.0, 2.0]), &vecf(&[3.0, 4.0])).unwrap(), 11.0);
        let unit = vecf(&[0.6, 0.8]);
        assert!((dot(&unit, &unit).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn dot_rejects_dim_mismatch() {
        assert!(matches!(
            dot(&vecf(&[1.0]), &vecf(&[1.0, 2.0])),
            Err(EmbedError::DimensionMismatch(1, 2))
        ));
    }

    #[test]
    fn cosine_parallel_antiparallel_zero() {
        let u = vecf(&[2.0, 0.0]);
        assert_eq!(cosine(&u, &vecf(&[5.0, 0.0])).unwrap(), 1.0);
        assert_eq!(cosine(&u, &vecf(&[-3.0, 0.0])).unwrap(), -1.0);
        assert!(matches!(
            cosine(&u, &vecf(&[0.0, 0.0])),
            Err(EmbedError::ZeroVector)
        ));
    }

    #[test]
    fn pairwise_single_vector() {
        let m = pairwise_similarity(&[vecf(&[1.0, 2.0])], Metric::Dot).unwrap();
        assert_eq!(m.n(), 1);
        assert_eq!(m.get(0, 0), 5.0);
    }

    #[test]
    fn pairwise_orthonormal_cosine_is_identity() {
        let vs = [
            vecf(&[1.0, 0.0, 0.0]),
            vecf(&[0.0, 1.0, 0.0]),
            vecf(&[0.0, 0.0, 1.0]),
        ];
        let m = pairwise_similarity(&vs, Metric::Cosine).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert_eq!(m.get(i, j), expect);
            }
        }
    }

    #[test]
    fn embed_batch_hashed_matches_direct_call() {
        let sents = [sent("a", 0, "one two"), sent("a", 1, "three four")];
        let config = EmbeddingBackendConfig::HashedTfidf { dim: 32 };
        let via_batch = embed_batch(&config, &sents).unwrap();
        let direct = hashed_tfidf_embed(&sents, 32).unwrap();
        assert_eq!(via_batch, direct);
    }

    fn write_jsonl(lines: &[&str]) -> (tempfile::TempDir, PathBuf) {
        let tmp = tempfile::tempdir().unwrap();
        let path = tmp.path().join("emb.jsonl");
        std::fs::write(&path, lines.join("\n")).unwrap();
        (tmp, path)
    }

    #[test]
    fn file_backend_round_trip() {
        let (_tmp, path) = write_jsonl(&[
            r#"{"key": "a#0", "vector": [1.0, 0.0]}"#,
            r#"{"key": "a#1", "vector": [0.0, 1.0]}"#,
        ]);
        let config = EmbeddingBackendConfig::File { path };
        let sents = [sent("a", 0, "x"), sent("a", 1, "y")];
        let vs = embed_batch(&config, &sents).unwrap();
        assert_eq!(vs[0].values(), &[1.0, 0.0]);
        assert_eq!(vs[1].values(), &[0.0, 1.0]);
    }

    #[test]
    fn file_backend_reports_missing_key() {
        let (_tmp, path) = write_jsonl(&[r#"{"key": "a#0", "vector": [1.0]}"#]);
        let config = EmbeddingBackendConfig::File { path };
        let sents = [sent("a", 0, "x"), sent("b", 3, "y")];
        match embed_batch(&config, &sents) {
            Err(EmbedError::MissingEmbedding(key)) => assert_eq!(key, "b#3"),
            other => panic!("expected MissingEmbedding, got {other:?}"),
        }
    }

    #[test]
    fn file_backend_dimension_mismatch() {
        let (_tmp, path) = write_jsonl(&[
            r#"{"key": "a#0", "vector": [1.0, 0.0]}"#,
            r#"{"key": "a#1", "vector": [1.0]}"#,
        ]);
        let config = EmbeddingBackendConfig::File { path };
        let sents = [sent("a", 0, "x"), sent("a", 1, "y")];
        assert!(matches!(
            embed_batch(&config, &sents),
            Err(EmbedError::DimensionMismatch(2, 1))
        ));
    }

    #[test]
    fn embedding_file_parse_error_carries_line_number() {
        let (_tmp, path) = write_jsonl(&[
            r#"{"key": "a#0", "vector": [1.0]}"#,
            r#"not json at all"#,
        ]);
        match load_embedding_file(&path) {
            Err(EmbedError::ParseError { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected ParseError, got {other:?}"),
        }
    }

    #[test]
    fn embedding_file_duplicate_key() {
        let (_tmp, path) = write_jsonl(&[
            r#"{"key": "a#0", "vector": [1.0]}"#,
            r#"{"key": "a#0", "vector": [2.0]}"#,
        ]);
        assert!(matches!(
            load_embedding_file(&path),
            Err(EmbedError::DuplicateKey(k)) if k == "a#0"
        ));
    }

    #[test]
    fn embedding_file_skips_blank_lines() {
        let (_tmp, path) = write_jsonl(&[r#"{"key": "a#0", "vector": [1.0]}"#, "", "  "]);
        assert_eq!(load_embedding_file(&path).unwrap().len(), 1);
    }

    #[test]
    fn missing_embedding_file_is_io_error() {
        let config = EmbeddingBackendConfig::File {
            path: PathBuf::from("/nonexistent/emb.jsonl"),
        };
        assert!(matches!(
            embed_batch(&config, &[sent("a", 0, "x")]),
            Err(EmbedError::Io { .. })
        ));
    }

    #[test]
    fn unreachable_remote_is_transport_error() {
        let config = EmbeddingBackendConfig::Remote {
            endpoint: "http://127.0.0.1:1".to_string(),
            timeout_ms: 2_000,
        };
        assert!(matches!(
            embed_batch(&config, &[sent("a", 0, "x")]),
            Err(EmbedError::RemoteTransport(_))
        ));
    }

    #[test]
    fn backend_config_json_shapes() {
        let hashed: EmbeddingBackendConfig =
            serde_json::from_str(r#"{"kind": "hashed_tfidf", "dim": 64}"#).unwrap();
        assert_eq!(hashed, EmbeddingBackendConfig::HashedTfidf { dim: 64 });

        let remote: EmbeddingBackendConfig =
            serde_json::from_str(r#"{"kind": "remote", "endpoint": "http://h:1"}"#).unwrap();
        match remote {
            EmbeddingBackendConfig::Remote { timeout_ms, .. } => assert_eq!(timeout_ms, 30_000),
            other => panic!("wrong kind: {other:?}"),
        }

        assert!(serde_json::from_str::<EmbeddingBackendConfig>(
            r#"{"kind": "hashed_tfidf", "dim": 64, "path": "x"}"#
        )
        .is_err());
    }

    fn arb_vector() -> impl Strategy<Value = EmbeddingVector> {
        proptest::collection::vec(-5.0..5.0f64, 4)
            .prop_map(|v| EmbeddingVector::new(v).unwrap())
    }

    proptest! {
        #[test]
        fn prop_pairwise_exactly_symmetric(
            vs in proptest::collection::vec(arb_vector(), 1..6)
        ) {
            let m = pairwise_similarity(&vs, Metric::Dot).unwrap();
            for i in 0..m.n() {
                for j in 0..m.n() {
                    prop_assert_eq!(m.get(i, j).to_bits(), m.get(j, i).to_bits());
                }
            }
        }

        #[test]
        fn prop_cosine_scale_invariant(v in arb_vector(), scale in 0.01..100.0f64) {
            let u = EmbeddingVector::new(vec![0.3, -1.2, 0.0, 2.0]).unwrap();
            prop_assume!(v.l2_norm() > 1e-6);
            let scaled = EmbeddingVector::new(
                v.values().iter().map(|x| x * scale).collect()
            ).unwrap();
            let a = cosine(&u, &v).unwrap();
            let b = cosine(&u, &scaled).unwrap();
            prop_assert!((a - b).abs() < 1e-9);
        }

        #[test]
        fn prop_cosine_bounded(u in arb_vector(), v in arb_vector()) {
            prop_assume!(u.l2_norm() > 1e-9 && v.l2_norm() > 1e-9);
            let c = cosine(&u, &v).unwrap();
            prop_assert!((-1.0..=1.0).contains(&c));
        }
    }
}
