//! ROUGE-1 recall and precision with clipped unigram counts.
//!
//! Tokenization is deliberately plain: lowercase, split on runs of
//! non-alphanumeric characters, no stemming, no stopword removal. The same
//! tokenizer feeds the hashed tf-idf embedder so lexical overlap and
//! embedding similarity agree on what a token is.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::{RandomSource, Xorshift64Star};

#[derive(Debug, Error)]
pub enum RougeError {
    #[error("no reference summaries to evaluate against")]
    NoReferences,
}

/// Unigram overlap scores between one candidate and one reference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RougeScore {
    /// overlap / reference_tokens, 0 when the reference is empty.
    pub recall: f64,
    /// overlap / candidate_tokens, 0 when the candidate is empty.
    pub precision: f64,
    pub overlap_count: usize,
    pub candidate_tokens: usize,
    pub reference_tokens: usize,
}

impl RougeScore {
    /// Harmonic mean of recall and precision, 0 when both are 0.
    pub fn f1(&self) -> f64 {
        let (r, p) = (self.recall, self.precision);
        if r + p == 0.0 {
            0.0
        } else {
            2.0 * r * p / (r + p)
        }
    }
}

/// Lowercases and splits on non-alphanumeric runs. Empty input gives an
/// empty list.
pub fn tokenize(text: &str) -> Vec<String> {
    text.to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_string)
        .collect()
}

fn counts(tokens: &[String]) -> HashMap<&str, usize> {
    let mut map: HashMap<&str, usize> = HashMap::new();
    for t in tokens {
        *map.entry(t.as_str()).or_insert(0) += 1;
    }
    map
}

/// ROUGE-1 with clipped counts: overlap sums, over unigram types,
/// min(count in candidate, count in reference).
pub fn rouge1(candidate: &str, reference: &str) -> RougeScore {
    let cand = tokenize(candidate);
    let refr = tokenize(reference);
    let cand_counts = counts(&cand);
    let ref_counts = counts(&refr);

    let overlap: usize = cand_counts
        .iter()
        .map(|(token, &c)| c.min(ref_counts.get(token).copied().unwrap_or(0)))
        .sum();

    let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
    RougeScore {
        recall: ratio(overlap, refr.len()),
        precision: ratio(overlap, cand.len()),
        overlap_count: overlap,
        candidate_tokens: cand.len(),
        reference_tokens: refr.len(),
    }
}

/// How to reduce scores over several reference summaries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "strategy", rename_all = "snake_case")]
pub enum RefStrategy {
    /// Evaluate against one reference chosen uniformly by the seed.
    PickSeeded { seed: u64 },
    /// Evaluate against every reference and keep the best by F1; ties keep
    /// the earliest reference.
    Best,
}

/// Scores a candidate against a non-empty reference set.
pub fn rouge1_against_refs(
    candidate: &str,
    references: &[String],
    strategy: RefStrategy,
) -> Result<RougeScore, RougeError> {
    if references.is_empty() {
        return Err(RougeError::NoReferences);
    }
    match strategy {
        RefStrategy::PickSeeded { seed } => {
            let mut rng = Xorshift64Star::seeded(seed);
            let idx = rng.below(references.len());
            Ok(rouge1(candidate, &references[idx]))
        }
        RefStrategy::Best => {
            let mut best = rouge1(candidate, &references[0]);
            for reference in &references[1..] {
                let score = rouge1(candidate, reference);
                if score.f1() > best.f1() {
                    best = score;
                }
            }
            Ok(best)
        }
    }
}
