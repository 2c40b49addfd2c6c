//! Summary construction: cluster representatives, budgeted assembly, the
//! diversity objective, and the pipeline that ties the stages together.
//!
//! The selection objective scored here is
//!
//! ```text
//! J(S) = -Σ_{i in S} salience_i + λ Σ_{i≠j in S} sim(i, j)
//! ```
//!
//! with the pair sum running over ordered pairs. The same pairwise term
//! appears in [`diversity_loss`] on top of a binary cross-entropy fit, which
//! makes external classifier scores and summary membership interchangeable
//! inputs: high similarity between co-selected sentences is penalized, so
//! minimizing J favors salient but mutually dissimilar selections.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::argument::{classify_arguments, partition, ArgumentBackendConfig};
use crate::cluster::{agglomerative, kmeans_restarts, ClusterError, KMeansOptions};
use crate::corpus::{topic_sentences, Sentence, Topic};
use crate::embed::{
    embed_batch, pairwise_similarity, EmbedError, EmbeddingBackendConfig, EmbeddingVector, Metric,
    SimilarityMatrix,
};

#[derive(Debug, Error)]
pub enum SummarizeError {
    #[error("cluster has no members")]
    EmptyCluster,
    #[error("select_count must be between 1 and {n}, got {count}")]
    InvalidCount { count: usize, n: usize },
    #[error("instance too large for exhaustive search: {0} items, limit 20")]
    TooLarge(usize),
    #[error("ground truth labels are required")]
    MissingGroundTruth,
    #[error("instance shape mismatch: {0}")]
    LengthMismatch(String),
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("segmentation stage produced no sentences")]
    NoSentences,
    #[error("config: {0}")]
    Config(String),
    #[error("embedding stage: {0}")]
    Embedding(#[from] EmbedError),
    #[error("classification stage: {0}")]
    Classification(#[from] crate::argument::ArgError),
    #[error("clustering stage: {0}")]
    Clustering(#[from] ClusterError),
    #[error("selection stage: {0}")]
    Selection(#[from] SummarizeError),
    #[error("mode {0} requires a classifier backend")]
    MissingClassifier(&'static str),
}

/// An instance of the selection problem: per-item inclusion scores, their
/// pairwise similarities, and optionally the true membership labels.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionInstance {
    /// Probability-like inclusion scores in [0, 1].
    pub salience: Vec<f64>,
    pub sim: SimilarityMatrix,
    pub ground_truth: Option<Vec<bool>>,
}

impl SelectionInstance {
    fn check(&self) -> Result<(), SummarizeError> {
        let n = self.salience.len();
        if self.sim.n() != n {
            return Err(SummarizeError::LengthMismatch(format!(
                "{} salience scores vs {}x{} similarity matrix",
                n,
                self.sim.n(),
                self.sim.n()
            )));
        }
        if let Some(gt) = &self.ground_truth {
            if gt.len() != n {
                return Err(SummarizeError::LengthMismatch(format!(
                    "{} ground truth labels vs {} items",
                    gt.len(),
                    n
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SummaryMode {
    /// Summarize everything; clustering optional via `cluster_in_full_mode`.
    Full,
    /// Keep classified arguments only, in source order, no clustering.
    OnlyArguments,
    /// Separate argument and non-argument summaries under split budgets.
    Mix,
    /// Diversity-penalized selection over all sentences.
    Diverse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum ClusteringKind {
    #[default]
    #[serde(rename = "kmeans")]
    KMeans,
    #[serde(rename = "agglomerative")]
    Agglomerative,
}

fn d_total() -> usize {
    660
}
fn d_nonarg() -> usize {
    330
}
fn d_maxsent() -> usize {
    200
}
fn d_k() -> usize {
    5
}
fn d_lambda() -> f64 {
    1.0
}
fn d_true() -> bool {
    true
}

/// Everything that shapes one summary run. Echoed into every [`Summary`] so
/// results stay traceable to their parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SummaryConfig {
    pub mode: SummaryMode,
    #[serde(default = "d_total")]
    pub total_budget_chars: usize,
    /// Mix mode: character budget of the non-argument part; the argument
    /// part gets the remainder.
    #[serde(default = "d_nonarg")]
    pub mix_nonarg_budget_chars: usize,
    /// Sentences at or above this length are filtered before assembly,
    /// unless the filter would empty a non-empty candidate list.
    #[serde(default = "d_maxsent")]
    pub max_sentence_chars: usize,
    #[serde(default)]
    pub clustering: ClusteringKind,
    #[serde(default = "d_k")]
    pub k: usize,
    /// λ weight on the pairwise similarity penalty (diverse mode).
    #[serde(default = "d_lambda")]
    pub diversity_weight: f64,
    /// Diverse mode: how many sentences to select before assembly.
    /// Defaults to ceil(total_budget_chars / 132) capped at the corpus size.
    #[serde(default)]
    pub select_count: Option<usize>,
    /// Include i == j terms in the pairwise penalty sums.
    #[serde(default)]
    pub include_diagonal: bool,
    #[serde(default = "d_true")]
    pub cluster_in_full_mode: bool,
    #[serde(default)]
    pub seed: u64,
}

impl Default for SummaryConfig {
    fn default() -> Self {
        Self {
            mode: SummaryMode::Full,
            total_budget_chars: d_total(),
            mix_nonarg_budget_chars: d_nonarg(),
            max_sentence_chars: d_maxsent(),
            clustering: ClusteringKind::default(),
            k: d_k(),
            diversity_weight: d_lambda(),
            select_count: None,
            include_diagonal: false,
            cluster_in_full_mode: d_true(),
            seed: 0,
        }
    }
}

impl SummaryConfig {
    pub fn validate(&self) -> Result<(), PipelineError> {
        let fail = |msg: String| Err(PipelineError::Config(msg));
        if self.total_budget_chars < 1 {
            return fail("total_budget_chars must be at least 1".into());
        }
        if self.max_sentence_chars < 1 {
            return fail("max_sentence_chars must be at least 1".into());
        }
        if self.k < 1 {
            return fail("k must be at least 1".into());
        }
        if self.diversity_weight.is_nan() || self.diversity_weight < 0.0 {
            return fail(format!(
                "diversity_weight must be non-negative, got {}",
                self.diversity_weight
            ));
        }
        if self.select_count == Some(0) {
            return fail("select_count must be at least 1 when set".into());
        }
        if self.mode == SummaryMode::Mix
            && !(1..self.total_budget_chars).contains(&self.mix_nonarg_budget_chars)
        {
            return fail(format!(
                "mix_nonarg_budget_chars must be in [1, {}), got {}",
                self.total_budget_chars, self.mix_nonarg_budget_chars
            ));
        }
        Ok(())
    }
}

/// A budget-assembled piece of text with the indices of its sentences, in
/// text order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Assembled {
    pub text: String,
    pub sentence_indices: Vec<usize>,
    pub char_len: usize,
}

/// Final summary of a topic under one config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub text: String,
    /// Global sentence indices in text order. Within each mix part the
    /// indices increase; the argument part precedes the non-argument part.
    pub sentence_indices: Vec<usize>,
    pub char_len: usize,
    pub config_echo: SummaryConfig,
}

impl Summary {
    fn from_assembled(assembled: Assembled, config: &SummaryConfig) -> Self {
        Self {
            text: assembled.text,
            sentence_indices: assembled.sentence_indices,
            char_len: assembled.char_len,
            config_echo: config.clone(),
        }
    }
}

/// Counts observed along one pipeline run.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineStats {
    pub n_sentences: usize,
    /// Sentences classified as arguments, when classification ran.
    pub n_arguments: Option<usize>,
    /// Clusters formed in full mode, when clustering ran.
    pub n_clusters: Option<usize>,
    /// Candidate sentences handed to assembly, after selection and before
    /// the budget is applied.
    pub n_candidates: usize,
    pub arg_part_chars: Option<usize>,
    pub nonarg_part_chars: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOutput {
    pub summary: Summary,
    pub stats: PipelineStats,
}

/// Backend choices for the two model-shaped stages. A missing classifier is
/// allowed: full mode never classifies and diverse mode falls back to
/// uniform salience.
#[derive(Debug, Clone, PartialEq)]
pub struct Backends {
    pub embedding: EmbeddingBackendConfig,
    pub classifier: Option<ArgumentBackendConfig>,
}

impl Default for Backends {
    fn default() -> Self {
        Self {
            embedding: EmbeddingBackendConfig::HashedTfidf { dim: 1024 },
            classifier: Some(ArgumentBackendConfig::default()),
        }
    }
}

/// Member of `cluster_member_indices` closest to the centroid in Euclidean
/// distance; ties take the lowest index.
pub fn representative_centroid(
    cluster_member_indices: &[usize],
    embeddings: &[EmbeddingVector],
    centroid: &EmbeddingVector,
) -> Result<usize, SummarizeError> {
    let mut best: Option<(usize, f64)> = None;
    for &m in cluster_member_indices {
        let d = embeddings[m]
            .values()
            .iter()
            .zip(centroid.values())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>();
        let better = match best {
            None => true,
            Some((bm, bd)) => d < bd || (d == bd && m < bm),
        };
        if better {
            best = Some((m, d));
        }
    }
    best.map(|(m, _)| m).ok_or(SummarizeError::EmptyCluster)
}

/// Member with the highest sum of similarities to the other members
/// (self-similarity excluded); ties take the lowest index.
pub fn representative_cumulative(
    cluster_member_indices: &[usize],
    sim: &SimilarityMatrix,
) -> Result<usize, SummarizeError> {
    let mut best: Option<(usize, f64)> = None;
    for &m in cluster_member_indices {
        let total: f64 = cluster_member_indices
            .iter()
            .filter(|&&j| j != m)
            .map(|&j| sim.get(m, j))
            .sum();
        let better = match best {
            None => true,
            Some((bm, bt)) => total > bt || (total == bt && m < bm),
        };
        if better {
            best = Some((m, total));
        }
    }
    best.map(|(m, _)| m).ok_or(SummarizeError::EmptyCluster)
}

/// Packs candidates into `budget_chars` characters. Sentences of
/// `max_sentence_chars` or more are dropped first, unless that would drop
/// every candidate, in which case the length filter is waived. Candidates
/// are then greedily appended in the given order; one that does not fit is
/// skipped, not a stopping point. Joining spaces count against the budget.
pub fn assemble(candidates: &[Sentence], budget_chars: usize, max_sentence_chars: usize) -> Assembled {
    assert!(budget_chars >= 1);
    let short: Vec<&Sentence> = candidates
        .iter()
        .filter(|s| s.char_len < max_sentence_chars)
        .collect();
    let pool: Vec<&Sentence> = if short.is_empty() {
        candidates.iter().collect()
    } else {
        short
    };

    let mut taken: Vec<&Sentence> = Vec::new();
    let mut used = 0usize;
    for sentence in pool {
        let cost = if taken.is_empty() {
            sentence.char_len
        } else {
            sentence.char_len + 1
        };
        if used + cost <= budget_chars {
            used += cost;
            taken.push(sentence);
        }
    }

    let text = taken
        .iter()
        .map(|s| s.text.as_str())
        .collect::<Vec<_>>()
        .join(" ");
    debug_assert_eq!(text.chars().count(), used);
    Assembled {
        text,
        sentence_indices: taken.iter().map(|s| s.global_index).collect(),
        char_len: used,
    }
}

/// Binary cross-entropy of one prediction, with the prediction clamped to
/// [ε, 1-ε], ε = 1e-7.
fn bce(truth: bool, prediction: f64) -> f64 {
    let p = prediction.clamp(1e-7, 1.0 - 1e-7);
    if truth {
        -p.ln()
    } else {
        -(1.0 - p).ln()
    }
}

/// The fit-plus-diversity loss: Σ BCE(v_i, v̂_i) over items plus
/// Σ v̂_i v̂_j sim(i, j) over ordered pairs with i ≠ j.
pub fn diversity_loss(instance: &SelectionInstance) -> Result<f64, SummarizeError> {
    diversity_loss_with(instance, false)
}

/// Same loss with the pair sum's diagonal included on demand.
pub fn diversity_loss_with(
    instance: &SelectionInstance,
    include_diagonal: bool,
) -> Result<f64, SummarizeError> {
    instance.check()?;
    let truth = instance
        .ground_truth
        .as_ref()
        .ok_or(SummarizeError::MissingGroundTruth)?;
    let clamped: Vec<f64> = instance
        .salience
        .iter()
        .map(|p| p.clamp(1e-7, 1.0 - 1e-7))
        .collect();

    let fit: f64 = truth
        .iter()
        .zip(&clamped)
        .map(|(&v, &p)| bce(v, p))
        .sum();

    let n = clamped.len();
    let mut penalty = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j || include_diagonal {
                penalty += clamped[i] * clamped[j] * instance.sim.get(i, j);
            }
        }
    }
    Ok(fit + penalty)
}

fn pair_mass(sim: &SimilarityMatrix, selected: &[usize], include_diagonal: bool) -> f64 {
    let mut mass = 0.0;
    for &i in selected {
        for &j in selected {
            if i != j || include_diagonal {
                mass += sim.get(i, j);
            }
        }
    }
    mass
}

/// J(S) = -Σ salience + λ Σ over ordered pairs of sim.
fn objective(
    salience: &[f64],
    sim: &SimilarityMatrix,
    selected: &[usize],
    lambda: f64,
    include_diagonal: bool,
) -> f64 {
    let gain: f64 = selected.iter().map(|&i| salience[i]).sum();
    -gain + lambda * pair_mass(sim, selected, include_diagonal)
}

fn check_selection_inputs(
    salience: &[f64],
    sim: &SimilarityMatrix,
    select_count: usize,
    lambda: f64,
) -> Result<(), SummarizeError> {
    let n = salience.len();
    if sim.n() != n {
        return Err(SummarizeError::LengthMismatch(format!(
            "{} salience scores vs {}x{} similarity matrix",
            n,
            sim.n(),
            sim.n()
        )));
    }
    if select_count < 1 || select_count > n {
        return Err(SummarizeError::InvalidCount {
            count: select_count,
            n,
        });
    }
    assert!(lambda >= 0.0);
    Ok(())
}

/// Greedy minimization of J: starting empty, repeatedly adds the index with
/// the smallest marginal change, lowest index on ties. Returns ascending
/// indices.
pub fn greedy_diverse_select(
    salience: &[f64],
    sim: &SimilarityMatrix,
    select_count: usize,
    lambda: f64,
) -> Result<Vec<usize>, SummarizeError> {
    greedy_diverse_select_with(salience, sim, select_count, lambda, false)
}

pub fn greedy_diverse_select_with(
    salience: &[f64],
    sim: &SimilarityMatrix,
    select_count: usize,
    lambda: f64,
    include_diagonal: bool,
) -> Result<Vec<usize>, SummarizeError> {
    check_selection_inputs(salience, sim, select_count, lambda)?;
    let n = salience.len();
    let mut selected: Vec<usize> = Vec::with_capacity(select_count);
    let mut in_set = vec![false; n];

    while selected.len() < select_count {
        let mut best: Option<(usize, f64)> = None;
        for x in 0..n {
            if in_set[x] {
                continue;
            }
            // Adding x contributes its salience and a pair term against
            // every already-selected s, in both orders.
            let mut delta = -salience[x];
            for &s in &selected {
                delta += lambda * (sim.get(x, s) + sim.get(s, x));
            }
            if include_diagonal {
                delta += lambda * sim.get(x, x);
            }
            if best.is_none_or(|(_, bd)| delta < bd) {
                best = Some((x, delta));
            }
        }
        let (x, _) = best.expect("select_count <= n leaves an unselected index");
        in_set[x] = true;
        selected.push(x);
    }
    selected.sort_unstable();
    Ok(selected)
}

/// Exhaustive minimization of J over all subsets of the given size, for
/// instances of at most 20 items. Ties return the lexicographically
/// smallest index set. Returns the subset and its objective value.
pub fn brute_force_select(
    salience: &[f64],
    sim: &SimilarityMatrix,
    select_count: usize,
    lambda: f64,
) -> Result<(Vec<usize>, f64), SummarizeError> {
    brute_force_select_with(salience, sim, select_count, lambda, false)
}

pub fn brute_force_select_with(
    salience: &[f64],
    sim: &SimilarityMatrix,
    select_count: usize,
    lambda: f64,
    include_diagonal: bool,
) -> Result<(Vec<usize>, f64), SummarizeError> {
    let n = salience.len();
    if n > 20 {
        return Err(SummarizeError::TooLarge(n));
    }
    check_selection_inputs(salience, sim, select_count, lambda)?;

    let mut best: Option<(Vec<usize>, f64)> = None;
    for mask in 0u32..1 << n {
        if mask.count_ones() as usize != select_count {
            continue;
        }
        let subset: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        let value = objective(salience, sim, &subset, lambda, include_diagonal);
        let better = match &best {
            None => true,
            Some((bs, bv)) => value < *bv || (value == *bv && subset < *bs),
        };
        if better {
            best = Some((subset, value));
        }
    }
    Ok(best.expect("at least one subset of the requested size exists"))
}

fn side_k(config_k: usize, n: usize) -> usize {
    config_k.min(n)
}

/// Clusters one sentence group and returns the representatives in source
/// order. K-Means uses the closest-to-centroid rule, agglomerative the
/// highest cumulative within-cluster similarity.
fn cluster_representatives(
    sentences: &[Sentence],
    embeddings: &[EmbeddingVector],
    config: &SummaryConfig,
) -> Result<Vec<Sentence>, PipelineError> {
    let n = sentences.len();
    if n <= 1 {
        return Ok(sentences.to_vec());
    }
    let k = side_k(config.k, n);

    let mut reps: Vec<usize> = Vec::with_capacity(k);
    match config.clustering {
        ClusteringKind::KMeans => {
            let options = KMeansOptions {
                seed: config.seed,
                ..KMeansOptions::default()
            };
            let assignment = kmeans_restarts(embeddings, k, &options)?;
            let centroids = assignment
                .centroids
                .as_ref()
                .expect("kmeans always returns centroids");
            for (cluster, centroid) in centroids.iter().enumerate() {
                let members: Vec<usize> = (0..n)
                    .filter(|&i| assignment.labels[i] == cluster)
                    .collect();
                reps.push(representative_centroid(&members, embeddings, centroid)?);
            }
        }
        ClusteringKind::Agglomerative => {
            let sim = pairwise_similarity(embeddings, Metric::Cosine)?;
            let assignment = agglomerative(&sim, k)?;
            for cluster in 0..k {
                let members: Vec<usize> = (0..n)
                    .filter(|&i| assignment.labels[i] == cluster)
                    .collect();
                reps.push(representative_cumulative(&members, &sim)?);
            }
        }
    }
    reps.sort_unstable();
    Ok(reps.into_iter().map(|i| sentences[i].clone()).collect())
}

fn summarize_side(
    sentences: &[Sentence],
    embeddings: &[EmbeddingVector],
    budget: usize,
    config: &SummaryConfig,
) -> Result<(Assembled, usize), PipelineError> {
    if sentences.is_empty() || budget == 0 {
        return Ok((Assembled::default(), 0));
    }
    let candidates = cluster_representatives(sentences, embeddings, config)?;
    let n_candidates = candidates.len();
    Ok((
        assemble(&candidates, budget, config.max_sentence_chars),
        n_candidates,
    ))
}

/// Result of mix-mode summarization, with each part's character count.
#[derive(Debug, Clone, PartialEq)]
pub struct MixSummary {
    pub summary: Summary,
    pub arg_part_chars: usize,
    pub nonarg_part_chars: usize,
    pub n_candidates: usize,
}

/// Summarizes the argument and non-argument sets independently, each via
/// cluster → representative → assemble, and concatenates argument part then
/// non-argument part. The argument budget is the total minus the
/// non-argument budget; an empty side forfeits its budget. The single
/// joining space between non-empty parts is charged to the non-argument
/// side, keeping the combined length within the total budget.
pub fn mix_summarize(
    args: &[Sentence],
    args_embeddings: &[EmbeddingVector],
    non_args: &[Sentence],
    non_args_embeddings: &[EmbeddingVector],
    config: &SummaryConfig,
) -> Result<MixSummary, PipelineError> {
    config.validate()?;
    let nonarg_budget = config.mix_nonarg_budget_chars;
    let arg_budget = config.total_budget_chars - nonarg_budget;

    let (arg_part, arg_cands) = summarize_side(args, args_embeddings, arg_budget, config)?;
    let joiner = if arg_part.char_len > 0 { 1 } else { 0 };
    let (nonarg_part, nonarg_cands) = summarize_side(
        non_args,
        non_args_embeddings,
        nonarg_budget.saturating_sub(joiner),
        config,
    )?;

    let (text, char_len) = match (arg_part.char_len > 0, nonarg_part.char_len > 0) {
        (true, true) => (
            format!("{} {}", arg_part.text, nonarg_part.text),
            arg_part.char_len + 1 + nonarg_part.char_len,
        ),
        (true, false) => (arg_part.text.clone(), arg_part.char_len),
        (false, _) => (nonarg_part.text.clone(), nonarg_part.char_len),
    };
    let mut sentence_indices = arg_part.sentence_indices.clone();
    sentence_indices.extend(&nonarg_part.sentence_indices);

    Ok(MixSummary {
        summary: Summary {
            text,
            sentence_indices,
            char_len,
            config_echo: config.clone(),
        },
        arg_part_chars: arg_part.char_len,
        nonarg_part_chars: nonarg_part.char_len,
        n_candidates: arg_cands + nonarg_cands,
    })
}

/// Runs the configured pipeline over one topic and reports the summary with
/// stage statistics.
pub fn run_pipeline(
    topic: &Topic,
    config: &SummaryConfig,
    backends: &Backends,
) -> Result<PipelineOutput, PipelineError> {
    config.validate()?;
    let sentences = topic_sentences(topic);
    if sentences.is_empty() {
        return Err(PipelineError::NoSentences);
    }
    let n_sentences = sentences.len();

    let mut stats = PipelineStats {
        n_sentences,
        n_arguments: None,
        n_clusters: None,
        n_candidates: 0,
        arg_part_chars: None,
        nonarg_part_chars: None,
    };

    let summary = match config.mode {
        SummaryMode::Full => {
            let candidates = if config.cluster_in_full_mode {
                let embeddings = embed_batch(&backends.embedding, &sentences)?;
                let reps = cluster_representatives(&sentences, &embeddings, config)?;
                stats.n_clusters = Some(if n_sentences <= 1 {
                    n_sentences
                } else {
                    side_k(config.k, n_sentences)
                });
                reps
            } else {
                sentences.clone()
            };
            stats.n_candidates = candidates.len();
            Summary::from_assembled(
                assemble(&candidates, config.total_budget_chars, config.max_sentence_chars),
                config,
            )
        }
        SummaryMode::OnlyArguments => {
            let classifier = backends
                .classifier
                .as_ref()
                .ok_or(PipelineError::MissingClassifier("only_arguments"))?;
            let labels = classify_arguments(classifier, &sentences)?;
            let (arguments, _) = partition(&sentences, &labels)?;
            stats.n_arguments = Some(arguments.len());
            stats.n_candidates = arguments.len();
            if arguments.is_empty() {
                Summary::from_assembled(Assembled::default(), config)
            } else {
                Summary::from_assembled(
                    assemble(&arguments, config.total_budget_chars, config.max_sentence_chars),
                    config,
                )
            }
        }
        SummaryMode::Mix => {
            let classifier = backends
                .classifier
                .as_ref()
                .ok_or(PipelineError::MissingClassifier("mix"))?;
            let labels = classify_arguments(classifier, &sentences)?;
            let (arguments, non_arguments) = partition(&sentences, &labels)?;
            stats.n_arguments = Some(arguments.len());

            let embeddings = embed_batch(&backends.embedding, &sentences)?;
            let pick = |side: &[Sentence]| -> Vec<EmbeddingVector> {
                side.iter()
                    .map(|s| embeddings[s.global_index].clone())
                    .collect()
            };
            let arg_embeddings = pick(&arguments);
            let nonarg_embeddings = pick(&non_arguments);
            let mixed = mix_summarize(
                &arguments,
                &arg_embeddings,
                &non_arguments,
                &nonarg_embeddings,
                config,
            )?;
            stats.arg_part_chars = Some(mixed.arg_part_chars);
            stats.nonarg_part_chars = Some(mixed.nonarg_part_chars);
            stats.n_candidates = mixed.n_candidates;
            mixed.summary
        }
        SummaryMode::Diverse => {
            let embeddings = embed_batch(&backends.embedding, &sentences)?;
            let sim = pairwise_similarity(&embeddings, Metric::Dot)?;
            let salience: Vec<f64> = match &backends.classifier {
                Some(classifier) => classify_arguments(classifier, &sentences)?
                    .iter()
                    .map(|l| l.score)
                    .collect(),
                None => vec![0.5; n_sentences],
            };
            let count = match config.select_count {
                Some(c) => c,
                None => config
                    .total_budget_chars
                    .div_ceil(132)
                    .clamp(1, n_sentences),
            };
            let picked = greedy_diverse_select_with(
                &salience,
                &sim,
                count,
                config.diversity_weight,
                config.include_diagonal,
            )?;
            stats.n_candidates = picked.len();
            let candidates: Vec<Sentence> =
                picked.iter().map(|&i| sentences[i].clone()).collect();
            Summary::from_assembled(
                assemble(&candidates, config.total_budget_chars, config.max_sentence_chars),
                config,
            )
        }
    };

    Ok(PipelineOutput { summary, stats })
}
