//! Diversity-aware extractive summarization of multi-document topics.
//!
//! The pipeline stages live in their own modules:
//!
//! - [`corpus`]: topic loading, sentence segmentation, head truncation
//! - [`rng`]: seeded pseudo-random source shared by every stochastic stage
//!
//! Everything downstream of corpus loading is deterministic given a seed, so
//! two runs over the same inputs produce identical summaries.

pub mod argument;
pub mod cluster;
pub mod corpus;
pub mod embed;
pub mod rng;
pub mod rouge;
pub mod summarize;

pub use corpus::{load_topic, segment_text, topic_sentences, Document, Sentence, Topic};
pub use embed::{embed_batch, pairwise_similarity, EmbeddingBackendConfig, EmbeddingVector, Metric, SimilarityMatrix};
pub use argument::{classify_arguments, partition, ArgLabel, ArgumentBackendConfig};
pub use cluster::{agglomerative, kmeans, kmeans_restarts, ClusterAssignment, KMeansOptions};
pub use rng::{RandomSource, Xorshift64Star};
pub use rouge::{rouge1, rouge1_against_refs, RefStrategy, RougeScore};
pub use summarize::{
    assemble, brute_force_select, diversity_loss, greedy_diverse_select, mix_summarize,
    representative_centroid, representative_cumulative, run_pipeline, Backends, ClusteringKind,
    PipelineError, PipelineOutput, PipelineStats, SelectionInstance, Summary, SummaryConfig,
    SummaryMode,
};
