use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use divsumm::corpus::{load_topic, topic_sentences};
use divsumm::embed::{embed_batch, EmbeddingBackendConfig};
use divsumm::rouge::{rouge1_against_refs, RefStrategy};

mod config;
mod report;
mod runner;

use report::ReportFormat;
use runner::{run_experiments, RunOptions};

#[derive(Parser)]
#[command(
    name = "summarize",
    version,
    about = "Multi-document extractive summarizer and experiment runner"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EvalStrategy {
    /// Score against one reference chosen by seed
    Pick,
    /// Score against every reference and keep the best F1
    Best,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EmbedBackend {
    /// Hashed tf-idf over the topic's sentences
    Hashed,
    /// Copy vectors from an existing JSONL embedding file
    File,
    /// POST sentence batches to an embedding service
    Remote,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment matrix over topic directories and write a report
    Run {
        /// JSON experiment config; `{}` selects the standard matrix
        #[arg(long)]
        config: PathBuf,
        /// Topic directories, each holding articles/ and optional refs/
        #[arg(long, num_args = 1.., required = true)]
        topics: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "tsv")]
        format: ReportFormat,
        /// Topics processed concurrently
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Overrides the config file's seed
        #[arg(long)]
        seed: Option<u64>,
        /// Zero the timing field so repeated runs are byte-identical
        #[arg(long)]
        no_timing: bool,
    },
    /// Score a candidate summary file against reference summaries
    Eval {
        #[arg(long)]
        candidate: PathBuf,
        /// Directory of reference .txt files
        #[arg(long)]
        refs: PathBuf,
        #[arg(long, value_enum, default_value = "best")]
        strategy: EvalStrategy,
        /// Reference pick seed for --strategy pick
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Precompute sentence embeddings for topics into a JSONL file
    Embed {
        #[arg(long, num_args = 1.., required = true)]
        topics: Vec<PathBuf>,
        #[arg(long, value_enum, default_value = "hashed")]
        backend: EmbedBackend,
        /// Vector width for the hashed backend
        #[arg(long, default_value_t = 1024)]
        dim: usize,
        /// Source JSONL for the file backend
        #[arg(long)]
        path: Option<PathBuf>,
        /// Service URL for the remote backend
        #[arg(long)]
        endpoint: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn eval(candidate: &PathBuf, refs: &PathBuf, strategy: EvalStrategy, seed: u64) -> u8 {
    let text = match std::fs::read_to_string(candidate) {
        Ok(text) => text,
        Err(e) => {
            eprintln!("cannot read {}: {e}", candidate.display());
            return 1;
        }
    };
    let mut references = Vec::new();
    let entries = match std::fs::read_dir(refs) {
        Ok(entries) => entries,
        Err(e) => {
            eprintln!("cannot read {}: {e}", refs.display());
            return 1;
        }
    };
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|ext| ext == "txt"))
        .collect();
    paths.sort();
    for path in paths {
        match std::fs::read_to_string(&path) {
            Ok(reference) => references.push(reference),
            Err(e) => {
                eprintln!("cannot read {}: {e}", path.display());
                return 1;
            }
        }
    }
    let strategy = match strategy {
        EvalStrategy::Pick => RefStrategy::PickSeeded { seed },
        EvalStrategy::Best => RefStrategy::Best,
    };
    match rouge1_against_refs(&text, &references, strategy) {
        Ok(score) => {
            println!("recall\tprecision\tf1");
            println!(
                "{:.4}\t{:.4}\t{:.4}",
                score.recall,
                score.precision,
                score.f1()
            );
            0
        }
        Err(e) => {
            eprintln!("{e}");
            1
        }
    }
}

fn embed(
    topics: &[PathBuf],
    backend: EmbedBackend,
    dim: usize,
    path: Option<PathBuf>,
    endpoint: Option<String>,
    out: &PathBuf,
) -> u8 {
    let mut backend = match backend {
        EmbedBackend::Hashed => EmbeddingBackendConfig::HashedTfidf { dim },
        EmbedBackend::File => match path {
            Some(path) => EmbeddingBackendConfig::File { path },
            None => {
                eprintln!("--backend file requires --path");
                return 2;
            }
        },
        EmbedBackend::Remote => match endpoint {
            Some(endpoint) => EmbeddingBackendConfig::Remote {
                endpoint,
                timeout_ms: 30_000,
            },
            None => {
                eprintln!("--backend remote requires --endpoint");
                return 2;
            }
        },
    };
    let mut none = None;
    if let Err(e) = config::apply_timeout_override(&mut backend, &mut none) {
        eprintln!("{e}");
        return 1;
    }

    let mut lines = String::new();
    let mut seen = std::collections::HashSet::new();
    let mut total = 0usize;
    for dir in topics {
        let topic = match load_topic(dir) {
            Ok(topic) => topic,
            Err(e) => {
                eprintln!("{}: {e}", dir.display());
                return 1;
            }
        };
        let sentences = topic_sentences(&topic);
        let vectors = match embed_batch(&backend, &sentences) {
            Ok(vectors) => vectors,
            Err(e) => {
                eprintln!("{}: {e}", topic.name);
                return 1;
            }
        };
        for (sentence, vector) in sentences.iter().zip(&vectors) {
            let key = sentence.key();
            if !seen.insert(key.clone()) {
                eprintln!("duplicate sentence key {key:?} across topics; embed topics separately");
                return 1;
            }
            lines.push_str(&format!(
                "{}\n",
                serde_json::json!({"key": key, "vector": vector.values()})
            ));
            total += 1;
        }
    }
    if let Err(e) = std::fs::write(out, lines) {
        eprintln!("cannot write {}: {e}", out.display());
        return 1;
    }
    eprintln!("wrote {total} embeddings to {}", out.display());
    0
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run {
            config,
            topics,
            out,
            format,
            jobs,
            seed,
            no_timing,
        } => run_experiments(&RunOptions {
            config_path: config,
            topic_dirs: topics,
            out_path: out,
            format,
            jobs,
            seed,
            no_timing,
        }),
        Command::Eval {
            candidate,
            refs,
            strategy,
            seed,
        } => eval(&candidate, &refs, strategy, seed),
        Command::Embed {
            topics,
            backend,
            dim,
            path,
            endpoint,
            out,
        } => embed(&topics, backend, dim, path, endpoint, &out),
    };
    ExitCode::from(code)
}
