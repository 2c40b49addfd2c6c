//! Experiment execution: topics × mode labels, bounded-concurrency, report
//! rows buffered and emitted in (topic, mode) order.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use divsumm::corpus::load_topic;
use divsumm::rouge::rouge1_against_refs;
use divsumm::summarize::run_pipeline;

use crate::config::{config_for_label, ExperimentConfig};
use crate::report::{config_hash, emit, ReportFormat, SummaryReport};

pub struct RunOptions {
    pub config_path: PathBuf,
    pub topic_dirs: Vec<PathBuf>,
    pub out_path: PathBuf,
    pub format: ReportFormat,
    pub jobs: usize,
    pub seed: Option<u64>,
    pub no_timing: bool,
}

fn run_topic(
    dir: &Path,
    config: &ExperimentConfig,
    no_timing: bool,
) -> Result<Vec<(SummaryReport, String)>, String> {
    let topic = load_topic(dir).map_err(|e| e.to_string())?;
    let backends = config.backends();
    let mut rows = Vec::with_capacity(config.modes.len());
    for label in &config.modes {
        let summary_config = config_for_label(label, &config.summary)?;
        let started = Instant::now();
        let output = run_pipeline(&topic, &summary_config, &backends)
            .map_err(|e| format!("mode {label}: {e}"))?;
        let rouge = if topic.references.is_empty() {
            None
        } else {
            Some(
                rouge1_against_refs(&output.summary.text, &topic.references, config.rouge)
                    .map_err(|e| format!("mode {label}: {e}"))?,
            )
        };
        let timing_ms = if no_timing {
            0
        } else {
            started.elapsed().as_millis() as u64
        };
        let hash = config_hash(&summary_config, &config.embedding, &config.classifier);
        rows.push((
            SummaryReport {
                topic: topic.name.clone(),
                mode: label.clone(),
                summary: output.summary,
                rouge,
                config_echo: summary_config,
                timing_ms,
            },
            hash,
        ));
    }
    Ok(rows)
}

/// Runs every configured mode over every topic directory and writes the
/// report. Topic failures go to stderr and taint the exit code; the other
/// topics still run.
pub fn run_experiments(options: &RunOptions) -> u8 {
    let text = match std::fs::read_to_string(&options.config_path) {
        Ok(text) => text,
        Err(e) => {
            eprintln!("config error in {}: {e}", options.config_path.display());
            return 1;
        }
    };
    let mut config = match ExperimentConfig::parse(&text) {
        Ok(config) => config,
        Err(e) => {
            eprintln!("config error in {}: {e}", options.config_path.display());
            return 1;
        }
    };
    if let Some(seed) = options.seed {
        config.summary.seed = seed;
    }
    if let Err(e) =
        crate::config::apply_timeout_override(&mut config.embedding, &mut config.classifier)
    {
        eprintln!("config error: {e}");
        return 1;
    }

    let next = AtomicUsize::new(0);
    let rows = Mutex::new(Vec::new());
    let failures = Mutex::new(Vec::new());
    let workers = options.jobs.max(1).min(options.topic_dirs.len().max(1));
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(dir) = options.topic_dirs.get(i) else {
                    break;
                };
                match run_topic(dir, &config, options.no_timing) {
                    Ok(mut topic_rows) => rows.lock().unwrap().append(&mut topic_rows),
                    Err(e) => failures
                        .lock()
                        .unwrap()
                        .push(format!("{}: {e}", dir.display())),
                }
            });
        }
    });

    let mut rows = rows.into_inner().unwrap();
    rows.sort_by(|(a, _), (b, _)| (&a.topic, &a.mode).cmp(&(&b.topic, &b.mode)));
    let mut failures = failures.into_inner().unwrap();
    failures.sort();

    let serialized = emit(&rows, options.format);
    if let Err(e) = std::fs::write(&options.out_path, serialized) {
        eprintln!("cannot write {}: {e}", options.out_path.display());
        return 1;
    }
    eprintln!(
        "wrote {} rows for {} topics to {}",
        rows.len(),
        options.topic_dirs.len() - failures.len(),
        options.out_path.display()
    );
    for failure in &failures {
        eprintln!("topic failed: {failure}");
    }
    u8::from(!failures.is_empty())
}
