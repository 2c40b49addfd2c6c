//! Report rows and their serialization to tsv, markdown, and json.

use divsumm::argument::ArgumentBackendConfig;
use divsumm::embed::EmbeddingBackendConfig;
use divsumm::rouge::RougeScore;
use divsumm::summarize::{Summary, SummaryConfig};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryReport {
    pub topic: String,
    pub mode: String,
    pub summary: Summary,
    pub rouge: Option<RougeScore>,
    pub config_echo: SummaryConfig,
    pub timing_ms: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ReportFormat {
    Tsv,
    Md,
    Json,
}

/// Digest of the full resolved parameter set: pipeline config plus both
/// backend configs. Equal hashes mean identical parameters.
pub fn config_hash(
    config: &SummaryConfig,
    embedding: &EmbeddingBackendConfig,
    classifier: &Option<ArgumentBackendConfig>,
) -> String {
    let blob = serde_json::json!({
        "summary": config,
        "embedding": embedding,
        "classifier": classifier,
    });
    let digest = Sha256::digest(blob.to_string().as_bytes());
    digest[..6].iter().map(|b| format!("{b:02x}")).collect()
}

fn fmt4(value: f64) -> String {
    format!("{value:.4}")
}

/// Per-mode mean recall and precision over the rows that have scores.
fn aggregates(reports: &[(SummaryReport, String)]) -> Vec<(String, Option<(f64, f64)>)> {
    let mut modes: Vec<&str> = reports.iter().map(|(r, _)| r.mode.as_str()).collect();
    modes.sort_unstable();
    modes.dedup();
    modes
        .into_iter()
        .map(|mode| {
            let scored: Vec<&RougeScore> = reports
                .iter()
                .filter(|(r, _)| r.mode == mode)
                .filter_map(|(r, _)| r.rouge.as_ref())
                .collect();
            let mean = if scored.is_empty() {
                None
            } else {
                let n = scored.len() as f64;
                Some((
                    scored.iter().map(|s| s.recall).sum::<f64>() / n,
                    scored.iter().map(|s| s.precision).sum::<f64>() / n,
                ))
            };
            (mode.to_string(), mean)
        })
        .collect()
}

/// Serializes report rows. `reports` pairs each row with its config hash;
/// rows are emitted in the given order.
pub fn emit(reports: &[(SummaryReport, String)], format: ReportFormat) -> String {
    match format {
        ReportFormat::Tsv => emit_tsv(reports),
        ReportFormat::Md => emit_md(reports),
        ReportFormat::Json => emit_json(reports),
    }
}

fn rouge_cells(rouge: &Option<RougeScore>) -> (String, String) {
    match rouge {
        Some(score) => (fmt4(score.recall), fmt4(score.precision)),
        None => (String::new(), String::new()),
    }
}

fn emit_tsv(reports: &[(SummaryReport, String)]) -> String {
    let mut out = String::from("topic\tmode\trecall\tprecision\tchars\tconfig_hash\n");
    for (report, hash) in reports {
        let (recall, precision) = rouge_cells(&report.rouge);
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}\n",
            report.topic, report.mode, recall, precision, report.summary.char_len, hash
        ));
    }
    for (mode, mean) in aggregates(reports) {
        let (recall, precision) = match mean {
            Some((r, p)) => (fmt4(r), fmt4(p)),
            None => (String::new(), String::new()),
        };
        out.push_str(&format!("# aggregate\t{mode}\t{recall}\t{precision}\n"));
    }
    out
}

fn emit_md(reports: &[(SummaryReport, String)]) -> String {
    let mut out = String::from(
        "| topic | mode | recall | precision | chars | config_hash |\n|---|---|---|---|---|---|\n",
    );
    for (report, hash) in reports {
        let (recall, precision) = rouge_cells(&report.rouge);
        out.push_str(&format!(
            "| {} | {} | {} | {} | {} | {} |\n",
            report.topic, report.mode, recall, precision, report.summary.char_len, hash
        ));
    }
    out.push_str("\nMode means\n\n| mode | recall | precision |\n|---|---|---|\n");
    for (mode, mean) in aggregates(reports) {
        let (recall, precision) = match mean {
            Some((r, p)) => (fmt4(r), fmt4(p)),
            None => (String::new(), String::new()),
        };
        out.push_str(&format!("| {mode} | {recall} | {precision} |\n"));
    }
    out
}

fn emit_json(reports: &[(SummaryReport, String)]) -> String {
    let rows: Vec<&SummaryReport> = reports.iter().map(|(r, _)| r).collect();
    let mut out = serde_json::to_string_pretty(&rows).expect("reports serialize");
    out.push('\n');
    out
}
