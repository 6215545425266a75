//! Run directories: manifest, raw records, metrics, tables, confusion
//! matrices. Output is byte-stable for identical inputs — map keys are
//! ordered and floats print through one fixed formatter.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

/// Provenance of one evaluation run. The manifest pins everything needed
/// to reproduce the reports: dataset hashes, template hash, model ids
/// and seeds. A rerun with identical inputs and a warm cache writes
/// identical reports (the manifest itself carries the wall-clock stamp).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub chat_model: Option<String>,
    pub embed_model: Option<String>,
    pub temperature: f64,
    pub seed: u64,
    pub template_hash: String,
    pub dataset_hashes: BTreeMap<String, String>,
    pub started_unix_secs: u64,
    pub extra: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn new(command: &str, seed: u64, template_hash: String) -> Self {
        RunManifest {
            command: command.to_string(),
            chat_model: None,
            embed_model: None,
            temperature: 0.0,
            seed,
            template_hash,
            dataset_hashes: BTreeMap::new(),
            started_unix_secs: std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            extra: BTreeMap::new(),
        }
    }
}

/// SHA-256 of a file, hex-encoded, for manifest dataset hashes.
pub fn file_sha256(path: &Path) -> std::io::Result<String> {
    use sha2::{Digest, Sha256};
    let bytes = std::fs::read(path)?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Everything a run writes besides the manifest.
#[derive(Default)]
pub struct RunReport {
    /// JSONL lines for `records.jsonl`.
    pub record_lines: Vec<String>,
    /// `metrics.json` body.
    pub metrics: serde_json::Value,
    /// Markdown tables, written under `tables/<name>.md`.
    pub tables: Vec<(String, String)>,
    /// CSV confusion matrices, written under `confusion/<name>.csv`.
    pub confusion: Vec<(String, String)>,
}

/// Lay out a run directory:
/// `manifest.json`, `records.jsonl`, `metrics.json`, `tables/*.md`,
/// `confusion/*.csv`.
pub fn write_run_dir(
    out_dir: &Path,
    manifest: &RunManifest,
    report: &RunReport,
) -> std::io::Result<()> {
    std::fs::create_dir_all(out_dir)?;
    std::fs::write(
        out_dir.join("manifest.json"),
        serde_json::to_string_pretty(manifest).unwrap(),
    )?;
    let mut records = report.record_lines.join("\n");
    if !records.is_empty() {
        records.push('\n');
    }
    std::fs::write(out_dir.join("records.jsonl"), records)?;
    std::fs::write(
        out_dir.join("metrics.json"),
        serde_json::to_string_pretty(&report.metrics).unwrap(),
    )?;
    if !report.tables.is_empty() {
        let tables = out_dir.join("tables");
        std::fs::create_dir_all(&tables)?;
        for (name, body) in &report.tables {
            std::fs::write(tables.join(format!("{name}.md")), body)?;
        }
    }
    if !report.confusion.is_empty() {
        let confusion = out_dir.join("confusion");
        std::fs::create_dir_all(&confusion)?;
        for (name, body) in &report.confusion {
            std::fs::write(confusion.join(format!("{name}.csv")), body)?;
        }
    }
    Ok(())
}

/// Fixed-format float for tables: three decimals, the convention used in
/// all the markdown output.
pub fn fmt3(v: f64) -> String {
    format!("{v:.3}")
}

/// Build one markdown table.
pub fn markdown_table(headers: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = String::new();
    out.push_str(&format!("| {} |\n", headers.join(" | ")));
    out.push_str(&format!(
        "|{}\n",
        headers.iter().map(|_| " --- |").collect::<String>()
    ));
    for row in rows {
        out.push_str(&format!("| {} |\n", row.join(" | ")));
    }
    out
}
