//! Report envelope: per-experiment row tables with a fixed CSV schema, a JSON
//! wrapper echoing the configuration, and a content hash of the inputs.
//!
//! CSV schema: `experiment,K,m,seq_ratio,measured,bound,ratio,pass` — one row
//! per measurement.  Bodies are deterministic for a fixed (config, seed);
//! only the leading `#` header lines may differ between runs.

use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Serialize)]
pub struct ReportRow {
    pub label: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<u32>,
    pub measured: f64,
    pub bound: f64,
    pub ratio: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub resolution: u8,
    pub seq_terms: Vec<u64>,
    pub seq_ratio: f64,
    pub seed: u64,
    pub rows: Vec<ReportRow>,
    pub pass: bool,
    pub notes: Vec<String>,
}

impl ExperimentReport {
    pub fn new(experiment: &str, resolution: u8, seq_terms: Vec<u64>, seq_ratio: f64, seed: u64) -> Self {
        Self {
            experiment: experiment.to_string(),
            resolution,
            seq_terms,
            seq_ratio,
            seed,
            rows: Vec::new(),
            pass: true,
            notes: Vec::new(),
        }
    }

    pub fn push(&mut self, row: ReportRow) {
        self.pass &= row.pass;
        self.rows.push(row);
    }

    pub fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }

    pub fn fail(&mut self, why: impl Into<String>) {
        self.pass = false;
        self.notes.push(why.into());
    }

    /// The deterministic CSV body (no header comment lines).
    pub fn csv_body(&self) -> String {
        let mut out = String::from("experiment,K,m,seq_ratio,measured,bound,ratio,pass\n");
        for r in &self.rows {
            let m = r.m.map(|v| v.to_string()).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                self.experiment,
                self.resolution,
                m,
                self.seq_ratio,
                r.measured,
                r.bound,
                r.ratio,
                r.pass
            ));
        }
        out
    }
}

/// Additional artifacts an experiment emits next to its row table.
#[derive(Debug, Clone, Default)]
pub struct ExtraFiles {
    /// `(file stem, csv body)`.
    pub csv: Vec<(String, String)>,
    /// `(file stem, json body)`.
    pub json: Vec<(String, String)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportEnvelope {
    pub config: serde_json::Value,
    /// SHA-256 of the canonical config string.
    pub content_hash: String,
    pub reports: Vec<ExperimentReport>,
}

impl ReportEnvelope {
    pub fn new(config: serde_json::Value, reports: Vec<ExperimentReport>) -> Self {
        let canonical = config.to_string();
        Self {
            config,
            content_hash: content_hash(canonical.as_bytes()),
            reports,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }
}

pub fn content_hash(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}
