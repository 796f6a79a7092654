//! The JSONL benchmark record: one line per (instance, algorithm, seed).

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub domain: String,
    pub problem: String,
    pub algorithm: String,
    pub heuristic: String,
    /// Exploration coefficient; present only for the fixed-coefficient
    /// algorithms.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    pub seed: u64,
    /// One of `plan`, `exhausted`, `budget_reached`.
    pub outcome: String,
    pub expansions: u64,
    /// Present iff the outcome is `plan`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plan_length: Option<u64>,
    pub elapsed_ms: u64,
}

impl BenchRecord {
    pub fn solved(&self) -> bool {
        self.outcome == "plan"
    }

    /// Resumption key: one record per (domain, problem, algorithm, seed).
    pub fn key(&self) -> (String, String, String, u64) {
        (
            self.domain.clone(),
            self.problem.clone(),
            self.algorithm.clone(),
            self.seed,
        )
    }
}

/// Reads a JSONL records file, skipping malformed lines with a warning on
/// stderr.
pub fn read_records(path: &Path) -> std::io::Result<Vec<BenchRecord>> {
    let file = File::open(path)?;
    let mut records = Vec::new();
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<BenchRecord>(&line) {
            Ok(record) => records.push(record),
            Err(e) => eprintln!(
                "warning: {}:{}: skipping malformed record: {e}",
                path.display(),
                lineno + 1
            ),
        }
    }
    Ok(records)
}
