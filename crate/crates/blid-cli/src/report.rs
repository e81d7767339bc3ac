use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use serde_json::Value;

/// Outcome of one suite run. Serialized as the report JSON; two runs with
/// the same config produce byte-identical files.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub suite: String,
    pub seed: u64,
    pub config_hash: String,
    pub cases: Vec<CaseResult>,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CaseResult {
    pub case_id: String,
    pub pass: bool,
    /// One-line human reading of the outcome.
    pub summary: String,
    /// Headline measurement and the bound it was held against, when the
    /// case reduces to a single comparison.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub observed: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound: Option<f64>,
    /// Full certificate or check payload for the case.
    pub details: Value,
}

impl CaseResult {
    pub fn failed(case_id: &str, message: String) -> Self {
        CaseResult {
            case_id: case_id.to_string(),
            pass: false,
            summary: format!("error: {message}"),
            observed: None,
            bound: None,
            details: serde_json::json!({ "error": message }),
        }
    }
}

/// Numeric table attached to a case, written out as CSV for plotting.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlotSeries {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Report {
    pub fn new(suite: &str, seed: u64, config_hash: String, cases: Vec<CaseResult>) -> Self {
        let pass = cases.iter().all(|c| c.pass);
        Report { suite: suite.to_string(), seed, config_hash, cases, pass }
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        fs::create_dir_all(dir)
            .with_context(|| format!("creating output directory {}", dir.display()))?;
        let path = dir.join(format!("{}.json", file_stem(&self.suite)));
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}

fn file_stem(name: &str) -> String {
    name.chars().map(|c| if c.is_ascii_alphanumeric() { c } else { '_' }).collect()
}

/// Writes the per-case summary CSV plus one CSV per attached series.
/// Returns the paths written, for logging.
pub fn emit_plotdata(
    report: &Report,
    series: &[(String, PlotSeries)],
    dir: &Path,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();

    let cases_path = dir.join(format!("{}_cases.csv", file_stem(&report.suite)));
    let mut text = String::from("case_id,observed,bound,pass\n");
    for case in &report.cases {
        let fmt = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_default();
        text.push_str(&format!(
            "{},{},{},{}\n",
            case.case_id,
            fmt(case.observed),
            fmt(case.bound),
            case.pass
        ));
    }
    fs::write(&cases_path, text)?;
    written.push(cases_path);

    for (case_id, s) in series {
        let path = dir.join(format!(
            "{}__{}__{}.csv",
            file_stem(&report.suite),
            file_stem(case_id),
            file_stem(&s.name)
        ));
        let mut text = s.columns.join(",");
        text.push('\n');
        for row in &s.rows {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
            text.push_str(&cells.join(","));
            text.push('\n');
        }
        fs::write(&path, text)?;
        written.push(path);
    }
    Ok(written)
}
