use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analysis::RateReport;
use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "trial,N,delta,lambda_l2,theta_l2,theta_lalpha,rel_error,wall_ms";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: u32,
    #[serde(rename = "N")]
    pub level: u32,
    pub delta: f64,
    pub lambda_l2: f64,
    pub theta_l2: f64,
    pub theta_lalpha: f64,
    pub rel_error: f64,
    pub wall_ms: f64,
}

/// Error statistics for one `(N, δ)` cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    #[serde(rename = "N")]
    pub level: u32,
    pub delta: f64,
    pub count: usize,
    pub mean: f64,
    /// Sample standard deviation; 0 for a single trial.
    pub stddev: f64,
    pub min: f64,
    pub max: f64,
    /// Mean error minus the `δ = 0` mean at the same `N`, when that row exists.
    pub excess: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaRate {
    pub delta: f64,
    pub rate: RateReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub id: String,
    /// Sorted by `(N, δ, trial)`.
    pub records: Vec<TrialRecord>,
    pub summary: Vec<SummaryRow>,
    /// Decay exponent of the mean error over `N`, per `δ`, when at least three
    /// levels were run.
    pub rates: Vec<DeltaRate>,
    pub warnings: Vec<String>,
}

impl ExperimentReport {
    pub fn row(&self, level: u32, delta: f64) -> Option<&SummaryRow> {
        self.summary.iter().find(|r| r.level == level && r.delta == delta)
    }

    pub fn errors(&self, level: u32, delta: f64) -> Vec<f64> {
        self.records
            .iter()
            .filter(|r| r.level == level && r.delta == delta)
            .map(|r| r.rel_error)
            .collect()
    }
}

/// Per-`(N, δ)` statistics of `records`, which must be sorted by `(N, δ)`.
/// Sums run in record order, so the result is reproducible bit for bit.
pub fn summarize(records: &[TrialRecord]) -> Vec<SummaryRow> {
    let mut rows: Vec<SummaryRow> = Vec::new();
    let mut start = 0;
    while start < records.len() {
        let (level, delta) = (records[start].level, records[start].delta);
        let end = start
            + records[start..]
                .iter()
                .take_while(|r| r.level == level && r.delta == delta)
                .count();
        let errs: Vec<f64> = records[start..end].iter().map(|r| r.rel_error).collect();
        let n = errs.len();
        let mean = errs.iter().sum::<f64>() / n as f64;
        let stddev = if n > 1 {
            (errs.iter().map(|e| (e - mean) * (e - mean)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        rows.push(SummaryRow {
            level,
            delta,
            count: n,
            mean,
            stddev,
            min: errs.iter().copied().fold(f64::INFINITY, f64::min),
            max: errs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            excess: None,
        });
        start = end;
    }
    let baselines: Vec<(u32, f64)> = rows
        .iter()
        .filter(|r| r.delta == 0.0)
        .map(|r| (r.level, r.mean))
        .collect();
    for row in &mut rows {
        row.excess = baselines
            .iter()
            .find(|(l, _)| *l == row.level)
            .map(|(_, base)| row.mean - base);
    }
    rows
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl OutputFormat {
    /// JSON for a `.json` extension, CSV otherwise.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("json") => OutputFormat::Json,
            _ => OutputFormat::Csv,
        }
    }
}

pub fn to_csv(records: &[TrialRecord]) -> String {
    let mut out = String::with_capacity(64 * (records.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in records {
        writeln!(
            out,
            "{},{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            r.trial, r.level, r.delta, r.lambda_l2, r.theta_l2, r.theta_lalpha, r.rel_error, r.wall_ms
        )
        .unwrap();
    }
    out
}

pub fn parse_csv(text: &str) -> Result<Vec<TrialRecord>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == CSV_HEADER => {}
        other => return Err(Error::Config(format!("unexpected CSV header {other:?}"))),
    }
    lines
        .enumerate()
        .filter(|(_, l)| !l.is_empty())
        .map(|(i, line)| {
            let bad = || Error::Config(format!("malformed CSV row {}: {line:?}", i + 2));
            let cells: Vec<&str> = line.split(',').collect();
            if cells.len() != 8 {
                return Err(bad());
            }
            let f = |j: usize| cells[j].parse::<f64>().map_err(|_| bad());
            Ok(TrialRecord {
                trial: cells[0].parse().map_err(|_| bad())?,
                level: cells[1].parse().map_err(|_| bad())?,
                delta: f(2)?,
                lambda_l2: f(3)?,
                theta_l2: f(4)?,
                theta_lalpha: f(5)?,
                rel_error: f(6)?,
                wall_ms: f(7)?,
            })
        })
        .collect()
}

/// gnuplot data: one block per `δ` (separated by two blank lines, so
/// `index i` selects it) with columns `N mean stddev min max`.
pub fn to_gnuplot(summary: &[SummaryRow]) -> String {
    let mut deltas: Vec<f64> = Vec::new();
    for r in summary {
        if !deltas.contains(&r.delta) {
            deltas.push(r.delta);
        }
    }
    let mut out = String::new();
    for (i, delta) in deltas.iter().enumerate() {
        if i > 0 {
            out.push_str("\n\n");
        }
        writeln!(out, "# delta = {delta}").unwrap();
        out.push_str("# N mean stddev min max\n");
        for r in summary.iter().filter(|r| r.delta == *delta) {
            writeln!(
                out,
                "{} {:.16e} {:.16e} {:.16e} {:.16e}",
                r.level, r.mean, r.stddev, r.min, r.max
            )
            .unwrap();
        }
    }
    out
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|source| Error::Io {
            path: parent.to_path_buf(),
            source,
        })?;
    }
    fs::write(path, contents).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes the report. CSV output also writes a gnuplot `.dat` file next to
/// it. Returns every path written.
pub fn emit_results(report: &ExperimentReport, format: OutputFormat, path: &Path) -> Result<Vec<PathBuf>> {
    match format {
        OutputFormat::Csv => {
            write_file(path, &to_csv(&report.records))?;
            let dat = path.with_extension("dat");
            write_file(&dat, &to_gnuplot(&report.summary))?;
            Ok(vec![path.to_path_buf(), dat])
        }
        OutputFormat::Json => {
            let mut text = serde_json::to_string_pretty(report).expect("report serializes");
            text.push('\n');
            write_file(path, &text)?;
            Ok(vec![path.to_path_buf()])
        }
    }
}
