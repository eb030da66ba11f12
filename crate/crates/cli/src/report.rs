//! Run reports and their three output formats. Emission is byte-stable:
//! fixed column order, numbers at six significant digits, no timestamps.

use anyhow::Result;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Table,
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "table" => Ok(Format::Table),
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("{other:?} is not table, csv, or json")),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Report {
    pub objective: String,
    pub seed: u64,
    pub rows: Vec<ReportRow>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ReportRow {
    pub strategy: String,
    /// Probe set (`{0,2}`), or a short policy description.
    pub policy: String,
    pub value: f64,
    /// `exact` or `mc`.
    pub value_kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub half_width: Option<f64>,
    pub probe_cost_max: f64,
    pub probe_cost_expected: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub opt_hard: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value_over_opt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cost_over_budget: Option<f64>,
}

pub fn describe_probe_set(set: &[usize]) -> String {
    let inner: Vec<String> = set.iter().map(|i| i.to_string()).collect();
    format!("{{{}}}", inner.join(","))
}

/// `x` at `sig` significant digits, trailing zeros trimmed; scientific
/// notation outside `[1e-4, 1e6)`.
pub fn fmt_sig(x: f64, sig: usize) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let mag = x.abs().log10().floor() as i32;
    if !(-4..6).contains(&mag) {
        return format!("{:.*e}", sig.saturating_sub(1), x);
    }
    let decimals = (sig as i32 - 1 - mag).max(0) as usize;
    let s = format!("{:.*}", decimals, x);
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

const COLUMNS: [&str; 10] = [
    "strategy",
    "policy",
    "value",
    "value_kind",
    "half_width",
    "probe_cost_max",
    "probe_cost_expected",
    "opt_hard",
    "value_over_opt",
    "cost_over_budget",
];

fn row_cells(row: &ReportRow) -> [String; 10] {
    let opt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| fmt_sig(x, 6));
    [
        row.strategy.clone(),
        row.policy.clone(),
        fmt_sig(row.value, 6),
        row.value_kind.clone(),
        opt(row.half_width),
        fmt_sig(row.probe_cost_max, 6),
        fmt_sig(row.probe_cost_expected, 6),
        opt(row.opt_hard),
        opt(row.value_over_opt),
        opt(row.cost_over_budget),
    ]
}

fn emit_table(report: &Report) -> String {
    let rows: Vec<[String; 10]> = report.rows.iter().map(row_cells).collect();
    let mut widths: Vec<usize> = COLUMNS.iter().map(|c| c.len()).collect();
    for row in &rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let mut out = format!("# objective={} seed={}\n", report.objective, report.seed);
    let mut line = String::new();
    for (w, name) in widths.iter().zip(COLUMNS) {
        line.push_str(&format!("{name:<w$}  "));
    }
    out.push_str(line.trim_end());
    out.push('\n');
    for row in &rows {
        let mut line = String::new();
        for (w, cell) in widths.iter().zip(row) {
            line.push_str(&format!("{cell:<w$}  "));
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}

fn csv_field(s: &str) -> String {
    if s.contains(['"', ',', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn emit_csv(report: &Report) -> String {
    let mut out = COLUMNS.join(",");
    out.push('\n');
    for row in &report.rows {
        let cells = row_cells(row);
        let line: Vec<String> = cells.iter().map(|c| csv_field(c)).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

pub fn emit_report(report: &Report, format: Format) -> Result<String> {
    Ok(match format {
        Format::Table => emit_table(report),
        Format::Csv => emit_csv(report),
        Format::Json => {
            let mut text = serde_json::to_string_pretty(report)?;
            text.push('\n');
            text
        }
    })
}
