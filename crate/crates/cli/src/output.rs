//! Trace tables and their three encodings.

use std::fmt::Write as _;

use qledger::scenarios::{Check, ScenarioRun};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Table,
    Csv,
    Json,
}

/// Rows of named numeric columns, keyed by step label.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<(String, Vec<f64>)>,
}

impl Table {
    /// Built-in scenario timeline: the two entropy columns, `S_global`,
    /// `mutual_AC`, then every diagnostic.
    pub fn from_scenario(run: &ScenarioRun) -> Self {
        let mut columns: Vec<String> = vec![
            run.system_column.to_string(),
            run.lab_column.to_string(),
            "S_global".to_string(),
            "mutual_AC".to_string(),
        ];
        if let Some(first) = run.rows.first() {
            columns.extend(first.extra.iter().map(|(k, _)| k.clone()));
        }
        let rows = run
            .rows
            .iter()
            .map(|r| {
                let mut values = vec![r.s_system, r.s_lab, r.s_global, r.mutual_ac];
                values.extend(r.extra.iter().map(|&(_, v)| v));
                (r.step_label.clone(), values)
            })
            .collect();
        Self { columns, rows }
    }
}

/// Magnitudes below this print as zero.
pub const SNAP_TO_ZERO: f64 = 5e-13;

/// Twelve significant digits, fixed-point where the exponent allows.
pub fn format_value(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    if x.abs() < SNAP_TO_ZERO {
        return "0.00000000000".into();
    }
    let sci = format!("{x:.11e}");
    let exponent: i32 = sci[sci.find('e').expect("exponent") + 1..].parse().expect("exponent digits");
    if (-5..12).contains(&exponent) {
        format!("{x:.*}", (11 - exponent) as usize)
    } else {
        sci
    }
}

fn json_number(x: f64) -> String {
    if x.is_finite() {
        format_value(x)
    } else {
        "null".into()
    }
}

fn json_string(s: &str) -> String {
    serde_json::to_string(s).expect("strings always serialize")
}

pub fn render(table: &Table, format: Format) -> String {
    match format {
        Format::Table => render_table(table),
        Format::Csv => render_csv(table),
        Format::Json => render_json(table),
    }
}

fn render_table(table: &Table) -> String {
    let mut cells: Vec<Vec<String>> = Vec::with_capacity(table.rows.len() + 1);
    cells.push(std::iter::once("step".to_string()).chain(table.columns.iter().cloned()).collect());
    for (label, values) in &table.rows {
        cells.push(std::iter::once(label.clone()).chain(values.iter().map(|&v| format_value(v))).collect());
    }
    let widths: Vec<usize> = (0..cells[0].len())
        .map(|k| cells.iter().map(|r| r[k].chars().count()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for row in &cells {
        let line: Vec<String> = row
            .iter()
            .enumerate()
            .map(|(k, c)| {
                if k == 0 {
                    format!("{c:<w$}", w = widths[k])
                } else {
                    format!("{c:>w$}", w = widths[k])
                }
            })
            .collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    }
    out
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn render_csv(table: &Table) -> String {
    let mut out = String::from("step");
    for c in &table.columns {
        out.push(',');
        out.push_str(&csv_field(c));
    }
    out.push('\n');
    for (label, values) in &table.rows {
        out.push_str(&csv_field(label));
        for &v in values {
            out.push(',');
            out.push_str(&format_value(v));
        }
        out.push('\n');
    }
    out
}

fn render_json(table: &Table) -> String {
    let mut out = String::from("[\n");
    for (i, (label, values)) in table.rows.iter().enumerate() {
        let _ = write!(out, "  {{\"step\": {}", json_string(label));
        for (name, &v) in table.columns.iter().zip(values) {
            let _ = write!(out, ", {}: {}", json_string(name), json_number(v));
        }
        out.push('}');
        if i + 1 < table.rows.len() {
            out.push(',');
        }
        out.push('\n');
    }
    out.push_str("]\n");
    out
}

/// One line per check and a closing verdict.
pub fn render_checks(checks: &[Check]) -> String {
    let mut out = String::new();
    for c in checks {
        let status = if c.passed { "PASS" } else { "FAIL" };
        let _ = writeln!(out, "{status}  {}  ({})", c.name, format_value(c.value));
    }
    let verdict = if checks.iter().all(|c| c.passed) { "PASS" } else { "FAIL" };
    let _ = writeln!(out, "verdict: {verdict}");
    out
}
