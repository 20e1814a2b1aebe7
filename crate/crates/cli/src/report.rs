use std::fmt::Write as _;

use indexmap::IndexMap;
use serde::Serialize;
use serde_json::Value;

/// One entry of a result row.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Int(u64),
    Real(f64),
    Text(String),
}

impl Cell {
    /// Integral values become `Int` so goals print without decimals.
    pub fn number(x: f64) -> Cell {
        if x.fract() == 0.0 && (0.0..9.007_199_254_740_992e15).contains(&x) {
            Cell::Int(x as u64)
        } else {
            Cell::Real(x)
        }
    }

    fn render(&self, digits: usize) -> String {
        match self {
            Cell::Int(n) => n.to_string(),
            Cell::Real(x) => fixed(*x, digits),
            Cell::Text(s) => s.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Table,
    Json,
    Csv,
}

/// Everything one command produced.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputReport {
    pub command: String,
    pub inputs: IndexMap<String, Value>,
    /// Rows keyed by their display label, in display order.
    pub results: IndexMap<String, Vec<Cell>>,
    pub method: String,
    pub error_bound_or_stderr: Option<f64>,
    /// How to label `error_bound_or_stderr` in tables.
    #[serde(skip)]
    pub error_label: &'static str,
}

impl OutputReport {
    pub fn new(command: &str, method: impl Into<String>) -> Self {
        OutputReport {
            command: command.to_string(),
            inputs: IndexMap::new(),
            results: IndexMap::new(),
            method: method.into(),
            error_bound_or_stderr: None,
            error_label: "error bound",
        }
    }

    pub fn input(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).expect("inputs serialize");
        self.inputs.insert(key.to_string(), v);
    }

    pub fn row(&mut self, label: &str, cells: Vec<Cell>) {
        self.results.insert(label.to_string(), cells);
    }

    pub fn reals(&mut self, label: &str, values: &[f64]) {
        self.row(label, values.iter().map(|&x| Cell::Real(x)).collect());
    }
}

/// `x` with `digits` decimals, ties to even on the exact binary value.
pub fn fixed(x: f64, digits: usize) -> String {
    let s = format!("{x:.digits$}");
    // Keep "-0.000" out of tables.
    if s.starts_with('-') && s[1..].chars().all(|c| c == '0' || c == '.') {
        s[1..].to_string()
    } else {
        s
    }
}

pub fn format_report(report: &OutputReport, format: Format, digits: usize) -> String {
    match format {
        Format::Table => table(report, digits),
        Format::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("report serializes");
            s.push('\n');
            s
        }
        Format::Csv => csv_text(report),
    }
}

fn table(report: &OutputReport, digits: usize) -> String {
    let rendered: Vec<(&str, Vec<String>)> = report
        .results
        .iter()
        .map(|(label, cells)| (label.as_str(), cells.iter().map(|c| c.render(digits)).collect()))
        .collect();
    let label_width = rendered.iter().map(|(l, _)| l.chars().count()).max().unwrap_or(0);
    let columns = rendered.iter().map(|(_, c)| c.len()).max().unwrap_or(0);
    let widths: Vec<usize> = (0..columns)
        .map(|j| {
            rendered
                .iter()
                .filter_map(|(_, c)| c.get(j).map(|s| s.chars().count()))
                .max()
                .unwrap_or(0)
        })
        .collect();

    let mut out = String::new();
    for (label, cells) in &rendered {
        let mut line = format!("{label:<label_width$}");
        for (cell, &w) in cells.iter().zip(&widths) {
            let _ = write!(line, "  {cell:>w$}");
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    let _ = writeln!(out, "method: {}", report.method);
    if let Some(e) = report.error_bound_or_stderr {
        let _ = writeln!(out, "{}: {e:.2e}", report.error_label);
    }
    out
}

/// Long format: one line per cell.
fn csv_text(report: &OutputReport) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["row", "index", "value"]).expect("in-memory write");
    for (label, cells) in &report.results {
        for (i, cell) in cells.iter().enumerate() {
            let v = match cell {
                Cell::Int(n) => n.to_string(),
                Cell::Real(x) => x.to_string(),
                Cell::Text(s) => s.clone(),
            };
            w.write_record([label.as_str(), &(i + 1).to_string(), &v])
                .expect("in-memory write");
        }
    }
    let bytes = w.into_inner().expect("in-memory flush");
    String::from_utf8(bytes).expect("csv output is utf-8")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ties_round_to_even() {
        assert_eq!(fixed(0.125, 2), "0.12");
        assert_eq!(fixed(0.375, 2), "0.38");
        assert_eq!(fixed(2.5, 0), "2");
        assert_eq!(fixed(1.0 / 36.0, 3), "0.028");
        assert_eq!(fixed(-1e-9, 3), "0.000");
    }

    #[test]
    fn table_aligns_columns() {
        let mut r = OutputReport::new("win", "dp");
        r.row("Player number", vec![Cell::Int(1), Cell::Int(2)]);
        r.reals("Probability to win", &[5.0 / 9.0, 4.0 / 9.0]);
        let t = format_report(&r, Format::Table, 3);
        assert_eq!(
            t,
            "Player number           1      2\nProbability to win  0.556  0.444\nmethod: dp\n"
        );
    }

    #[test]
    fn json_round_trips() {
        let r = OutputReport::new("limit", "exact");
        let v: Value = serde_json::from_str(&format_report(&r, Format::Json, 6)).unwrap();
        assert_eq!(v["command"], "limit");
        assert!(v["results"].as_object().unwrap().is_empty());
    }

    #[test]
    fn csv_has_header() {
        let mut r = OutputReport::new("win", "dp");
        r.reals("p", &[0.5]);
        assert_eq!(format_report(&r, Format::Csv, 6), "row,index,value\np,1,0.5\n");
    }
}
