//! CSV and Markdown comparison tables.

use std::fmt::Write;

use hctps_core::{FunctionId, RunStats};

pub const HCTPS_VARIANT: &str = "HCTPS-GA";
pub const GA_VARIANT: &str = "GA";
pub const CSV_HEADER: &str = "id,variant,mean,best,worst,median,st_dev";

/// Statistics of one function under each variant, in column order.
#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub fid: FunctionId,
    pub variants: Vec<(&'static str, RunStats<f64>)>,
}

fn columns(s: &RunStats<f64>) -> [(&'static str, f64); 5] {
    [("Mean", s.mean), ("Best", s.best), ("Worst", s.worst), ("Median", s.median), ("St. Dev", s.st_dev)]
}

/// One line per function and variant; numbers in shortest round-trip scientific form.
pub fn to_csv(rows: &[TableRow]) -> String {
    let mut out = format!("{CSV_HEADER}\n");
    for row in rows {
        for (variant, s) in &row.variants {
            let values: Vec<String> = columns(s).iter().map(|(_, v)| format!("{v:e}")).collect();
            writeln!(out, "{},{variant},{}", row.fid, values.join(",")).unwrap();
        }
    }
    out
}

/// Five statistic lines per function with the variants side by side.
pub fn to_markdown(rows: &[TableRow]) -> String {
    let Some(first) = rows.first() else {
        return String::new();
    };
    let names: Vec<&str> = first.variants.iter().map(|(n, _)| *n).collect();
    let mut out = format!("| ID | | {} |\n", names.join(" | "));
    writeln!(out, "|---|---|{}", "---:|".repeat(names.len())).unwrap();
    for row in rows {
        for (i, (label, _)) in columns(&row.variants[0].1).iter().enumerate() {
            let id = if i == 0 { row.fid.to_string() } else { String::new() };
            let cells: Vec<String> = row.variants.iter().map(|(_, s)| format!("{:.5E}", columns(s)[i].1)).collect();
            writeln!(out, "| {id} | {label} | {} |", cells.join(" | ")).unwrap();
        }
    }
    out
}
