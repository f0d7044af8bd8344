use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::eval::MetricsReport;

/// One line of the smoothing summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothedRow {
    pub name: String,
    pub last_step: i64,
    pub value: f64,
}

fn cell(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), |v| format!("{v:.3}"))
}

/// Two-column text table of the eight figures, absent ones as `n/a`.
pub fn metrics_table(r: &MetricsReport) -> String {
    let rows = [
        ("Average Precision (area = all)", r.ap_all),
        ("Average Precision (area = small)", r.ap_small),
        ("Average Precision (area = medium)", r.ap_medium),
        ("Average Precision (area = large)", r.ap_large),
        ("Average Recall (area = all)", r.ar1_all),
        ("Average Recall (area = small)", r.ar1_small),
        ("Average Recall (area = medium)", r.ar1_medium),
        ("Average Recall (area = large)", r.ar1_large),
    ];
    let width = rows.iter().map(|r| r.0.len()).max().unwrap_or(0);
    let mut out = String::new();
    for (label, v) in rows {
        let _ = writeln!(out, "{label:<width$}  {}", cell(v));
    }
    out
}

/// Final smoothed value per series. The column header names the last step
/// when every row ends on the same one.
pub fn smoothing_table(rows: &[SmoothedRow]) -> String {
    let width = rows.iter().map(|r| r.name.len()).max().unwrap_or(0).max(6);
    let header = match rows.first() {
        Some(first) if rows.iter().all(|r| r.last_step == first.last_step) => {
            format!("After {} Steps (Smoothed value)", first.last_step)
        }
        _ => "Smoothed value".to_string(),
    };
    let mut out = String::new();
    let _ = writeln!(out, "{:<width$}  {header}", "Series");
    for r in rows {
        let _ = writeln!(out, "{:<width$}  {:.4}", r.name, r.value);
    }
    out
}
