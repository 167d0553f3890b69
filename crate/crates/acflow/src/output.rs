//! CSV writers. Floats use the shortest representation that round-trips;
//! missing values are empty cells.

use std::fmt::Write as _;
use std::path::Path;

use acflow_core::{DiagnosticsTable, Vec2};

use crate::error::{HarnessError, Result};

pub fn cell(v: Option<f64>) -> String {
    match v {
        Some(x) if x.is_finite() => format!("{x}"),
        _ => String::new(),
    }
}

pub fn diagnostics_csv(table: &DiagnosticsTable) -> String {
    let mut s = table.column_names().join(",");
    s.push('\n');
    for row in &table.rows {
        let cells: Vec<String> = DiagnosticsTable::row_values(row)
            .into_iter()
            .map(cell)
            .collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}

/// One line per vertex: `x,y,segment`.
pub fn interface_csv(polylines: &[Vec<Vec2>]) -> String {
    let mut s = String::from("x,y,segment\n");
    for (id, line) in polylines.iter().enumerate() {
        for p in line {
            let _ = writeln!(s, "{},{},{id}", p.x, p.y);
        }
    }
    s
}

pub fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| HarnessError::io(path, e))
}

/// Reads back a diagnostics CSV as a header and rows of optional cells.
pub fn parse_csv(text: &str) -> std::result::Result<(Vec<String>, Vec<Vec<Option<f64>>>), String> {
    let mut lines = text.lines();
    let header: Vec<String> = lines
        .next()
        .ok_or("empty file")?
        .split(',')
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for (n, line) in lines.enumerate() {
        let cells = line
            .split(',')
            .map(|c| {
                if c.is_empty() {
                    Ok(None)
                } else {
                    c.parse::<f64>().map(Some)
                }
            })
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| format!("row {}: bad number", n + 1))?;
        if cells.len() != header.len() {
            return Err(format!(
                "row {}: {} cells for {} columns",
                n + 1,
                cells.len(),
                header.len()
            ));
        }
        rows.push(cells);
    }
    Ok((header, rows))
}
