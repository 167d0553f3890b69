//! AC-SNAP v1 text snapshots.
//!
//! Header lines `ac-snap 1`, `n 2`, `nr`, `ntheta`, `R`, `eps`, `t`, then the
//! `Nr·Nθ` cell values row-major (ring outer, angle inner), one ring per
//! line, 17 significant digits.

use std::fmt::Write as _;
use std::path::Path;

use acflow_core::{PolarGrid, ScalarField, State};

use crate::error::{HarnessError, Result};

pub fn format_snapshot(state: &State) -> String {
    let g = state.grid();
    let mut s = String::new();
    let _ = writeln!(s, "ac-snap 1");
    let _ = writeln!(s, "n 2");
    let _ = writeln!(s, "nr {}", g.nr());
    let _ = writeln!(s, "ntheta {}", g.ntheta());
    let _ = writeln!(s, "R {:.16e}", g.radius());
    let _ = writeln!(s, "eps {:.16e}", state.eps);
    let _ = writeln!(s, "t {:.16e}", state.t);
    for row in state.u.values.chunks(g.ntheta()) {
        let line: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
        let _ = writeln!(s, "{}", line.join(" "));
    }
    s
}

pub fn write_snapshot(path: &Path, state: &State) -> Result<()> {
    std::fs::write(path, format_snapshot(state)).map_err(|e| HarnessError::io(path, e))
}

pub fn parse_snapshot(text: &str) -> std::result::Result<State, String> {
    let mut tokens = text.split_whitespace();
    let mut header = |name: &str| -> std::result::Result<String, String> {
        match (tokens.next(), tokens.next()) {
            (Some(k), Some(v)) if k == name => Ok(v.to_string()),
            (Some(k), _) => Err(format!("expected `{name}`, found `{k}`")),
            _ => Err(format!("truncated header before `{name}`")),
        }
    };
    if header("ac-snap")? != "1" {
        return Err("unsupported version".into());
    }
    if header("n")? != "2" {
        return Err("only n = 2 snapshots are supported".into());
    }
    let num = |s: String, what: &str| s.parse::<f64>().map_err(|_| format!("bad {what} `{s}`"));
    let nr: usize = header("nr")?.parse().map_err(|_| "bad nr".to_string())?;
    let ntheta: usize = header("ntheta")?
        .parse()
        .map_err(|_| "bad ntheta".to_string())?;
    let radius = num(header("R")?, "R")?;
    let eps = num(header("eps")?, "eps")?;
    let t = num(header("t")?, "t")?;
    let values = tokens
        .map(|v| v.parse::<f64>().map_err(|_| format!("bad value `{v}`")))
        .collect::<std::result::Result<Vec<f64>, String>>()?;
    let grid = PolarGrid::new(nr, ntheta, radius).map_err(|e| e.to_string())?;
    if values.len() != grid.len() {
        return Err(format!(
            "expected {} values, found {}",
            grid.len(),
            values.len()
        ));
    }
    let u = ScalarField::from_values(grid, t, values).map_err(|e| e.to_string())?;
    let mut state = State::new(u, eps);
    state.t = t;
    Ok(state)
}

pub fn read_snapshot(path: &Path) -> Result<State> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    parse_snapshot(&text).map_err(|message| HarnessError::Snapshot {
        path: path.to_path_buf(),
        message,
    })
}
