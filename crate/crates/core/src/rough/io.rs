//! Columnar text format for rough paths.
//!
//! ```text
//! # rough-path v1
//! # dim 2
//! # hoelder 0.4
//! t,x1,x2,xx11,xx12,xx21,xx22
//! 0.0,0.0,0.0,0.0,0.0,0.0,0.0
//! 0.25,<X over [t0,t1]>,<𝕏 over [t0,t1], row-major>
//! ...
//! ```
//!
//! Row `k >= 1` carries the levels of the cell ending at `t_k`; row 0 holds
//! `t_0` and zeros. Floats use the shortest round-trip representation, so
//! writing and reading back is exact.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::grid::TimeGrid;

use super::path::RoughPath;

const MAGIC: &str = "# rough-path v1";

fn header(dim: usize) -> String {
    let mut cols = vec!["t".to_string()];
    cols.extend((1..=dim).map(|a| format!("x{a}")));
    for a in 1..=dim {
        for b in 1..=dim {
            cols.push(format!("xx{a}{b}"));
        }
    }
    cols.join(",")
}

pub fn write_columnar(rp: &RoughPath) -> String {
    let d = rp.dim();
    let mut out = String::new();
    let _ = writeln!(out, "{MAGIC}");
    let _ = writeln!(out, "# dim {d}");
    let _ = writeln!(out, "# hoelder {:?}", rp.hoelder());
    let _ = writeln!(out, "{}", header(d));
    let t = rp.grid().points();
    let _ = write!(out, "{:?}", t[0]);
    for _ in 0..d + d * d {
        out.push_str(",0.0");
    }
    out.push('\n');
    for k in 0..rp.cells() {
        let _ = write!(out, "{:?}", t[k + 1]);
        for v in rp.cell_increment(k).iter().chain(rp.cell_second_level(k)) {
            let _ = write!(out, ",{v:?}");
        }
        out.push('\n');
    }
    out
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

pub fn read_columnar(text: &str) -> Result<RoughPath> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    match lines.next() {
        Some((_, MAGIC)) => {}
        Some((n, _)) => return Err(parse_err(n, format!("expected `{MAGIC}`"))),
        None => return Err(parse_err(1, "empty input")),
    }
    let mut dim = None;
    let mut hoelder = None;
    let mut times = Vec::new();
    let mut increments = Vec::new();
    let mut second = Vec::new();
    let mut saw_header = false;
    for (n, line) in lines {
        if let Some(meta) = line.strip_prefix('#') {
            let mut it = meta.split_whitespace();
            match (it.next(), it.next()) {
                (Some("dim"), Some(v)) => {
                    dim = Some(v.parse::<usize>().map_err(|e| parse_err(n, e.to_string()))?)
                }
                (Some("hoelder"), Some(v)) => {
                    hoelder = Some(v.parse::<f64>().map_err(|e| parse_err(n, e.to_string()))?)
                }
                _ => {}
            }
            continue;
        }
        let d = dim.ok_or_else(|| parse_err(n, "missing `# dim` line before data"))?;
        if !saw_header {
            if line != header(d) {
                return Err(parse_err(n, format!("expected column header `{}`", header(d))));
            }
            saw_header = true;
            continue;
        }
        let fields = line
            .split(',')
            .map(|f| f.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| parse_err(n, e.to_string()))?;
        if fields.len() != 1 + d + d * d {
            return Err(parse_err(
                n,
                format!("expected {} columns, found {}", 1 + d + d * d, fields.len()),
            ));
        }
        if times.is_empty() {
            if fields[1..].iter().any(|v| *v != 0.0) {
                return Err(parse_err(n, "first row must carry zero levels"));
            }
        } else {
            increments.extend_from_slice(&fields[1..1 + d]);
            second.extend_from_slice(&fields[1 + d..]);
        }
        times.push(fields[0]);
    }
    let d = dim.ok_or_else(|| parse_err(1, "missing `# dim` line"))?;
    let hoelder = hoelder.ok_or_else(|| parse_err(1, "missing `# hoelder` line"))?;
    let grid = TimeGrid::new(times)?;
    RoughPath::from_cells(grid, d, increments, second, hoelder)
}
