//! Plain-text policy files.
//!
//! ```text
//! # lipschitz-policy v1
//! bounds <lo> <hi>
//! state <lo> <hi> <nodes>
//! time <lo> <hi> <nodes>        (time-dependent policies only)
//! certified <state> <time>
//! values
//! <one line of node values per time node>
//! ```

use std::fmt::Write as _;

use crate::error::{Error, Result};

use super::{Axis, LipschitzPolicy};

const MAGIC: &str = "# lipschitz-policy v1";

pub fn write_policy(p: &LipschitzPolicy) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{MAGIC}");
    let _ = writeln!(s, "bounds {:?} {:?}", p.bounds.0, p.bounds.1);
    let _ = writeln!(s, "state {:?} {:?} {}", p.state.lo, p.state.hi, p.state.nodes);
    if let Some(t) = p.time {
        let _ = writeln!(s, "time {:?} {:?} {}", t.lo, t.hi, t.nodes);
    }
    let _ = writeln!(s, "certified {:?} {:?}", p.certified_state, p.certified_time);
    let _ = writeln!(s, "values");
    for j in 0..p.rows() {
        let row: Vec<String> = p.row(j).iter().map(|v| format!("{v:?}")).collect();
        let _ = writeln!(s, "{}", row.join(" "));
    }
    s
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn floats(line: usize, words: &[&str]) -> Result<Vec<f64>> {
    words
        .iter()
        .map(|w| w.parse::<f64>().map_err(|e| parse_err(line, format!("`{w}`: {e}"))))
        .collect()
}

fn axis(line: usize, words: &[&str]) -> Result<Axis> {
    if words.len() != 3 {
        return Err(parse_err(line, "expected `<lo> <hi> <nodes>`"));
    }
    let b = floats(line, &words[..2])?;
    let n = words[2].parse::<usize>().map_err(|e| parse_err(line, e.to_string()))?;
    Axis::new(b[0], b[1], n).map_err(|e| parse_err(line, e.to_string()))
}

pub fn read_policy(text: &str) -> Result<LipschitzPolicy> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    match lines.next() {
        Some((_, l)) if l == MAGIC => {}
        _ => return Err(parse_err(1, format!("expected `{MAGIC}`"))),
    }
    let (mut bounds, mut state, mut time, mut certified) = (None, None, None, None);
    let mut values = Vec::new();
    let mut in_values = false;
    for (n, line) in lines {
        if line.is_empty() {
            continue;
        }
        if in_values {
            values.extend(floats(n, &line.split_whitespace().collect::<Vec<_>>())?);
            continue;
        }
        let words: Vec<&str> = line.split_whitespace().collect();
        match words[0] {
            "bounds" if words.len() == 3 => {
                let b = floats(n, &words[1..])?;
                bounds = Some((b[0], b[1]));
            }
            "state" => state = Some(axis(n, &words[1..])?),
            "time" => time = Some(axis(n, &words[1..])?),
            "certified" if words.len() == 3 => {
                let c = floats(n, &words[1..])?;
                certified = Some((c[0], c[1]));
            }
            "values" => in_values = true,
            other => return Err(parse_err(n, format!("unexpected `{other}`"))),
        }
    }
    let missing = |what: &str| parse_err(0, format!("missing `{what}` line"));
    let state = state.ok_or_else(|| missing("state"))?;
    let bounds = bounds.ok_or_else(|| missing("bounds"))?;
    let (cs, ct) = certified.ok_or_else(|| missing("certified"))?;
    LipschitzPolicy::build(state, time, values, bounds)?.with_certificates(cs, ct)
}
