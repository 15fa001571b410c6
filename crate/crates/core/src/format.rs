//! Text format for channel families and wiretap pairs.
//!
//! ```text
//! states: [s0, s1]
//! inputs: [0, 1]
//! outputs: [0, 1]
//! matrix s0:
//!   1 0
//!   0 1
//! matrix s1:
//!   0 1
//!   1 0
//! ```
//!
//! A pair file holds two such blocks introduced by `main:` and `wiretap:`.
//! Entries may be decimals or fractions like `1/3`. Blank lines and lines
//! starting with `#` are ignored.

use crate::channel::{ChannelFamily, StochasticMatrix, WiretapPair};
use crate::error::{Error, Result};

fn perr<T>(line: usize, msg: impl Into<String>) -> Result<T> {
    Err(Error::Parse { line, message: msg.into() })
}

#[derive(Default)]
struct Block {
    start: usize,
    states: Option<(usize, Vec<String>)>,
    inputs: Option<(usize, Vec<String>)>,
    outputs: Option<(usize, Vec<String>)>,
    // (line of header, state label, rows with their line numbers)
    matrices: Vec<(usize, String, Vec<(usize, Vec<f64>)>)>,
}

fn parse_labels(line: usize, rest: &str) -> Result<Vec<String>> {
    let rest = rest.trim();
    let inner = match rest.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
        Some(i) => i,
        None => return perr(line, "expected a bracketed label list like [a, b]"),
    };
    let labels: Vec<String> = inner.split(',').map(|s| s.trim().to_string()).collect();
    if labels.iter().any(|l| l.is_empty()) {
        return perr(line, "empty label in list");
    }
    Ok(labels)
}

fn parse_number(line: usize, tok: &str) -> Result<f64> {
    let v = if let Some((a, b)) = tok.split_once('/') {
        let a: f64 = a.parse().map_err(|_| Error::Parse { line, message: format!("bad number {tok:?}") })?;
        let b: f64 = b.parse().map_err(|_| Error::Parse { line, message: format!("bad number {tok:?}") })?;
        if b == 0.0 {
            return perr(line, format!("zero denominator in {tok:?}"));
        }
        a / b
    } else {
        tok.parse().map_err(|_| Error::Parse { line, message: format!("bad number {tok:?}") })?
    };
    if !v.is_finite() {
        return perr(line, format!("non-finite entry {tok:?}"));
    }
    Ok(v)
}

fn set_once(slot: &mut Option<(usize, Vec<String>)>, line: usize, key: &str, v: Vec<String>) -> Result<()> {
    if slot.is_some() {
        return perr(line, format!("duplicate `{key}` entry"));
    }
    *slot = Some((line, v));
    Ok(())
}

/// Feeds one significant line into a block.
fn feed(block: &mut Block, line: usize, text: &str) -> Result<()> {
    if let Some((key, rest)) = text.split_once(':') {
        let key = key.trim();
        match key {
            "states" => return set_once(&mut block.states, line, key, parse_labels(line, rest)?),
            "inputs" => return set_once(&mut block.inputs, line, key, parse_labels(line, rest)?),
            "outputs" => return set_once(&mut block.outputs, line, key, parse_labels(line, rest)?),
            _ => {}
        }
        if let Some(label) = key.strip_prefix("matrix") {
            let label = label.trim();
            if label.is_empty() || !rest.trim().is_empty() {
                return perr(line, "expected `matrix <state>:` on its own line");
            }
            block.matrices.push((line, label.to_string(), Vec::new()));
            return Ok(());
        }
        return perr(line, format!("unknown key `{key}`"));
    }
    let row = text.split_whitespace().map(|t| parse_number(line, t)).collect::<Result<Vec<f64>>>()?;
    match block.matrices.last_mut() {
        Some((_, _, rows)) => {
            rows.push((line, row));
            Ok(())
        }
        None => perr(line, "matrix row outside a `matrix <state>:` block"),
    }
}

fn finish(block: Block, last_line: usize) -> Result<ChannelFamily> {
    let (_, states) = match block.states {
        Some(v) => v,
        None => return perr(block.start.max(1), "missing `states:`"),
    };
    let (_, inputs) = match block.inputs {
        Some(v) => v,
        None => return perr(block.start.max(1), "missing `inputs:`"),
    };
    let (_, outputs) = match block.outputs {
        Some(v) => v,
        None => return perr(block.start.max(1), "missing `outputs:`"),
    };
    let mut slots: Vec<Option<StochasticMatrix>> = vec![None; states.len()];
    for (hline, label, rows) in block.matrices {
        let s = match states.iter().position(|l| *l == label) {
            Some(s) => s,
            None => return perr(hline, format!("matrix for unknown state {label:?}")),
        };
        if slots[s].is_some() {
            return perr(hline, format!("second matrix for state {label:?}"));
        }
        if rows.len() != inputs.len() {
            return perr(hline, format!("matrix {label:?} has {} rows, expected {}", rows.len(), inputs.len()));
        }
        for (rline, r) in &rows {
            if r.len() != outputs.len() {
                return perr(*rline, format!("row has {} entries, expected {}", r.len(), outputs.len()));
            }
        }
        for (rline, r) in &rows {
            if let Err(e) = crate::channel::Distribution::new(r.clone()) {
                let msg = match e {
                    Error::Domain(m) => m,
                    other => other.to_string(),
                };
                return perr(*rline, format!("matrix {label:?}: {msg}"));
            }
        }
        let m = StochasticMatrix::new(rows.into_iter().map(|(_, r)| r).collect())
            .map_err(|e| Error::Parse { line: hline, message: e.to_string() })?;
        slots[s] = Some(m);
    }
    let mut matrices = Vec::new();
    for (s, m) in slots.into_iter().enumerate() {
        match m {
            Some(m) => matrices.push(m),
            None => return perr(last_line, format!("no matrix given for state {:?}", states[s])),
        }
    }
    ChannelFamily::new(states, inputs, outputs, matrices)
        .map_err(|e| Error::Parse { line: block.start.max(1), message: e.to_string() })
}

fn significant_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

pub fn parse_family(text: &str) -> Result<ChannelFamily> {
    let mut block = Block { start: 1, ..Block::default() };
    let mut last = 1;
    for (line, l) in significant_lines(text) {
        if l == "main:" || l == "wiretap:" {
            return perr(line, "section header in a single-family file");
        }
        feed(&mut block, line, l)?;
        last = line;
    }
    finish(block, last)
}

pub fn parse_pair(text: &str) -> Result<WiretapPair> {
    let mut main: Option<Block> = None;
    let mut wiretap: Option<Block> = None;
    let mut current: Option<&str> = None;
    let mut last = 1;
    for (line, l) in significant_lines(text) {
        last = line;
        match l {
            "main:" | "wiretap:" => {
                let slot = if l == "main:" { &mut main } else { &mut wiretap };
                if slot.is_some() {
                    return perr(line, format!("duplicate `{l}` section"));
                }
                *slot = Some(Block { start: line, ..Block::default() });
                current = Some(if l == "main:" { "main" } else { "wiretap" });
            }
            _ => {
                let block = match current {
                    Some("main") => main.as_mut().unwrap(),
                    Some(_) => wiretap.as_mut().unwrap(),
                    None => return perr(line, "expected `main:` or `wiretap:` before channel data"),
                };
                feed(block, line, l)?;
            }
        }
    }
    let main = match main {
        Some(b) => finish(b, last)?,
        None => return perr(last, "missing `main:` section"),
    };
    let wiretap_start;
    let wiretap = match wiretap {
        Some(b) => {
            wiretap_start = b.start;
            finish(b, last)?
        }
        None => return perr(last, "missing `wiretap:` section"),
    };
    WiretapPair::new(main, wiretap).map_err(|e| Error::Parse { line: wiretap_start, message: e.to_string() })
}

fn write_block(out: &mut String, f: &ChannelFamily, indent: &str) {
    out.push_str(&format!("{indent}states: [{}]\n", f.state_labels().join(", ")));
    out.push_str(&format!("{indent}inputs: [{}]\n", f.input_labels().join(", ")));
    out.push_str(&format!("{indent}outputs: [{}]\n", f.output_labels().join(", ")));
    for (s, label) in f.state_labels().iter().enumerate() {
        out.push_str(&format!("{indent}matrix {label}:\n"));
        let m = f.matrix(s);
        for x in 0..m.rows() {
            let row: Vec<String> = m.row(x).iter().map(|v| format!("{v}")).collect();
            out.push_str(&format!("{indent}  {}\n", row.join(" ")));
        }
    }
}

/// Serialises a family; `parse_family` inverts this exactly.
pub fn write_family(f: &ChannelFamily) -> String {
    let mut out = String::new();
    write_block(&mut out, f, "");
    out
}

pub fn write_pair(p: &WiretapPair) -> String {
    let mut out = String::from("main:\n");
    write_block(&mut out, p.main(), "  ");
    out.push_str("wiretap:\n");
    write_block(&mut out, p.wiretap(), "  ");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const FAMILY: &str = "\
# identity and flip
states: [id, flip]
inputs: [0, 1]
outputs: [0, 1]
matrix id:
  1 0
  0 1
matrix flip:
  0 1
  1 0
";

    #[test]
    fn parses_family() {
        let f = parse_family(FAMILY).unwrap();
        assert_eq!(f.num_states(), 2);
        assert_eq!(f.prob(1, 0, 1), 1.0);
        assert_eq!(parse_family(&write_family(&f)).unwrap(), f);
    }

    #[test]
    fn fractions() {
        let text = "states: [a]\ninputs: [0, 1]\noutputs: [0, 1]\nmatrix a:\n 1/3 2/3\n 0.5 0.5\n";
        let f = parse_family(text).unwrap();
        assert_eq!(f.prob(0, 0, 0), 1.0 / 3.0);
    }

    #[test]
    fn errors_carry_lines() {
        let bad = FAMILY.replace("  0 1\n  1 0\n", "  0 1\n  1 0.5\n");
        match parse_family(&bad) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 10),
            other => panic!("unexpected {other:?}"),
        }
        let bad = FAMILY.replace("matrix flip:", "matrix flop:");
        assert!(matches!(parse_family(&bad), Err(Error::Parse { line: 8, .. })));
        let bad = FAMILY.replace("  1 0\n  0 1\n", "  1 0\n  0 x\n");
        assert!(matches!(parse_family(&bad), Err(Error::Parse { line: 7, .. })));
        assert!(matches!(parse_family("1 0\n"), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn pair_requires_both_sections() {
        let text = format!("main:\n{FAMILY}");
        assert!(matches!(parse_pair(&text), Err(Error::Parse { .. })));
        let text = format!("main:\n{FAMILY}wiretap:\n{FAMILY}");
        let p = parse_pair(&text).unwrap();
        assert_eq!(parse_pair(&write_pair(&p)).unwrap(), p);
    }
}
