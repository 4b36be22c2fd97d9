use std::io::{BufRead, Write};

use super::{parse_err, parse_num};
use crate::error::Result;
use crate::logreg::LogRegModel;

/// `# dim=<n> C=<c>` followed by `index value` lines (1-based) for the
/// nonzero weights.
pub fn write_model(mut out: impl Write, model: &LogRegModel) -> Result<()> {
    writeln!(out, "# dim={} C={:e}", model.w.len(), model.c)?;
    for (j, &v) in model.w.iter().enumerate() {
        if v != 0.0 {
            writeln!(out, "{} {v:e}", j + 1)?;
        }
    }
    Ok(())
}

pub fn read_model(input: impl BufRead) -> Result<LogRegModel> {
    let mut header: Option<(usize, f64)> = None;
    let mut entries = Vec::new();
    for (k, line) in input.lines().enumerate() {
        let line = line?;
        let lineno = k + 1;
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        if let Some(c) = t.strip_prefix('#') {
            let (mut dim, mut cval) = (None, None);
            for kv in c.split_whitespace() {
                if let Some(v) = kv.strip_prefix("dim=") {
                    dim = Some(parse_num(v, lineno, "dimension")?);
                } else if let Some(v) = kv.strip_prefix("C=") {
                    cval = Some(parse_num(v, lineno, "C")?);
                }
            }
            match (dim, cval) {
                (Some(d), Some(c)) => header = Some((d, c)),
                _ => return Err(parse_err(lineno, "expected `# dim=<n> C=<c>`")),
            }
            continue;
        }
        let (dim, _) = header.ok_or_else(|| parse_err(lineno, "weights before the header"))?;
        let mut tok = t.split_whitespace();
        let (Some(j), Some(v), None) = (tok.next(), tok.next(), tok.next()) else {
            return Err(parse_err(lineno, "expected `index value`"));
        };
        let j: usize = parse_num(j, lineno, "index")?;
        let v: f64 = parse_num(v, lineno, "weight")?;
        if j == 0 || j > dim {
            return Err(parse_err(lineno, format!("index {j} outside 1..={dim}")));
        }
        entries.push((j - 1, v));
    }
    let (dim, c) = header.ok_or_else(|| parse_err(1, "missing header"))?;
    let mut model = LogRegModel::zeros(dim, c)?;
    for (j, v) in entries {
        model.w[j] = v;
    }
    Ok(model)
}
