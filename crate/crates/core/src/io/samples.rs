use std::io::{BufRead, Write};

use super::{parse_err, parse_num};
use crate::datagen::SampleMatrix;
use crate::error::Result;

/// One line per variable with its `m` samples, after a `# n=<n> m=<m>`
/// comment line.
pub fn write_samples_csv(mut out: impl Write, s: &SampleMatrix) -> Result<()> {
    writeln!(out, "# n={} m={}", s.n(), s.m())?;
    for i in 0..s.n() {
        let row: Vec<String> = s.row(i).iter().map(|v| format!("{v:e}")).collect();
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

/// Reads the format of [`write_samples_csv`]. The comment line is optional;
/// when present its counts must match the data.
pub fn read_samples_csv(input: impl BufRead) -> Result<SampleMatrix> {
    let mut declared: Option<(usize, usize, usize)> = None;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (k, line) in input.lines().enumerate() {
        let line = line?;
        let lineno = k + 1;
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        if let Some(c) = t.strip_prefix('#') {
            let (mut n, mut m) = (None, None);
            for kv in c.split_whitespace() {
                if let Some(v) = kv.strip_prefix("n=") {
                    n = Some(parse_num(v, lineno, "variable count")?);
                } else if let Some(v) = kv.strip_prefix("m=") {
                    m = Some(parse_num(v, lineno, "sample count")?);
                }
            }
            if let (Some(n), Some(m)) = (n, m) {
                declared = Some((n, m, lineno));
            }
            continue;
        }
        let row = t
            .split(',')
            .map(|tok| parse_num::<f64>(tok.trim(), lineno, "value"))
            .collect::<Result<Vec<f64>>>()?;
        if let Some(v) = row.iter().find(|v| !v.is_finite()) {
            return Err(parse_err(lineno, format!("non-finite value {v}")));
        }
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(parse_err(lineno, format!("{} values, expected {}", row.len(), first.len())));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(parse_err(1, "no samples"));
    }
    if let Some((n, m, lineno)) = declared {
        if n != rows.len() || m != rows[0].len() {
            return Err(parse_err(
                lineno,
                format!("header says {n} x {m}, data is {} x {}", rows.len(), rows[0].len()),
            ));
        }
    }
    SampleMatrix::from_rows(rows)
}
