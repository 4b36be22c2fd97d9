use std::io::{BufRead, Write};

use super::{parse_err, parse_num};
use crate::error::Result;
use crate::logreg::LabeledDataset;

/// `label index:value ...` per sample with 1-based indices. Labels `+1`,
/// `1`, `-1` are accepted; `0` is read as `-1`. The feature count is the
/// largest index unless `features` is given.
pub fn read_libsvm(input: impl BufRead, features: Option<usize>, bias: bool) -> Result<LabeledDataset> {
    let mut samples = Vec::new();
    let mut labels = Vec::new();
    let mut max_index = 0;
    for (k, line) in input.lines().enumerate() {
        let line = line?;
        let lineno = k + 1;
        let t = line.split('#').next().unwrap_or("").trim();
        if t.is_empty() {
            continue;
        }
        let mut tok = t.split_whitespace();
        let label = tok.next().expect("nonempty line");
        let y = match parse_num::<f64>(label, lineno, "label")? {
            v if v == 1.0 => 1.0,
            v if v == -1.0 || v == 0.0 => -1.0,
            v => return Err(parse_err(lineno, format!("label {v} is not binary"))),
        };
        let mut row = Vec::new();
        let mut last = 0;
        for pair in tok {
            let (idx, val) = pair
                .split_once(':')
                .ok_or_else(|| parse_err(lineno, format!("expected index:value, got {pair:?}")))?;
            let j: usize = parse_num(idx, lineno, "feature index")?;
            let v: f64 = parse_num(val, lineno, "feature value")?;
            if j == 0 {
                return Err(parse_err(lineno, "feature indices start at 1"));
            }
            if j <= last {
                return Err(parse_err(lineno, "feature indices must increase"));
            }
            if !v.is_finite() {
                return Err(parse_err(lineno, "non-finite feature value"));
            }
            if let Some(n) = features {
                if j > n {
                    return Err(parse_err(lineno, format!("feature {j} exceeds {n}")));
                }
            }
            last = j;
            max_index = max_index.max(j);
            row.push((j - 1, v));
        }
        samples.push(row);
        labels.push(y);
    }
    if samples.is_empty() {
        return Err(parse_err(1, "no samples"));
    }
    LabeledDataset::new(features.unwrap_or(max_index), samples, labels, bias)
}

/// Writes samples in libsvm form, without the bias column.
pub fn write_libsvm(mut out: impl Write, data: &LabeledDataset) -> Result<()> {
    for (i, row) in data.rows().into_iter().enumerate() {
        write!(out, "{}", if data.label(i) > 0.0 { "+1" } else { "-1" })?;
        for (j, v) in row {
            write!(out, " {}:{v:e}", j + 1)?;
        }
        writeln!(out)?;
    }
    Ok(())
}
