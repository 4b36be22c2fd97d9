use std::io::{BufRead, Write};

use super::{parse_err, parse_num};
use crate::error::{Error, Result};
use crate::linalg::SparseSymMatrix;

/// Writes the lower triangle in Matrix Market `coordinate real symmetric`
/// form with 1-based indices.
pub fn write_matrix_market(mut out: impl Write, a: &SparseSymMatrix) -> Result<()> {
    let entries: Vec<(usize, usize, f64)> = a.upper_entries().collect();
    writeln!(out, "%%MatrixMarket matrix coordinate real symmetric")?;
    writeln!(out, "{} {} {}", a.dim(), a.dim(), entries.len())?;
    for (i, j, v) in entries {
        writeln!(out, "{} {} {v:e}", j + 1, i + 1)?;
    }
    Ok(())
}

/// Reads a square `coordinate real` matrix, either `symmetric` (one
/// triangle) or `general` (both triangles, which must agree).
pub fn read_matrix_market(input: impl BufRead) -> Result<SparseSymMatrix> {
    let mut lines = input.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
    let header = header?.to_lowercase();
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 5 || fields[0] != "%%matrixmarket" || fields[1] != "matrix" || fields[2] != "coordinate" {
        return Err(parse_err(1, "expected a Matrix Market coordinate header"));
    }
    if fields[3] != "real" && fields[3] != "integer" {
        return Err(parse_err(1, format!("unsupported field type {}", fields[3])));
    }
    let symmetric = match fields[4] {
        "symmetric" => true,
        "general" => false,
        other => return Err(parse_err(1, format!("unsupported symmetry {other}"))),
    };
    let mut size: Option<(usize, usize)> = None;
    let mut triplets = Vec::new();
    for (k, line) in lines {
        let line = line?;
        let lineno = k + 1;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        let tok: Vec<&str> = t.split_whitespace().collect();
        match size {
            None => {
                if tok.len() != 3 {
                    return Err(parse_err(lineno, "expected `rows cols entries`"));
                }
                let r: usize = parse_num(tok[0], lineno, "row count")?;
                let c: usize = parse_num(tok[1], lineno, "column count")?;
                let e: usize = parse_num(tok[2], lineno, "entry count")?;
                if r != c {
                    return Err(parse_err(lineno, format!("matrix is {r} x {c}, not square")));
                }
                size = Some((r, e));
                triplets.reserve(e);
            }
            Some((n, _)) => {
                if tok.len() != 3 {
                    return Err(parse_err(lineno, "expected `row col value`"));
                }
                let i: usize = parse_num(tok[0], lineno, "row")?;
                let j: usize = parse_num(tok[1], lineno, "column")?;
                let v: f64 = parse_num(tok[2], lineno, "value")?;
                if i == 0 || j == 0 || i > n || j > n {
                    return Err(parse_err(lineno, format!("index ({i}, {j}) outside 1..={n}")));
                }
                if !v.is_finite() {
                    return Err(parse_err(lineno, "non-finite value"));
                }
                if symmetric && i < j {
                    return Err(parse_err(lineno, "symmetric files list the lower triangle only"));
                }
                triplets.push((i - 1, j - 1, v));
            }
        }
    }
    let (n, e) = size.ok_or_else(|| parse_err(2, "missing size line"))?;
    if triplets.len() != e {
        return Err(Error::Parse {
            line: 2,
            message: format!("size line announces {e} entries, found {}", triplets.len()),
        });
    }
    if symmetric {
        let both: Vec<_> = triplets
            .iter()
            .flat_map(|&(i, j, v)| {
                let mirror = (i != j).then_some((j, i, v));
                std::iter::once((i, j, v)).chain(mirror)
            })
            .collect();
        SparseSymMatrix::from_triplets(n, &both)
    } else {
        SparseSymMatrix::from_triplets(n, &triplets)
    }
}
