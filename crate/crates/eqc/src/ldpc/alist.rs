//! The alist sparse-matrix interchange format.
//!
//! Layout: line 1 `n m`; line 2 `max_col_degree max_row_degree`; line 3 the
//! n column degrees; line 4 the m row degrees; then n lines of 1-indexed row
//! indices per column, zero-padded to the max column degree; then m lines of
//! column indices per row, zero-padded likewise.

use super::ParityCheckMatrix;
use crate::{Error, Result};
use std::fmt::Write as _;

struct LineReader<'a> {
    lines: std::str::Lines<'a>,
    line_no: usize,
}

impl<'a> LineReader<'a> {
    fn new(text: &'a str) -> Self {
        LineReader {
            lines: text.lines(),
            line_no: 0,
        }
    }

    fn next_numbers(&mut self) -> Result<(usize, Vec<usize>)> {
        loop {
            self.line_no += 1;
            let line = self.lines.next().ok_or(Error::Alist {
                line: self.line_no,
                msg: "unexpected end of file".into(),
            })?;
            if line.trim().is_empty() {
                continue;
            }
            let nums: std::result::Result<Vec<usize>, _> =
                line.split_whitespace().map(str::parse).collect();
            return match nums {
                Ok(v) => Ok((self.line_no, v)),
                Err(e) => Err(Error::Alist {
                    line: self.line_no,
                    msg: format!("not a number list: {e}"),
                }),
            };
        }
    }
}

/// Parses alist text into a validated, cross-consistent matrix.
pub fn parse_alist(text: &str) -> Result<ParityCheckMatrix> {
    let mut rd = LineReader::new(text);
    let err = |line: usize, msg: String| Error::Alist { line, msg };

    let (line, dims) = rd.next_numbers()?;
    if dims.len() != 2 {
        return Err(err(line, format!("expected `n m`, got {} numbers", dims.len())));
    }
    let (n, m) = (dims[0], dims[1]);
    if n == 0 || m == 0 {
        return Err(err(line, "dimensions must be positive".into()));
    }

    let (line, maxima) = rd.next_numbers()?;
    if maxima.len() != 2 {
        return Err(err(
            line,
            format!("expected `max_col max_row`, got {} numbers", maxima.len()),
        ));
    }
    let (max_col, max_row) = (maxima[0], maxima[1]);

    let (line, col_degrees) = rd.next_numbers()?;
    if col_degrees.len() != n {
        return Err(err(
            line,
            format!("expected {n} column degrees, got {}", col_degrees.len()),
        ));
    }
    if let Some(&d) = col_degrees.iter().find(|&&d| d > max_col) {
        return Err(err(line, format!("column degree {d} exceeds maximum {max_col}")));
    }

    let (line, row_degrees) = rd.next_numbers()?;
    if row_degrees.len() != m {
        return Err(err(
            line,
            format!("expected {m} row degrees, got {}", row_degrees.len()),
        ));
    }
    if let Some(&d) = row_degrees.iter().find(|&&d| d > max_row) {
        return Err(err(line, format!("row degree {d} exceeds maximum {max_row}")));
    }

    let read_adjacency = |rd: &mut LineReader,
                          count: usize,
                          degrees: &[usize],
                          max_deg: usize,
                          limit: usize,
                          what: &str|
     -> Result<Vec<Vec<usize>>> {
        let mut adj = Vec::with_capacity(count);
        for (i, &deg) in degrees.iter().enumerate().take(count) {
            let (line, entries) = rd.next_numbers()?;
            if entries.len() != max_deg && entries.len() != deg {
                return Err(err(
                    line,
                    format!(
                        "{what} {}: expected {deg} entries padded to {max_deg}, got {}",
                        i + 1,
                        entries.len()
                    ),
                ));
            }
            let (live, pad) = entries.split_at(deg.min(entries.len()));
            if live.iter().any(|&e| e == 0) {
                return Err(err(
                    line,
                    format!("{what} {}: zero entry before the declared degree {deg}", i + 1),
                ));
            }
            if pad.iter().any(|&e| e != 0) {
                return Err(err(
                    line,
                    format!("{what} {}: nonzero entry in zero padding", i + 1),
                ));
            }
            let mut list: Vec<usize> = Vec::with_capacity(deg);
            for &e in live {
                if e > limit {
                    return Err(err(line, format!("{what} {}: index {e} out of range 1..={limit}", i + 1)));
                }
                list.push(e - 1);
            }
            list.sort_unstable();
            if list.windows(2).any(|w| w[0] == w[1]) {
                return Err(err(line, format!("{what} {}: duplicate index", i + 1)));
            }
            adj.push(list);
        }
        Ok(adj)
    };

    let column_adjacency = read_adjacency(&mut rd, n, &col_degrees, max_col, m, "column")?;
    let row_adjacency = read_adjacency(&mut rd, m, &row_degrees, max_row, n, "row")?;

    // Cross-consistency: both adjacency views must describe the same matrix.
    for (c, rows) in column_adjacency.iter().enumerate() {
        for &r in rows {
            if row_adjacency[r].binary_search(&c).is_err() {
                return Err(err(
                    0,
                    format!(
                        "column {} lists row {} but row {} does not list column {}",
                        c + 1,
                        r + 1,
                        r + 1,
                        c + 1
                    ),
                ));
            }
        }
    }
    for (r, cols) in row_adjacency.iter().enumerate() {
        for &c in cols {
            if column_adjacency[c].binary_search(&r).is_err() {
                return Err(err(
                    0,
                    format!(
                        "row {} lists column {} but column {} does not list row {}",
                        r + 1,
                        c + 1,
                        c + 1,
                        r + 1
                    ),
                ));
            }
        }
    }
    let col_entries: usize = column_adjacency.iter().map(Vec::len).sum();
    let row_entries: usize = row_adjacency.iter().map(Vec::len).sum();
    if col_entries != row_entries {
        return Err(err(
            0,
            format!("column view has {col_entries} entries, row view has {row_entries}"),
        ));
    }

    Ok(ParityCheckMatrix {
        n,
        m,
        column_adjacency,
        row_adjacency,
        source: "alist".into(),
    })
}

/// Serializes a matrix to canonical alist text (space-separated, zero-padded,
/// trailing newline).
pub fn to_alist(h: &ParityCheckMatrix) -> String {
    let max_col = h.column_adjacency.iter().map(Vec::len).max().unwrap_or(0);
    let max_row = h.row_adjacency.iter().map(Vec::len).max().unwrap_or(0);
    let mut s = String::new();
    writeln!(s, "{} {}", h.n, h.m).unwrap();
    writeln!(s, "{} {}", max_col, max_row).unwrap();
    let degrees = |adj: &[Vec<usize>]| {
        adj.iter()
            .map(|l| l.len().to_string())
            .collect::<Vec<_>>()
            .join(" ")
    };
    writeln!(s, "{}", degrees(&h.column_adjacency)).unwrap();
    writeln!(s, "{}", degrees(&h.row_adjacency)).unwrap();
    let write_adj = |s: &mut String, adj: &[Vec<usize>], max_deg: usize| {
        for list in adj {
            let mut entries: Vec<String> = list.iter().map(|&i| (i + 1).to_string()).collect();
            entries.resize(max_deg, "0".into());
            writeln!(s, "{}", entries.join(" ")).unwrap();
        }
    };
    write_adj(&mut s, &h.column_adjacency, max_col);
    write_adj(&mut s, &h.row_adjacency, max_row);
    s
}
