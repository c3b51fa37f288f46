//! Reader and writer for the standard alist sparse-matrix text format.
//!
//! Layout: `n m`, then the maximum column/row degrees, the per-column and
//! per-row degree lists, then one line of 1-based CN indices per VN and one
//! line of 1-based VN indices per CN. Written files pad every adjacency line
//! with zeros up to the maximum degree; the parser also accepts the unpadded
//! variant.

use crate::error::{Error, Result};
use crate::tanner::ParityCheckMatrix;
use std::fmt::Write as _;

fn err(line: usize, message: impl Into<String>) -> Error {
    Error::Alist {
        line,
        message: message.into(),
    }
}

struct Lines<'a> {
    inner: std::str::Lines<'a>,
    line_no: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Self {
            inner: text.lines(),
            line_no: 0,
        }
    }

    /// Next non-blank line parsed as whitespace-separated usizes.
    fn numbers(&mut self, what: &str) -> Result<(usize, Vec<usize>)> {
        loop {
            let line = self.inner.next().ok_or_else(|| {
                err(self.line_no + 1, format!("unexpected end of input, expected {what}"))
            })?;
            self.line_no += 1;
            if line.trim().is_empty() {
                continue;
            }
            let mut out = Vec::new();
            for tok in line.split_whitespace() {
                let v: usize = tok
                    .parse()
                    .map_err(|_| err(self.line_no, format!("invalid number {tok:?} in {what}")))?;
                out.push(v);
            }
            return Ok((self.line_no, out));
        }
    }
}

pub fn parse_alist(text: &str) -> Result<ParityCheckMatrix> {
    let mut lines = Lines::new(text);

    let (ln, dims) = lines.numbers("dimensions")?;
    if dims.len() != 2 {
        return Err(err(ln, format!("expected `n m`, got {} numbers", dims.len())));
    }
    let (n, m) = (dims[0], dims[1]);

    let (ln, maxdeg) = lines.numbers("maximum degrees")?;
    if maxdeg.len() != 2 {
        return Err(err(ln, "expected two maximum degrees"));
    }
    let (max_col, max_row) = (maxdeg[0], maxdeg[1]);

    let (ln, col_degs) = lines.numbers("column degree list")?;
    if col_degs.len() != n {
        return Err(err(ln, format!("expected {n} column degrees, got {}", col_degs.len())));
    }
    let (ln, row_degs) = lines.numbers("row degree list")?;
    if row_degs.len() != m {
        return Err(err(ln, format!("expected {m} row degrees, got {}", row_degs.len())));
    }
    if let Some(d) = col_degs.iter().find(|&&d| d > max_col) {
        return Err(err(ln, format!("column degree {d} exceeds stated maximum {max_col}")));
    }
    if let Some(d) = row_degs.iter().find(|&&d| d > max_row) {
        return Err(err(ln, format!("row degree {d} exceeds stated maximum {max_row}")));
    }

    // One adjacency line per VN: 1-based CN indices, optionally zero-padded.
    let mut cols: Vec<Vec<usize>> = Vec::with_capacity(n);
    for v in 0..n {
        let (ln, mut entries) = lines.numbers(&format!("adjacency of column {v}"))?;
        while entries.last() == Some(&0) {
            entries.pop();
        }
        if entries.len() != col_degs[v] {
            return Err(err(
                ln,
                format!(
                    "column {v} lists {} check nodes but its degree is {}",
                    entries.len(),
                    col_degs[v]
                ),
            ));
        }
        let mut list = Vec::with_capacity(entries.len());
        for e in entries {
            if e == 0 || e > m {
                return Err(err(ln, format!("check-node index {e} out of range 1..={m}")));
            }
            list.push(e - 1);
        }
        list.sort_unstable();
        if list.windows(2).any(|w| w[0] == w[1]) {
            return Err(err(ln, format!("duplicate check-node index in column {v}")));
        }
        cols.push(list);
    }

    let mut rows: Vec<Vec<usize>> = Vec::with_capacity(m);
    for c in 0..m {
        let (ln, mut entries) = lines.numbers(&format!("adjacency of row {c}"))?;
        while entries.last() == Some(&0) {
            entries.pop();
        }
        if entries.len() != row_degs[c] {
            return Err(err(
                ln,
                format!(
                    "row {c} lists {} variable nodes but its degree is {}",
                    entries.len(),
                    row_degs[c]
                ),
            ));
        }
        let mut list = Vec::with_capacity(entries.len());
        for e in entries {
            if e == 0 || e > n {
                return Err(err(ln, format!("variable-node index {e} out of range 1..={n}")));
            }
            list.push(e - 1);
        }
        list.sort_unstable();
        if list.windows(2).any(|w| w[0] == w[1]) {
            return Err(err(ln, format!("duplicate variable-node index in row {c}")));
        }
        rows.push(list);
    }

    // The two adjacency blocks must describe the same matrix.
    let h = ParityCheckMatrix::from_rows(n, rows)?;
    for v in 0..n {
        if h.vn_neighbors(v) != cols[v].as_slice() {
            return Err(Error::Inconsistent(format!(
                "column {v}: column list {:?} does not match row lists {:?}",
                cols[v],
                h.vn_neighbors(v)
            )));
        }
    }
    Ok(h)
}

pub fn write_alist(h: &ParityCheckMatrix) -> String {
    let n = h.vn_count();
    let m = h.cn_count();
    let max_col = (0..n).map(|v| h.vn_degree(v)).max().unwrap_or(0);
    let max_row = (0..m).map(|c| h.cn_degree(c)).max().unwrap_or(0);

    let mut out = String::new();
    let _ = writeln!(out, "{n} {m}");
    let _ = writeln!(out, "{max_col} {max_row}");
    let degs = |it: Vec<usize>| {
        it.iter()
            .map(|d| d.to_string())
            .collect::<Vec<_>>()
            .join(" ")
    };
    let _ = writeln!(out, "{}", degs((0..n).map(|v| h.vn_degree(v)).collect()));
    let _ = writeln!(out, "{}", degs((0..m).map(|c| h.cn_degree(c)).collect()));
    for v in 0..n {
        let mut entries: Vec<String> = h.vn_neighbors(v).iter().map(|c| (c + 1).to_string()).collect();
        entries.resize(max_col, "0".to_string());
        let _ = writeln!(out, "{}", entries.join(" "));
    }
    for c in 0..m {
        let mut entries: Vec<String> = h.cn_neighbors(c).iter().map(|v| (v + 1).to_string()).collect();
        entries.resize(max_row, "0".to_string());
        let _ = writeln!(out, "{}", entries.join(" "));
    }
    out
}
