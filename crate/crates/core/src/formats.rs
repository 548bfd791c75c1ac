//! Import/export of parity-check matrices.
//!
//! Supported formats:
//!
//! * **alist** — the MacKay sparse format used by most LDPC tooling. Layout:
//!   `n m` (columns then rows), maximum column/row degree, per-column
//!   degrees, per-row degrees, then 1-based column adjacency lists and row
//!   adjacency lists, each padded with zeros to the maximum degree. The
//!   parser also accepts unpadded lists.
//! * **Matrix Market** — `coordinate pattern general` with 1-based entries.
//! * **dense text** — one line of `0`/`1` characters per row, refused above
//!   a million entries to keep accidental exports of large codes in check.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::matrix::SparseBinaryMatrix;

/// Largest `rows * cols` product accepted by the dense-text exporter.
pub const DENSE_EXPORT_CAP: usize = 1_000_000;

/// Serializes `m` in alist format with zero-padded adjacency lists.
pub fn to_alist(m: &SparseBinaryMatrix) -> String {
    let (n, r) = (m.cols(), m.rows());
    let max_col = (0..n).map(|c| m.col_weight(c)).max().unwrap_or(0);
    let max_row = (0..r).map(|row| m.row_weight(row)).max().unwrap_or(0);

    let mut out = String::new();
    let _ = writeln!(out, "{} {}", n, r);
    let _ = writeln!(out, "{} {}", max_col, max_row);
    push_degrees(&mut out, (0..n).map(|c| m.col_weight(c)));
    push_degrees(&mut out, (0..r).map(|row| m.row_weight(row)));
    for c in 0..n {
        push_padded_list(&mut out, m.col(c), max_col);
    }
    for row in 0..r {
        push_padded_list(&mut out, m.row(row), max_row);
    }
    out
}

fn push_degrees(out: &mut String, degrees: impl Iterator<Item = usize>) {
    let line: Vec<String> = degrees.map(|d| d.to_string()).collect();
    let _ = writeln!(out, "{}", line.join(" "));
}

fn push_padded_list(out: &mut String, adj: &[u32], width: usize) {
    let mut parts: Vec<String> = adj.iter().map(|&x| (x + 1).to_string()).collect();
    parts.resize(width.max(parts.len()), "0".to_string());
    let _ = writeln!(out, "{}", parts.join(" "));
}

/// Parses alist text. The format is line-oriented (one adjacency list per
/// line), which makes zero-padded and unpadded lists parse identically:
/// zeros in a list line are padding, everything else is a 1-based index.
pub fn from_alist(text: &str) -> Result<SparseBinaryMatrix> {
    fn tokens(line: &str, what: &str) -> Result<Vec<i64>> {
        line.split_whitespace()
            .map(|t| t.parse::<i64>().map_err(|_| Error::Parse(format!("bad alist token `{t}` in {what}"))))
            .collect()
    }
    fn non_negative(v: i64, what: &str) -> Result<usize> {
        usize::try_from(v).map_err(|_| Error::Parse(format!("negative value in {what}")))
    }

    let mut lines = text.lines();
    let mut need = |what: &str| -> Result<&str> {
        lines.next().ok_or_else(|| Error::Parse(format!("alist truncated before {what}")))
    };

    let head = tokens(need("the size line")?, "the size line")?;
    if head.len() != 2 {
        return Err(Error::Parse("alist must start with `n m`".into()));
    }
    let n = non_negative(head[0], "n")?;
    let r = non_negative(head[1], "m")?;
    let maxima = tokens(need("the degree maxima")?, "the degree maxima")?;
    if maxima.len() != 2 {
        return Err(Error::Parse("alist second line must hold the two degree maxima".into()));
    }
    let max_col = non_negative(maxima[0], "max column degree")?;
    let max_row = non_negative(maxima[1], "max row degree")?;

    let read_degrees = |line: &str, count: usize, max: usize, what: &str| -> Result<Vec<usize>> {
        let vals = tokens(line, what)?;
        if vals.len() != count {
            return Err(Error::Parse(format!("{what} line has {} entries, expected {count}", vals.len())));
        }
        let degs: Vec<usize> = vals.iter().map(|&v| non_negative(v, what)).collect::<Result<_>>()?;
        if degs.iter().any(|&d| d > max) {
            return Err(Error::Parse(format!("{what} exceeds declared maximum {max}")));
        }
        Ok(degs)
    };
    let col_deg = read_degrees(need("the column degrees")?, n, max_col, "column degrees")?;
    let row_deg = read_degrees(need("the row degrees")?, r, max_row, "row degrees")?;

    // Column lists define the matrix; row lists are read (when present) and
    // checked for consistency afterwards via the rebuilt row view.
    let mut per_row: Vec<Vec<u32>> = vec![Vec::new(); r];
    #[allow(clippy::needless_range_loop)] // the loop consumes one input line per column
    for c in 0..n {
        let what = format!("column list {c}");
        let vals = tokens(need(&what)?, &what)?;
        if vals.len() > max_col {
            return Err(Error::Parse(format!("{what} has {} tokens, maximum degree is {max_col}", vals.len())));
        }
        let mut entries = 0usize;
        for &v in &vals {
            if v == 0 {
                continue; // padding
            }
            let row = non_negative(v - 1, &what)?;
            if row >= r {
                return Err(Error::Parse(format!("index out of range in {what}")));
            }
            per_row[row].push(c as u32);
            entries += 1;
        }
        if entries != col_deg[c] {
            return Err(Error::Parse(format!("{what} has {entries} entries, degree says {}", col_deg[c])));
        }
    }
    for row in &mut per_row {
        row.sort_unstable();
        if row.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Parse("duplicate entry in alist column lists".into()));
        }
    }
    let m = SparseBinaryMatrix::from_sorted_rows(r, n, per_row);
    for (row, &d) in row_deg.iter().enumerate() {
        if m.row_weight(row) != d {
            return Err(Error::Parse(format!("alist row degree mismatch at row {row}")));
        }
    }

    // Row lists are optional in the files we accept (some writers stop after
    // the column lists); if present they must agree with the column lists.
    let rest: Vec<&str> = lines.collect();
    if rest.iter().any(|l| !l.trim().is_empty()) {
        if rest.len() < r {
            return Err(Error::Parse("alist truncated inside row lists".into()));
        }
        for (row, line) in rest[..r].iter().enumerate() {
            let what = format!("row list {row}");
            let vals = tokens(line, &what)?;
            if vals.len() > max_row {
                return Err(Error::Parse(format!("{what} has {} tokens, maximum degree is {max_row}", vals.len())));
            }
            let mut declared = Vec::with_capacity(row_deg[row]);
            for &v in &vals {
                if v == 0 {
                    continue;
                }
                let col = non_negative(v - 1, &what)?;
                if col >= n {
                    return Err(Error::Parse(format!("index out of range in {what}")));
                }
                declared.push(col as u32);
            }
            declared.sort_unstable();
            if declared != m.row(row) {
                return Err(Error::Parse(format!("alist row list {row} contradicts columns")));
            }
        }
        if rest[r..].iter().any(|l| !l.trim().is_empty()) {
            return Err(Error::Parse("unexpected trailing content after alist row lists".into()));
        }
    }
    Ok(m)
}

/// Serializes `m` as a Matrix Market `coordinate pattern` file.
pub fn to_matrix_market(m: &SparseBinaryMatrix) -> String {
    let mut out = String::with_capacity(m.nnz() * 8 + 64);
    out.push_str("%%MatrixMarket matrix coordinate pattern general\n");
    let _ = writeln!(out, "{} {} {}", m.rows(), m.cols(), m.nnz());
    for (r, c) in m.entries() {
        let _ = writeln!(out, "{} {}", r + 1, c + 1);
    }
    out
}

/// Parses a Matrix Market `coordinate pattern` file.
pub fn from_matrix_market(text: &str) -> Result<SparseBinaryMatrix> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::Parse("empty matrix market file".into()))?;
    let lowered = header.to_ascii_lowercase();
    if !lowered.starts_with("%%matrixmarket") || !lowered.contains("coordinate") {
        return Err(Error::Parse("not a coordinate matrix market file".into()));
    }
    if !lowered.contains("pattern") {
        return Err(Error::Parse("only `pattern` matrix market files are supported".into()));
    }
    let mut data = lines.filter(|l| !l.trim_start().starts_with('%') && !l.trim().is_empty());
    let size = data.next().ok_or_else(|| Error::Parse("missing size line".into()))?;
    let dims: Vec<usize> = size
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| Error::Parse(format!("bad size token `{t}`"))))
        .collect::<Result<_>>()?;
    let [r, n, nnz] = dims[..] else {
        return Err(Error::Parse("size line must be `rows cols nnz`".into()));
    };
    let mut entries = Vec::with_capacity(nnz);
    for line in data {
        let mut it = line.split_whitespace();
        let (Some(a), Some(b)) = (it.next(), it.next()) else {
            return Err(Error::Parse(format!("bad entry line `{line}`")));
        };
        let a: usize = a.parse().map_err(|_| Error::Parse(format!("bad row `{a}`")))?;
        let b: usize = b.parse().map_err(|_| Error::Parse(format!("bad col `{b}`")))?;
        if a == 0 || b == 0 {
            return Err(Error::Parse("matrix market entries are 1-based".into()));
        }
        entries.push((a - 1, b - 1));
    }
    if entries.len() != nnz {
        return Err(Error::Parse(format!("expected {nnz} entries, found {}", entries.len())));
    }
    SparseBinaryMatrix::from_entries(r, n, &entries)
}

/// Serializes `m` as dense `0`/`1` text, one row per line.
///
/// Refuses matrices above [`DENSE_EXPORT_CAP`] total entries: dense text of a
/// full-length coupled code would be tens of megabytes of zeros.
pub fn to_dense_text(m: &SparseBinaryMatrix) -> Result<String> {
    let total = m.rows().saturating_mul(m.cols());
    if total > DENSE_EXPORT_CAP {
        return Err(Error::cap(format!(
            "dense export of {}x{} exceeds {DENSE_EXPORT_CAP} entries",
            m.rows(),
            m.cols()
        )));
    }
    let mut out = String::with_capacity(total + m.rows());
    for r in 0..m.rows() {
        let mut line = vec![b'0'; m.cols()];
        for &c in m.row(r) {
            line[c as usize] = b'1';
        }
        out.push_str(std::str::from_utf8(&line).unwrap());
        out.push('\n');
    }
    Ok(out)
}

/// Parses either supported sparse format, deciding from the file header.
pub fn import_matrix(text: &str) -> Result<SparseBinaryMatrix> {
    if text.trim_start().starts_with("%%") {
        from_matrix_market(text)
    } else {
        from_alist(text)
    }
}
