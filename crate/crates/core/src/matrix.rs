//! Sparse binary matrix with both row-major and column-major adjacency.
//!
//! Parity-check matrices of the codes built here are sparse and binary, and
//! every consumer (cycle search, decoding, format export) wants fast access
//! to either the nonzero columns of a row or the nonzero rows of a column,
//! so both index structures are kept, in the flat compressed form
//! `(adjacency, starts)`.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseBinaryMatrix {
    rows: usize,
    cols: usize,
    /// Sorted column indices of the ones in each row, concatenated.
    row_adj: Vec<u32>,
    /// `row_adj[row_starts[r]..row_starts[r + 1]]` are the ones of row `r`.
    row_starts: Vec<usize>,
    /// Sorted row indices of the ones in each column, concatenated.
    col_adj: Vec<u32>,
    /// `col_adj[col_starts[c]..col_starts[c + 1]]` are the ones of column `c`.
    col_starts: Vec<usize>,
}

impl SparseBinaryMatrix {
    /// Builds a matrix from an unordered list of `(row, col)` positions of
    /// ones. Duplicate positions are rejected: entries of a parity-check
    /// matrix are binary, and a silent XOR or OR would hide builder bugs.
    pub fn from_entries(rows: usize, cols: usize, entries: &[(usize, usize)]) -> Result<Self> {
        let mut per_row: Vec<Vec<u32>> = vec![Vec::new(); rows];
        for &(r, c) in entries {
            if r >= rows || c >= cols {
                return Err(Error::invalid(format!(
                    "entry ({r}, {c}) outside {rows}x{cols} matrix"
                )));
            }
            per_row[r].push(c as u32);
        }
        for (r, row) in per_row.iter_mut().enumerate() {
            row.sort_unstable();
            if row.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::invalid(format!("duplicate entry in row {r}")));
            }
        }
        Ok(Self::from_sorted_rows(rows, cols, per_row))
    }

    /// Builds a matrix from per-row sorted, duplicate-free column lists.
    pub(crate) fn from_sorted_rows(rows: usize, cols: usize, per_row: Vec<Vec<u32>>) -> Self {
        debug_assert_eq!(per_row.len(), rows);
        let nnz: usize = per_row.iter().map(Vec::len).sum();
        let mut row_adj = Vec::with_capacity(nnz);
        let mut row_starts = Vec::with_capacity(rows + 1);
        row_starts.push(0);
        for row in &per_row {
            row_adj.extend_from_slice(row);
            row_starts.push(row_adj.len());
        }

        // Counting sort by column yields the transposed adjacency in O(nnz).
        let mut col_counts = vec![0usize; cols + 1];
        for &c in &row_adj {
            col_counts[c as usize + 1] += 1;
        }
        for c in 0..cols {
            col_counts[c + 1] += col_counts[c];
        }
        let col_starts = col_counts.clone();
        let mut col_adj = vec![0u32; nnz];
        let mut cursor = col_counts;
        for r in 0..rows {
            for &c in &row_adj[row_starts[r]..row_starts[r + 1]] {
                col_adj[cursor[c as usize]] = r as u32;
                cursor[c as usize] += 1;
            }
        }

        SparseBinaryMatrix { rows, cols, row_adj, row_starts, col_adj, col_starts }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.row_adj.len()
    }

    /// Sorted column indices of the ones in row `r`.
    pub fn row(&self, r: usize) -> &[u32] {
        &self.row_adj[self.row_starts[r]..self.row_starts[r + 1]]
    }

    /// Sorted row indices of the ones in column `c`.
    pub fn col(&self, c: usize) -> &[u32] {
        &self.col_adj[self.col_starts[c]..self.col_starts[c + 1]]
    }

    pub fn row_weight(&self, r: usize) -> usize {
        self.row_starts[r + 1] - self.row_starts[r]
    }

    pub fn col_weight(&self, c: usize) -> usize {
        self.col_starts[c + 1] - self.col_starts[c]
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.row(r).binary_search(&(c as u32)).is_ok()
    }

    /// All `(row, col)` positions of ones in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.rows).flat_map(move |r| self.row(r).iter().map(move |&c| (r, c as usize)))
    }
}
