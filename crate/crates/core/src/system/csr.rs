//! Minimal compressed-sparse-row matrix with a deterministic triplet builder.

/// Triplet accumulator. Conversion to CSR sums duplicates in insertion
/// order, so assembly is bit-reproducible for a fixed element order.
#[derive(Debug, Clone)]
pub struct CooMatrix {
    n_rows: usize,
    n_cols: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl CooMatrix {
    pub fn new(n_rows: usize, n_cols: usize) -> Self {
        CooMatrix { n_rows, n_cols, entries: Vec::new() }
    }

    pub fn push(&mut self, row: usize, col: usize, value: f64) {
        debug_assert!(row < self.n_rows && col < self.n_cols);
        self.entries.push((row, col, value));
    }

    /// Appends all entries of `other`, offset by (`row0`, `col0`).
    pub fn add_block(&mut self, row0: usize, col0: usize, other: &CooMatrix) {
        self.add_scaled_block(row0, col0, other, 1.0);
    }

    pub fn add_scaled_block(&mut self, row0: usize, col0: usize, other: &CooMatrix, scale: f64) {
        for &(r, c, v) in &other.entries {
            self.push(row0 + r, col0 + c, scale * v);
        }
    }

    /// Appends the transpose of `other`, offset by (`row0`, `col0`).
    pub fn add_transposed_block(&mut self, row0: usize, col0: usize, other: &CooMatrix) {
        for &(r, c, v) in &other.entries {
            self.push(row0 + c, col0 + r, v);
        }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn into_csr(mut self) -> CsrMatrix {
        // stable sort keeps duplicate summation in insertion order
        self.entries.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_counts = vec![0usize; self.n_rows + 1];
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        let mut last = None;
        for (r, c, v) in self.entries {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(c);
                values.push(v);
                row_counts[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..self.n_rows {
            row_counts[r + 1] += row_counts[r];
        }
        CsrMatrix { n_rows: self.n_rows, n_cols: self.n_cols, row_ptr: row_counts, col_idx, values }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n_rows: usize,
    n_cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn n_nonzeros(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.col_idx[span.clone()].iter().copied().zip(self.values[span].iter().copied())
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n_rows).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.row(r).find(|&(col, _)| col == c).map_or(0.0, |(_, v)| v)
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.n_cols);
        let mut y = vec![0.0; self.n_rows];
        for r in 0..self.n_rows {
            let mut acc = 0.0;
            for (c, v) in self.row(r) {
                acc += v * x[c];
            }
            y[r] = acc;
        }
        y
    }

    /// Maximum absolute row sum.
    pub fn inf_norm(&self) -> f64 {
        (0..self.n_rows)
            .map(|r| self.row(r).map(|(_, v)| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Quadratic form x' A y.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        let ay = self.matvec(y);
        x.iter().zip(ay.iter()).map(|(a, b)| a * b).sum()
    }

    /// Rebuilds the matrix keeping only entries allowed by `keep`.
    pub fn filter(&self, mut keep: impl FnMut(usize, usize, f64) -> bool) -> CsrMatrix {
        let mut coo = CooMatrix::new(self.n_rows, self.n_cols);
        for (r, c, v) in self.iter() {
            if keep(r, c, v) {
                coo.push(r, c, v);
            }
        }
        coo.into_csr()
    }

    /// Ratio of the extreme absolute diagonal entries; a cheap conditioning
    /// proxy, not an accuracy claim.
    pub fn diagonal_ratio(&self) -> f64 {
        let mut min = f64::INFINITY;
        let mut max = 0.0f64;
        for r in 0..self.n_rows.min(self.n_cols) {
            let d = self.get(r, r).abs();
            min = min.min(d);
            max = max.max(d);
        }
        if min == 0.0 {
            f64::INFINITY
        } else {
            max / min
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicates_are_summed() {
        let mut coo = CooMatrix::new(2, 2);
        coo.push(0, 0, 1.0);
        coo.push(0, 1, 2.0);
        coo.push(0, 0, 3.0);
        coo.push(1, 1, 5.0);
        let csr = coo.into_csr();
        assert_eq!(csr.n_nonzeros(), 3);
        assert_eq!(csr.get(0, 0), 4.0);
        assert_eq!(csr.get(0, 1), 2.0);
        assert_eq!(csr.get(1, 1), 5.0);
    }

    #[test]
    fn empty_rows_are_handled() {
        let mut coo = CooMatrix::new(4, 4);
        coo.push(0, 3, 1.0);
        coo.push(3, 0, 2.0);
        let csr = coo.into_csr();
        assert_eq!(csr.row(1).count(), 0);
        assert_eq!(csr.row(2).count(), 0);
        let y = csr.matvec(&[1.0, 0.0, 0.0, 1.0]);
        assert_eq!(y, vec![1.0, 0.0, 0.0, 2.0]);
    }

    #[test]
    fn inf_norm_is_max_row_sum() {
        let mut coo = CooMatrix::new(2, 2);
        coo.push(0, 0, -3.0);
        coo.push(0, 1, 1.0);
        coo.push(1, 1, 2.0);
        assert_eq!(coo.into_csr().inf_norm(), 4.0);
    }
}
