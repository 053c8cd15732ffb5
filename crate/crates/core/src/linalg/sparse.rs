use crate::error::{Error, Result};

use super::dense::DenseMatrix;

/// Compressed sparse row matrix.
///
/// Column indices inside each row are strictly increasing and
/// `offsets[rows] == nnz`.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    offsets: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    pub fn identity(n: usize) -> Self {
        SparseMatrix {
            rows: n,
            cols: n,
            offsets: (0..=n).collect(),
            indices: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    /// Builds from `(row, col, value)` triplets. Repeated coordinates keep
    /// the last value seen.
    pub fn from_triplets(
        rows: usize,
        cols: usize,
        triplets: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self> {
        let mut entries: Vec<(usize, usize, f64)> = triplets.into_iter().collect();
        for &(r, c, _) in &entries {
            if r >= rows || c >= cols {
                return Err(Error::dims(
                    "SparseMatrix::from_triplets",
                    format!("index within {rows}x{cols}"),
                    format!("({r}, {c})"),
                ));
            }
        }
        // stable sort keeps insertion order among duplicates
        entries.sort_by_key(|&(r, c, _)| (r, c));
        let mut offsets = vec![0usize; rows + 1];
        let mut indices = Vec::with_capacity(entries.len());
        let mut values = Vec::with_capacity(entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in entries {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() = v;
                continue;
            }
            last = Some((r, c));
            indices.push(c);
            values.push(v);
            offsets[r + 1] += 1;
        }
        for r in 0..rows {
            offsets[r + 1] += offsets[r];
        }
        Ok(SparseMatrix {
            rows,
            cols,
            offsets,
            indices,
            values,
        })
    }

    /// Assembles a matrix from raw CSR arrays, checking every invariant.
    pub fn from_csr(
        rows: usize,
        cols: usize,
        offsets: Vec<usize>,
        indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if offsets.len() != rows + 1 || offsets[0] != 0 {
            return Err(Error::dims("CSR offsets", rows + 1, offsets.len()));
        }
        if indices.len() != values.len() || *offsets.last().unwrap() != indices.len() {
            return Err(Error::dims("CSR nnz", indices.len(), values.len()));
        }
        for r in 0..rows {
            if offsets[r] > offsets[r + 1] {
                return Err(Error::dims("CSR offsets monotone", offsets[r], offsets[r + 1]));
            }
            let row = &indices[offsets[r]..offsets[r + 1]];
            if row.windows(2).any(|w| w[0] >= w[1]) || row.iter().any(|&c| c >= cols) {
                return Err(Error::dims(
                    "CSR column order",
                    "strictly increasing in-range columns",
                    format!("row {r}"),
                ));
            }
        }
        Ok(SparseMatrix {
            rows,
            cols,
            offsets,
            indices,
            values,
        })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    #[inline]
    pub fn row_indices(&self, r: usize) -> &[usize] {
        &self.indices[self.offsets[r]..self.offsets[r + 1]]
    }

    #[inline]
    pub fn row_values(&self, r: usize) -> &[f64] {
        &self.values[self.offsets[r]..self.offsets[r + 1]]
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let cols = self.row_indices(r);
        match cols.binary_search(&c) {
            Ok(p) => self.row_values(r)[p],
            Err(_) => 0.0,
        }
    }

    pub fn contains(&self, r: usize, c: usize) -> bool {
        self.row_indices(r).binary_search(&c).is_ok()
    }

    /// Iterates stored entries in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.rows).flat_map(move |r| {
            self.row_indices(r)
                .iter()
                .zip(self.row_values(r))
                .map(move |(&c, &v)| (r, c, v))
        })
    }

    /// Counting-sort transpose; output rows stay column-sorted.
    pub fn transpose(&self) -> SparseMatrix {
        let mut counts = vec![0usize; self.cols + 1];
        for &c in &self.indices {
            counts[c + 1] += 1;
        }
        for c in 0..self.cols {
            counts[c + 1] += counts[c];
        }
        let offsets = counts.clone();
        let mut next = counts;
        let mut indices = vec![0usize; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        for r in 0..self.rows {
            for (&c, &v) in self.row_indices(r).iter().zip(self.row_values(r)) {
                let slot = next[c];
                indices[slot] = r;
                values[slot] = v;
                next[c] += 1;
            }
        }
        SparseMatrix {
            rows: self.cols,
            cols: self.rows,
            offsets,
            indices,
            values,
        }
    }

    /// Scales each nonempty row to sum to one.
    pub fn row_normalized(&self) -> SparseMatrix {
        let mut out = self.clone();
        for r in 0..self.rows {
            let (lo, hi) = (self.offsets[r], self.offsets[r + 1]);
            let sum: f64 = out.values[lo..hi].iter().sum();
            if sum != 0.0 {
                for v in &mut out.values[lo..hi] {
                    *v /= sum;
                }
            }
        }
        out
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut d = DenseMatrix::zeros(self.rows, self.cols);
        for (r, c, v) in self.iter() {
            d.set(r, c, v);
        }
        d
    }
}

/// Sparse × dense product; cost is `nnz · d.cols()`.
pub fn spmm(s: &SparseMatrix, d: &DenseMatrix) -> Result<DenseMatrix> {
    if s.cols != d.rows() {
        return Err(Error::dims("spmm inner dimension", s.cols, d.rows()));
    }
    let width = d.cols();
    let mut out = DenseMatrix::zeros(s.rows, width);
    for r in 0..s.rows {
        let out_row = out.row_mut(r);
        for (&c, &v) in s.row_indices(r).iter().zip(s.row_values(r)) {
            for (o, &x) in out_row.iter_mut().zip(d.row(c)) {
                *o += v * x;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::dense::matmul;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_sparse(n: usize, m: usize, density: f64, seed: u64) -> SparseMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut t = Vec::new();
        for r in 0..n {
            for c in 0..m {
                if rng.random_bool(density) {
                    t.push((r, c, rng.random_range(-2.0..2.0)));
                }
            }
        }
        SparseMatrix::from_triplets(n, m, t).unwrap()
    }

    fn random_dense(n: usize, m: usize, seed: u64) -> DenseMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DenseMatrix::from_fn(n, m, |_, _| rng.random_range(-1.0..1.0))
    }

    #[test]
    fn spmm_identity_is_identity() {
        let d = random_dense(6, 4, 1);
        assert_eq!(spmm(&SparseMatrix::identity(6), &d).unwrap(), d);
    }

    #[test]
    fn spmm_empty_row_gives_zero_row() {
        let s = SparseMatrix::from_triplets(3, 3, [(0, 1, 2.0), (2, 2, 1.0)]).unwrap();
        let d = random_dense(3, 5, 2);
        let out = spmm(&s, &d).unwrap();
        assert!(out.row(1).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn spmm_matches_dense_product() {
        let s = random_sparse(30, 30, 0.15, 3);
        let d = random_dense(30, 7, 4);
        let fast = spmm(&s, &d).unwrap();
        let slow = matmul(&s.to_dense(), &d).unwrap();
        for (a, b) in fast.as_slice().iter().zip(slow.as_slice()) {
            assert!((a - b).abs() < 1e-12);
        }
        let fast_t = spmm(&s.transpose(), &d).unwrap();
        let slow_t = matmul(&s.to_dense().transpose(), &d).unwrap();
        for (a, b) in fast_t.as_slice().iter().zip(slow_t.as_slice()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn spmm_rejects_mismatch() {
        let s = SparseMatrix::identity(3);
        assert!(spmm(&s, &DenseMatrix::zeros(4, 2)).is_err());
    }

    #[test]
    fn transpose_matches_dense() {
        let s = random_sparse(12, 9, 0.3, 5);
        let t = s.transpose();
        assert_eq!(t.to_dense(), s.to_dense().transpose());
        assert_eq!(t.transpose(), s);
        let id = SparseMatrix::identity(4);
        assert_eq!(id.transpose(), id);
    }

    #[test]
    fn triplets_sorted_and_deduplicated() {
        let s = SparseMatrix::from_triplets(2, 3, [(1, 2, 1.0), (0, 1, 1.0), (1, 0, 4.0), (0, 1, 3.0)])
            .unwrap();
        assert_eq!(s.nnz(), 3);
        assert_eq!(s.row_indices(1), &[0, 2]);
        assert_eq!(s.get(0, 1), 3.0);
        assert!(SparseMatrix::from_csr(2, 2, vec![0, 2, 2], vec![1, 0], vec![1.0, 1.0]).is_err());
    }

    #[test]
    fn row_normalization() {
        let s = SparseMatrix::from_triplets(2, 2, [(0, 0, 1.0), (0, 1, 3.0)]).unwrap();
        let n = s.row_normalized();
        assert_eq!(n.row_values(0), &[0.25, 0.75]);
        assert!(n.row_values(1).is_empty());
    }
}
