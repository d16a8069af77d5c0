//! Triplet and compressed-row matrices.

/// Coordinate-format accumulator. Duplicate entries are summed on compression.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TripletMatrix {
    pub n_rows: usize,
    pub n_cols: usize,
    pub entries: Vec<(usize, usize, f64)>,
}

impl TripletMatrix {
    pub fn new(n_rows: usize, n_cols: usize) -> Self {
        TripletMatrix {
            n_rows,
            n_cols,
            entries: Vec::new(),
        }
    }

    #[inline]
    pub fn push(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.n_rows && j < self.n_cols);
        self.entries.push((i, j, v));
    }

    pub fn append(&mut self, other: TripletMatrix) {
        assert_eq!((self.n_rows, self.n_cols), (other.n_rows, other.n_cols));
        self.entries.extend(other.entries);
    }

    pub fn scale(&mut self, s: f64) {
        for e in &mut self.entries {
            e.2 *= s;
        }
    }

    /// Compresses to CSR. Duplicates are summed in insertion order, so the
    /// result depends only on the entry sequence.
    pub fn to_csr(&self) -> CsrMatrix {
        let mut counts = vec![0usize; self.n_rows + 1];
        for &(i, _, _) in &self.entries {
            counts[i + 1] += 1;
        }
        for i in 0..self.n_rows {
            counts[i + 1] += counts[i];
        }
        // bucket by row, stable
        let mut cols = vec![0usize; self.entries.len()];
        let mut vals = vec![0.0; self.entries.len()];
        let mut next = counts.clone();
        for &(i, j, v) in &self.entries {
            cols[next[i]] = j;
            vals[next[i]] = v;
            next[i] += 1;
        }
        let mut indptr = Vec::with_capacity(self.n_rows + 1);
        let mut indices = Vec::with_capacity(self.entries.len() / 4);
        let mut data = Vec::with_capacity(self.entries.len() / 4);
        indptr.push(0);
        let mut order: Vec<usize> = Vec::new();
        for i in 0..self.n_rows {
            let (a, b) = (counts[i], counts[i + 1]);
            order.clear();
            order.extend(a..b);
            order.sort_by_key(|&k| cols[k]);
            let mut last = usize::MAX;
            for &k in &order {
                if cols[k] == last {
                    *data.last_mut().unwrap() += vals[k];
                } else {
                    indices.push(cols[k]);
                    data.push(vals[k]);
                    last = cols[k];
                }
            }
            indptr.push(indices.len());
        }
        CsrMatrix {
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            indptr,
            indices,
            data,
        }
    }
}

/// Compressed sparse row matrix with sorted, unique column indices per row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    pub n_rows: usize,
    pub n_cols: usize,
    pub indptr: Vec<usize>,
    pub indices: Vec<usize>,
    pub data: Vec<f64>,
}

impl CsrMatrix {
    pub fn identity(n: usize) -> Self {
        CsrMatrix {
            n_rows: n,
            n_cols: n,
            indptr: (0..=n).collect(),
            indices: (0..n).collect(),
            data: vec![1.0; n],
        }
    }

    pub fn nnz(&self) -> usize {
        self.data.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.indptr[i]..self.indptr[i + 1];
        self.indices[r.clone()].iter().copied().zip(self.data[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.indptr[i]..self.indptr[i + 1];
        match self.indices[r.clone()].binary_search(&j) {
            Ok(k) => self.data[r.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n_cols);
        (0..self.n_rows).map(|i| self.row(i).map(|(j, a)| a * x[j]).sum()).collect()
    }

    /// `y^T A x`.
    pub fn bilinear(&self, y: &[f64], x: &[f64]) -> f64 {
        self.mul_vec(x).iter().zip(y).map(|(a, b)| a * b).sum()
    }

    /// Max absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.n_rows)
            .map(|i| self.row(i).map(|(_, a)| a.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn transpose(&self) -> CsrMatrix {
        let mut t = TripletMatrix::new(self.n_cols, self.n_rows);
        for i in 0..self.n_rows {
            for (j, a) in self.row(i) {
                t.push(j, i, a);
            }
        }
        t.to_csr()
    }

    /// Largest `|a_ij - a_ji|`.
    pub fn asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.n_rows {
            for (j, a) in self.row(i) {
                worst = worst.max((a - self.get(j, i)).abs());
            }
        }
        worst
    }

    /// Rows with no stored nonzero.
    pub fn empty_rows(&self) -> Vec<usize> {
        (0..self.n_rows)
            .filter(|&i| self.row(i).all(|(_, a)| a == 0.0))
            .collect()
    }
}

/// Matrix plus right-hand side.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
}

impl SparseSystem {
    pub fn n_dofs(&self) -> usize {
        self.rhs.len()
    }

    /// `b - A x`.
    pub fn residual(&self, x: &[f64]) -> Vec<f64> {
        self.matrix
            .mul_vec(x)
            .iter()
            .zip(&self.rhs)
            .map(|(ax, b)| b - ax)
            .collect()
    }
}

pub fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn duplicates_are_summed() {
        let mut t = TripletMatrix::new(2, 3);
        t.push(1, 2, 1.0);
        t.push(0, 1, 2.0);
        t.push(1, 2, 0.5);
        t.push(1, 0, -1.0);
        let a = t.to_csr();
        assert_eq!(a.indptr, vec![0, 1, 3]);
        assert_eq!(a.indices, vec![1, 0, 2]);
        assert_eq!(a.data, vec![2.0, -1.0, 1.5]);
        assert_eq!(a.get(1, 2), 1.5);
        assert_eq!(a.get(0, 0), 0.0);
        assert_eq!(a.mul_vec(&[1.0, 1.0, 2.0]), vec![2.0, 2.0]);
        assert_eq!(a.transpose().get(2, 1), 1.5);
    }

    fn entries_and_shuffle() -> impl Strategy<Value = (Vec<(usize, usize, i32)>, Vec<(usize, usize, i32)>)> {
        proptest::collection::vec((0usize..6, 0usize..6, -8i32..8), 0..60)
            .prop_flat_map(|v| (Just(v.clone()), Just(v).prop_shuffle()))
    }

    fn build(entries: &[(usize, usize, i32)]) -> CsrMatrix {
        let mut t = TripletMatrix::new(6, 6);
        for &(i, j, v) in entries {
            t.push(i, j, v as f64);
        }
        t.to_csr()
    }

    proptest! {
        // integer values make the sums exact regardless of order
        #[test]
        fn compression_is_permutation_invariant((a, b) in entries_and_shuffle()) {
            prop_assert_eq!(build(&a), build(&b));
        }
    }
}
