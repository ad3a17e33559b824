//! Compressed sparse row matrices and sparse × dense products.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::DirectedGraph;
use crate::matrix::DenseMatrix;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CsrMatrix {
    n_rows: usize,
    n_cols: usize,
    offsets: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds from (row, col, value) triplets; repeated coordinates are summed.
    pub fn from_triplets(n_rows: usize, n_cols: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut sorted: Vec<(usize, usize, f64)> = triplets.to_vec();
        sorted.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut offsets = vec![0usize; n_rows + 1];
        let mut indices = Vec::with_capacity(sorted.len());
        let mut values: Vec<f64> = Vec::with_capacity(sorted.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in sorted {
            assert!(r < n_rows && c < n_cols, "triplet ({r}, {c}) out of range");
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
                continue;
            }
            offsets[r + 1] += 1;
            indices.push(c);
            values.push(v);
            last = Some((r, c));
        }
        for i in 0..n_rows {
            offsets[i + 1] += offsets[i];
        }
        CsrMatrix {
            n_rows,
            n_cols,
            offsets,
            indices,
            values,
        }
    }

    /// Keeps the nonzero entries of a dense matrix.
    pub fn from_dense(m: &DenseMatrix) -> Self {
        let mut offsets = Vec::with_capacity(m.rows() + 1);
        offsets.push(0);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        for i in 0..m.rows() {
            for (j, &v) in m.row(i).iter().enumerate() {
                if v != 0.0 {
                    indices.push(j);
                    values.push(v);
                }
            }
            offsets.push(values.len());
        }
        CsrMatrix {
            n_rows: m.rows(),
            n_cols: m.cols(),
            offsets,
            indices,
            values,
        }
    }

    /// 0/1 adjacency matrix A with `A[u][v] = 1` for every edge u→v.
    pub fn adjacency(g: &DirectedGraph) -> Self {
        let triplets: Vec<_> = g.edges().map(|(u, v)| (u, v, 1.0)).collect();
        Self::from_triplets(g.n_nodes(), g.n_nodes(), &triplets)
    }

    pub fn identity(n: usize) -> Self {
        let triplets: Vec<_> = (0..n).map(|i| (i, i, 1.0)).collect();
        Self::from_triplets(n, n, &triplets)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Iterates the stored entries of row `i` as (column, value).
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.offsets[i]..self.offsets[i + 1];
        self.indices[range.clone()]
            .iter()
            .copied()
            .zip(self.values[range].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let range = self.offsets[i]..self.offsets[i + 1];
        match self.indices[range.clone()].binary_search(&j) {
            Ok(k) => self.values[range.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn transpose(&self) -> CsrMatrix {
        let triplets: Vec<_> = (0..self.n_rows)
            .flat_map(|i| self.row(i).map(move |(j, v)| (j, i, v)))
            .collect();
        Self::from_triplets(self.n_cols, self.n_rows, &triplets)
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.n_rows)
            .map(|i| self.row(i).map(|(_, v)| v).sum())
            .collect()
    }

    /// `diag(left) · self · diag(right)`.
    pub fn scale_rows_cols(&self, left: &[f64], right: &[f64]) -> CsrMatrix {
        let mut out = self.clone();
        for i in 0..self.n_rows {
            for k in self.offsets[i]..self.offsets[i + 1] {
                out.values[k] *= left[i] * right[self.indices[k]];
            }
        }
        out
    }

    /// Entry-wise sum of two matrices of equal shape.
    pub fn add(&self, other: &CsrMatrix) -> CsrMatrix {
        assert_eq!((self.n_rows, self.n_cols), (other.n_rows, other.n_cols));
        let triplets: Vec<_> = (0..self.n_rows)
            .flat_map(|i| self.row(i).chain(other.row(i)).map(move |(j, v)| (i, j, v)))
            .collect();
        Self::from_triplets(self.n_rows, self.n_cols, &triplets)
    }

    /// Sparse × dense product, accumulated row by row in index order.
    pub fn matmul_dense(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        if self.n_cols != x.rows() {
            return Err(Error::shape(format!(
                "cannot multiply sparse {}x{} by {}x{}",
                self.n_rows,
                self.n_cols,
                x.rows(),
                x.cols()
            )));
        }
        let mut out = DenseMatrix::zeros(self.n_rows, x.cols());
        for i in 0..self.n_rows {
            let o = out.row_mut(i);
            for k in self.offsets[i]..self.offsets[i + 1] {
                let v = self.values[k];
                for (oj, &xj) in o.iter_mut().zip(x.row(self.indices[k])) {
                    *oj += v * xj;
                }
            }
        }
        Ok(out)
    }

    /// `selfᵀ · x` without materializing the transpose.
    pub fn t_matmul_dense(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        if self.n_rows != x.rows() {
            return Err(Error::shape(format!(
                "cannot multiply sparse ({}x{})ᵀ by {}x{}",
                self.n_rows,
                self.n_cols,
                x.rows(),
                x.cols()
            )));
        }
        let mut out = DenseMatrix::zeros(self.n_cols, x.cols());
        for i in 0..self.n_rows {
            let xi = x.row(i);
            for k in self.offsets[i]..self.offsets[i + 1] {
                let v = self.values[k];
                for (oj, &xj) in out.row_mut(self.indices[k]).iter_mut().zip(xi) {
                    *oj += v * xj;
                }
            }
        }
        Ok(out)
    }

    /// Stored values in row-major order, for in-place rescaling.
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(self.n_rows, self.n_cols);
        for i in 0..self.n_rows {
            for (j, v) in self.row(i) {
                m[(i, j)] += v;
            }
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dense_round_trip_and_transposed_product() {
        let d = DenseMatrix::from_rows(&[
            vec![0.0, 2.0, 0.0],
            vec![0.0, 0.0, 0.0],
            vec![-1.0, 0.0, 3.0],
        ])
        .unwrap();
        let m = CsrMatrix::from_dense(&d);
        assert_eq!(m.nnz(), 3);
        assert_eq!(m.to_dense(), d);
        let x = DenseMatrix::from_rows(&[vec![1.0, 4.0], vec![2.0, 5.0], vec![3.0, 6.0]]).unwrap();
        assert_eq!(m.t_matmul_dense(&x).unwrap(), d.t_matmul(&x).unwrap());
        assert!(m.t_matmul_dense(&DenseMatrix::zeros(2, 2)).is_err());
    }

    #[test]
    fn triplets_sum_duplicates_and_transpose() {
        let m = CsrMatrix::from_triplets(2, 3, &[(0, 2, 1.0), (1, 0, 2.0), (0, 2, 0.5)]);
        assert_eq!(m.nnz(), 2);
        assert_eq!(m.get(0, 2), 1.5);
        let t = m.transpose();
        assert_eq!(t.get(2, 0), 1.5);
        assert_eq!(t.get(0, 1), 2.0);
        assert_eq!(t.to_dense(), m.to_dense().transpose());
    }

    #[test]
    fn sparse_dense_product_matches_dense() {
        let g = DirectedGraph::from_edge_list(3, &[(0, 1), (1, 2), (2, 0), (0, 2)]);
        let a = CsrMatrix::adjacency(&g);
        let x = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]]).unwrap();
        assert_eq!(
            a.matmul_dense(&x).unwrap(),
            a.to_dense().matmul(&x).unwrap()
        );
    }
}
