use super::dense::DenseMatrix;
use crate::error::{Error, Result};

/// Compressed-sparse-row matrix.
///
/// Column indices are strictly increasing inside each row. Matrices built
/// from triplets store no explicit zeros.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseCsr {
    rows: usize,
    cols: usize,
    offsets: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseCsr {
    /// Assembles from `(row, col, value)` triplets, summing duplicates.
    pub fn from_triplets(rows: usize, cols: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut per_row: Vec<Vec<(usize, f64)>> = vec![Vec::new(); rows];
        for &(i, j, v) in triplets {
            if i >= rows {
                return Err(Error::IndexOutOfRange { index: i, len: rows });
            }
            if j >= cols {
                return Err(Error::IndexOutOfRange { index: j, len: cols });
            }
            if !v.is_finite() {
                return Err(Error::NonFinite("SparseCsr::from_triplets"));
            }
            per_row[i].push((j, v));
        }
        let mut offsets = Vec::with_capacity(rows + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        offsets.push(0);
        for mut row in per_row {
            row.sort_by_key(|e| e.0);
            let mut k = 0;
            while k < row.len() {
                let j = row[k].0;
                let mut acc = 0.0;
                while k < row.len() && row[k].0 == j {
                    acc += row[k].1;
                    k += 1;
                }
                if acc != 0.0 {
                    indices.push(j);
                    values.push(acc);
                }
            }
            offsets.push(indices.len());
        }
        Ok(Self {
            rows,
            cols,
            offsets,
            indices,
            values,
        })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            rows: n,
            cols: n,
            offsets: (0..=n).collect(),
            indices: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn from_dense(a: &DenseMatrix) -> Self {
        let mut t = Vec::new();
        for i in 0..a.rows() {
            for j in 0..a.cols() {
                if a[(i, j)] != 0.0 {
                    t.push((i, j, a[(i, j)]));
                }
            }
        }
        Self::from_triplets(a.rows(), a.cols(), &t).expect("indices in range")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `(col, value)` pairs of row `i`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.offsets[i]..self.offsets[i + 1];
        self.indices[r.clone()]
            .iter()
            .copied()
            .zip(self.values[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.offsets[i]..self.offsets[i + 1];
        match self.indices[r.clone()].binary_search(&j) {
            Ok(p) => self.values[r.start + p],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).collect()
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut y = vec![0.0; self.rows];
        self.matvec_into(x, &mut y)?;
        Ok(y)
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        if x.len() != self.cols {
            return Err(Error::DimensionMismatch {
                context: "SparseCsr::matvec",
                expected: self.cols,
                found: x.len(),
            });
        }
        if y.len() != self.rows {
            return Err(Error::DimensionMismatch {
                context: "SparseCsr::matvec output",
                expected: self.rows,
                found: y.len(),
            });
        }
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for p in self.offsets[i]..self.offsets[i + 1] {
                acc += self.values[p] * x[self.indices[p]];
            }
            *yi = acc;
        }
        Ok(())
    }

    /// Sparse times dense: `self * q`.
    pub fn mul_dense(&self, q: &DenseMatrix) -> Result<DenseMatrix> {
        if q.rows() != self.cols {
            return Err(Error::DimensionMismatch {
                context: "SparseCsr::mul_dense",
                expected: self.cols,
                found: q.rows(),
            });
        }
        let k = q.cols();
        let mut out = DenseMatrix::zeros(self.rows, k);
        for i in 0..self.rows {
            let orow = out.row_mut(i);
            for p in self.offsets[i]..self.offsets[i + 1] {
                let a = self.values[p];
                for (o, qv) in orow.iter_mut().zip(q.row(self.indices[p])) {
                    *o += a * qv;
                }
            }
        }
        Ok(out)
    }

    pub fn transpose(&self) -> Self {
        let mut t = Vec::with_capacity(self.nnz());
        for i in 0..self.rows {
            for (j, v) in self.row(i) {
                t.push((j, i, v));
            }
        }
        Self::from_triplets(self.cols, self.rows, &t).expect("indices in range")
    }

    /// `Σ cᵢ Aᵢ` over matrices of identical shape.
    pub fn linear_combination(terms: &[(f64, &SparseCsr)]) -> Result<Self> {
        let Some(&(_, first)) = terms.first() else {
            return Err(Error::InvalidParameter("empty linear combination".into()));
        };
        let (rows, cols) = (first.rows, first.cols);
        let mut t = Vec::new();
        for &(c, a) in terms {
            if a.rows != rows || a.cols != cols {
                return Err(Error::DimensionMismatch {
                    context: "SparseCsr::linear_combination",
                    expected: rows * cols,
                    found: a.rows * a.cols,
                });
            }
            for i in 0..rows {
                for (j, v) in a.row(i) {
                    t.push((i, j, c * v));
                }
            }
        }
        Self::from_triplets(rows, cols, &t)
    }

    /// Same sparsity pattern, new values.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        if values.len() != self.nnz() {
            return Err(Error::DimensionMismatch {
                context: "SparseCsr::with_values",
                expected: self.nnz(),
                found: values.len(),
            });
        }
        Ok(Self {
            values,
            ..self.clone_pattern()
        })
    }

    fn clone_pattern(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            offsets: self.offsets.clone(),
            indices: self.indices.clone(),
            values: Vec::new(),
        }
    }

    pub fn same_pattern(&self, other: &SparseCsr) -> bool {
        self.rows == other.rows && self.cols == other.cols && self.offsets == other.offsets && self.indices == other.indices
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut d = DenseMatrix::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            for (j, v) in self.row(i) {
                d[(i, j)] = v;
            }
        }
        d
    }

    /// Largest `|Aᵢⱼ − Aⱼᵢ|`.
    pub fn asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.rows {
            for (j, v) in self.row(i) {
                worst = worst.max((v - self.get(j, i)).abs());
            }
        }
        worst
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.rows == self.cols && self.asymmetry() <= tol
    }

    /// Checks the structural invariants.
    pub fn validate(&self) -> bool {
        if self.offsets.len() != self.rows + 1 || self.offsets[0] != 0 {
            return false;
        }
        if self.offsets.windows(2).any(|w| w[0] > w[1]) {
            return false;
        }
        for i in 0..self.rows {
            let idx = &self.indices[self.offsets[i]..self.offsets[i + 1]];
            if idx.windows(2).any(|w| w[0] >= w[1]) || idx.iter().any(|&j| j >= self.cols) {
                return false;
            }
        }
        self.values.len() == self.indices.len() && self.values.iter().all(|v| v.is_finite())
    }
}
