use crate::error::{Error, Result};
use crate::isvd::IsvdState;
use crate::la::{DenseMatrix, SparseCsr};

/// Storage for the solution history `u⁰, u¹, …` read by the memory term.
#[derive(Clone, Debug)]
pub enum HistoryStore {
    /// Every column kept, preallocated for `N + 1` columns.
    Dense(DenseHistory),
    Compressed(CompressedHistory),
}

#[derive(Clone, Debug)]
pub struct DenseHistory {
    m: usize,
    capacity: usize,
    data: Vec<f64>,
}

/// ISVD-compressed history with a cached `B·Q`.
///
/// Leading all-zero columns are counted but not fed to the decomposition,
/// which needs a nonzero first column; they contribute nothing to any
/// weighted sum.
#[derive(Clone, Debug)]
pub struct CompressedHistory {
    m: usize,
    tol: f64,
    leading_zeros: usize,
    state: Option<IsvdState>,
    bq: Option<(u64, DenseMatrix)>,
}

impl HistoryStore {
    pub fn dense(m: usize, columns: usize) -> Self {
        Self::Dense(DenseHistory {
            m,
            capacity: columns,
            data: Vec::with_capacity(m * columns),
        })
    }

    pub fn compressed(m: usize, tol: f64) -> Self {
        Self::Compressed(CompressedHistory {
            m,
            tol,
            leading_zeros: 0,
            state: None,
            bq: None,
        })
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Dense(d) => d.m,
            Self::Compressed(c) => c.m,
        }
    }

    /// Number of columns pushed so far.
    pub fn len(&self) -> usize {
        match self {
            Self::Dense(d) => d.data.len() / d.m.max(1),
            Self::Compressed(c) => c.leading_zeros + c.state.as_ref().map_or(0, IsvdState::len),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn push(&mut self, u: &[f64]) -> Result<()> {
        if u.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                context: "HistoryStore::push",
                expected: self.dim(),
                found: u.len(),
            });
        }
        match self {
            Self::Dense(d) => {
                d.data.extend_from_slice(u);
                Ok(())
            }
            Self::Compressed(c) => match &mut c.state {
                Some(s) => s.update(u).map(|_| ()),
                None if u.iter().all(|&v| v == 0.0) => {
                    c.leading_zeros += 1;
                    Ok(())
                }
                None => {
                    c.state = Some(IsvdState::new(u, c.tol)?);
                    Ok(())
                }
            },
        }
    }

    /// `B · Σ_c w_c u_c` over all stored columns.
    pub fn apply_b(&mut self, b: &SparseCsr, weights: &[f64]) -> Result<Vec<f64>> {
        let len = self.len();
        if weights.len() != len {
            return Err(Error::DimensionMismatch {
                context: "HistoryStore::apply_b",
                expected: len,
                found: weights.len(),
            });
        }
        match self {
            Self::Dense(d) => {
                let mut acc = vec![0.0; d.m];
                for (col, &w) in d.data.chunks_exact(d.m).zip(weights) {
                    if w != 0.0 {
                        for (a, v) in acc.iter_mut().zip(col) {
                            *a += w * v;
                        }
                    }
                }
                b.matvec(&acc)
            }
            Self::Compressed(c) => {
                let Some(state) = &c.state else {
                    return Ok(vec![0.0; c.m]);
                };
                let y = state.combine_columns(&weights[c.leading_zeros..])?;
                let stale = c.bq.as_ref().map_or(true, |(e, _)| *e != state.epoch());
                if stale {
                    c.bq = Some((state.epoch(), b.mul_dense(state.q())?));
                }
                let bq = &c.bq.as_ref().expect("cache filled").1;
                bq.matvec(&y)
            }
        }
    }

    /// Column `j` as currently represented.
    pub fn column(&self, j: usize) -> Result<Vec<f64>> {
        let len = self.len();
        if j >= len {
            return Err(Error::IndexOutOfRange { index: j, len });
        }
        match self {
            Self::Dense(d) => Ok(d.data[j * d.m..(j + 1) * d.m].to_vec()),
            Self::Compressed(c) => {
                if j < c.leading_zeros {
                    Ok(vec![0.0; c.m])
                } else {
                    c.state.as_ref().expect("nonzero column seen").reconstruct_column(j - c.leading_zeros)
                }
            }
        }
    }

    /// `B · Σ_c w_c u_c` with every column reconstructed explicitly.
    pub fn apply_b_explicit(&self, b: &SparseCsr, weights: &[f64]) -> Result<Vec<f64>> {
        let mut acc = vec![0.0; self.dim()];
        for (j, &w) in weights.iter().enumerate() {
            if w != 0.0 {
                for (a, v) in acc.iter_mut().zip(self.column(j)?) {
                    *a += w * v;
                }
            }
        }
        b.matvec(&acc)
    }

    /// Bytes under the accounting model: `8·m·(N+1)` for dense storage,
    /// the live factors for compressed storage.
    pub fn bytes(&self) -> usize {
        match self {
            Self::Dense(d) => 8 * d.m * d.capacity.max(d.data.len() / d.m.max(1)),
            Self::Compressed(c) => c.state.as_ref().map_or(0, IsvdState::history_bytes),
        }
    }

    pub fn isvd(&self) -> Option<&IsvdState> {
        match self {
            Self::Dense(_) => None,
            Self::Compressed(c) => c.state.as_ref(),
        }
    }

    pub fn rank(&self) -> usize {
        self.isvd().map_or(0, IsvdState::rank)
    }

    pub fn pending(&self) -> usize {
        self.isvd().map_or(0, IsvdState::pending)
    }

    pub fn t_sv(&self) -> usize {
        self.isvd().map_or(0, |s| s.stats().t_sv)
    }

    pub fn is_compressed(&self) -> bool {
        matches!(self, Self::Compressed(_))
    }
}
