//! Streaming truncated SVD of a matrix that grows one column at a time.
//!
//! The state holds `U_ℓ ≈ Q Σ Rᵀ` for the first `ℓ − q` columns plus a buffer
//! `W` of `q` columns that were already (to within `tol`) in the span of `Q`
//! and are kept only through their projections `Qᵀu`. Every update follows
//! one of three paths:
//!
//! * **p-truncation**: the residual `p = ‖u − QQᵀu‖` is below `tol`; `Qᵀu` is
//!   appended to `W` and nothing else changes.
//! * **rank growth**: `p ≥ tol`; a pending buffer is first folded into the
//!   factors through a thin SVD of `[Σ | W]`, then the bordered matrix
//!   `[[Σ, d], [0, p]]` is decomposed and `Q`, `Σ`, `R` grow by one.
//! * **singular-value truncation**: same as rank growth, but the smallest
//!   new singular value is below `tol` and is dropped, so the rank stays put.
//!
//! Rotations from the buffer flush are collected in `Q0` and applied to `Q`
//! together with the bordered rotation, so `Q` (the only `m`-sized factor) is
//! multiplied once per rank-changing update. When the new residual direction
//! has drifted out of the orthogonal complement of `Q`
//! (`|eᵀQ(:,1)| > 1e-14`) it receives one Gram–Schmidt correction.
//!
//! # Checkpoint format
//!
//! [`IsvdState::write_checkpoint`] writes a flat little-endian file:
//! four `u64` counts `m, k, ℓ, q`, then `f64` values for `Q` (`m × k`, row
//! major), `Σ` (`k`), `R` (`(ℓ − q) × k`, row major) and `W` (`k × q`, row
//! major, column `i` is the `i`-th buffered projection). The tolerance is not
//! stored and must be supplied when reading.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::la::{dot, norm2, svd_dense, DenseMatrix, SvdMode};

/// Threshold on `|eᵀQ(:,1)|` above which the residual direction is
/// re-orthogonalised.
pub const REORTH_THRESHOLD: f64 = 1e-14;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct IsvdStats {
    /// Number of singular-value truncations applied (`T_sv`).
    pub t_sv: usize,
    /// Number of Gram–Schmidt corrections of the residual direction.
    pub n_reorth: usize,
    /// Rank after initialisation and after every update.
    pub rank_history: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UpdateKind {
    /// Residual below tolerance; the projection was buffered.
    Buffered,
    /// Rank grew by one.
    Grew,
    /// Bordered step performed but its smallest singular value was dropped.
    Truncated,
}

/// What a single [`IsvdState::update`] did.
#[derive(Clone, Debug)]
pub struct UpdateOutcome {
    pub kind: UpdateKind,
    /// Residual norm `p = ‖u − QQᵀu‖₂`.
    pub residual_norm: f64,
    /// Buffered columns folded in before the bordered step.
    pub flushed: usize,
    /// `Σ` entering the bordered step (after any flush). Empty when buffered.
    pub prior_sigma: Vec<f64>,
    /// All `k+1` singular values of the bordered matrix. Empty when buffered.
    pub bordered_sigma: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct IsvdState {
    q: DenseMatrix,
    sigma: Vec<f64>,
    r: DenseMatrix,
    w: Vec<Vec<f64>>,
    q0: DenseMatrix,
    tol: f64,
    ell: usize,
    epoch: u64,
    stats: IsvdStats,
}

impl IsvdState {
    /// Starts the decomposition from a nonzero first column.
    pub fn new(u1: &[f64], tol: f64) -> Result<Self> {
        if !(tol >= 0.0 && tol.is_finite()) {
            return Err(Error::InvalidParameter(format!("tolerance must be finite and >= 0, got {tol}")));
        }
        if u1.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("isvd initial column"));
        }
        let s = norm2(u1);
        if s == 0.0 {
            return Err(Error::ZeroInitialColumn);
        }
        let q = DenseMatrix::from_row_major(u1.len(), 1, u1.iter().map(|v| v / s).collect())?;
        Ok(Self {
            q,
            sigma: vec![s],
            r: DenseMatrix::identity(1),
            w: Vec::new(),
            q0: DenseMatrix::identity(1),
            tol,
            ell: 1,
            epoch: 0,
            stats: IsvdStats {
                rank_history: vec![1],
                ..IsvdStats::default()
            },
        })
    }

    /// Row dimension `m`.
    pub fn dim(&self) -> usize {
        self.q.rows()
    }

    pub fn rank(&self) -> usize {
        self.sigma.len()
    }

    /// Number of ingested columns `ℓ`.
    pub fn len(&self) -> usize {
        self.ell
    }

    pub fn is_empty(&self) -> bool {
        self.ell == 0
    }

    /// Pending buffered column count `q`.
    pub fn pending(&self) -> usize {
        self.w.len()
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn q(&self) -> &DenseMatrix {
        &self.q
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    pub fn r(&self) -> &DenseMatrix {
        &self.r
    }

    pub fn w(&self) -> &[Vec<f64>] {
        &self.w
    }

    pub fn q0(&self) -> &DenseMatrix {
        &self.q0
    }

    pub fn stats(&self) -> &IsvdStats {
        &self.stats
    }

    /// Incremented every time `Q` changes.
    pub fn epoch(&self) -> u64 {
        self.epoch
    }

    /// Bytes held by the live factors `Q, Σ, R, Q0, W`.
    pub fn history_bytes(&self) -> usize {
        let (m, k) = (self.dim(), self.rank());
        8 * (m * k + k + self.r.rows() * k + self.q0.rows() * self.q0.cols() + self.w.len() * k)
    }

    /// Ingests one more column.
    pub fn update(&mut self, u: &[f64]) -> Result<UpdateOutcome> {
        let m = self.dim();
        if u.len() != m {
            return Err(Error::DimensionMismatch {
                context: "IsvdState::update",
                expected: m,
                found: u.len(),
            });
        }
        if u.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("isvd update column"));
        }
        let k = self.rank();
        let mut d = self.q.tr_matvec(u)?;
        let qd = self.q.matvec(&d)?;
        let mut e: Vec<f64> = u.iter().zip(&qd).map(|(a, b)| a - b).collect();
        let p = norm2(&e);

        if p < self.tol {
            self.w.push(d);
            self.ell += 1;
            self.stats.rank_history.push(k);
            return Ok(UpdateOutcome {
                kind: UpdateKind::Buffered,
                residual_norm: p,
                flushed: 0,
                prior_sigma: Vec::new(),
                bordered_sigma: Vec::new(),
            });
        }

        let flushed = self.w.len();
        if flushed > 0 {
            d = self.flush_buffer(&d)?;
        }
        let prior_sigma = self.sigma.clone();

        // Bordered matrix [[Σ, d], [0, p]].
        let mut ybar = DenseMatrix::zeros(k + 1, k + 1);
        for i in 0..k {
            ybar[(i, i)] = self.sigma[i];
            ybar[(i, k)] = d[i];
        }
        ybar[(k, k)] = p;
        // Decompose the transpose so the left factor comes from accumulated
        // rotations.
        let t = svd_dense(&ybar.transpose(), SvdMode::Full)?;
        let (qy, mu, ry) = (t.v, t.s, t.u);

        for x in e.iter_mut() {
            *x /= p;
        }
        if dot(&e, &self.q.column(0)).abs() > REORTH_THRESHOLD {
            let c = self.q.tr_matvec(&e)?;
            let qc = self.q.matvec(&c)?;
            for (x, y) in e.iter_mut().zip(&qc) {
                *x -= y;
            }
            let p1 = norm2(&e);
            for x in e.iter_mut() {
                *x /= p1;
            }
            self.stats.n_reorth += 1;
        }

        // diag(Q0, 1) · Q_Y
        let mut q0_ext = DenseMatrix::zeros(k + 1, k + 1);
        for i in 0..k {
            for j in 0..k {
                q0_ext[(i, j)] = self.q0[(i, j)];
            }
        }
        q0_ext[(k, k)] = 1.0;
        let q0_big = q0_ext.gemm(&qy)?;

        let keep = if mu[k] >= self.tol {
            k + 1
        } else {
            self.stats.t_sv += 1;
            k
        };

        // Q ← [Q | e] · Q0(:, 1:keep)
        let mut q_new = DenseMatrix::zeros(m, keep);
        for i in 0..m {
            let qrow = self.q.row(i);
            let out = q_new.row_mut(i);
            for (pidx, &qv) in qrow.iter().chain(std::iter::once(&e[i])).enumerate() {
                if qv != 0.0 {
                    for (o, b) in out.iter_mut().zip(&q0_big.row(pidx)[..keep]) {
                        *o += qv * b;
                    }
                }
            }
        }

        // R ← [[R, 0], [0, 1]] · R_Y(:, 1:keep)
        let rows = self.r.rows();
        let mut r_new = DenseMatrix::zeros(rows + 1, keep);
        for j in 0..rows {
            let rrow = self.r.row(j);
            let out = r_new.row_mut(j);
            for (pidx, &rv) in rrow.iter().enumerate() {
                if rv != 0.0 {
                    for (o, b) in out.iter_mut().zip(&ry.row(pidx)[..keep]) {
                        *o += rv * b;
                    }
                }
            }
        }
        r_new.row_mut(rows).copy_from_slice(&ry.row(k)[..keep]);

        self.q = q_new;
        self.r = r_new;
        self.sigma = mu[..keep].to_vec();
        self.q0 = DenseMatrix::identity(keep);
        self.w.clear();
        self.ell += 1;
        self.epoch += 1;
        self.stats.rank_history.push(keep);

        Ok(UpdateOutcome {
            kind: if keep > k {
                UpdateKind::Grew
            } else {
                UpdateKind::Truncated
            },
            residual_norm: p,
            flushed,
            prior_sigma,
            bordered_sigma: mu,
        })
    }

    /// Folds any buffered columns into `Q`, `Σ` and `R` so that `Σ` holds
    /// the singular values of every column seen so far. Nothing is
    /// truncated.
    pub fn flush(&mut self) -> Result<()> {
        if self.w.is_empty() {
            return Ok(());
        }
        let k = self.rank();
        self.flush_buffer(&vec![0.0; k])?;
        self.q = self.q.gemm(&self.q0)?;
        self.q0 = DenseMatrix::identity(k);
        self.epoch += 1;
        Ok(())
    }

    /// Folds the buffered projections into `Σ`, `R` and `Q0` via a thin SVD
    /// of `[Σ | W]`. Returns `d` expressed in the rotated basis. No
    /// singular values are dropped here.
    fn flush_buffer(&mut self, d: &[f64]) -> Result<Vec<f64>> {
        let k = self.rank();
        let q = self.w.len();
        let mut y = DenseMatrix::zeros(k, k + q);
        for i in 0..k {
            y[(i, i)] = self.sigma[i];
        }
        for (c, col) in self.w.iter().enumerate() {
            for i in 0..k {
                y[(i, k + c)] = col[i];
            }
        }
        // Yᵀ = U' S V'ᵀ  ⇒  Y = V' S U'ᵀ
        let t = svd_dense(&y.transpose(), SvdMode::Thin)?;
        let (qy, sy, ry) = (t.v, t.s, t.u);

        self.q0 = self.q0.gemm(&qy)?;
        self.sigma = sy;

        let rows = self.r.rows();
        let mut r_new = DenseMatrix::zeros(rows + q, k);
        for j in 0..rows {
            let rrow = self.r.row(j);
            let out = r_new.row_mut(j);
            for (pidx, &rv) in rrow.iter().enumerate() {
                if rv != 0.0 {
                    for (o, b) in out.iter_mut().zip(ry.row(pidx)) {
                        *o += rv * b;
                    }
                }
            }
        }
        for i in 0..q {
            r_new.row_mut(rows + i).copy_from_slice(ry.row(k + i));
        }
        self.r = r_new;
        self.w.clear();
        qy.tr_matvec(d)
    }

    /// Coefficients `x_j` of column `j` in the basis `Q`, i.e. column `j` of
    /// `X = [ΣRᵀ | W]`.
    pub fn column_coefficients(&self, j: usize) -> Result<Vec<f64>> {
        let nf = self.r.rows();
        if j >= self.ell {
            return Err(Error::IndexOutOfRange {
                index: j,
                len: self.ell,
            });
        }
        if j < nf {
            Ok(self.r.row(j).iter().zip(&self.sigma).map(|(r, s)| r * s).collect())
        } else {
            Ok(self.w[j - nf].clone())
        }
    }

    /// Column `j` of the compressed history, `Q · x_j`.
    pub fn reconstruct_column(&self, j: usize) -> Result<Vec<f64>> {
        let x = self.column_coefficients(j)?;
        self.q.matvec(&x)
    }

    /// The pair `(Q, X)` with `X = [ΣRᵀ | W]` of shape `k × ℓ`.
    pub fn history_matrix(&self) -> (DenseMatrix, DenseMatrix) {
        let k = self.rank();
        let mut x = DenseMatrix::zeros(k, self.ell);
        for j in 0..self.ell {
            let c = self.column_coefficients(j).expect("index in range");
            x.set_column(j, &c);
        }
        (self.q.clone(), x)
    }

    /// `X · weights`, a `k`-vector, so that `Q · (X · w) = Σⱼ wⱼ ũⱼ`.
    pub fn combine_columns(&self, weights: &[f64]) -> Result<Vec<f64>> {
        if weights.len() != self.ell {
            return Err(Error::DimensionMismatch {
                context: "IsvdState::combine_columns",
                expected: self.ell,
                found: weights.len(),
            });
        }
        let nf = self.r.rows();
        let mut y = self.r.tr_matvec(&weights[..nf])?;
        for (yi, s) in y.iter_mut().zip(&self.sigma) {
            *yi *= s;
        }
        for (col, &wt) in self.w.iter().zip(&weights[nf..]) {
            if wt != 0.0 {
                for (yi, c) in y.iter_mut().zip(col) {
                    *yi += wt * c;
                }
            }
        }
        Ok(y)
    }

    pub fn write_checkpoint<W: Write>(&self, mut out: W) -> Result<()> {
        let (m, k) = (self.dim(), self.rank());
        for count in [m, k, self.ell, self.w.len()] {
            out.write_all(&(count as u64).to_le_bytes())?;
        }
        let mut put = |v: f64| out.write_all(&v.to_le_bytes());
        for &v in self.q.as_slice() {
            put(v)?;
        }
        for &v in &self.sigma {
            put(v)?;
        }
        for &v in self.r.as_slice() {
            put(v)?;
        }
        for i in 0..k {
            for col in &self.w {
                put(col[i])?;
            }
        }
        Ok(())
    }

    /// Restores a state written by [`write_checkpoint`](Self::write_checkpoint).
    /// Statistics restart from the restored rank.
    pub fn read_checkpoint<R: Read>(mut input: R, tol: f64) -> Result<Self> {
        let mut word = [0u8; 8];
        let mut counts = [0usize; 4];
        for c in counts.iter_mut() {
            input.read_exact(&mut word)?;
            *c = u64::from_le_bytes(word) as usize;
        }
        let [m, k, ell, q] = counts;
        if q > ell || k == 0 || m == 0 {
            return Err(Error::InvalidParameter(format!(
                "inconsistent checkpoint header m={m} k={k} ell={ell} q={q}"
            )));
        }
        let mut take = |n: usize| -> Result<Vec<f64>> {
            let mut v = Vec::with_capacity(n);
            for _ in 0..n {
                input.read_exact(&mut word)?;
                v.push(f64::from_le_bytes(word));
            }
            Ok(v)
        };
        let q_mat = DenseMatrix::from_row_major(m, k, take(m * k)?)?;
        let sigma = take(k)?;
        let r = DenseMatrix::from_row_major(ell - q, k, take((ell - q) * k)?)?;
        let wflat = take(k * q)?;
        let w = (0..q).map(|c| (0..k).map(|i| wflat[i * q + c]).collect()).collect();
        Ok(Self {
            q: q_mat,
            sigma,
            r,
            w,
            q0: DenseMatrix::identity(k),
            tol,
            ell,
            epoch: 0,
            stats: IsvdStats {
                rank_history: vec![k],
                ..IsvdStats::default()
            },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::la::dist2;

    #[test]
    fn init_three_four() {
        let s = IsvdState::new(&[3.0, 4.0], 1e-12).unwrap();
        assert_eq!(s.sigma(), &[5.0]);
        assert_eq!(s.q().column(0), vec![0.6, 0.8]);
        assert_eq!(s.len(), 1);
        assert_eq!(s.pending(), 0);
        assert_eq!(s.q0(), &DenseMatrix::identity(1));
        let (_, x) = s.history_matrix();
        assert_eq!(x.as_slice(), &[5.0]);
    }

    #[test]
    fn init_unit_vector() {
        let mut e1 = vec![0.0; 5];
        e1[0] = 1.0;
        let s = IsvdState::new(&e1, 1e-12).unwrap();
        assert_eq!(s.sigma(), &[1.0]);
        assert_eq!(s.q().column(0), e1);
        assert!(dist2(&s.reconstruct_column(0).unwrap(), &e1) < 1e-14);
    }

    #[test]
    fn zero_first_column_rejected() {
        assert_eq!(
            IsvdState::new(&[0.0, 0.0], 1e-12).unwrap_err(),
            Error::ZeroInitialColumn
        );
    }

    #[test]
    fn collinear_column_is_buffered() {
        let mut s = IsvdState::new(&[1.0, 0.0, 0.0], 1e-12).unwrap();
        let out = s.update(&[2.0, 0.0, 0.0]).unwrap();
        assert_eq!(out.kind, UpdateKind::Buffered);
        assert_eq!(s.pending(), 1);
        assert_eq!(s.w(), &[vec![2.0]]);
        assert_eq!(s.rank(), 1);
        let (_, x) = s.history_matrix();
        assert_eq!(x.as_slice(), &[1.0, 2.0]);
        assert!(dist2(&s.reconstruct_column(1).unwrap(), &[2.0, 0.0, 0.0]) < 1e-14);
    }

    #[test]
    fn orthogonal_column_grows_rank() {
        let mut s = IsvdState::new(&[1.0, 0.0, 0.0], 1e-12).unwrap();
        let out = s.update(&[0.0, 1.0, 0.0]).unwrap();
        assert_eq!(out.kind, UpdateKind::Grew);
        assert_eq!(s.rank(), 2);
        assert!((s.sigma()[0] - 1.0).abs() < 1e-15 && (s.sigma()[1] - 1.0).abs() < 1e-15);
        assert_eq!(s.pending(), 0);
        assert!(dist2(&s.reconstruct_column(0).unwrap(), &[1.0, 0.0, 0.0]) < 1e-15);
        assert!(dist2(&s.reconstruct_column(1).unwrap(), &[0.0, 1.0, 0.0]) < 1e-15);
    }

    #[test]
    fn zero_column_mid_stream_is_buffered() {
        let mut s = IsvdState::new(&[1.0, 2.0], 1e-12).unwrap();
        assert_eq!(s.update(&[0.0, 0.0]).unwrap().kind, UpdateKind::Buffered);
        assert_eq!(s.reconstruct_column(1).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn dimension_and_index_errors() {
        let mut s = IsvdState::new(&[1.0, 2.0], 1e-12).unwrap();
        assert!(matches!(s.update(&[1.0]), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(s.reconstruct_column(1), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn explicit_flush_keeps_columns() {
        let mut s = IsvdState::new(&[1.0, 0.0, 0.0], 1e-12).unwrap();
        s.update(&[2.0, 0.0, 0.0]).unwrap();
        s.update(&[0.0, 3.0, 0.0]).unwrap();
        s.update(&[1.0, 1.0, 0.0]).unwrap();
        let before: Vec<Vec<f64>> = (0..4).map(|j| s.reconstruct_column(j).unwrap()).collect();
        s.flush().unwrap();
        assert_eq!(s.pending(), 0);
        for (j, b) in before.iter().enumerate() {
            assert!(dist2(&s.reconstruct_column(j).unwrap(), b) < 1e-14);
        }
    }

    #[test]
    fn flush_then_grow_reconstructs() {
        let mut s = IsvdState::new(&[1.0, 1.0, 0.0, 0.0], 1e-12).unwrap();
        s.update(&[2.0, 2.0, 0.0, 0.0]).unwrap();
        s.update(&[-1.0, -1.0, 0.0, 0.0]).unwrap();
        assert_eq!(s.pending(), 2);
        let out = s.update(&[0.0, 1.0, 3.0, 0.0]).unwrap();
        assert_eq!(out.flushed, 2);
        assert_eq!(out.kind, UpdateKind::Grew);
        assert_eq!(s.pending(), 0);
        assert_eq!(s.r().rows(), 4);
        let cols = [
            [1.0, 1.0, 0.0, 0.0],
            [2.0, 2.0, 0.0, 0.0],
            [-1.0, -1.0, 0.0, 0.0],
            [0.0, 1.0, 3.0, 0.0],
        ];
        for (j, c) in cols.iter().enumerate() {
            assert!(dist2(&s.reconstruct_column(j).unwrap(), c) < 1e-13);
        }
        assert!(s.q().orthogonality_defect() < 1e-14);
    }

    #[test]
    fn checkpoint_roundtrip() {
        let mut s = IsvdState::new(&[1.0, 0.5, 0.25], 1e-12).unwrap();
        s.update(&[0.0, 1.0, 1.0]).unwrap();
        s.update(&[2.0, 1.0, 0.5]).unwrap();
        let mut buf = Vec::new();
        s.write_checkpoint(&mut buf).unwrap();
        assert_eq!(buf.len(), 8 * 4 + 8 * (3 * 2 + 2 + 2 * 2 + 2));
        let back = IsvdState::read_checkpoint(&buf[..], 1e-12).unwrap();
        assert_eq!(back.len(), 3);
        assert_eq!(back.pending(), 1);
        for j in 0..3 {
            assert_eq!(back.reconstruct_column(j).unwrap(), s.reconstruct_column(j).unwrap());
        }
    }
}
