//! One-sided Jacobi SVD for the small matrices produced by the incremental SVD.
//!
//! The rotations are accumulated into the right factor, so that factor is
//! orthonormal to working precision. Columns of the left factor are the
//! normalised rotated columns; the convergence test is relative
//! (`|aᵢᵀaⱼ| ≤ ε‖aᵢ‖‖aⱼ‖`), which keeps them orthonormal even when the
//! singular values span many orders of magnitude.

use super::dense::{axpy, dot, norm2, DenseMatrix};
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 80;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SvdMode {
    /// `U` is `m × min(m,n)`, `V` is `n × min(m,n)`.
    Thin,
    /// `U` is `m × m`, `V` is `n × n`.
    Full,
}

/// `A = U · diag(S) · Vᵀ` with `S` sorted descending.
#[derive(Clone, Debug)]
pub struct SvdTriple {
    pub u: DenseMatrix,
    pub s: Vec<f64>,
    pub v: DenseMatrix,
}

impl SvdTriple {
    /// `U · diag(S) · Vᵀ` restricted to the stored singular values.
    pub fn reconstruct(&self) -> DenseMatrix {
        let k = self.s.len();
        DenseMatrix::from_fn(self.u.rows(), self.v.rows(), |i, j| {
            (0..k).map(|p| self.u[(i, p)] * self.s[p] * self.v[(j, p)]).sum()
        })
    }
}

pub fn svd_dense(a: &DenseMatrix, mode: SvdMode) -> Result<SvdTriple> {
    if !a.is_finite() {
        return Err(Error::NonFinite("svd_dense input"));
    }
    let (m, n) = a.shape();
    if m < n {
        let t = svd_dense(&a.transpose(), mode)?;
        return Ok(SvdTriple {
            u: t.v,
            s: t.s,
            v: t.u,
        });
    }
    // m >= n from here on.
    let mut cols: Vec<Vec<f64>> = (0..n).map(|j| a.column(j)).collect();
    let mut vcols: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            e
        })
        .collect();

    let eps = f64::EPSILON;
    let mut converged = n < 2;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for i in 0..n {
            for j in (i + 1)..n {
                let alpha = dot(&cols[i], &cols[i]);
                let beta = dot(&cols[j], &cols[j]);
                let gamma = dot(&cols[i], &cols[j]);
                if alpha == 0.0 || beta == 0.0 {
                    continue;
                }
                if gamma.abs() <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut cols, i, j, c, s);
                rotate(&mut vcols, i, j, c, s);
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence("one-sided Jacobi SVD"));
    }

    let mut order: Vec<(usize, f64)> = cols.iter().map(|c| norm2(c)).enumerate().collect();
    order.sort_by(|x, y| y.1.total_cmp(&x.1));
    let smax = order.first().map_or(0.0, |o| o.1);
    let null_threshold = smax * eps * (m as f64);

    let s: Vec<f64> = order.iter().map(|o| o.1).collect();
    let mut ucols: Vec<Vec<f64>> = Vec::with_capacity(m);
    for &(idx, sigma) in &order {
        if sigma > null_threshold && sigma > 0.0 {
            ucols.push(cols[idx].iter().map(|x| x / sigma).collect());
        } else {
            ucols.push(vec![0.0; m]);
        }
    }
    let vsorted: Vec<Vec<f64>> = order.iter().map(|o| vcols[o.0].clone()).collect();

    let ucount = match mode {
        SvdMode::Thin => n,
        SvdMode::Full => m,
    };
    while ucols.len() < ucount {
        ucols.push(vec![0.0; m]);
    }
    complete_orthonormal(&mut ucols, n.min(ucount));

    Ok(SvdTriple {
        u: DenseMatrix::from_columns(&ucols)?,
        s,
        v: DenseMatrix::from_columns(&vsorted)?,
    })
}

fn rotate(cols: &mut [Vec<f64>], i: usize, j: usize, c: f64, s: f64) {
    let (lo, hi) = cols.split_at_mut(j);
    let (a, b) = (&mut lo[i], &mut hi[0]);
    for (x, y) in a.iter_mut().zip(b.iter_mut()) {
        let xi = *x;
        let yj = *y;
        *x = c * xi - s * yj;
        *y = s * xi + c * yj;
    }
}

/// Makes `cols` orthonormal in order: columns that are (numerically) zero are
/// replaced by unit vectors orthogonalised against their predecessors; all
/// columns get two Gram–Schmidt passes. `polish_upto` columns are assumed
/// already normalised singular vectors and only receive the polish.
fn complete_orthonormal(cols: &mut [Vec<f64>], polish_upto: usize) {
    let m = cols.first().map_or(0, Vec::len);
    let mut next_unit = 0usize;
    for j in 0..cols.len() {
        let needs_fill = norm2(&cols[j]) == 0.0;
        if needs_fill || j >= polish_upto {
            // Pick the standard basis vector with the largest residual.
            let mut best: Option<(f64, Vec<f64>)> = None;
            for trial in 0..m {
                let e = (trial + next_unit) % m;
                let mut cand = vec![0.0; m];
                cand[e] = 1.0;
                for _ in 0..2 {
                    for prev in cols.iter().take(j) {
                        let h = dot(prev, &cand);
                        axpy(-h, prev, &mut cand);
                    }
                }
                let nrm = norm2(&cand);
                if best.as_ref().map_or(true, |b| nrm > b.0) {
                    best = Some((nrm, cand));
                }
                if nrm > 0.5 {
                    break;
                }
            }
            if needs_fill {
                if let Some((nrm, cand)) = best {
                    cols[j] = cand.iter().map(|x| x / nrm).collect();
                    next_unit += 1;
                }
                continue;
            }
        }
        let (prev, rest) = cols.split_at_mut(j);
        let cur = &mut rest[0];
        for _ in 0..2 {
            for p in prev.iter() {
                let h = dot(p, cur);
                axpy(-h, p, cur);
            }
        }
        let nrm = norm2(cur);
        if nrm > 0.0 {
            for x in cur.iter_mut() {
                *x /= nrm;
            }
        }
    }
}
