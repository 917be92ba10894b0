//! Sparse linear solvers: envelope Cholesky for SPD systems and
//! ILU(0)-preconditioned BiCGStab for general ones.

use super::dense::{axpy, dot, norm2};
use super::sparse::SparseCsr;
use crate::error::{Error, Result};

/// Target relative residual `‖Ax − b‖₂ / ‖b‖₂`.
pub const RESIDUAL_TARGET: f64 = 1e-12;

const BICGSTAB_MAX_ITERS: usize = 5000;

/// Cholesky factor stored by rows over the lower envelope.
#[derive(Clone, Debug)]
pub struct EnvelopeCholesky {
    n: usize,
    first: Vec<usize>,
    start: Vec<usize>,
    data: Vec<f64>,
}

impl EnvelopeCholesky {
    pub fn factor(a: &SparseCsr) -> Result<Self> {
        let n = a.rows();
        if a.cols() != n {
            return Err(Error::DimensionMismatch {
                context: "EnvelopeCholesky::factor",
                expected: n,
                found: a.cols(),
            });
        }
        let mut first = vec![0; n];
        for (i, f) in first.iter_mut().enumerate() {
            *f = a.row(i).map(|(j, _)| j).filter(|&j| j <= i).min().unwrap_or(i);
        }
        let mut start = Vec::with_capacity(n + 1);
        start.push(0);
        for i in 0..n {
            start.push(start[i] + (i - first[i] + 1));
        }
        let mut data = vec![0.0; start[n]];
        for i in 0..n {
            for (j, v) in a.row(i) {
                if j <= i {
                    data[start[i] + j - first[i]] = v;
                }
            }
        }
        for i in 0..n {
            let fi = first[i];
            for j in fi..i {
                let fj = first[j];
                let lo = fi.max(fj);
                let mut s = data[start[i] + j - fi];
                let ri = &data[start[i] + lo - fi..start[i] + j - fi];
                let rj = &data[start[j] + lo - fj..start[j] + j - fj];
                s -= dot(ri, rj);
                data[start[i] + j - fi] = s / data[start[j] + j - fj];
            }
            let row = &data[start[i]..start[i] + i - fi];
            let d = data[start[i] + i - fi] - dot(row, row);
            if !(d > 0.0) {
                return Err(Error::NotPositiveDefinite { pivot: i, value: d });
            }
            data[start[i] + i - fi] = d.sqrt();
        }
        Ok(Self {
            n,
            first,
            start,
            data,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Solves `L Lᵀ x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut y = b.to_vec();
        for i in 0..n {
            let fi = self.first[i];
            let row = &self.data[self.start[i]..self.start[i] + i - fi];
            let s = y[i] - dot(row, &y[fi..i]);
            y[i] = s / self.data[self.start[i] + i - fi];
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            y[i] /= self.data[self.start[i] + i - fi];
            let yi = y[i];
            let row = &self.data[self.start[i]..self.start[i] + i - fi];
            axpy(-yi, row, &mut y[fi..i]);
        }
        y
    }
}

/// Incomplete LU with zero fill on the pattern of `A`.
#[derive(Clone, Debug)]
pub struct Ilu0 {
    lu: SparseCsr,
    diag_pos: Vec<usize>,
    values: Vec<f64>,
}

impl Ilu0 {
    pub fn new(a: &SparseCsr) -> Result<Self> {
        let n = a.rows();
        let offsets = a.offsets();
        let indices = a.indices();
        let mut values = a.values().to_vec();
        let mut diag_pos = vec![usize::MAX; n];
        for i in 0..n {
            for p in offsets[i]..offsets[i + 1] {
                if indices[p] == i {
                    diag_pos[i] = p;
                }
            }
            if diag_pos[i] == usize::MAX {
                return Err(Error::InvalidParameter(format!(
                    "ILU(0) needs a structural diagonal (row {i})"
                )));
            }
        }
        for i in 1..n {
            for p in offsets[i]..offsets[i + 1] {
                let k = indices[p];
                if k >= i {
                    break;
                }
                let piv = values[diag_pos[k]];
                if piv == 0.0 {
                    return Err(Error::NotPositiveDefinite { pivot: k, value: 0.0 });
                }
                values[p] /= piv;
                let lik = values[p];
                // row_i -= lik * row_k on the pattern of row i
                let mut q = offsets[k];
                for r in (p + 1)..offsets[i + 1] {
                    let j = indices[r];
                    while q < offsets[k + 1] && indices[q] < j {
                        q += 1;
                    }
                    if q < offsets[k + 1] && indices[q] == j {
                        values[r] -= lik * values[q];
                    }
                }
            }
        }
        Ok(Self {
            lu: a.clone(),
            diag_pos,
            values,
        })
    }

    pub fn apply(&self, r: &[f64]) -> Vec<f64> {
        let n = r.len();
        let offsets = self.lu.offsets();
        let indices = self.lu.indices();
        let mut z = r.to_vec();
        for i in 0..n {
            let mut s = z[i];
            for p in offsets[i]..self.diag_pos[i] {
                s -= self.values[p] * z[indices[p]];
            }
            z[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = z[i];
            for p in (self.diag_pos[i] + 1)..offsets[i + 1] {
                s -= self.values[p] * z[indices[p]];
            }
            z[i] = s / self.values[self.diag_pos[i]];
        }
        z
    }
}

/// BiCGStab with right preconditioning by ILU(0).
pub fn bicgstab(a: &SparseCsr, b: &[f64], precond: &Ilu0, x0: Option<&[f64]>) -> Result<Vec<f64>> {
    let n = b.len();
    let bnorm = norm2(b);
    if bnorm == 0.0 {
        return Ok(vec![0.0; n]);
    }
    let mut x = x0.map_or_else(|| vec![0.0; n], <[f64]>::to_vec);
    let mut r = b.to_vec();
    let ax = a.matvec(&x)?;
    axpy(-1.0, &ax, &mut r);
    let r_hat = r.clone();
    let (mut rho, mut alpha, mut omega) = (1.0, 1.0, 1.0);
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut res = norm2(&r) / bnorm;
    for it in 0..BICGSTAB_MAX_ITERS {
        if res <= RESIDUAL_TARGET * 0.5 {
            return Ok(x);
        }
        let rho_new = dot(&r_hat, &r);
        if rho_new == 0.0 || omega == 0.0 {
            return Err(Error::SolverDiverged {
                method: "BiCGStab",
                iterations: it,
                residual: res,
            });
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for i in 0..n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        let phat = precond.apply(&p);
        a.matvec_into(&phat, &mut v)?;
        alpha = rho / dot(&r_hat, &v);
        let mut s = r.clone();
        axpy(-alpha, &v, &mut s);
        axpy(alpha, &phat, &mut x);
        if norm2(&s) / bnorm <= RESIDUAL_TARGET * 0.5 {
            return Ok(x);
        }
        let shat = precond.apply(&s);
        let t = a.matvec(&shat)?;
        let tt = dot(&t, &t);
        omega = if tt > 0.0 { dot(&t, &s) / tt } else { 0.0 };
        axpy(omega, &shat, &mut x);
        r = s;
        axpy(-omega, &t, &mut r);
        res = norm2(&r) / bnorm;
    }
    Err(Error::SolverDiverged {
        method: "BiCGStab",
        iterations: BICGSTAB_MAX_ITERS,
        residual: res,
    })
}

/// A factored / preconditioned system ready for repeated solves.
#[derive(Clone, Debug)]
pub enum LinearSolver {
    Cholesky {
        matrix: SparseCsr,
        factor: EnvelopeCholesky,
    },
    Bicgstab {
        matrix: SparseCsr,
        precond: Ilu0,
    },
}

impl LinearSolver {
    /// `sym = true` requires a symmetric positive definite matrix.
    pub fn new(a: &SparseCsr, sym: bool) -> Result<Self> {
        if a.rows() != a.cols() {
            return Err(Error::DimensionMismatch {
                context: "LinearSolver::new",
                expected: a.rows(),
                found: a.cols(),
            });
        }
        if sym {
            Ok(Self::Cholesky {
                factor: EnvelopeCholesky::factor(a)?,
                matrix: a.clone(),
            })
        } else {
            Ok(Self::Bicgstab {
                precond: Ilu0::new(a)?,
                matrix: a.clone(),
            })
        }
    }

    /// Factors `a`, which must have the same symmetry as the matrix behind
    /// `self`, without re-testing symmetry or copying `a`.
    pub fn refactor(&self, a: SparseCsr) -> Result<Self> {
        if a.rows() != a.cols() {
            return Err(Error::DimensionMismatch {
                context: "LinearSolver::refactor",
                expected: a.rows(),
                found: a.cols(),
            });
        }
        match self {
            Self::Cholesky { .. } => match EnvelopeCholesky::factor(&a) {
                Ok(factor) => Ok(Self::Cholesky { matrix: a, factor }),
                Err(Error::NotPositiveDefinite { .. }) => Self::new(&a, false),
                Err(e) => Err(e),
            },
            Self::Bicgstab { .. } => Ok(Self::Bicgstab {
                precond: Ilu0::new(&a)?,
                matrix: a,
            }),
        }
    }

    /// Picks Cholesky when `a` is symmetric to rounding, BiCGStab otherwise.
    pub fn auto(a: &SparseCsr) -> Result<Self> {
        let scale = a.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let sym = a.is_symmetric(1e-14 * scale.max(f64::MIN_POSITIVE));
        match Self::new(a, sym) {
            Err(Error::NotPositiveDefinite { .. }) if sym => Self::new(a, false),
            other => other,
        }
    }

    pub fn matrix(&self) -> &SparseCsr {
        match self {
            Self::Cholesky { matrix, .. } | Self::Bicgstab { matrix, .. } => matrix,
        }
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let a = self.matrix();
        if b.len() != a.rows() {
            return Err(Error::DimensionMismatch {
                context: "LinearSolver::solve",
                expected: a.rows(),
                found: b.len(),
            });
        }
        let bnorm = norm2(b);
        if bnorm == 0.0 {
            return Ok(vec![0.0; b.len()]);
        }
        match self {
            Self::Cholesky { factor, .. } => {
                let mut x = factor.solve(b);
                let mut res = residual(a, &x, b)?;
                let mut rel = norm2(&res) / bnorm;
                // iterative refinement
                let mut sweeps = 0;
                while rel > RESIDUAL_TARGET && sweeps < 3 {
                    let dx = factor.solve(&res);
                    axpy(1.0, &dx, &mut x);
                    res = residual(a, &x, b)?;
                    rel = norm2(&res) / bnorm;
                    sweeps += 1;
                }
                if rel > RESIDUAL_TARGET {
                    return Err(Error::SolverDiverged {
                        method: "Cholesky",
                        iterations: sweeps,
                        residual: rel,
                    });
                }
                Ok(x)
            }
            Self::Bicgstab { precond, .. } => {
                // The recursive residual can drift from the true one; restart
                // from the current iterate until the true residual is met.
                let mut x = bicgstab(a, b, precond, None)?;
                for restart in 0..4 {
                    let rel = norm2(&residual(a, &x, b)?) / bnorm;
                    if rel <= RESIDUAL_TARGET {
                        return Ok(x);
                    }
                    if restart == 3 {
                        return Err(Error::SolverDiverged {
                            method: "BiCGStab",
                            iterations: BICGSTAB_MAX_ITERS,
                            residual: rel,
                        });
                    }
                    x = bicgstab(a, b, precond, Some(&x))?;
                }
                Ok(x)
            }
        }
    }
}

fn residual(a: &SparseCsr, x: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    let mut r = b.to_vec();
    let ax = a.matvec(x)?;
    axpy(-1.0, &ax, &mut r);
    Ok(r)
}

/// One-shot solve of `A x = b`.
pub fn sparse_solve(a: &SparseCsr, b: &[f64], sym: bool) -> Result<Vec<f64>> {
    LinearSolver::new(a, sym)?.solve(b)
}

/// Dominant eigenvalue magnitude of a symmetric matrix by power iteration on
/// the Rayleigh quotient.
pub fn spectral_radius(a: &SparseCsr, tol: f64) -> Result<f64> {
    const MAX_ITERS: usize = 1_000_000;
    let n = a.rows();
    if n == 0 {
        return Ok(0.0);
    }
    // deterministic, non-degenerate start vector
    let mut x: Vec<f64> = (0..n)
        .map(|i| 1.0 + 0.5 * ((i as f64) * 0.754_877_666).sin())
        .collect();
    let nx = norm2(&x);
    x.iter_mut().for_each(|v| *v /= nx);
    let mut lambda_old = f64::NAN;
    let mut y = vec![0.0; n];
    for _ in 0..MAX_ITERS {
        a.matvec_into(&x, &mut y)?;
        let lambda = dot(&x, &y);
        let ny = norm2(&y);
        if ny == 0.0 {
            return Ok(0.0);
        }
        for (xi, yi) in x.iter_mut().zip(&y) {
            *xi = yi / ny;
        }
        if lambda_old.is_finite() && (lambda - lambda_old).abs() <= tol * lambda.abs() {
            return Ok(lambda.abs());
        }
        lambda_old = lambda;
    }
    Err(Error::NoConvergence("power iteration"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplace_1d(n: usize) -> SparseCsr {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i > 0 {
                t.push((i, i - 1, -1.0));
                t.push((i - 1, i, -1.0));
            }
        }
        SparseCsr::from_triplets(n, n, &t).unwrap()
    }

    #[test]
    fn identity_system() {
        let b = vec![0.5, -1.0, 2.0];
        let x = sparse_solve(&SparseCsr::identity(3), &b, true).unwrap();
        assert_eq!(x, b);
    }

    #[test]
    fn tridiagonal_constructed_rhs() {
        let a = laplace_1d(4);
        let xs = [1.0, 2.0, 3.0, 4.0];
        let b = a.matvec(&xs).unwrap();
        for sym in [true, false] {
            let x = sparse_solve(&a, &b, sym).unwrap();
            for (u, v) in x.iter().zip(&xs) {
                assert!((u - v).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let a = SparseCsr::from_triplets(2, 2, &[(0, 0, 1.0), (0, 1, 2.0), (1, 0, 2.0), (1, 1, 1.0)]).unwrap();
        assert!(matches!(
            EnvelopeCholesky::factor(&a),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn spectral_radius_known_cases() {
        let d = SparseCsr::from_triplets(3, 3, &[(0, 0, 1.0), (1, 1, 2.0), (2, 2, 5.0)]).unwrap();
        assert!((spectral_radius(&d, 1e-14).unwrap() - 5.0).abs() < 1e-10);
        let t = laplace_1d(3);
        let expect = 2.0 + 2f64.sqrt();
        assert!((spectral_radius(&t, 1e-14).unwrap() - expect).abs() < 1e-8);
    }
}
