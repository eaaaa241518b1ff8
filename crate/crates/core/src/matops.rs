//! Small dense matrix kernels: cyclic Jacobi eigendecomposition, Cholesky-type
//! factorizations, inverses and eigenvalue-clamp regularization.
//!
//! Channel counts are small (typically below 10), so everything here is
//! written for clarity over asymptotic speed.

use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 64;

/// Row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = 1.0;
        }
        m
    }

    pub fn from_row_major(dim: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), dim * dim, "matrix data has wrong length");
        Self { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.dim + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.dim + c] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        let n = self.dim;
        let mut t = Self::zeros(n);
        for r in 0..n {
            for c in 0..n {
                t.data[c * n + r] = self.data[r * n + c];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for r in 0..n {
            for k in 0..n {
                let a = self.data[r * n + k];
                if a == 0.0 {
                    continue;
                }
                for c in 0..n {
                    out.data[r * n + c] += a * other.data[k * n + c];
                }
            }
        }
        out
    }

    /// `self^T * self`.
    pub fn gram(&self) -> SymMatrix {
        let n = self.dim;
        let mut out = vec![0.0; n * n];
        for r in 0..n {
            for c in r..n {
                let v: f64 = (0..n).map(|k| self.get(k, r) * self.get(k, c)).sum();
                out[r * n + c] = v;
                out[c * n + r] = v;
            }
        }
        SymMatrix { dim: n, data: out }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Symmetric matrix; entries are symmetrized as `(M + M^T) / 2` on
/// construction.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn new(dim: usize, mut data: Vec<f64>) -> Self {
        assert_eq!(data.len(), dim * dim, "matrix data has wrong length");
        for r in 0..dim {
            for c in r + 1..dim {
                let v = 0.5 * (data[r * dim + c] + data[c * dim + r]);
                data[r * dim + c] = v;
                data[c * dim + r] = v;
            }
        }
        Self { dim, data }
    }

    pub fn from_fn(dim: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let data = (0..dim * dim).map(|i| f(i / dim, i % dim)).collect();
        Self::new(dim, data)
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_fn(dim, |r, c| if r == c { 1.0 } else { 0.0 })
    }

    pub fn diag(values: &[f64]) -> Self {
        Self::from_fn(values.len(), |r, c| if r == c { values[r] } else { 0.0 })
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.dim + c]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn to_dense(&self) -> DenseMatrix {
        DenseMatrix::from_row_major(self.dim, self.data.clone())
    }
}

/// Eigenvalues in descending order with matching orthonormal eigenvector
/// columns.
#[derive(Debug, Clone)]
pub struct SymEigen {
    pub values: Vec<f64>,
    pub vectors: DenseMatrix,
}

impl SymEigen {
    /// `Q diag(values) Q^T`.
    pub fn reconstruct(&self, values: &[f64]) -> SymMatrix {
        let n = self.values.len();
        let q = &self.vectors;
        SymMatrix::from_fn(n, |r, c| (0..n).map(|i| q.get(r, i) * values[i] * q.get(c, i)).sum())
    }
}

/// Cyclic Jacobi eigendecomposition.
pub fn sym_eigen(m: &SymMatrix) -> Result<SymEigen> {
    let n = m.dim();
    let mut a = m.as_slice().to_vec();
    let mut v = DenseMatrix::identity(n);
    let fro: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();

    let off = |a: &[f64]| -> f64 {
        let mut s = 0.0;
        for r in 0..n {
            for c in r + 1..n {
                s += a[r * n + c] * a[r * n + c];
            }
        }
        s.sqrt()
    };

    let mut converged = fro == 0.0 || n < 2;
    let mut sweep = 0;
    while !converged && sweep < MAX_SWEEPS {
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for k in 0..n {
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, c * vkp - s * vkq);
                    v.set(k, q, s * vkp + c * vkq);
                }
            }
        }
        sweep += 1;
        converged = off(&a) <= 4.0 * f64::EPSILON * fro;
    }
    if !converged {
        return Err(Error::NoConvergence(sweep));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j * n + j].total_cmp(&a[i * n + i]));
    let values = order.iter().map(|&i| a[i * n + i]).collect();
    let mut vectors = DenseMatrix::zeros(n);
    for (col, &i) in order.iter().enumerate() {
        for r in 0..n {
            vectors.set(r, col, v.get(r, i));
        }
    }
    Ok(SymEigen { values, vectors })
}

/// Lower-triangular `V` with positive diagonal such that `V^T V = M`.
///
/// This is the Cholesky factorization taken in reversed index order
/// (`M = U U^T` with `U = V^T` upper triangular).
pub fn cholesky_lower(m: &SymMatrix) -> Result<DenseMatrix> {
    let n = m.dim();
    let mut u = DenseMatrix::zeros(n);
    for j in (0..n).rev() {
        let mut d = m.get(j, j);
        for k in j + 1..n {
            d -= u.get(j, k) * u.get(j, k);
        }
        if !(d > 0.0) {
            return Err(Error::NotPositiveDefinite { pivot: j, value: d });
        }
        let ujj = d.sqrt();
        u.set(j, j, ujj);
        for i in 0..j {
            let mut s = m.get(i, j);
            for k in j + 1..n {
                s -= u.get(i, k) * u.get(j, k);
            }
            u.set(i, j, s / ujj);
        }
    }
    Ok(u.transpose())
}

/// Square root `V = Lambda^{1/2} Q^T` of a positive semi-definite matrix, so
/// that `V^T V = M`. Eigenvalues down to `-1e-10 * |M|` are treated as zero.
pub fn psd_sqrt(m: &SymMatrix) -> Result<DenseMatrix> {
    let n = m.dim();
    let eig = sym_eigen(m)?;
    let scale = eig.values.iter().fold(0.0f64, |s, v| s.max(v.abs()));
    let mut out = DenseMatrix::zeros(n);
    for (i, &lambda) in eig.values.iter().enumerate() {
        if lambda < -1e-10 * scale {
            return Err(Error::IndefiniteMatrix(lambda));
        }
        let root = lambda.max(0.0).sqrt();
        for c in 0..n {
            out.set(i, c, root * eig.vectors.get(c, i));
        }
    }
    Ok(out)
}

/// Raises every eigenvalue below `tol` to `tol` and reconstructs.
///
/// The clamp target carries a rounding margin proportional to `|M|`, so
/// the minimum eigenvalue of the returned matrix, as measured by
/// [`sym_eigen`], is not below `tol`. Matrices that already satisfy the
/// bound are returned unchanged.
pub fn regularize(m: &SymMatrix, tol: f64) -> Result<SymMatrix> {
    Ok(regularize_with_min(m, tol)?.0)
}

/// As [`regularize`], also returning the minimum eigenvalue of the input.
pub fn regularize_with_min(m: &SymMatrix, tol: f64) -> Result<(SymMatrix, f64)> {
    let eig = sym_eigen(m)?;
    let min = eig.values.last().copied().unwrap_or(f64::INFINITY);
    if min >= tol {
        return Ok((m.clone(), min));
    }
    let scale = eig.values.iter().fold(0.0f64, |s, v| s.max(v.abs()));
    let target = tol + 64.0 * f64::EPSILON * scale;
    let clamped: Vec<f64> = eig.values.iter().map(|&v| v.max(target)).collect();
    Ok((eig.reconstruct(&clamped), min))
}

/// Inverse of a positive definite matrix via Cholesky.
pub fn sym_inverse(m: &SymMatrix) -> Result<SymMatrix> {
    let n = m.dim();
    // Standard M = L L^T.
    let mut l = vec![0.0; n * n];
    for j in 0..n {
        let mut d = m.get(j, j);
        for k in 0..j {
            d -= l[j * n + k] * l[j * n + k];
        }
        if !(d > 0.0) {
            return Err(Error::NotPositiveDefinite { pivot: j, value: d });
        }
        let ljj = d.sqrt();
        l[j * n + j] = ljj;
        for i in j + 1..n {
            let mut s = m.get(i, j);
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            l[i * n + j] = s / ljj;
        }
    }
    // Solve L L^T x = e_c column by column.
    let mut inv = vec![0.0; n * n];
    let mut y = vec![0.0; n];
    for c in 0..n {
        for i in 0..n {
            let mut s = if i == c { 1.0 } else { 0.0 };
            for k in 0..i {
                s -= l[i * n + k] * y[k];
            }
            y[i] = s / l[i * n + i];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in i + 1..n {
                s -= l[k * n + i] * inv[k * n + c];
            }
            inv[i * n + c] = s / l[i * n + i];
        }
    }
    Ok(SymMatrix::new(n, inv))
}

/// Inverse of a general row-major matrix by Gauss-Jordan elimination with
/// partial pivoting. Returns `None` on an exactly zero pivot.
pub fn dense_inverse(a: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut m = a.to_vec();
    let mut inv = vec![0.0; n * n];
    for i in 0..n {
        inv[i * n + i] = 1.0;
    }
    for col in 0..n {
        let pivot = (col..n).max_by(|&r, &s| m[r * n + col].abs().total_cmp(&m[s * n + col].abs()))?;
        if m[pivot * n + col] == 0.0 {
            return None;
        }
        if pivot != col {
            for k in 0..n {
                m.swap(pivot * n + k, col * n + k);
                inv.swap(pivot * n + k, col * n + k);
            }
        }
        let d = m[col * n + col];
        for k in 0..n {
            m[col * n + k] /= d;
            inv[col * n + k] /= d;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = m[r * n + col];
            if f == 0.0 {
                continue;
            }
            for k in 0..n {
                m[r * n + k] -= f * m[col * n + k];
                inv[r * n + k] -= f * inv[col * n + k];
            }
        }
    }
    Some(inv)
}

/// Maximum absolute column sum.
pub fn norm_one(a: &[f64], n: usize) -> f64 {
    (0..n)
        .map(|c| (0..n).map(|r| a[r * n + c].abs()).sum::<f64>())
        .fold(0.0, f64::max)
}
