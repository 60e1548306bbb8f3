//! Dense symmetric-matrix numerics for small spectral dimensions.
//!
//! Everything here works on `L x L` symmetric matrices where `L` is the
//! number of spectral channels (a few to a couple hundred after PCA).
//! Eigendecomposition uses cyclic Jacobi sweeps: slower than QR for large
//! matrices but branch-free, unconditionally convergent and dependency-free.
//! Inverse covariances are never formed explicitly; every quadratic form goes
//! through the cached eigendecomposition and eigenvalue reciprocals.

use crate::error::{Error, Result};

/// Maximum Jacobi sweeps. Convergence is quadratic; well below 64 in practice.
const MAX_JACOBI_SWEEPS: usize = 64;

/// Off-diagonal threshold relative to the Frobenius norm of the input.
const JACOBI_TOL: f64 = 1e-12;

/// A symmetric matrix with exactly mirrored entries.
///
/// Construction symmetrizes the input (both `(i,j)` and `(j,i)` receive the
/// average of the two given entries) and rejects non-finite values, so every
/// instance satisfies `get(i, j) == get(j, i)` bit-for-bit.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    dim: usize,
    /// Row-major `dim * dim` entries.
    entries: Vec<f64>,
}

impl SymMatrix {
    /// Builds a symmetric matrix from row-major entries, symmetrizing them.
    pub fn new(dim: usize, entries: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::input("matrix dimension must be at least 1"));
        }
        if entries.len() != dim * dim {
            return Err(Error::input(format!(
                "expected {} entries for a {dim}x{dim} matrix, got {}",
                dim * dim,
                entries.len()
            )));
        }
        if let Some(idx) = entries.iter().position(|v| !v.is_finite()) {
            return Err(Error::input(format!(
                "non-finite entry at ({}, {})",
                idx / dim,
                idx % dim
            )));
        }
        let mut m = Self { dim, entries };
        for i in 0..dim {
            for j in (i + 1)..dim {
                let avg = 0.5 * (m.entries[i * dim + j] + m.entries[j * dim + i]);
                m.entries[i * dim + j] = avg;
                m.entries[j * dim + i] = avg;
            }
        }
        Ok(m)
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            entries: vec![0.0; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.entries[i * dim + i] = 1.0;
        }
        m
    }

    /// Diagonal matrix from the given values.
    pub fn diagonal(values: &[f64]) -> Result<Self> {
        let mut m = Self::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::input(format!("non-finite diagonal entry {i}")));
            }
            m.entries[i * values.len() + i] = v;
        }
        if values.is_empty() {
            return Err(Error::input("matrix dimension must be at least 1"));
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.dim + j]
    }

    /// Sets both `(i, j)` and `(j, i)`.
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.entries[i * self.dim + j] = value;
        self.entries[j * self.dim + i] = value;
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Evaluates `z^T M z` directly on the entries.
    pub fn quadratic_form(&self, z: &[f64]) -> Result<f64> {
        if z.len() != self.dim {
            return Err(Error::input(format!(
                "vector length {} does not match matrix dimension {}",
                z.len(),
                self.dim
            )));
        }
        let mut acc = 0.0;
        for i in 0..self.dim {
            let mut row = 0.0;
            for j in 0..self.dim {
                row += self.entries[i * self.dim + j] * z[j];
            }
            acc += z[i] * row;
        }
        Ok(acc)
    }
}

/// Eigendecomposition of a symmetric matrix: `M = V diag(values) V^T`.
///
/// Eigenvalues are sorted in decreasing order (ties kept in sweep order by a
/// stable sort) and each eigenvector's largest-magnitude component is made
/// positive, so the decomposition of a given matrix is reproducible.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    dim: usize,
    /// Column-major `dim * dim`; column `j` is the eigenvector for `values[j]`.
    vectors: Vec<f64>,
    /// Decreasing eigenvalues.
    values: Vec<f64>,
}

impl EigenPair {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Eigenvector for `values[j]`, contiguous.
    pub fn column(&self, j: usize) -> &[f64] {
        &self.vectors[j * self.dim..(j + 1) * self.dim]
    }

    /// Raw column-major eigenvector storage.
    pub fn columns_flat(&self) -> &[f64] {
        &self.vectors
    }

    /// Computes `V^T z` into `out`.
    pub fn coefficients_into(&self, z: &[f64], out: &mut [f64]) {
        debug_assert_eq!(z.len(), self.dim);
        debug_assert_eq!(out.len(), self.dim);
        for j in 0..self.dim {
            let col = self.column(j);
            let mut acc = 0.0;
            for i in 0..self.dim {
                acc += col[i] * z[i];
            }
            out[j] = acc;
        }
    }

    /// Computes `V^T z`.
    pub fn coefficients(&self, z: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        self.coefficients_into(z, &mut out);
        out
    }

    /// Rebuilds `V diag(values) V^T`.
    pub fn reconstruct(&self) -> SymMatrix {
        let n = self.dim;
        let mut entries = vec![0.0; n * n];
        for k in 0..n {
            let col = self.column(k);
            let lambda = self.values[k];
            for i in 0..n {
                let s = lambda * col[i];
                for j in i..n {
                    entries[i * n + j] += s * col[j];
                }
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                entries[j * n + i] = entries[i * n + j];
            }
        }
        SymMatrix { dim: n, entries }
    }

    /// `max |(V^T V - I)_{ij}|`, a cheap orthogonality check.
    pub fn orthogonality_defect(&self) -> f64 {
        columns_orthogonality_defect(&self.vectors, self.dim)
    }

    /// The eigenvector frame as a standalone basis.
    pub fn basis(&self) -> OrthoBasis {
        OrthoBasis {
            dim: self.dim,
            columns: self.vectors.clone(),
        }
    }
}

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Sweeps run until every off-diagonal magnitude falls below
/// `1e-12 * ||M||_F`. Returned eigenvalues are in decreasing order.
pub fn sym_eig(m: &SymMatrix) -> EigenPair {
    let n = m.dim;
    let mut a = m.entries.clone();
    let mut v = vec![0.0; n * n];
    for j in 0..n {
        v[j * n + j] = 1.0; // column-major identity
    }

    let scale = m.frobenius_norm();
    if scale > 0.0 && n > 1 {
        let threshold = JACOBI_TOL * scale;
        for _ in 0..MAX_JACOBI_SWEEPS {
            let mut max_off = 0.0_f64;
            for p in 0..n - 1 {
                for q in (p + 1)..n {
                    max_off = max_off.max(a[p * n + q].abs());
                }
            }
            if max_off <= threshold {
                break;
            }
            for p in 0..n - 1 {
                for q in (p + 1)..n {
                    let apq = a[p * n + q];
                    if apq == 0.0 {
                        continue;
                    }
                    let theta = 0.5 * (a[q * n + q] - a[p * n + p]) / apq;
                    let t = if theta.abs() > 1e150 {
                        0.5 / theta
                    } else {
                        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                    };
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;

                    a[p * n + p] -= t * apq;
                    a[q * n + q] += t * apq;
                    a[p * n + q] = 0.0;
                    a[q * n + p] = 0.0;
                    for j in 0..n {
                        if j == p || j == q {
                            continue;
                        }
                        let ajp = a[j * n + p];
                        let ajq = a[j * n + q];
                        let np = c * ajp - s * ajq;
                        let nq = s * ajp + c * ajq;
                        a[j * n + p] = np;
                        a[p * n + j] = np;
                        a[j * n + q] = nq;
                        a[q * n + j] = nq;
                    }
                    // accumulate V <- V * J on the two affected columns
                    for i in 0..n {
                        let vip = v[p * n + i];
                        let viq = v[q * n + i];
                        v[p * n + i] = c * vip - s * viq;
                        v[q * n + i] = s * vip + c * viq;
                    }
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j * n + j].partial_cmp(&a[i * n + i]).unwrap());

    let mut values = Vec::with_capacity(n);
    let mut vectors = vec![0.0; n * n];
    for (dst, &src) in order.iter().enumerate() {
        values.push(a[src * n + src]);
        let col = &v[src * n..(src + 1) * n];
        // sign convention: largest-magnitude component positive
        let mut arg = 0;
        for i in 1..n {
            if col[i].abs() > col[arg].abs() {
                arg = i;
            }
        }
        let flip = if col[arg] < 0.0 { -1.0 } else { 1.0 };
        for i in 0..n {
            vectors[dst * n + i] = flip * col[i];
        }
    }

    EigenPair {
        dim: n,
        vectors,
        values,
    }
}

/// An orthonormal frame of `dim` vectors, stored column-major.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthoBasis {
    dim: usize,
    columns: Vec<f64>,
}

impl OrthoBasis {
    /// Wraps columns that are already orthonormal (defect at most 1e-8).
    pub fn new(dim: usize, columns: Vec<f64>) -> Result<Self> {
        if dim == 0 || columns.len() != dim * dim {
            return Err(Error::input("basis: inconsistent dimensions".to_string()));
        }
        let basis = Self { dim, columns };
        let defect = basis.orthogonality_defect();
        if defect > 1e-8 {
            return Err(Error::input(format!(
                "basis is not orthonormal (defect {defect:.2e})"
            )));
        }
        Ok(basis)
    }

    pub fn identity(dim: usize) -> Self {
        let mut columns = vec![0.0; dim * dim];
        for j in 0..dim {
            columns[j * dim + j] = 1.0;
        }
        Self { dim, columns }
    }

    /// Modified Gram-Schmidt on the given columns; errors when the frame is
    /// numerically rank-deficient.
    pub fn orthonormalize(dim: usize, columns: &[f64]) -> Result<Self> {
        if dim == 0 || columns.len() != dim * dim {
            return Err(Error::input("basis: inconsistent dimensions".to_string()));
        }
        let mut cols = columns.to_vec();
        for j in 0..dim {
            for prev in 0..j {
                let mut dot = 0.0;
                for i in 0..dim {
                    dot += cols[j * dim + i] * cols[prev * dim + i];
                }
                for i in 0..dim {
                    cols[j * dim + i] -= dot * cols[prev * dim + i];
                }
            }
            let norm: f64 = cols[j * dim..(j + 1) * dim]
                .iter()
                .map(|v| v * v)
                .sum::<f64>()
                .sqrt();
            if norm < 1e-10 {
                return Err(Error::input(format!(
                    "frame column {j} is linearly dependent"
                )));
            }
            for i in 0..dim {
                cols[j * dim + i] /= norm;
            }
        }
        Self::new(dim, cols)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.columns[j * self.dim..(j + 1) * self.dim]
    }

    pub fn columns_flat(&self) -> &[f64] {
        &self.columns
    }

    /// `V^T z`.
    pub fn coefficients(&self, z: &[f64]) -> Vec<f64> {
        (0..self.dim)
            .map(|j| {
                let col = self.column(j);
                z.iter().zip(col).map(|(a, b)| a * b).sum()
            })
            .collect()
    }

    /// `V c` for a coefficient vector.
    pub fn apply(&self, coeffs: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for (j, &c) in coeffs.iter().enumerate() {
            let col = self.column(j);
            for i in 0..self.dim {
                out[i] += c * col[i];
            }
        }
        out
    }

    pub fn orthogonality_defect(&self) -> f64 {
        columns_orthogonality_defect(&self.columns, self.dim)
    }
}

fn columns_orthogonality_defect(columns: &[f64], dim: usize) -> f64 {
    let mut worst = 0.0_f64;
    for a in 0..dim {
        let ca = &columns[a * dim..(a + 1) * dim];
        for b in a..dim {
            let cb = &columns[b * dim..(b + 1) * dim];
            let mut dot = 0.0;
            for i in 0..dim {
                dot += ca[i] * cb[i];
            }
            let target = if a == b { 1.0 } else { 0.0 };
            worst = worst.max((dot - target).abs());
        }
    }
    worst
}

/// A symmetric positive definite matrix with its eigendecomposition cached.
#[derive(Debug, Clone)]
pub struct SpdMatrix {
    sym: SymMatrix,
    eigen: EigenPair,
}

impl SpdMatrix {
    /// Wraps a symmetric matrix after checking that all eigenvalues are
    /// strictly positive.
    pub fn from_sym(sym: SymMatrix) -> Result<Self> {
        let eigen = sym_eig(&sym);
        if let Some(&bad) = eigen.values.iter().find(|v| **v <= 0.0) {
            return Err(Error::input(format!(
                "matrix is not positive definite (eigenvalue {bad})"
            )));
        }
        Ok(Self { sym, eigen })
    }

    /// Assembles an SPD matrix from eigenvectors and eigenvalues.
    ///
    /// `columns` is column-major `dim * dim` with one eigenvector per column;
    /// values may arrive in any order and are sorted internally. The columns
    /// must be orthonormal and every value strictly positive.
    pub fn from_eigen(dim: usize, columns: &[f64], values: &[f64]) -> Result<Self> {
        if dim == 0 || columns.len() != dim * dim || values.len() != dim {
            return Err(Error::input(
                "eigen assembly: inconsistent dimensions".to_string(),
            ));
        }
        if let Some(&bad) = values.iter().find(|v| !(**v > 0.0) || !v.is_finite()) {
            return Err(Error::input(format!(
                "eigen assembly: eigenvalue {bad} is not strictly positive"
            )));
        }
        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by(|&i, &j| values[j].partial_cmp(&values[i]).unwrap());
        let mut vectors = vec![0.0; dim * dim];
        let mut sorted = Vec::with_capacity(dim);
        for (dst, &src) in order.iter().enumerate() {
            sorted.push(values[src]);
            vectors[dst * dim..(dst + 1) * dim]
                .copy_from_slice(&columns[src * dim..(src + 1) * dim]);
        }
        let eigen = EigenPair {
            dim,
            vectors,
            values: sorted,
        };
        let defect = eigen.orthogonality_defect();
        if defect > 1e-8 {
            return Err(Error::input(format!(
                "eigen assembly: basis is not orthonormal (defect {defect:.2e})"
            )));
        }
        let sym = eigen.reconstruct();
        Ok(Self { sym, eigen })
    }

    pub fn identity(dim: usize) -> Self {
        let eigen = EigenPair {
            dim,
            vectors: {
                let mut v = vec![0.0; dim * dim];
                for j in 0..dim {
                    v[j * dim + j] = 1.0;
                }
                v
            },
            values: vec![1.0; dim],
        };
        Self {
            sym: SymMatrix::identity(dim),
            eigen,
        }
    }

    /// Projects a symmetric matrix onto the SPD matrices whose eigenvalues
    /// are all at least `eps^2`, keeping the eigenvectors.
    ///
    /// A matrix already above the floor is returned with its entries
    /// untouched, which makes the projection a fixed point there; otherwise
    /// the clamped matrix is rebuilt as `V max(D, eps^2 I) V^T`.
    pub fn project(m: &SymMatrix, eps: f64) -> Result<Self> {
        if !(eps > 0.0) || !eps.is_finite() {
            return Err(Error::parameter(format!("eps must be positive, got {eps}")));
        }
        let eigen = sym_eig(m);
        let floor = eps * eps;
        if eigen.values.iter().all(|&v| v >= floor) {
            return Ok(Self {
                sym: m.clone(),
                eigen,
            });
        }
        let clamped: Vec<f64> = eigen.values.iter().map(|&v| v.max(floor)).collect();
        let eigen = EigenPair {
            dim: eigen.dim,
            vectors: eigen.vectors,
            values: clamped,
        };
        let sym = eigen.reconstruct();
        Ok(Self { sym, eigen })
    }

    pub fn dim(&self) -> usize {
        self.sym.dim
    }

    pub fn sym(&self) -> &SymMatrix {
        &self.sym
    }

    pub fn eigen(&self) -> &EigenPair {
        &self.eigen
    }

    /// Eigenvalues in decreasing order.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigen.values
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigen.values[self.dim() - 1]
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigen.values[0]
    }

    /// Whether every eigenvalue is at least `eps^2 - slack`.
    pub fn meets_floor(&self, eps: f64, slack: f64) -> bool {
        let bound = eps * eps - slack;
        self.eigen.values.iter().all(|&v| v >= bound)
    }

    /// `log det` as the sum of eigenvalue logarithms.
    pub fn log_det(&self) -> f64 {
        self.eigen.values.iter().map(|v| v.ln()).sum()
    }

    /// The regularized Mahalanobis norm `sqrt(z^T S^{-1} z + eta)`.
    ///
    /// Evaluated through the eigendecomposition as
    /// `sqrt(sum_i (V^T z)_i^2 / sigma_i + eta)`; no inverse is formed.
    pub fn mahalanobis(&self, z: &[f64], eta: f64) -> Result<f64> {
        if z.len() != self.dim() {
            return Err(Error::input(format!(
                "vector length {} does not match matrix dimension {}",
                z.len(),
                self.dim()
            )));
        }
        if !(eta > 0.0) {
            return Err(Error::parameter(format!("eta must be positive, got {eta}")));
        }
        let mut coef = vec![0.0; self.dim()];
        Ok(self.mahalanobis_into(z, eta, &mut coef))
    }

    /// Allocation-free variant for hot loops; `coef_buf` must have length `dim`.
    pub(crate) fn mahalanobis_into(&self, z: &[f64], eta: f64, coef_buf: &mut [f64]) -> f64 {
        self.eigen.coefficients_into(z, coef_buf);
        let mut acc = eta;
        for (w, sigma) in coef_buf.iter().zip(&self.eigen.values) {
            acc += w * w / sigma;
        }
        acc.sqrt()
    }
}
