//! Dense linear algebra used throughout the crate.
//!
//! Everything here is small-dimensional (a few hundred rows at most for the
//! problems this crate targets), so matrices are plain row-major `Vec<f64>`
//! buffers and the algorithms are the textbook ones: Cholesky, modified
//! Gram-Schmidt and cyclic Jacobi rotations.

use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};

/// Relative pivot tolerance for [`cholesky`].
pub const CHOLESKY_PIVOT_TOL: f64 = 1e-12;
/// Gram-Schmidt residual norm below which the input is declared rank deficient.
pub const RANK_TOL: f64 = 1e-10;
/// Off-diagonal Frobenius tolerance (relative to the matrix norm) for Jacobi.
pub const JACOBI_TOL: f64 = 1e-13;
/// Maximum number of cyclic Jacobi sweeps.
pub const JACOBI_MAX_SWEEPS: usize = 100;

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from row slices; every row must have the same length.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    got: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data,
        })
    }

    /// Builds a `d × n` matrix whose columns are the given vectors.
    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let rows = columns.first().map_or(0, Vec::len);
        if let Some(bad) = columns.iter().find(|c| c.len() != rows) {
            return Err(Error::DimensionMismatch {
                expected: rows,
                got: bad.len(),
            });
        }
        Ok(Self::from_fn(rows, columns.len(), |i, j| columns[j][i]))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn columns(&self) -> Vec<Vec<f64>> {
        (0..self.cols).map(|j| self.column(j)).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                got: other.rows,
            });
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                let orow = other.row(k);
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, b) in dst.iter_mut().zip(orow) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    /// `self · x`
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.cols);
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    /// `selfᵀ · x`
    pub fn tr_mul_vec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for (i, &xi) in x.iter().enumerate() {
            if xi == 0.0 {
                continue;
            }
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o += a * xi;
            }
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Frobenius norm of `self - other`.
    pub fn frobenius_distance(&self, other: &Matrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    /// Largest absolute entry of `self - other`.
    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn scale(&self, s: f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x * s).collect(),
        }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Square matrix with `m[i][j] == m[j][i]` exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix(Matrix);

impl SymmetricMatrix {
    pub fn new(m: Matrix) -> Result<Self> {
        if m.rows != m.cols {
            return Err(Error::DimensionMismatch {
                expected: m.rows,
                got: m.cols,
            });
        }
        for i in 0..m.rows {
            for j in 0..i {
                if m[(i, j)] != m[(j, i)] {
                    return Err(Error::InvalidArgument(format!(
                        "matrix not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(Self(m))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(Matrix::from_rows(rows)?)
    }

    /// Symmetrizes `m` by averaging it with its transpose.
    pub fn symmetrize(m: &Matrix) -> Result<Self> {
        if m.rows != m.cols {
            return Err(Error::DimensionMismatch {
                expected: m.rows,
                got: m.cols,
            });
        }
        let n = m.rows;
        let mut out = m.clone();
        for i in 0..n {
            for j in 0..i {
                let v = 0.5 * (m[(i, j)] + m[(j, i)]);
                out[(i, j)] = v;
                out[(j, i)] = v;
            }
        }
        Ok(Self(out))
    }

    pub fn identity(n: usize) -> Self {
        Self(Matrix::identity(n))
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let mut m = Matrix::zeros(values.len(), values.len());
        for (i, v) in values.iter().enumerate() {
            m[(i, i)] = *v;
        }
        Self(m)
    }

    pub fn dim(&self) -> usize {
        self.0.rows
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.0[(i, i)]).sum()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(self.0.scale(s))
    }
}

impl Index<(usize, usize)> for SymmetricMatrix {
    type Output = f64;

    fn index(&self, idx: (usize, usize)) -> &f64 {
        &self.0[idx]
    }
}

/// Lower-triangular factor `C` with `C Cᵀ` equal to the factored matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct LowerTriangular(Matrix);

impl LowerTriangular {
    pub fn dim(&self) -> usize {
        self.0.rows
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.0
    }

    /// `C x`, skipping the structural zeros.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|i| dot(&self.0.row(i)[..=i], &x[..=i]))
            .collect()
    }

    /// `Cᵀ x`
    pub fn tr_mul_vec(&self, x: &[f64]) -> Vec<f64> {
        self.0.tr_mul_vec(x)
    }

    /// `C Cᵀ`
    pub fn reconstruct(&self) -> Matrix {
        let n = self.dim();
        Matrix::from_fn(n, n, |i, j| {
            let k = i.min(j) + 1;
            dot(&self.0.row(i)[..k], &self.0.row(j)[..k])
        })
    }
}

/// Eigen-decomposition of a symmetric matrix, eigenvalues sorted descending.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    /// Column `i` is the eigenvector paired with `eigenvalues[i]`.
    pub eigenvectors: Matrix,
}

impl EigenDecomposition {
    pub fn vector(&self, i: usize) -> Vec<f64> {
        self.eigenvectors.column(i)
    }

    /// `E Λ Eᵀ`
    pub fn reconstruct(&self) -> Matrix {
        let n = self.eigenvalues.len();
        let e = &self.eigenvectors;
        Matrix::from_fn(n, n, |i, j| {
            (0..n)
                .map(|k| e[(i, k)] * self.eigenvalues[k] * e[(j, k)])
                .sum()
        })
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Returns `v / ‖v‖`, or `ZeroVector` if the norm vanishes.
pub fn normalized(v: &[f64]) -> Result<Vec<f64>> {
    let n = norm(v);
    if n == 0.0 || !n.is_finite() {
        return Err(Error::ZeroVector);
    }
    Ok(v.iter().map(|x| x / n).collect())
}

/// Flips the sign of `v` so that its largest-magnitude component is positive.
/// Ties go to the lowest index.
pub fn sign_normalize(v: &mut [f64]) {
    let mut best = 0usize;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v.get(best).is_some_and(|x| *x < 0.0) {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Cholesky factorization `m = C Cᵀ` with `C` lower triangular.
pub fn cholesky(m: &SymmetricMatrix) -> Result<LowerTriangular> {
    let n = m.dim();
    let a = m.as_matrix();
    let max_diag = (0..n).map(|i| a[(i, i)].abs()).fold(0.0, f64::max);
    let tol = CHOLESKY_PIVOT_TOL * max_diag;
    let mut c = Matrix::zeros(n, n);
    for j in 0..n {
        let pivot = a[(j, j)] - dot(&c.row(j)[..j], &c.row(j)[..j]);
        if !(pivot > tol) {
            return Err(Error::NotPositiveDefinite { pivot: j, value: pivot });
        }
        let d = pivot.sqrt();
        c[(j, j)] = d;
        for i in j + 1..n {
            let s = a[(i, j)] - dot(&c.row(i)[..j], &c.row(j)[..j]);
            c[(i, j)] = s / d;
        }
    }
    Ok(LowerTriangular(c))
}

/// Covariance of Brownian motion sampled at `times`: entry `(j, n) = min(t_j, t_n)`.
pub fn bm_covariance(times: &[f64]) -> Result<SymmetricMatrix> {
    for (i, t) in times.iter().enumerate() {
        let prev = if i == 0 { 0.0 } else { times[i - 1] };
        if !(*t > prev) {
            return Err(Error::NonIncreasingGrid { index: i });
        }
    }
    let n = times.len();
    Ok(SymmetricMatrix(Matrix::from_fn(n, n, |j, k| {
        times[j].min(times[k])
    })))
}

/// Kronecker product `b ⊗ a`: block `(j, n)` equals `b[j][n] · a`.
pub fn kronecker(b: &SymmetricMatrix, a: &SymmetricMatrix) -> SymmetricMatrix {
    let (nb, na) = (b.dim(), a.dim());
    SymmetricMatrix(Matrix::from_fn(nb * na, nb * na, |r, c| {
        b[(r / na, c / na)] * a[(r % na, c % na)]
    }))
}

/// Output of [`gram_schmidt`].
#[derive(Debug, Clone)]
pub struct GramSchmidt {
    /// Orthonormal vectors `f_i`; `f_1` equals the first input exactly.
    pub basis: Vec<Vec<f64>>,
    /// Norms of the un-normalized residuals `‖f'_i‖`.
    pub norms: Vec<f64>,
    /// `projections[i][j] = e_i · f_j` for `j < i`.
    pub projections: Vec<Vec<f64>>,
}

/// Orthonormalizes unit vectors with modified Gram-Schmidt.
pub fn gram_schmidt(vectors: &[Vec<f64>]) -> Result<GramSchmidt> {
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(vectors.len());
    let mut norms = Vec::with_capacity(vectors.len());
    let mut projections = Vec::with_capacity(vectors.len());
    for (i, e) in vectors.iter().enumerate() {
        if let Some(first) = basis.first() {
            if first.len() != e.len() {
                return Err(Error::DimensionMismatch {
                    expected: first.len(),
                    got: e.len(),
                });
            }
        }
        let proj: Vec<f64> = basis.iter().map(|f| dot(e, f)).collect();
        if i == 0 {
            let n = norm(e);
            if n < RANK_TOL {
                return Err(Error::RankDeficient { index: 0, norm: n });
            }
            basis.push(e.clone());
            norms.push(1.0);
            projections.push(proj);
            continue;
        }
        let mut r = e.clone();
        for f in &basis {
            let c = dot(&r, f);
            r.iter_mut().zip(f).for_each(|(x, y)| *x -= c * y);
        }
        let n = norm(&r);
        if n < RANK_TOL {
            return Err(Error::RankDeficient { index: i, norm: n });
        }
        r.iter_mut().for_each(|x| *x /= n);
        basis.push(r);
        norms.push(n);
        projections.push(proj);
    }
    Ok(GramSchmidt {
        basis,
        norms,
        projections,
    })
}

/// Symmetric eigen-decomposition by cyclic Jacobi rotations.
///
/// Eigenvalues come back in descending order; each eigenvector is flipped so
/// that its largest-magnitude component is positive.
pub fn symmetric_eigen(m: &SymmetricMatrix) -> Result<EigenDecomposition> {
    let n = m.dim();
    let mut a = m.as_matrix().clone();
    let mut v = Matrix::identity(n);
    let scale = a.frobenius_norm();
    let tol = JACOBI_TOL * if scale > 0.0 { scale } else { 1.0 };

    let off_norm = |a: &Matrix| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a[(i, j)] * a[(i, j)];
                }
            }
        }
        s.sqrt()
    };

    let mut converged = off_norm(&a) <= tol;
    let mut sweeps = 0;
    while !converged {
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::NoConvergence { sweeps });
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
        converged = off_norm(&a) <= tol;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].total_cmp(&a[(i, i)]).then(i.cmp(&j)));
    let eigenvalues = order.iter().map(|&i| a[(i, i)]).collect();
    let mut columns: Vec<Vec<f64>> = order.iter().map(|&i| v.column(i)).collect();
    columns.iter_mut().for_each(|c| sign_normalize(c));
    let eigenvectors = Matrix::from_columns(&columns)?;
    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

/// Angle between two directions in degrees, folded into `[0, 90]`.
///
/// Computed as `2·asin(‖û − s·v̂‖ / 2)` with `s = sign(u·v)`, which keeps full
/// relative precision for nearly parallel vectors where `acos` does not.
pub fn angle_degrees(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch {
            expected: u.len(),
            got: v.len(),
        });
    }
    let uh = normalized(u)?;
    let vh = normalized(v)?;
    let s = if dot(&uh, &vh) < 0.0 { -1.0 } else { 1.0 };
    let chord = uh
        .iter()
        .zip(&vh)
        .map(|(a, b)| {
            let d = a - s * b;
            d * d
        })
        .sum::<f64>()
        .sqrt();
    let angle = 2.0 * (0.5 * chord).min(1.0).asin();
    Ok(angle.to_degrees().min(90.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn regular_grid(n: usize) -> Vec<f64> {
        (1..=n).map(|i| i as f64 / n as f64).collect()
    }

    #[test]
    fn cholesky_identity_and_2x2() {
        let c = cholesky(&SymmetricMatrix::identity(3)).unwrap();
        assert_eq!(c.as_matrix(), &Matrix::identity(3));

        let m = SymmetricMatrix::from_rows(&[vec![1.0, 0.5], vec![0.5, 1.0]]).unwrap();
        let c = cholesky(&m).unwrap();
        assert_abs_diff_eq!(c.as_matrix()[(0, 0)], 1.0);
        assert_abs_diff_eq!(c.as_matrix()[(0, 1)], 0.0);
        assert_abs_diff_eq!(c.as_matrix()[(1, 0)], 0.5);
        assert_abs_diff_eq!(c.as_matrix()[(1, 1)], 0.75f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn cholesky_brownian_covariance_reconstructs() {
        let sigma = bm_covariance(&regular_grid(64)).unwrap();
        let c = cholesky(&sigma).unwrap();
        let rel = c.reconstruct().frobenius_distance(sigma.as_matrix())
            / sigma.as_matrix().frobenius_norm();
        assert!(rel < 1e-10, "relative error {rel}");
        for i in 0..64 {
            for j in i + 1..64 {
                assert_eq!(c.as_matrix()[(i, j)], 0.0);
            }
        }
    }

    #[test]
    fn cholesky_rejects_singular() {
        let m = SymmetricMatrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        assert!(matches!(
            cholesky(&m),
            Err(Error::NotPositiveDefinite { pivot: 1, .. })
        ));
        let m = SymmetricMatrix::diagonal(&[1.0, -2.0]);
        assert!(cholesky(&m).is_err());
    }

    #[test]
    fn bm_covariance_entries() {
        let m = bm_covariance(&[1.0]).unwrap();
        assert_eq!(m[(0, 0)], 1.0);
        let m = bm_covariance(&[0.5, 1.0]).unwrap();
        assert_eq!(m.as_matrix().as_slice(), &[0.5, 0.5, 0.5, 1.0]);
        let m = bm_covariance(&regular_grid(64)).unwrap();
        for j in 0..64 {
            for n in 0..64 {
                assert_eq!(m[(j, n)], (j.min(n) + 1) as f64 / 64.0);
            }
        }
        assert_eq!(
            bm_covariance(&[0.5, 0.5]),
            Err(Error::NonIncreasingGrid { index: 1 })
        );
        assert_eq!(
            bm_covariance(&[0.0, 0.5]),
            Err(Error::NonIncreasingGrid { index: 0 })
        );
    }

    #[test]
    fn kronecker_cases() {
        let k = kronecker(&SymmetricMatrix::identity(2), &SymmetricMatrix::identity(3));
        assert_eq!(k.as_matrix(), &Matrix::identity(6));

        let a = SymmetricMatrix::from_rows(&[vec![1.0, 0.3], vec![0.3, 2.0]]).unwrap();
        let k = kronecker(&SymmetricMatrix::diagonal(&[2.0]), &a);
        assert_eq!(k.as_matrix(), a.scale(2.0).as_matrix());

        // Σ_B(N=2) ⊗ Σ_A(M=2, σ=(0.1, 0.2), ρ=0.5) against an elementwise loop.
        let times = [0.5, 1.0];
        let sig = [0.1, 0.2];
        let rho = |i: usize, m: usize| if i == m { 1.0 } else { 0.5 };
        let sb = bm_covariance(&times).unwrap();
        let sa = SymmetricMatrix::new(Matrix::from_fn(2, 2, |i, m| sig[i] * rho(i, m) * sig[m]))
            .unwrap();
        let k = kronecker(&sb, &sa);
        for j in 0..2 {
            for i in 0..2 {
                for n in 0..2 {
                    for m in 0..2 {
                        let expect = times[j].min(times[n]) * sig[i] * rho(i, m) * sig[m];
                        assert_eq!(k[(j * 2 + i, n * 2 + m)], expect);
                    }
                }
            }
        }
    }

    #[test]
    fn gram_schmidt_cases() {
        let gs = gram_schmidt(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert_eq!(gs.basis, vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        assert_eq!(gs.norms, vec![1.0, 1.0]);

        let h = 0.5f64.sqrt();
        let gs = gram_schmidt(&[vec![1.0, 0.0], vec![h, h]]).unwrap();
        assert_eq!(gs.basis[0], vec![1.0, 0.0]);
        assert_abs_diff_eq!(gs.basis[1][0], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(gs.basis[1][1], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(gs.norms[1], h, epsilon = 1e-15);
        assert_abs_diff_eq!(gs.projections[1][0], h, epsilon = 1e-15);

        assert!(matches!(
            gram_schmidt(&[vec![1.0, 0.0], vec![1.0, 0.0]]),
            Err(Error::RankDeficient { index: 1, .. })
        ));
    }

    #[test]
    fn eigen_small_cases() {
        let e = symmetric_eigen(&SymmetricMatrix::diagonal(&[3.0, 1.0, 2.0])).unwrap();
        assert_eq!(e.eigenvalues, vec![3.0, 2.0, 1.0]);
        assert_eq!(e.vector(0), vec![1.0, 0.0, 0.0]);
        assert_eq!(e.vector(1), vec![0.0, 0.0, 1.0]);
        assert_eq!(e.vector(2), vec![0.0, 1.0, 0.0]);

        let m = SymmetricMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let e = symmetric_eigen(&m).unwrap();
        assert_abs_diff_eq!(e.eigenvalues[0], 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(e.eigenvalues[1], 1.0, epsilon = 1e-14);
        let h = 0.5f64.sqrt();
        assert_abs_diff_eq!(e.vector(0)[0], h, epsilon = 1e-14);
        assert_abs_diff_eq!(e.vector(0)[1], h, epsilon = 1e-14);
        // Equal magnitudes: the tie goes to the first component, which is positive.
        assert_abs_diff_eq!(e.vector(1)[0], h, epsilon = 1e-14);
        assert_abs_diff_eq!(e.vector(1)[1], -h, epsilon = 1e-14);
    }

    #[test]
    fn eigen_brownian_covariance() {
        let sigma = bm_covariance(&regular_grid(16)).unwrap();
        let e = symmetric_eigen(&sigma).unwrap();
        let rel = e.reconstruct().frobenius_distance(sigma.as_matrix())
            / sigma.as_matrix().frobenius_norm();
        assert!(rel < 1e-10);
        assert!(e.eigenvalues.iter().all(|l| *l > 0.0));
        let vtv = e.eigenvectors.transpose().matmul(&e.eigenvectors).unwrap();
        assert!(vtv.max_abs_diff(&Matrix::identity(16)) < 1e-12);
        assert_abs_diff_eq!(e.eigenvalues.iter().sum::<f64>(), sigma.trace(), epsilon = 1e-10);
    }

    #[test]
    fn eigen_matches_nalgebra() {
        let n = 12;
        let m = Matrix::from_fn(n, n, |i, j| {
            let (a, b) = (i.min(j) as f64, i.max(j) as f64);
            (0.3 * a + 1.0).sin() * (0.7 * b - 0.2).cos() + if i == j { 2.0 } else { 0.0 }
        });
        let s = SymmetricMatrix::new(m.clone()).unwrap();
        let ours = symmetric_eigen(&s).unwrap();
        let na = nalgebra::DMatrix::from_row_slice(n, n, m.as_slice());
        let mut theirs: Vec<f64> = na.symmetric_eigen().eigenvalues.iter().copied().collect();
        theirs.sort_by(|a, b| b.total_cmp(a));
        for (a, b) in ours.eigenvalues.iter().zip(&theirs) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-11);
        }
    }

    #[test]
    fn angle_cases() {
        let u = [1.0, 2.0, -0.5];
        assert_eq!(angle_degrees(&u, &u).unwrap(), 0.0);
        let neg: Vec<f64> = u.iter().map(|x| -x).collect();
        assert_eq!(angle_degrees(&u, &neg).unwrap(), 0.0);
        assert_abs_diff_eq!(
            angle_degrees(&[1.0, 0.0], &[0.0, 3.0]).unwrap(),
            90.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            angle_degrees(&[1.0, 0.0], &[1.0, 1.0]).unwrap(),
            45.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            angle_degrees(&[1.0, 0.0], &[-1.0, 1.0]).unwrap(),
            45.0,
            epsilon = 1e-12
        );
        assert_eq!(angle_degrees(&[0.0, 0.0], &[1.0, 0.0]), Err(Error::ZeroVector));
    }
}
