//! Small dense linear algebra: row-major matrices, Cholesky factorization,
//! triangular solves and a cyclic-Jacobi symmetric eigensolver.
//!
//! Everything here targets the modest dimensions of this crate (covariance
//! blocks up to a few hundred rows), so plain triple loops are used instead
//! of a BLAS backend.

use crate::num::{fp, Scalar};
use crate::Error;

/// Dense row-major matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Mat<S> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

impl<S: Scalar> Mat<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![S::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = S::one();
        }
        m
    }

    /// Build from a row-major flat vector; `data.len()` must be `rows*cols`.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<S>) -> Result<Self, Error> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                what: "matrix data length".into(),
                expected: rows * cols,
                got: data.len(),
            });
        }
        Ok(Mat { rows, cols, data })
    }

    /// Build from nested rows (convenient in tests).
    pub fn from_rows(rows: &[Vec<S>]) -> Result<Self, Error> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            if row.len() != c {
                return Err(Error::DimensionMismatch {
                    what: "ragged matrix rows".into(),
                    expected: c,
                    got: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Ok(Mat { rows: r, cols: c, data })
    }

    pub fn diag(entries: &[S]) -> Self {
        let mut m = Mat::zeros(entries.len(), entries.len());
        for (i, &e) in entries.iter().enumerate() {
            m[(i, i)] = e;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[S] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[S] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Mat<S> {
        let mut t = Mat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Mat<S>) -> Mat<S> {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let mut out = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == S::zero() {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn matvec(&self, x: &[S]) -> Vec<S> {
        assert_eq!(self.cols, x.len(), "matvec shape mismatch");
        let mut out = vec![S::zero(); self.rows];
        for i in 0..self.rows {
            let mut acc = S::zero();
            for j in 0..self.cols {
                acc += self[(i, j)] * x[j];
            }
            out[i] = acc;
        }
        out
    }

    pub fn scale(&self, c: S) -> Mat<S> {
        let mut out = self.clone();
        for v in &mut out.data {
            *v *= c;
        }
        out
    }

    pub fn add(&self, other: &Mat<S>) -> Mat<S> {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (v, w) in out.data.iter_mut().zip(&other.data) {
            *v += *w;
        }
        out
    }

    pub fn sub(&self, other: &Mat<S>) -> Mat<S> {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (v, w) in out.data.iter_mut().zip(&other.data) {
            *v -= *w;
        }
        out
    }

    pub fn add_diag(&mut self, c: S) {
        let n = self.rows.min(self.cols);
        for i in 0..n {
            self[(i, i)] += c;
        }
    }

    pub fn trace(&self) -> S {
        let n = self.rows.min(self.cols);
        (0..n).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> S {
        self.data.iter().map(|&v| v * v).sum::<S>().sqrt()
    }

    /// Maximum absolute asymmetry `|a_ij - a_ji|`.
    pub fn asymmetry(&self) -> S {
        let mut worst = S::zero();
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                let d = (self[(i, j)] - self[(j, i)]).abs();
                if d > worst {
                    worst = d;
                }
            }
        }
        worst
    }

    /// Extract the sub-matrix with the given row and column index sets.
    pub fn submatrix(&self, row_idx: &[usize], col_idx: &[usize]) -> Mat<S> {
        let mut out = Mat::zeros(row_idx.len(), col_idx.len());
        for (i, &ri) in row_idx.iter().enumerate() {
            for (j, &cj) in col_idx.iter().enumerate() {
                out[(i, j)] = self[(ri, cj)];
            }
        }
        out
    }

    /// Cholesky factorization `A = L Lᵀ` of a symmetric positive-definite
    /// matrix. Fails with [`Error::NotPositiveDefinite`] when a pivot is not
    /// strictly positive.
    pub fn cholesky(&self) -> Result<Cholesky<S>, Error> {
        assert!(self.is_square(), "cholesky requires a square matrix");
        let n = self.rows;
        let mut l = Mat::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let mut acc = self[(i, j)];
                for k in 0..j {
                    acc -= l[(i, k)] * l[(j, k)];
                }
                if i == j {
                    if acc <= S::zero() || !acc.is_finite() {
                        return Err(Error::NotPositiveDefinite { pivot: i });
                    }
                    l[(i, j)] = acc.sqrt();
                } else {
                    l[(i, j)] = acc / l[(j, j)];
                }
            }
        }
        Ok(Cholesky { l })
    }

    /// Eigen-decomposition of a symmetric matrix via cyclic Jacobi rotations.
    ///
    /// Returns eigenvalues sorted descending and the matching eigenvectors as
    /// matrix columns, so `A = P Diag(λ) Pᵀ`.
    pub fn sym_eigen(&self) -> Result<(Vec<S>, Mat<S>), Error> {
        assert!(self.is_square(), "sym_eigen requires a square matrix");
        let n = self.rows;
        let mut a = self.clone();
        let mut p = Mat::identity(n);
        let eps = fp::<S>(1e-14);
        let norm = self.frobenius_norm().max(S::one());
        let max_sweeps = 64;
        for _ in 0..max_sweeps {
            let mut off = S::zero();
            for i in 0..n {
                for j in (i + 1)..n {
                    off += a[(i, j)] * a[(i, j)];
                }
            }
            if off.sqrt() <= eps * norm {
                break;
            }
            for i in 0..n {
                for j in (i + 1)..n {
                    let apq = a[(i, j)];
                    if apq.abs() <= eps * norm {
                        continue;
                    }
                    let app = a[(i, i)];
                    let aqq = a[(j, j)];
                    let tau = (aqq - app) / (fp::<S>(2.0) * apq);
                    let t = if tau >= S::zero() {
                        S::one() / (tau + (S::one() + tau * tau).sqrt())
                    } else {
                        -S::one() / (-tau + (S::one() + tau * tau).sqrt())
                    };
                    let c = S::one() / (S::one() + t * t).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let aki = a[(k, i)];
                        let akj = a[(k, j)];
                        a[(k, i)] = c * aki - s * akj;
                        a[(k, j)] = s * aki + c * akj;
                    }
                    for k in 0..n {
                        let aik = a[(i, k)];
                        let ajk = a[(j, k)];
                        a[(i, k)] = c * aik - s * ajk;
                        a[(j, k)] = s * aik + c * ajk;
                    }
                    for k in 0..n {
                        let pki = p[(k, i)];
                        let pkj = p[(k, j)];
                        p[(k, i)] = c * pki - s * pkj;
                        p[(k, j)] = s * pki + c * pkj;
                    }
                }
            }
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&x, &y| {
            a[(y, y)]
                .partial_cmp(&a[(x, x)])
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        let eigvals: Vec<S> = order.iter().map(|&k| a[(k, k)]).collect();
        let mut vecs = Mat::zeros(n, n);
        for (new_col, &old_col) in order.iter().enumerate() {
            for r in 0..n {
                vecs[(r, new_col)] = p[(r, old_col)];
            }
        }
        Ok((eigvals, vecs))
    }
}

impl<S: Scalar> std::ops::Index<(usize, usize)> for Mat<S> {
    type Output = S;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &S {
        &self.data[i * self.cols + j]
    }
}

impl<S: Scalar> std::ops::IndexMut<(usize, usize)> for Mat<S> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut S {
        &mut self.data[i * self.cols + j]
    }
}

/// Lower-triangular Cholesky factor of an SPD matrix.
#[derive(Clone, Debug)]
pub struct Cholesky<S> {
    l: Mat<S>,
}

impl<S: Scalar> Cholesky<S> {
    pub fn dim(&self) -> usize {
        self.l.rows()
    }

    pub fn factor(&self) -> &Mat<S> {
        &self.l
    }

    /// `log |A|` of the factored matrix.
    pub fn log_det(&self) -> S {
        let n = self.l.rows();
        let two = fp::<S>(2.0);
        (0..n).map(|i| self.l[(i, i)].ln() * two).sum()
    }

    /// Solve `L w = b` (forward substitution).
    pub fn forward_solve(&self, b: &[S]) -> Vec<S> {
        let n = self.l.rows();
        assert_eq!(b.len(), n);
        let mut w = b.to_vec();
        for i in 0..n {
            let mut acc = w[i];
            for k in 0..i {
                acc -= self.l[(i, k)] * w[k];
            }
            w[i] = acc / self.l[(i, i)];
        }
        w
    }

    /// Solve `A x = b`.
    pub fn solve_vec(&self, b: &[S]) -> Vec<S> {
        let n = self.l.rows();
        let mut x = self.forward_solve(b);
        for i in (0..n).rev() {
            let mut acc = x[i];
            for k in (i + 1)..n {
                acc -= self.l[(k, i)] * x[k];
            }
            x[i] = acc / self.l[(i, i)];
        }
        x
    }

    /// Solve `A X = B` column by column.
    pub fn solve_mat(&self, b: &Mat<S>) -> Mat<S> {
        assert_eq!(b.rows(), self.l.rows());
        let mut out = Mat::zeros(b.rows(), b.cols());
        let mut col = vec![S::zero(); b.rows()];
        for j in 0..b.cols() {
            for i in 0..b.rows() {
                col[i] = b[(i, j)];
            }
            let x = self.solve_vec(&col);
            for i in 0..b.rows() {
                out[(i, j)] = x[i];
            }
        }
        out
    }

    /// `bᵀ A⁻¹ b` via one forward solve.
    pub fn quad_form(&self, b: &[S]) -> S {
        let w = self.forward_solve(b);
        w.iter().map(|&v| v * v).sum()
    }

    /// `A⁻¹` (symmetric).
    pub fn inverse(&self) -> Mat<S> {
        self.solve_mat(&Mat::identity(self.l.rows()))
    }
}
