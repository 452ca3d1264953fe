//! Small dense linear algebra: LU solves, determinants, oblique projectors
//! and the wedge/determinant contraction.
//!
//! Everything here targets matrices with a handful of rows; no blocking,
//! no sparse storage.

use std::ops::{Index, IndexMut};

use crate::error::{check_dim, Error, Result};
use crate::scalar::{dot, Scalar};

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn new(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidConfig("matrix dimensions must be positive".into()));
        }
        check_dim(rows * cols, data.len())?;
        if let Some(index) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        for row in rows {
            check_dim(c, row.len())?;
        }
        Self::new(r, c, rows.concat())
    }

    /// Builds a `len × columns.len()` matrix whose columns are the given vectors.
    pub fn from_columns(columns: &[Vec<T>]) -> Result<Self> {
        let c = columns.len();
        let r = columns.first().map_or(0, Vec::len);
        for col in columns {
            check_dim(r, col.len())?;
        }
        let mut data = Vec::with_capacity(r * c);
        for i in 0..r {
            data.extend(columns.iter().map(|col| col[i]));
        }
        Self::new(r, c, data)
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

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn columns(&self) -> Vec<Vec<T>> {
        (0..self.cols).map(|j| self.column(j)).collect()
    }

    pub fn set_column(&mut self, j: usize, values: &[T]) {
        for (i, &v) in values.iter().enumerate() {
            self[(i, j)] = v;
        }
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Matrix<T>) -> Result<Self> {
        check_dim(self.cols, other.rows)?;
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                for j in 0..other.cols {
                    out[(i, j)] = out[(i, j)] + a * other[(k, j)];
                }
            }
        }
        Ok(out)
    }

    pub fn matvec(&self, v: &[T]) -> Result<Vec<T>> {
        check_dim(self.cols, v.len())?;
        Ok((0..self.rows).map(|i| dot(self.row(i), v)).collect())
    }

    /// `selfᵀ · v`
    pub fn tr_matvec(&self, v: &[T]) -> Result<Vec<T>> {
        check_dim(self.rows, v.len())?;
        let mut out = vec![T::zero(); self.cols];
        for i in 0..self.rows {
            for (j, o) in out.iter_mut().enumerate() {
                *o = *o + self[(i, j)] * v[i];
            }
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Matrix<T>) -> Result<Self> {
        check_dim(self.rows, other.rows)?;
        check_dim(self.cols, other.cols)?;
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| a - b).collect(),
        })
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;

    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

/// LU factorization with partial pivoting, `P·M = L·U`.
#[derive(Debug, Clone)]
pub struct Lu<T> {
    n: usize,
    lu: Matrix<T>,
    perm: Vec<usize>,
    sign: T,
    scale: T,
}

impl<T: Scalar> Lu<T> {
    pub fn factor(m: &Matrix<T>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch {
                expected: m.rows(),
                found: m.cols(),
            });
        }
        let n = m.rows();
        let mut lu = m.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = T::one();
        for k in 0..n {
            let mut p = k;
            for i in k + 1..n {
                if lu[(i, k)].abs() > lu[(p, k)].abs() {
                    p = i;
                }
            }
            if p != k {
                for j in 0..n {
                    let tmp = lu[(k, j)];
                    lu[(k, j)] = lu[(p, j)];
                    lu[(p, j)] = tmp;
                }
                perm.swap(k, p);
                sign = -sign;
            }
            let pivot = lu[(k, k)];
            if pivot == T::zero() {
                continue;
            }
            for i in k + 1..n {
                let factor = lu[(i, k)] / pivot;
                lu[(i, k)] = factor;
                for j in k + 1..n {
                    lu[(i, j)] = lu[(i, j)] - factor * lu[(k, j)];
                }
            }
        }
        Ok(Lu {
            n,
            lu,
            perm,
            sign,
            scale: m.max_abs(),
        })
    }

    /// Smallest pivot magnitude of the factorization.
    pub fn min_pivot(&self) -> T {
        (0..self.n).fold(T::infinity(), |m, k| m.min(self.lu[(k, k)].abs()))
    }

    /// True when some pivot falls below `1e-13 · max|entry|`.
    pub fn is_singular(&self) -> bool {
        self.scale == T::zero() || self.min_pivot() < T::rel_threshold(1e-13) * self.scale
    }

    pub fn determinant(&self) -> T {
        (0..self.n).fold(self.sign, |acc, k| acc * self.lu[(k, k)])
    }

    pub fn solve(&self, rhs: &[T]) -> Result<Vec<T>> {
        check_dim(self.n, rhs.len())?;
        if self.is_singular() {
            return Err(Error::SingularMatrix {
                pivot: self.min_pivot().as_f64(),
            });
        }
        let n = self.n;
        let mut y: Vec<T> = self.perm.iter().map(|&p| rhs[p]).collect();
        for i in 0..n {
            for j in 0..i {
                y[i] = y[i] - self.lu[(i, j)] * y[j];
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                y[i] = y[i] - self.lu[(i, j)] * y[j];
            }
            y[i] = y[i] / self.lu[(i, i)];
        }
        Ok(y)
    }
}

/// Solves `m · v = rhs` by LU with partial pivoting.
pub fn solve_square<T: Scalar>(m: &Matrix<T>, rhs: &[T]) -> Result<Vec<T>> {
    Lu::factor(m)?.solve(rhs)
}

/// Determinant from the LU pivot product and permutation sign.
pub fn determinant<T: Scalar>(m: &Matrix<T>) -> Result<T> {
    Ok(Lu::factor(m)?.determinant())
}

/// Solves `m · v = rhs` by Cramer's rule, one determinant per unknown.
///
/// Independent of [`solve_square`]'s elimination path; used where the
/// determinant-ratio form of a result is the quantity of interest.
pub fn cramer_solve<T: Scalar>(m: &Matrix<T>, rhs: &[T]) -> Result<Vec<T>> {
    check_dim(m.rows(), rhs.len())?;
    let lu = Lu::factor(m)?;
    if lu.is_singular() {
        return Err(Error::SingularMatrix {
            pivot: lu.min_pivot().as_f64(),
        });
    }
    let det = lu.determinant();
    (0..m.cols())
        .map(|j| {
            let mut replaced = m.clone();
            replaced.set_column(j, rhs);
            Ok(determinant(&replaced)? / det)
        })
        .collect()
}

fn complementarity_check<T: Scalar>(a: &Matrix<T>, b: &Matrix<T>) -> Result<Lu<T>> {
    check_dim(a.rows(), b.rows())?;
    check_dim(a.cols(), b.cols())?;
    if a.cols() > a.rows() {
        return Err(Error::InvalidConfig(format!(
            "more projection directions ({}) than dimensions ({})",
            a.cols(),
            a.rows()
        )));
    }
    let bta = b.transpose().matmul(a)?;
    let lu = Lu::factor(&bta)?;
    if lu.is_singular() {
        return Err(Error::ComplementarityFailure {
            pivot: lu.min_pivot().as_f64(),
        });
    }
    Ok(lu)
}

/// `(BᵀA)⁻¹ Bᵀ v`, the coefficients of the component of `v` along the columns of `A`.
pub fn oblique_coefficients<T: Scalar>(a: &Matrix<T>, b: &Matrix<T>, v: &[T]) -> Result<Vec<T>> {
    check_dim(a.rows(), v.len())?;
    let lu = complementarity_check(a, b)?;
    lu.solve(&b.tr_matvec(v)?)
}

/// Dense oblique projector `P = I − A (BᵀA)⁻¹ Bᵀ`.
///
/// `P` annihilates the columns of `A` and its range is orthogonal to the
/// columns of `B`. Fails with [`Error::ComplementarityFailure`] when `BᵀA`
/// is numerically singular.
pub fn oblique_projector<T: Scalar>(a: &Matrix<T>, b: &Matrix<T>) -> Result<Matrix<T>> {
    let lu = complementarity_check(a, b)?;
    let d = a.rows();
    let mut p = Matrix::identity(d);
    // column j of (BᵀA)⁻¹Bᵀ is (BᵀA)⁻¹ (row j of B)
    for j in 0..d {
        let coeffs = lu.solve(b.row(j))?;
        let correction = a.matvec(&coeffs)?;
        for i in 0..d {
            p[(i, j)] = p[(i, j)] - correction[i];
        }
    }
    Ok(p)
}

/// `P·f̃ = f̃ − A (BᵀA)⁻¹ Bᵀ f̃` without forming `P`.
pub fn projected_vector_field<T: Scalar>(ftilde: &[T], a: &Matrix<T>, b: &Matrix<T>) -> Result<Vec<T>> {
    let coeffs = oblique_coefficients(a, b, ftilde)?;
    let along = a.matvec(&coeffs)?;
    Ok(ftilde.iter().zip(&along).map(|(&f, &c)| f - c).collect())
}

/// Full contraction of `u¹ ∧ ⋯ ∧ uᴷ` against `v¹ ⊗ ⋯ ⊗ vᴷ`, equal to `det(VᵀU)`.
pub fn wedge_contract<T: Scalar>(u: &Matrix<T>, v: &Matrix<T>) -> Result<T> {
    check_dim(u.rows(), v.rows())?;
    check_dim(u.cols(), v.cols())?;
    if u.cols() > u.rows() {
        return Err(Error::InvalidConfig("wedge of more vectors than dimensions".into()));
    }
    determinant(&v.transpose().matmul(u)?)
}
