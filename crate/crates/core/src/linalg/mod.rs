//! Dense real symmetric matrices and the small amount of linear algebra the
//! rest of the crate needs.

mod eigen;
mod projection;

pub use eigen::{
    max_eigenvalue, min_eigenvalue, operator_norm, spectrum, symmetric_eigen, EigenSystem,
    DEFAULT_TOL_EIG,
};
pub use projection::project_l1_sphere;

use crate::error::{Error, Result};

/// Relative asymmetry (against the Frobenius norm) tolerated by the
/// constructors before input is rejected.
pub const SYMMETRY_TOL: f64 = 1e-8;

/// Dense real symmetric `n x n` matrix, row-major.
///
/// Entries are exactly symmetric: `get(i, j) == get(j, i)` bit for bit.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    n: usize,
    data: Vec<f64>,
}

impl GramMatrix {
    /// Builds a matrix from row-major entries. Input whose asymmetry is at
    /// most `SYMMETRY_TOL * ||A||_F` is symmetrized as `(A + A^T) / 2`;
    /// anything worse is rejected.
    pub fn from_row_major(n: usize, data: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidDimension("n must be at least 1".into()));
        }
        if data.len() != n * n {
            return Err(Error::InvalidDimension(format!(
                "expected {} entries for n = {n}, got {}",
                n * n,
                data.len()
            )));
        }
        if let Some(bad) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!(
                "non-finite entry at ({}, {})",
                bad / n,
                bad % n
            )));
        }
        let frob = data.iter().map(|v| v * v).sum::<f64>().sqrt();
        let mut max_asym = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                max_asym = max_asym.max((data[i * n + j] - data[j * n + i]).abs());
            }
        }
        let limit = SYMMETRY_TOL * frob;
        if max_asym > limit {
            return Err(Error::NotSymmetric {
                max_asymmetry: max_asym,
                limit,
            });
        }
        let mut data = data;
        if max_asym > 0.0 {
            for i in 0..n {
                for j in (i + 1)..n {
                    let avg = 0.5 * (data[i * n + j] + data[j * n + i]);
                    data[i * n + j] = avg;
                    data[j * n + i] = avg;
                }
            }
        }
        Ok(Self { n, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if let Some(r) = rows.iter().position(|r| r.len() != n) {
            return Err(Error::InvalidDimension(format!(
                "row {r} has {} entries, expected {n}",
                rows[r].len()
            )));
        }
        Self::from_row_major(n, rows.concat())
    }

    /// Caller guarantees exact symmetry.
    pub(crate) fn from_symmetric_parts(n: usize, data: Vec<f64>) -> Self {
        debug_assert!(n >= 1 && data.len() == n * n);
        debug_assert!((0..n).all(|i| (0..n).all(|j| data[i * n + j] == data[j * n + i])));
        Self { n, data }
    }

    pub fn zeros(n: usize) -> Self {
        Self::from_symmetric_parts(n, vec![0.0; n * n])
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![1.0; n])
    }

    pub fn all_ones(n: usize) -> Self {
        Self::from_symmetric_parts(n, vec![1.0; n * n])
    }

    pub fn diagonal(d: &[f64]) -> Self {
        let n = d.len();
        let mut data = vec![0.0; n * n];
        for (i, &v) in d.iter().enumerate() {
            data[i * n + i] = v;
        }
        Self::from_symmetric_parts(n, data)
    }

    /// `x x^T`.
    pub fn outer(x: &[f64]) -> Self {
        let n = x.len();
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                data[i * n + j] = x[i] * x[j];
            }
        }
        Self::from_symmetric_parts(n, data)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    /// Sum of absolute values of all entries.
    pub fn entrywise_one_norm(&self) -> f64 {
        self.data.iter().map(|v| v.abs()).sum()
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn is_hollow(&self) -> bool {
        (0..self.n).all(|i| self.get(i, i) == 0.0)
    }

    pub fn mat_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n, "dimension mismatch");
        self.data
            .chunks_exact(self.n)
            .map(|row| dot(row, x))
            .collect()
    }

    /// `x^T A x`.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        dot(&self.mat_vec(x), x)
    }

    /// `Tr(A B)` for symmetric `B`, i.e. the entrywise inner product.
    pub fn trace_product(&self, other: &GramMatrix) -> f64 {
        assert_eq!(self.n, other.n, "dimension mismatch");
        dot(&self.data, &other.data)
    }

    pub fn principal_submatrix(&self, idx: &[usize]) -> GramMatrix {
        let k = idx.len();
        let mut data = Vec::with_capacity(k * k);
        for &i in idx {
            for &j in idx {
                data.push(self.get(i, j));
            }
        }
        Self::from_symmetric_parts(k, data)
    }

    pub fn scaled(&self, alpha: f64) -> GramMatrix {
        Self::from_symmetric_parts(self.n, self.data.iter().map(|v| alpha * v).collect())
    }

    /// `alpha * self + beta * other`.
    pub fn linear_combination(&self, alpha: f64, other: &GramMatrix, beta: f64) -> GramMatrix {
        assert_eq!(self.n, other.n, "dimension mismatch");
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| alpha * a + beta * b)
            .collect();
        Self::from_symmetric_parts(self.n, data)
    }

    pub fn add_to_diagonal(&self, shift: f64) -> GramMatrix {
        let mut out = self.clone();
        for i in 0..self.n {
            out.data[i * self.n + i] += shift;
        }
        out
    }

    /// Largest absolute entrywise difference.
    pub fn max_abs_diff(&self, other: &GramMatrix) -> f64 {
        assert_eq!(self.n, other.n, "dimension mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
    }

    pub(crate) fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm_l1(x: &[f64]) -> f64 {
    x.iter().map(|v| v.abs()).sum()
}

pub fn norm_l2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// `sum_k x_k x_k^T`.
pub fn sum_of_outer_products(n: usize, vectors: &[Vec<f64>]) -> GramMatrix {
    let mut data = vec![0.0; n * n];
    for x in vectors {
        assert_eq!(x.len(), n, "dimension mismatch");
        for i in 0..n {
            if x[i] == 0.0 {
                continue;
            }
            for j in 0..n {
                data[i * n + j] += x[i] * x[j];
            }
        }
    }
    GramMatrix::from_symmetric_parts(n, data)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[f64]]) -> GramMatrix {
        GramMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn entrywise_one_norm_examples() {
        assert_eq!(GramMatrix::identity(2).entrywise_one_norm(), 2.0);
        assert_eq!(m(&[&[1.0, -2.0], &[-2.0, 5.0]]).entrywise_one_norm(), 10.0);
        assert_eq!(GramMatrix::all_ones(3).entrywise_one_norm(), 9.0);
    }

    #[test]
    fn trace_examples() {
        assert_eq!(GramMatrix::identity(3).trace(), 3.0);
        assert_eq!(GramMatrix::all_ones(3).trace(), 3.0);
        assert_eq!(GramMatrix::diagonal(&[1.0, 2.0, 4.0]).trace(), 7.0);
    }

    #[test]
    fn rejects_asymmetric_and_empty() {
        assert!(matches!(
            m_res(&[&[1.0, 2.0], &[2.5, 1.0]]),
            Err(Error::NotSymmetric { .. })
        ));
        assert!(matches!(
            GramMatrix::from_row_major(0, vec![]),
            Err(Error::InvalidDimension(_))
        ));
        assert!(GramMatrix::from_row_major(2, vec![1.0; 3]).is_err());
        assert!(GramMatrix::from_row_major(1, vec![f64::NAN]).is_err());
    }

    fn m_res(rows: &[&[f64]]) -> Result<GramMatrix> {
        GramMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>())
    }

    #[test]
    fn symmetrizes_tiny_asymmetry() {
        let a = m(&[&[1.0, 2.0], &[2.0 + 1e-12, 1.0]]);
        assert_eq!(a.get(0, 1), a.get(1, 0));
        assert!((a.get(0, 1) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn submatrix_and_quadratic_form() {
        let a = m(&[&[1.0, 2.0, 3.0], &[2.0, 4.0, 5.0], &[3.0, 5.0, 6.0]]);
        let s = a.principal_submatrix(&[0, 2]);
        assert_eq!(s.as_slice(), &[1.0, 3.0, 3.0, 6.0]);
        assert_eq!(a.quadratic_form(&[1.0, 0.0, -1.0]), 1.0);
    }
}
