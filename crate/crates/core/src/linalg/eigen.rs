//! Symmetric eigenproblems.
//!
//! Full eigensystems come from cyclic Jacobi rotations. Spectrum-only queries
//! (extreme eigenvalues, operator norms) go through Householder
//! tridiagonalization and implicit QR in `nalgebra`, which is an order of
//! magnitude cheaper at the sizes the random-matrix experiments use.

use nalgebra::DMatrix;

use super::GramMatrix;
use crate::error::{Error, Result};

pub const DEFAULT_TOL_EIG: f64 = 1e-10;

const MAX_SWEEPS: usize = 60;

/// Eigenvalues in descending order with matching orthonormal eigenvectors.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Vec<Vec<f64>>,
}

impl EigenSystem {
    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `sum_k f(lambda_k) v_k v_k^T`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> GramMatrix {
        let n = self.n();
        let mut data = vec![0.0; n * n];
        for (lambda, v) in self.eigenvalues.iter().zip(&self.eigenvectors) {
            let w = f(*lambda);
            if w == 0.0 {
                continue;
            }
            for i in 0..n {
                let wi = w * v[i];
                for j in i..n {
                    data[i * n + j] += wi * v[j];
                }
            }
        }
        for i in 0..n {
            for j in 0..i {
                data[i * n + j] = data[j * n + i];
            }
        }
        GramMatrix::from_symmetric_parts(n, data)
    }

    pub fn reconstruct(&self) -> GramMatrix {
        self.reconstruct_with(|l| l)
    }
}

/// Cyclic Jacobi eigendecomposition. Converged once the off-diagonal
/// Frobenius mass is at most `tol_eig * ||A||_F`.
pub fn symmetric_eigen(a: &GramMatrix, tol_eig: f64) -> Result<EigenSystem> {
    let n = a.n();
    let mut w = a.as_slice().to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let target = tol_eig * a.frobenius_norm();

    let off_mass = |w: &[f64]| -> f64 {
        let mut s = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                s += w[p * n + q] * w[p * n + q];
            }
        }
        (2.0 * s).sqrt()
    };

    let mut converged = false;
    for _sweep in 0..MAX_SWEEPS {
        if off_mass(&w) <= target {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = w[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = w[p * n + p];
                let aqq = w[q * n + q];
                // Negligible next to both diagonal entries: drop it.
                if app.abs() + 1e3 * apq.abs() == app.abs()
                    && aqq.abs() + 1e3 * apq.abs() == aqq.abs()
                {
                    w[p * n + q] = 0.0;
                    w[q * n + p] = 0.0;
                    continue;
                }
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                for k in 0..n {
                    let akp = w[k * n + p];
                    let akq = w[k * n + q];
                    w[k * n + p] = c * akp - s * akq;
                    w[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = w[p * n + k];
                    let aqk = w[q * n + k];
                    w[p * n + k] = c * apk - s * aqk;
                    w[q * n + k] = s * apk + c * aqk;
                }
                w[p * n + p] = app - t * apq;
                w[q * n + q] = aqq + t * apq;
                w[p * n + q] = 0.0;
                w[q * n + p] = 0.0;

                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    if !converged {
        let residual = off_mass(&w);
        if residual > target {
            return Err(Error::NotConverged {
                sweeps: MAX_SWEEPS,
                residual,
            });
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| w[j * n + j].total_cmp(&w[i * n + i]).then(i.cmp(&j)));
    let eigenvalues = order.iter().map(|&i| w[i * n + i]).collect();
    let eigenvectors = order
        .iter()
        .map(|&col| (0..n).map(|k| v[k * n + col]).collect())
        .collect();
    Ok(EigenSystem {
        eigenvalues,
        eigenvectors,
    })
}

/// All eigenvalues, descending.
pub fn spectrum(a: &GramMatrix) -> Vec<f64> {
    let n = a.n();
    if n == 1 {
        return vec![a.get(0, 0)];
    }
    let m = DMatrix::from_row_slice(n, n, a.as_slice());
    let mut vals: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    vals.sort_by(|x, y| y.total_cmp(x));
    vals
}

pub fn min_eigenvalue(a: &GramMatrix) -> f64 {
    *spectrum(a).last().expect("n >= 1")
}

pub fn max_eigenvalue(a: &GramMatrix) -> f64 {
    spectrum(a)[0]
}

/// Spectral norm `max_k |lambda_k|`.
pub fn operator_norm(a: &GramMatrix) -> f64 {
    let s = spectrum(a);
    s[0].abs().max(s[s.len() - 1].abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[f64]]) -> GramMatrix {
        GramMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn diagonal_is_already_diagonal() {
        let es = symmetric_eigen(&GramMatrix::diagonal(&[3.0, 1.0]), DEFAULT_TOL_EIG).unwrap();
        assert_eq!(es.eigenvalues, vec![3.0, 1.0]);
        assert_eq!(es.eigenvectors[0], vec![1.0, 0.0]);
        assert_eq!(es.eigenvectors[1], vec![0.0, 1.0]);
        let es = symmetric_eigen(&GramMatrix::diagonal(&[1.0, 3.0]), DEFAULT_TOL_EIG).unwrap();
        assert_eq!(es.eigenvectors[0], vec![0.0, 1.0]);
    }

    #[test]
    fn standard_two_by_two() {
        let es = symmetric_eigen(&m(&[&[2.0, 1.0], &[1.0, 2.0]]), DEFAULT_TOL_EIG).unwrap();
        assert!(close(es.eigenvalues[0], 3.0, 1e-14));
        assert!(close(es.eigenvalues[1], 1.0, 1e-14));
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let v0 = &es.eigenvectors[0];
        let v1 = &es.eigenvectors[1];
        assert!(close(v0[0].abs(), h, 1e-14) && close(v0[0], v0[1], 1e-14));
        assert!(close(v1[0].abs(), h, 1e-14) && close(v1[0], -v1[1], 1e-14));
    }

    #[test]
    fn rank_one_all_ones() {
        let es = symmetric_eigen(&GramMatrix::all_ones(3), DEFAULT_TOL_EIG).unwrap();
        assert!(close(es.eigenvalues[0], 3.0, 1e-13));
        assert!(close(es.eigenvalues[1], 0.0, 1e-13));
        assert!(close(es.eigenvalues[2], 0.0, 1e-13));
    }

    #[test]
    fn min_eigenvalue_examples() {
        assert!(close(min_eigenvalue(&GramMatrix::identity(2)), 1.0, 1e-14));
        assert!(close(min_eigenvalue(&m(&[&[0.0, 1.0], &[1.0, 0.0]])), -1.0, 1e-14));
        assert!(close(min_eigenvalue(&GramMatrix::all_ones(3)), 0.0, 1e-13));
    }

    #[test]
    fn operator_norm_examples() {
        assert!(close(operator_norm(&GramMatrix::diagonal(&[2.0, -5.0])), 5.0, 1e-14));
        assert!(close(operator_norm(&m(&[&[0.0, 1.0], &[1.0, 0.0]])), 1.0, 1e-14));
        assert!(close(operator_norm(&GramMatrix::all_ones(4)), 4.0, 1e-13));
    }

    #[test]
    fn one_by_one() {
        let es = symmetric_eigen(&GramMatrix::diagonal(&[-2.5]), DEFAULT_TOL_EIG).unwrap();
        assert_eq!(es.eigenvalues, vec![-2.5]);
        assert_eq!(operator_norm(&GramMatrix::diagonal(&[-2.5])), 2.5);
    }

    #[test]
    fn zero_matrix_converges_immediately() {
        let es = symmetric_eigen(&GramMatrix::zeros(4), DEFAULT_TOL_EIG).unwrap();
        assert!(es.eigenvalues.iter().all(|&l| l == 0.0));
    }
}
