use super::{Mat, SymMatrix};
use crate::scalar::Real;

/// Eigendecomposition `M = V Λ Vᵀ` of a symmetric matrix.
#[derive(Debug, Clone)]
pub struct SymEigen<T: Real> {
    /// Eigenvalues in descending order.
    pub values: Vec<T>,
    /// Orthonormal eigenvectors, one per column, matching `values`.
    pub vectors: Mat<T>,
}

impl<T: Real> SymEigen<T> {
    pub fn min(&self) -> T {
        *self.values.last().expect("non-empty spectrum")
    }

    pub fn max(&self) -> T {
        self.values[0]
    }

    pub fn reconstruct(&self) -> Mat<T> {
        let lam = Mat::from_diag(&self.values);
        &(&self.vectors * &lam) * &self.vectors.transpose()
    }
}

const MAX_SWEEPS: usize = 100;

/// Cyclic Jacobi eigensolver.
///
/// Sweeps over all off-diagonal pairs, annihilating each with a plane
/// rotation, until the off-diagonal mass falls below machine precision
/// relative to the matrix norm.
pub fn sym_eig<T: Real>(m: &SymMatrix<T>) -> SymEigen<T> {
    let n = m.dim();
    let mut a = m.as_mat().clone();
    let mut v = Mat::identity(n);
    let norm = a.frobenius_norm();
    if n == 1 || norm == T::zero() {
        return finish(a, v);
    }
    let eps = T::epsilon();
    for _ in 0..MAX_SWEEPS {
        let mut off = T::zero();
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[(p, q)] * a[(p, q)];
            }
        }
        if off.sqrt() <= eps * norm {
            break;
        }
        for p in 0..n - 1 {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq.abs() <= eps * eps * norm {
                    continue;
                }
                let app = a[(p, p)];
                let aqq = a[(q, q)];
                let theta = (aqq - app) / (T::two() * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                // theta.signum() is +1 for theta == 0, as required.
                let c = T::one() / (t * t + T::one()).sqrt();
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
                a[(p, q)] = T::zero();
                a[(q, p)] = T::zero();
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    finish(a, v)
}

fn finish<T: Real>(a: Mat<T>, v: Mat<T>) -> SymEigen<T> {
    let n = a.rows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        a[(j, j)]
            .partial_cmp(&a[(i, i)])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let mut vectors = Mat::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        for r in 0..n {
            vectors[(r, col)] = v[(r, i)];
        }
    }
    SymEigen { values, vectors }
}
