use std::ops::Deref;

use serde::{Deserialize, Serialize};

use super::{sym_eig, Mat, MatrixError};
use crate::scalar::Real;
use crate::tolerances::SYMMETRY_REL_TOL;

/// Square real matrix with exactly symmetric storage.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Mat<T>", into = "Mat<T>")]
#[serde(bound(serialize = "T: Real + Serialize", deserialize = "T: Real + serde::de::DeserializeOwned"))]
pub struct SymMatrix<T: Real>(Mat<T>);

impl<T: Real> SymMatrix<T> {
    /// Accepts `m` if it is square and symmetric to within
    /// [`SYMMETRY_REL_TOL`] relative, and stores `(m + mᵀ)/2`.
    pub fn new(m: Mat<T>) -> Result<Self, MatrixError> {
        if !m.is_square() {
            return Err(MatrixError::NotSquare(m.shape()));
        }
        if m.rows() == 0 {
            return Err(MatrixError::EmptyBlocks);
        }
        let n = m.rows();
        let scale = m.max_abs();
        let mut worst = T::zero();
        for i in 0..n {
            for j in (i + 1)..n {
                let d = (m[(i, j)] - m[(j, i)]).abs();
                if d > worst {
                    worst = d;
                }
            }
        }
        let rel = if scale > T::zero() { worst / scale } else { T::zero() };
        if rel > T::lit(SYMMETRY_REL_TOL) {
            return Err(MatrixError::Asymmetric(rel.to_f64_lossy()));
        }
        Ok(Self::symmetrize(&m))
    }

    /// `(m + mᵀ)/2` without any asymmetry check.
    pub fn symmetrize(m: &Mat<T>) -> Self {
        assert!(m.is_square(), "symmetrize needs a square matrix");
        let n = m.rows();
        let mut s = m.clone();
        for i in 0..n {
            for j in (i + 1)..n {
                let v = (m[(i, j)] + m[(j, i)]) * T::half();
                s[(i, j)] = v;
                s[(j, i)] = v;
            }
        }
        Self(s)
    }

    pub fn identity(n: usize) -> Self {
        Self(Mat::identity(n))
    }

    pub fn zeros(n: usize) -> Self {
        Self(Mat::zeros(n, n))
    }

    pub fn from_diag(d: &[T]) -> Self {
        Self(Mat::from_diag(d))
    }

    pub fn from_f64_rows(rows: &[&[f64]]) -> Result<Self, MatrixError> {
        Self::new(Mat::from_f64_rows(rows)?)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.0.rows()
    }

    pub fn as_mat(&self) -> &Mat<T> {
        &self.0
    }

    pub fn into_mat(self) -> Mat<T> {
        self.0
    }

    pub fn scale(&self, s: T) -> Self {
        Self(self.0.scale(s))
    }

    pub fn add(&self, rhs: &Self) -> Self {
        Self(&self.0 + &rhs.0)
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        Self(&self.0 - &rhs.0)
    }

    /// `Pᵀ · self · P`, symmetric by construction.
    pub fn congruence(&self, p: &Mat<T>) -> Result<Self, MatrixError> {
        let inner = self.0.matmul(p)?;
        Ok(Self::symmetrize(&p.transpose().matmul(&inner)?))
    }

    pub fn min_eigenvalue(&self) -> T {
        *sym_eig(self).values.last().expect("dim >= 1")
    }

    pub fn max_eigenvalue(&self) -> T {
        sym_eig(self).values[0]
    }

    /// Direct sum of symmetric blocks.
    pub fn direct_sum(blocks: &[Self]) -> Result<Self, MatrixError> {
        let mats: Vec<Mat<T>> = blocks.iter().map(|b| b.0.clone()).collect();
        Ok(Self(block_diag(&mats)?))
    }
}

impl<T: Real> Deref for SymMatrix<T> {
    type Target = Mat<T>;
    fn deref(&self) -> &Mat<T> {
        &self.0
    }
}

impl<T: Real> TryFrom<Mat<T>> for SymMatrix<T> {
    type Error = MatrixError;
    fn try_from(m: Mat<T>) -> Result<Self, MatrixError> {
        Self::new(m)
    }
}

impl<T: Real> From<SymMatrix<T>> for Mat<T> {
    fn from(s: SymMatrix<T>) -> Mat<T> {
        s.0
    }
}

impl<T: Real> std::fmt::Debug for SymMatrix<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Sym")?;
        self.0.fmt(f)
    }
}

/// Ordered list of square block sizes `n₁, …, n_q`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockSpec {
    dims: Vec<usize>,
}

impl BlockSpec {
    pub fn new(dims: Vec<usize>) -> Result<Self, MatrixError> {
        if dims.is_empty() {
            return Err(MatrixError::EmptyBlocks);
        }
        if dims.iter().any(|&d| d == 0) {
            return Err(MatrixError::EmptyBlocks);
        }
        Ok(Self { dims })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn total(&self) -> usize {
        self.dims.iter().sum()
    }

    /// Row offset of each block.
    pub fn offsets(&self) -> Vec<usize> {
        self.dims
            .iter()
            .scan(0, |acc, &d| {
                let o = *acc;
                *acc += d;
                Some(o)
            })
            .collect()
    }

    /// Index ranges of the blocks.
    pub fn ranges(&self) -> Vec<std::ops::Range<usize>> {
        self.offsets()
            .into_iter()
            .zip(&self.dims)
            .map(|(o, &d)| o..o + d)
            .collect()
    }

    /// `⊕ᵢ vᵢ I_{nᵢ}` as a diagonal vector.
    pub fn expand<T: Copy>(&self, per_block: &[T]) -> Vec<T> {
        assert_eq!(per_block.len(), self.dims.len());
        self.dims
            .iter()
            .zip(per_block)
            .flat_map(|(&d, &v)| std::iter::repeat_n(v, d))
            .collect()
    }
}

/// `M + Mᵀ`.
pub fn he<T: Real>(m: &Mat<T>) -> Result<SymMatrix<T>, MatrixError> {
    if !m.is_square() {
        return Err(MatrixError::NotSquare(m.shape()));
    }
    Ok(SymMatrix::symmetrize(&(m + &m.transpose())))
}

/// Direct sum of square blocks in the given order.
pub fn block_diag<T: Real>(blocks: &[Mat<T>]) -> Result<Mat<T>, MatrixError> {
    if blocks.is_empty() {
        return Err(MatrixError::EmptyBlocks);
    }
    if let Some(b) = blocks.iter().find(|b| !b.is_square()) {
        return Err(MatrixError::NotSquare(b.shape()));
    }
    let n: usize = blocks.iter().map(Mat::rows).sum();
    let mut out = Mat::zeros(n, n);
    let mut off = 0;
    for b in blocks {
        out.set_block(off, off, b);
        off += b.rows();
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Definiteness {
    Pos,
    Neg,
    Psd,
    Nsd,
}

/// Definiteness test with an absolute eigenvalue margin.
///
/// `Pos` holds iff `λ_min > margin`, `Psd` iff `λ_min ≥ -margin`; `Neg` and
/// `Nsd` mirror these on `λ_max`.
pub fn is_definite<T: Real>(m: &SymMatrix<T>, sense: Definiteness, margin: T) -> bool {
    let eig = sym_eig(m);
    let lmax = eig.values[0];
    let lmin = *eig.values.last().expect("dim >= 1");
    match sense {
        Definiteness::Pos => lmin > margin,
        Definiteness::Psd => lmin >= -margin,
        Definiteness::Neg => lmax < -margin,
        Definiteness::Nsd => lmax <= margin,
    }
}
