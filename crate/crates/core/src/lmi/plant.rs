use super::{invalid, LmiError};
use crate::scalar::Real;
use crate::symmat::{BlockSpec, Mat};

/// Linear plant `ẋ = A x + B sat(u)` with clustered, asynchronously sampled
/// state measurements.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantModel<T: Real> {
    a: Mat<T>,
    b: Mat<T>,
    ubar: Vec<T>,
    partition: BlockSpec,
    t1: Vec<T>,
    t2: Vec<T>,
}

impl<T: Real> PlantModel<T> {
    pub fn new(
        a: Mat<T>,
        b: Mat<T>,
        ubar: Vec<T>,
        partition: Vec<usize>,
        t1: Vec<T>,
        t2: Vec<T>,
    ) -> Result<Self, LmiError> {
        if !a.is_square() || a.rows() == 0 {
            return Err(invalid("A", format!("must be square and nonempty, got {:?}", a.shape())));
        }
        let n = a.rows();
        if b.rows() != n || b.cols() == 0 {
            return Err(invalid("B", format!("must be {n}×m with m ≥ 1, got {:?}", b.shape())));
        }
        let m = b.cols();
        if a.as_slice().iter().chain(b.as_slice()).any(|v| !v.is_finite()) {
            return Err(invalid("A", "plant matrices must be finite"));
        }
        if ubar.len() != m {
            return Err(invalid("ubar", format!("expected {m} levels, got {}", ubar.len())));
        }
        if let Some(k) = ubar.iter().position(|&u| !(u > T::zero() && u.is_finite())) {
            return Err(invalid("ubar", format!("level {k} must be positive")));
        }
        let partition = BlockSpec::new(partition)
            .map_err(|_| invalid("partition", "block sizes must be positive and nonempty"))?;
        if partition.total() != n {
            return Err(invalid(
                "partition",
                format!("sizes {:?} sum to {} but n = {n}", partition.dims(), partition.total()),
            ));
        }
        let q = partition.len();
        if t1.len() != q {
            return Err(invalid("T1", format!("expected {q} entries, got {}", t1.len())));
        }
        if t2.len() != q {
            return Err(invalid("T2", format!("expected {q} entries, got {}", t2.len())));
        }
        for i in 0..q {
            if !(t1[i] > T::zero()) {
                return Err(invalid("T1", format!("entry {i} must be positive")));
            }
            if !(t1[i] <= t2[i]) || !t2[i].is_finite() {
                return Err(invalid("T2", format!("entry {i} must satisfy T1 ≤ T2 < ∞")));
            }
        }
        Ok(Self {
            a,
            b,
            ubar,
            partition,
            t1,
            t2,
        })
    }

    pub fn n(&self) -> usize {
        self.a.rows()
    }

    pub fn m(&self) -> usize {
        self.b.cols()
    }

    pub fn q(&self) -> usize {
        self.partition.len()
    }

    pub fn a(&self) -> &Mat<T> {
        &self.a
    }

    pub fn b(&self) -> &Mat<T> {
        &self.b
    }

    pub fn ubar(&self) -> &[T] {
        &self.ubar
    }

    pub fn partition(&self) -> &BlockSpec {
        &self.partition
    }

    pub fn t1(&self) -> &[T] {
        &self.t1
    }

    pub fn t2(&self) -> &[T] {
        &self.t2
    }

    /// Minimum dwell time `min T₁⁽ⁱ⁾`.
    pub fn tau_d(&self) -> T {
        self.t1.iter().copied().fold(T::infinity(), T::min)
    }

    /// `Σ = ⊕ σᵢ I_{nᵢ}` as a diagonal vector.
    pub fn sigma_diag(&self, sigma: &[T]) -> Vec<T> {
        self.partition.expand(sigma)
    }
}
