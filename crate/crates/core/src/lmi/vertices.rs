use super::LmiError;
use crate::scalar::Real;
use crate::symmat::{BlockSpec, Mat};
use crate::tolerances::MAX_CHANNELS;

/// One corner `Ψ = ⊕ ψᵢ I_{nᵢ}` of the exponential polytope.
#[derive(Debug, Clone, PartialEq)]
pub struct Vertex<T> {
    /// Per-channel weight `ψᵢ ∈ {1, e^{σᵢT₂⁽ⁱ⁾}}`.
    pub psi: Vec<T>,
    /// `true` where `ψᵢ = e^{σᵢT₂⁽ⁱ⁾}`.
    pub upper: Vec<bool>,
}

impl<T: Real> Vertex<T> {
    pub fn matrix(&self, partition: &BlockSpec) -> Mat<T> {
        Mat::from_diag(&partition.expand(&self.psi))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VertexSet<T> {
    pub vertices: Vec<Vertex<T>>,
}

impl<T> VertexSet<T> {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Vertex<T>> {
        self.vertices.iter()
    }
}

/// All `2^q` vertices in binary-counter order, channel 1 most significant.
pub fn enumerate_vertices<T: Real>(
    sigma: &[T],
    t2: &[T],
    partition: &BlockSpec,
) -> Result<VertexSet<T>, LmiError> {
    let q = partition.len();
    if sigma.len() != q || t2.len() != q {
        return Err(LmiError::Argument(format!(
            "sigma/T2 lengths {}/{} do not match {q} channels",
            sigma.len(),
            t2.len()
        )));
    }
    if q > MAX_CHANNELS {
        return Err(LmiError::Argument(format!(
            "{q} channels would need 2^{q} vertices (limit {MAX_CHANNELS})"
        )));
    }
    let tops: Vec<T> = sigma.iter().zip(t2).map(|(&s, &t)| (s * t).exp()).collect();
    let vertices = (0..1usize << q)
        .map(|c| {
            let upper: Vec<bool> = (0..q).map(|i| (c >> (q - 1 - i)) & 1 == 1).collect();
            let psi = upper
                .iter()
                .zip(&tops)
                .map(|(&u, &e)| if u { e } else { T::one() })
                .collect();
            Vertex { psi, upper }
        })
        .collect();
    Ok(VertexSet { vertices })
}
