//! Synthesis and analysis pipeline: grid search over `(σ, α)`, SDP solves,
//! gain recovery, basin-of-attraction estimates and decay-rate constants.

mod basin;
mod document;
mod pipeline;
mod verify;

pub use basin::{basin_sets, decay_certificate, hybrid_rate, membership, p_hat, quadratic_level, Tau};
pub use document::{BasinDoc, CertificateDocument, SCHEMA_VERSION};
pub use pipeline::{analyze, build_problem, solve_point, synthesize, worker_threads, Grid, PointOutcome};
pub use verify::{cert_vars, recover_multipliers, verify_certificate, BlockCheck, CheckKind, Recovery, VerificationReport};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lmi::{LmiError, Mode};
use crate::scalar::Real;
use crate::sdp::{SdpError, SdpOptions, SdpStatus};
use crate::symmat::{Mat, MatrixError, SymMatrix};
use crate::tolerances::{DEFAULT_VAR_BOX, STRICT_MARGIN, VERIFY_TOL};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CertifyError {
    #[error(transparent)]
    Lmi(#[from] LmiError),
    #[error(transparent)]
    Sdp(#[from] SdpError),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error("{0}")]
    Argument(String),
    #[error("no certificate found: {} grid point(s), none feasible", log.len())]
    NoCertificate { log: Vec<GridRecord> },
    #[error("certificate too marginal: vertex {vertex} gives c3 = {c3:.3e}")]
    Marginal { vertex: usize, c3: f64 },
    #[error("numerical failure: {0}")]
    Numerical(String),
}

/// Solver settings shared by every grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Settings<T> {
    pub sdp: SdpOptions<T>,
    /// Margin `ε` in `-M ⪰ εI` for each strict inequality.
    pub margin: T,
    /// Box `|yₖ| ≤ var_box` on all decision variables; also caps `μ̄`.
    pub var_box: T,
    /// Tolerance used to accept a solved grid point.
    pub verify_tol: T,
}

impl<T: Real> Default for Settings<T> {
    fn default() -> Self {
        Self {
            sdp: SdpOptions::default(),
            margin: T::lit(STRICT_MARGIN),
            var_box: T::lit(DEFAULT_VAR_BOX),
            verify_tol: T::lit(VERIFY_TOL),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverStats {
    pub status: SdpStatus,
    pub iterations: usize,
    pub duality_gap: f64,
    pub objective: f64,
}

/// All decision variables of a solved stability condition plus the gain.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilityCertificate<T: Real> {
    pub mode: Mode,
    pub k: Mat<T>,
    pub w: SymMatrix<T>,
    pub r: Vec<SymMatrix<T>>,
    /// Diagonal of `S`.
    pub s: Vec<T>,
    pub z: Mat<T>,
    pub j: Mat<T>,
    /// `Y = KW`, design only.
    pub y: Option<Mat<T>>,
    pub mw: Option<SymMatrix<T>>,
    pub sigma: Vec<T>,
    pub alpha: Option<T>,
    pub mu_bar: T,
    pub solver: Option<SolverStats>,
}

impl<T: Real> StabilityCertificate<T> {
    pub fn w_inv(&self) -> Result<SymMatrix<T>, MatrixError> {
        Ok(SymMatrix::symmetrize(&self.w.inverse()?))
    }

    pub fn s_matrix(&self) -> Mat<T> {
        Mat::from_diag(&self.s)
    }

    /// Auxiliary sector gain `L = [Z W⁻¹, J]`.
    pub fn l_matrix(&self) -> Result<Mat<T>, MatrixError> {
        let zw = self.z.matmul(self.w_inv()?.as_mat())?;
        Mat::from_blocks(&[vec![Some(&zw), Some(&self.j)]])
    }
}

/// Region-of-attraction estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct BasinEstimate<T: Real> {
    /// `P̂(τ*) = W⁻¹ ⊕ R(τ*)` with `τ* = T₂`.
    pub p_hat_star: SymMatrix<T>,
    pub mu_bar: T,
    /// `N = W⁻¹ + ⊕ Rᵢ e^{σᵢT₂⁽ⁱ⁾}`; `{x_p : x_pᵀ N x_p ≤ μ̄}` is the plant-state slice.
    pub n: SymMatrix<T>,
    pub volume_proxy: T,
}

/// Exponential decay constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayCertificate<T> {
    pub c1: T,
    pub c2: T,
    pub c3: T,
    /// Decay rate of `V` along flows, `c₃/c₂`.
    pub v_rate: T,
    /// Decay rate of `|x̄|` along flows, `c₃/(2c₂)`.
    pub lambda_t: T,
    pub tau_d: T,
    pub lambda: T,
    pub vartheta: T,
    pub kappa: T,
}

/// Outcome of one grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridRecord {
    pub sigma: Vec<f64>,
    pub alpha: Option<f64>,
    pub status: PointStatus,
    pub objective: Option<f64>,
    pub mu_bar: Option<f64>,
    pub iterations: usize,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointStatus {
    Optimal,
    Feasible,
    Infeasible,
    NumericalFailure,
    /// Solver succeeded but the recovered certificate failed verification.
    Rejected,
}

impl PointStatus {
    pub fn is_success(self) -> bool {
        matches!(self, Self::Optimal | Self::Feasible)
    }
}

/// Best certificate over a grid plus the per-point log.
#[derive(Debug, Clone)]
pub struct SearchResult<T: Real> {
    pub certificate: StabilityCertificate<T>,
    pub basin: BasinEstimate<T>,
    pub log: Vec<GridRecord>,
}

#[cfg(test)]
mod tests;
