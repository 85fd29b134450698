//! Simulator for the sampled-data closed loop with saturated input.
//!
//! The state is `x = (x_p, η̃, τ)`: plant state, controller error
//! `η̃ = x_p − η`, and one countdown timer per sampling channel. Flows follow
//!
//! ```text
//! ẋ̄ = A_cl x̄ + B_cl dz(K_cl x̄),   τ̇ = −1
//! ```
//!
//! and a channel whose timer reaches zero jumps: its block of `η̃` is
//! zeroed and its timer is reset by the [`SamplingSchedule`].

mod monitor;
mod schedule;
mod simulate;

pub use monitor::{monitor, MonitorReport, Violation, ViolationKind};
pub use schedule::{SamplingSchedule, ScheduleMode};
pub use simulate::{simulate, DomainInterval, HybridTrajectory, Sample, SimOptions, SimStatus};

use thiserror::Error;

use crate::certify::StabilityCertificate;
use crate::lmi::{theta, PlantModel};
use crate::scalar::Real;
use crate::symmat::{Mat, MatrixError};
use crate::tolerances::TIMER_TOL;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct HybridState<T> {
    pub xp: Vec<T>,
    pub eta_tilde: Vec<T>,
    pub tau: Vec<T>,
}

impl<T: Real> HybridState<T> {
    pub fn new(xp: Vec<T>, eta_tilde: Vec<T>, tau: Vec<T>) -> Self {
        Self { xp, eta_tilde, tau }
    }

    /// `x̄ = (x_p, η̃)`.
    pub fn xbar(&self) -> Vec<T> {
        self.xp.iter().chain(&self.eta_tilde).copied().collect()
    }

    /// Distance to the attractor, `|(x_p, η̃)|`.
    pub fn norm(&self) -> T {
        self.xp
            .iter()
            .chain(&self.eta_tilde)
            .map(|v| *v * *v)
            .sum::<T>()
            .sqrt()
    }

    fn check(&self, plant: &PlantModel<T>) -> Result<(), SimError> {
        let (n, q) = (plant.n(), plant.q());
        if self.xp.len() != n || self.eta_tilde.len() != n || self.tau.len() != q {
            return Err(SimError::Argument(format!(
                "state sizes ({}, {}, {}) do not match n = {n}, q = {q}",
                self.xp.len(),
                self.eta_tilde.len(),
                self.tau.len()
            )));
        }
        Ok(())
    }
}

pub fn saturate<T: Real>(v: &[T], ubar: &[T]) -> Vec<T> {
    v.iter().zip(ubar).map(|(&x, &u)| x.max(-u).min(u)).collect()
}

/// `dz(v) = sat(v) − v`.
pub fn deadzone<T: Real>(v: &[T], ubar: &[T]) -> Vec<T> {
    v.iter().zip(saturate(v, ubar)).map(|(&x, s)| s - x).collect()
}

/// Closed-loop matrices `A_cl = [[A+BK, −BK], [0, A]]`, `B_cl = [B; 0]`,
/// `K_cl = [K, −K]`.
#[derive(Debug, Clone)]
pub(crate) struct ClosedLoop<T: Real> {
    a_cl: Mat<T>,
    b_cl: Mat<T>,
    k_cl: Mat<T>,
    ubar: Vec<T>,
}

impl<T: Real> ClosedLoop<T> {
    pub(crate) fn new(plant: &PlantModel<T>, k: &Mat<T>) -> Result<Self, SimError> {
        let (n, m) = (plant.n(), plant.m());
        if k.shape() != (m, n) {
            return Err(SimError::Argument(format!("gain is {:?}, expected {:?}", k.shape(), (m, n))));
        }
        let bk = plant.b().matmul(k)?;
        let top_left = plant.a() + &bk;
        let a_cl = Mat::from_blocks(&[
            vec![Some(&top_left), Some(&(-&bk))],
            vec![None, Some(plant.a())],
        ])?;
        let b_cl = Mat::from_blocks(&[vec![Some(plant.b())], vec![Some(&Mat::zeros(n, m))]])?;
        let k_cl = Mat::from_blocks(&[vec![Some(k), Some(&(-k))]])?;
        Ok(Self {
            a_cl,
            b_cl,
            k_cl,
            ubar: plant.ubar().to_vec(),
        })
    }

    pub(crate) fn input(&self, xbar: &[T]) -> Vec<T> {
        saturate(&self.k_cl.matvec(xbar).expect("sized"), &self.ubar)
    }

    pub(crate) fn field(&self, xbar: &[T]) -> Vec<T> {
        let v = self.k_cl.matvec(xbar).expect("sized");
        let dz = deadzone(&v, &self.ubar);
        let lin = self.a_cl.matvec(xbar).expect("sized");
        let sat = self.b_cl.matvec(&dz).expect("sized");
        lin.iter().zip(&sat).map(|(&a, &b)| a + b).collect()
    }
}

/// Right-hand side of the flow: `(ẋ̄, τ̇)`.
pub fn flow_field<T: Real>(
    state: &HybridState<T>,
    plant: &PlantModel<T>,
    k: &Mat<T>,
) -> Result<(Vec<T>, Vec<T>), SimError> {
    state.check(plant)?;
    for (i, (&t, &t2)) in state.tau.iter().zip(plant.t2()).enumerate() {
        if !(t >= T::zero() && t <= t2) {
            return Err(SimError::Contract(format!("tau[{i}] = {t} outside [0, {t2}]")));
        }
    }
    let cl = ClosedLoop::new(plant, k)?;
    Ok((cl.field(&state.xbar()), vec![-T::one(); plant.q()]))
}

/// Applies the jump of every channel whose timer is at zero, one channel at
/// a time in ascending order. Returns the post-jump state of each.
pub fn jump<T: Real>(
    state: &HybridState<T>,
    plant: &PlantModel<T>,
    schedule: &mut SamplingSchedule<T>,
    t: T,
) -> Result<Vec<HybridState<T>>, SimError> {
    state.check(plant)?;
    let tol = T::lit(TIMER_TOL);
    let ranges = plant.partition().ranges();
    let mut out = Vec::new();
    let mut cur = state.clone();
    for (i, range) in ranges.iter().enumerate() {
        if cur.tau[i] <= tol {
            for r in range.clone() {
                cur.eta_tilde[r] = T::zero();
            }
            cur.tau[i] = schedule.next(i, t);
            out.push(cur.clone());
        }
    }
    if out.is_empty() {
        return Err(SimError::Contract("no timer at zero".into()));
    }
    Ok(out)
}

/// `V = x_pᵀW⁻¹x_p + Σᵢ e^{σᵢτᵢ} η̃⁽ⁱ⁾ᵀRᵢη̃⁽ⁱ⁾`.
pub fn lyapunov_eval<T: Real>(
    state: &HybridState<T>,
    cert: &StabilityCertificate<T>,
    plant: &PlantModel<T>,
) -> Result<T, SimError> {
    let w_inv = cert.w_inv()?;
    lyapunov_with(state, &w_inv, cert, plant)
}

pub(crate) fn lyapunov_with<T: Real>(
    state: &HybridState<T>,
    w_inv: &crate::symmat::SymMatrix<T>,
    cert: &StabilityCertificate<T>,
    plant: &PlantModel<T>,
) -> Result<T, SimError> {
    state.check(plant)?;
    let mut v = w_inv.quad_form(&state.xp)?;
    let th = theta(&cert.sigma, &state.tau);
    for (i, range) in plant.partition().ranges().into_iter().enumerate() {
        v += th[i] * cert.r[i].quad_form(&state.eta_tilde[range])?;
    }
    Ok(v)
}

#[cfg(test)]
mod tests;
