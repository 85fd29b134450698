use serde::{Deserialize, Serialize};

use super::{jump, lyapunov_with, ClosedLoop, HybridState, SamplingSchedule, SimError};
use crate::certify::StabilityCertificate;
use crate::lmi::PlantModel;
use crate::scalar::Real;
use crate::symmat::Mat;
use crate::tolerances::{DEFAULT_H_MAX, DIVERGENCE_GUARD, TIMER_TOL};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimOptions<T> {
    pub t_max: T,
    pub j_max: usize,
    pub h_max: T,
}

impl<T: Real> SimOptions<T> {
    pub fn horizon(t_max: T) -> Self {
        Self {
            t_max,
            ..Self::default()
        }
    }
}

impl<T: Real> Default for SimOptions<T> {
    fn default() -> Self {
        Self {
            t_max: T::lit(10.0),
            j_max: 1_000_000,
            h_max: T::lit(DEFAULT_H_MAX),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimStatus {
    /// Reached `t_max`.
    Completed,
    /// Reached `j_max`.
    JumpLimit,
    /// `|x̄|` exceeded the overflow guard.
    Diverged,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample<T> {
    pub t: T,
    pub j: usize,
    pub state: HybridState<T>,
    /// Lyapunov value; `NaN` when simulated without a certificate.
    pub v: T,
    /// Applied input `sat(K_cl x̄)`.
    pub u: Vec<T>,
}

/// `[t_start, t_end] × {j}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DomainInterval<T> {
    pub t_start: T,
    pub t_end: T,
    pub j: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HybridTrajectory<T> {
    pub samples: Vec<Sample<T>>,
    pub domain: Vec<DomainInterval<T>>,
    pub status: SimStatus,
}

impl<T: Real> HybridTrajectory<T> {
    pub fn last(&self) -> &Sample<T> {
        self.samples.last().expect("trajectory has an initial sample")
    }

    pub fn jumps(&self) -> usize {
        self.last().j
    }

    /// First time at which `|x_p| ≤ radius`, if any.
    pub fn first_entry(&self, radius: T) -> Option<T> {
        self.samples
            .iter()
            .find(|s| s.state.xp.iter().map(|v| *v * *v).sum::<T>().sqrt() <= radius)
            .map(|s| s.t)
    }
}

fn rk4<T: Real>(cl: &ClosedLoop<T>, x: &[T], h: T) -> Vec<T> {
    let axpy = |a: &[T], s: T, b: &[T]| -> Vec<T> { a.iter().zip(b).map(|(&p, &q)| p + s * q).collect() };
    let half = h / T::two();
    let k1 = cl.field(x);
    let k2 = cl.field(&axpy(x, half, &k1));
    let k3 = cl.field(&axpy(x, half, &k2));
    let k4 = cl.field(&axpy(x, h, &k3));
    let six = T::lit(6.0);
    (0..x.len())
        .map(|i| x[i] + h / six * (k1[i] + T::two() * (k2[i] + k3[i]) + k4[i]))
        .collect()
}

struct Recorder<'a, T: Real> {
    cl: &'a ClosedLoop<T>,
    plant: &'a PlantModel<T>,
    lyap: Option<(crate::symmat::SymMatrix<T>, &'a StabilityCertificate<T>)>,
    samples: Vec<Sample<T>>,
}

impl<T: Real> Recorder<'_, T> {
    fn push(&mut self, t: T, j: usize, state: HybridState<T>) -> Result<(), SimError> {
        let xbar = state.xbar();
        let v = match &self.lyap {
            Some((w_inv, cert)) => lyapunov_with(&state, w_inv, cert, self.plant)?,
            None => T::nan(),
        };
        let u = self.cl.input(&xbar);
        self.samples.push(Sample { t, j, state, v, u });
        Ok(())
    }
}

/// Simulates the closed loop from `x0` until `t_max` or `j_max`.
///
/// Flows are integrated with fixed-step RK4 on `x̄`; timers are advanced in
/// closed form, and each flow segment ends exactly at the next timer
/// expiry. When a certificate is given, `V` is recorded at every sample.
pub fn simulate<T: Real>(
    x0: &HybridState<T>,
    plant: &PlantModel<T>,
    k: &Mat<T>,
    schedule: &mut SamplingSchedule<T>,
    opts: &SimOptions<T>,
    cert: Option<&StabilityCertificate<T>>,
) -> Result<HybridTrajectory<T>, SimError> {
    x0.check(plant)?;
    for (i, (&t, &t2)) in x0.tau.iter().zip(plant.t2()).enumerate() {
        if !(t >= T::zero() && t <= t2) {
            return Err(SimError::Contract(format!("tau[{i}] = {t} outside [0, {t2}]")));
        }
    }
    if !(opts.h_max > T::zero()) || !(opts.t_max >= T::zero()) {
        return Err(SimError::Argument("h_max must be positive and t_max nonnegative".into()));
    }
    if let Some(c) = cert {
        if c.r.len() != plant.q() || c.w.dim() != plant.n() {
            return Err(SimError::Argument("certificate does not match the plant".into()));
        }
    }
    let cl = ClosedLoop::new(plant, k)?;
    let lyap = match cert {
        Some(c) => Some((c.w_inv()?, c)),
        None => None,
    };
    let mut rec = Recorder {
        cl: &cl,
        plant,
        lyap,
        samples: Vec::new(),
    };
    let tol = T::lit(TIMER_TOL);
    let guard = T::lit(DIVERGENCE_GUARD);
    let n = plant.n();

    let mut t = T::zero();
    let mut j = 0usize;
    let mut state = x0.clone();
    let mut domain = Vec::new();
    let mut t_start = t;
    rec.push(t, j, state.clone())?;

    let status = 'outer: loop {
        if state.tau.iter().any(|&ti| ti <= tol) {
            if j >= opts.j_max {
                break SimStatus::JumpLimit;
            }
            domain.push(DomainInterval { t_start, t_end: t, j });
            let posts = jump(&state, plant, schedule, t)?;
            let count = posts.len();
            for (idx, post) in posts.into_iter().enumerate() {
                j += 1;
                state = post;
                rec.push(t, j, state.clone())?;
                if idx + 1 < count {
                    domain.push(DomainInterval { t_start: t, t_end: t, j });
                }
                if j >= opts.j_max && idx + 1 < count {
                    t_start = t;
                    break 'outer SimStatus::JumpLimit;
                }
            }
            t_start = t;
            continue;
        }
        if t >= opts.t_max {
            break SimStatus::Completed;
        }

        let t0 = t;
        let tau0 = state.tau.clone();
        let to_event = tau0.iter().copied().fold(T::infinity(), T::min);
        let event = t0 + to_event;
        let t_end = event.min(opts.t_max);
        let span = t_end - t0;
        let steps = (span / opts.h_max).ceil().to_usize().unwrap_or(1).max(1);
        let h = span / T::of_usize(steps);
        let mut x = state.xbar();
        for s in 1..=steps {
            x = rk4(&cl, &x, h);
            let tk = if s == steps { t_end } else { t0 + h * T::of_usize(s) };
            let mut tau: Vec<T> = tau0.iter().map(|&ti| ti - (tk - t0)).collect();
            if s == steps && t_end == event {
                for (ti, &t0i) in tau.iter_mut().zip(&tau0) {
                    if t0i == to_event {
                        *ti = T::zero();
                    }
                }
            }
            for ti in tau.iter_mut() {
                *ti = ti.max(T::zero());
            }
            state = HybridState::new(x[..n].to_vec(), x[n..].to_vec(), tau);
            rec.push(tk, j, state.clone())?;
            let norm = state.norm();
            if !norm.is_finite() || norm > guard {
                t = tk;
                break 'outer SimStatus::Diverged;
            }
        }
        t = t_end;
    };
    domain.push(DomainInterval { t_start, t_end: t, j });
    Ok(HybridTrajectory {
        samples: rec.samples,
        domain,
        status,
    })
}
