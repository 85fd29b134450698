use serde::{Deserialize, Serialize};

use super::{lyapunov_with, HybridTrajectory, SimError};
use crate::certify::{decay_certificate, DecayCertificate, StabilityCertificate};
use crate::lmi::PlantModel;
use crate::scalar::Real;

/// Relative slack on the flow decrease `V̇ ≤ −(c₃/c₂)V`.
pub const FLOW_SLACK: f64 = 1e-6;
/// Relative slack on `V(g) ≤ V(x)` at jumps.
pub const JUMP_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    /// `V` increased across a jump.
    JumpIncrease,
    /// `V` decreased slower than `e^{−(c₃/c₂)t}` along an in-region flow step.
    FlowDecay,
    /// `|x̄(t,j)| > κ e^{−λ(t+j)} |x̄(0,0)|`.
    Envelope,
    /// `τ_D j > t + q τ_D`.
    DwellTime,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub t: f64,
    pub j: usize,
    /// Amount by which the inequality is exceeded.
    pub excess: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonitorReport<T> {
    /// `V(x(0,0)) ≤ μ̄`; decay and envelope checks only apply when set.
    pub in_region_start: bool,
    pub jumps_checked: usize,
    pub flow_steps_checked: usize,
    pub samples_checked: usize,
    /// `None` when the certificate is too marginal for decay constants.
    pub decay: Option<DecayCertificate<T>>,
    pub violations: Vec<Violation>,
}

impl<T: Real> MonitorReport<T> {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn count(&self, kind: ViolationKind) -> usize {
        self.violations.iter().filter(|v| v.kind == kind).count()
    }

    /// Violations other than the dwell-time bound, which is a property of
    /// the schedule rather than of the certificate.
    pub fn lyapunov_violations(&self) -> usize {
        self.violations
            .iter()
            .filter(|v| v.kind != ViolationKind::DwellTime)
            .count()
    }
}

/// Checks a trajectory against the Lyapunov certificate.
pub fn monitor<T: Real>(
    traj: &HybridTrajectory<T>,
    plant: &PlantModel<T>,
    cert: &StabilityCertificate<T>,
) -> Result<MonitorReport<T>, SimError> {
    let w_inv = cert.w_inv()?;
    let vs: Vec<T> = traj
        .samples
        .iter()
        .map(|s| lyapunov_with(&s.state, &w_inv, cert, plant))
        .collect::<Result<_, _>>()?;
    let decay = decay_certificate(plant, cert).ok();
    let first = &traj.samples[0];
    let in_region_start = vs[0] <= cert.mu_bar;
    let norm0 = first.state.norm();
    let tau_d = plant.tau_d();
    let q = T::of_usize(plant.q());
    let flow_slack = T::lit(FLOW_SLACK);
    let jump_slack = T::lit(JUMP_SLACK);
    let mut violations = Vec::new();
    let mut jumps_checked = 0;
    let mut flow_steps_checked = 0;
    let mut push = |kind, t: T, j, excess: T| {
        violations.push(Violation {
            kind,
            t: t.to_f64_lossy(),
            j,
            excess: excess.to_f64_lossy(),
        })
    };

    for (idx, s) in traj.samples.iter().enumerate() {
        let jt = tau_d * T::of_usize(s.j);
        let bound = s.t + q * tau_d;
        if jt > bound * (T::one() + T::lit(1e-12)) {
            push(ViolationKind::DwellTime, s.t, s.j, jt - bound);
        }
        if in_region_start {
            if let Some(d) = &decay {
                let env = d.kappa * (-d.lambda * (s.t + T::of_usize(s.j))).exp() * norm0;
                let tol = env * T::lit(1e-9) + T::lit(1e-12);
                let nx = s.state.norm();
                if nx > env + tol {
                    push(ViolationKind::Envelope, s.t, s.j, nx - env);
                }
            }
        }
        if idx == 0 {
            continue;
        }
        let prev = &traj.samples[idx - 1];
        let (v0, v1) = (vs[idx - 1], vs[idx]);
        if s.j == prev.j + 1 {
            jumps_checked += 1;
            let limit = v0 + jump_slack * (T::one() + v0);
            if v1 > limit {
                push(ViolationKind::JumpIncrease, s.t, s.j, v1 - v0);
            }
        } else if s.j == prev.j && v0 <= cert.mu_bar {
            if let Some(d) = &decay {
                flow_steps_checked += 1;
                let h = s.t - prev.t;
                let limit = v0 * (((flow_slack - d.v_rate) * h).exp() + T::lit(1e-12));
                if v1 > limit {
                    push(ViolationKind::FlowDecay, s.t, s.j, v1 - limit);
                }
            }
        }
    }
    Ok(MonitorReport {
        in_region_start,
        jumps_checked,
        flow_steps_checked,
        samples_checked: traj.samples.len(),
        decay,
        violations,
    })
}
