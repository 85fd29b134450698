use super::{ipm, LmiConstraint, SdpError, SdpOptions, SdpProblem, SdpStatus, VarBound};
use crate::scalar::Real;
use crate::symmat::SymMatrix;
use crate::tolerances::STRICT_TOL;

const Y_BOX: f64 = 1e6;

#[derive(Debug, Clone)]
pub enum PhaseOneOutcome<T: Real> {
    /// Every constraint block satisfies `λ_min(F(y)) ≥ margin > 0`.
    StrictlyFeasible { y: Vec<T>, margin: T },
    /// The best achievable margin is not positive. When the margin problem
    /// itself came back infeasible the dual certificate is attached.
    NotStrictlyFeasible {
        margin: T,
        y: Vec<T>,
        certificate: Option<Vec<SymMatrix<T>>>,
    },
}

impl<T: Real> PhaseOneOutcome<T> {
    pub fn is_strictly_feasible(&self) -> bool {
        matches!(self, Self::StrictlyFeasible { .. })
    }

    pub fn margin(&self) -> T {
        match self {
            Self::StrictlyFeasible { margin, .. } | Self::NotStrictlyFeasible { margin, .. } => *margin,
        }
    }
}

/// Maximum-margin interior search with default tolerances.
pub fn phase1<T: Real>(problem: &SdpProblem<T>) -> Result<PhaseOneOutcome<T>, SdpError> {
    phase1_with(problem, &SdpOptions::default(), T::lit(STRICT_TOL))
}

/// Solves `max t s.t. F(y) - t·I ⪰ 0` (bound blocks included) with `t ≤ 1`
/// and free variables boxed to `±1e6`. A margin above `strict_tol` is
/// reported as strict feasibility.
pub fn phase1_with<T: Real>(
    problem: &SdpProblem<T>,
    opts: &SdpOptions<T>,
    strict_tol: T,
) -> Result<PhaseOneOutcome<T>, SdpError> {
    let nv = problem.nvars();
    let t_idx = nv;
    let mut constraints = Vec::new();
    for c in problem.expanded_constraints() {
        let d = c.dim();
        constraints.push(c.with_term(t_idx, SymMatrix::identity(d).scale(-T::one())));
    }
    let one = SymMatrix::from_diag(&[T::one()]);
    constraints.push(LmiConstraint::new(one.clone()).with_term(t_idx, one.scale(-T::one())));
    let mut objective = vec![T::zero(); nv + 1];
    objective[t_idx] = -T::one();
    let bound = T::lit(Y_BOX);
    let mut bounds: Vec<VarBound<T>> = problem
        .var_bounds()
        .iter()
        .map(|b| VarBound {
            lower: Some(b.lower.unwrap_or(-bound)),
            upper: Some(b.upper.unwrap_or(bound)),
        })
        .collect();
    bounds.push(VarBound::default());
    let aux = SdpProblem::new(nv + 1, objective, constraints)?.with_bounds(bounds)?;
    let sol = ipm::solve(&aux, opts)?;
    match sol.status {
        SdpStatus::Optimal | SdpStatus::Feasible => {
            let margin = sol.y[t_idx];
            let y = sol.y[..nv].to_vec();
            if margin > strict_tol {
                Ok(PhaseOneOutcome::StrictlyFeasible { y, margin })
            } else {
                Ok(PhaseOneOutcome::NotStrictlyFeasible {
                    margin,
                    y,
                    certificate: None,
                })
            }
        }
        SdpStatus::Infeasible => Ok(PhaseOneOutcome::NotStrictlyFeasible {
            margin: T::neg_infinity(),
            y: sol.y[..nv].to_vec(),
            certificate: sol.infeasibility_certificate,
        }),
        SdpStatus::NumericalFailure => Err(SdpError::NumericalFailure(sol.message)),
    }
}
