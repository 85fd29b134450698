//! Small dense semidefinite-programming solver.
//!
//! Problems are posed in linear-matrix-inequality form over scalar decision
//! variables `y`:
//!
//! ```text
//! minimize    cᵀy
//! subject to  F₀ʲ + Σₖ yₖ Fₖʲ ⪰ 0     for every constraint block j
//!             lₖ ≤ yₖ ≤ uₖ            (optional)
//! ```
//!
//! and solved by a primal-dual path-following interior-point method working
//! on the pair formed with the conic dual
//!
//! ```text
//! maximize    -Σⱼ ⟨F₀ʲ, Xʲ⟩
//! subject to  Σⱼ ⟨Fₖʲ, Xʲ⟩ = cₖ,  Xʲ ⪰ 0.
//! ```

mod ipm;
mod phase1;
mod triplet;

pub use ipm::solve;
pub use phase1::{phase1, phase1_with, PhaseOneOutcome};
pub use triplet::{read_triplets, write_triplets};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Real;
use crate::symmat::{Mat, MatrixError, SymMatrix};
use crate::tolerances::{SDP_FEAS_TOL, SDP_GAP_TOL, SDP_MAX_ITER};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SdpError {
    #[error("invalid problem: {0}")]
    Argument(String),
    #[error("constraint {constraint}: {source}")]
    Dimension {
        constraint: usize,
        source: MatrixError,
    },
    #[error("solver breakdown: {0}")]
    NumericalFailure(String),
    #[error("malformed triplet file at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// One affine matrix inequality `F₀ + Σ yₖ Fₖ ⪰ 0`.
#[derive(Debug, Clone)]
pub struct LmiConstraint<T: Real> {
    pub constant: SymMatrix<T>,
    /// Sparse list of `(variable index, coefficient matrix)`.
    pub terms: Vec<(usize, SymMatrix<T>)>,
}

impl<T: Real> LmiConstraint<T> {
    pub fn new(constant: SymMatrix<T>) -> Self {
        Self {
            constant,
            terms: Vec::new(),
        }
    }

    pub fn with_term(mut self, var: usize, coeff: SymMatrix<T>) -> Self {
        self.terms.push((var, coeff));
        self
    }

    pub fn dim(&self) -> usize {
        self.constant.dim()
    }

    pub fn evaluate(&self, y: &[T]) -> SymMatrix<T> {
        let mut acc = self.constant.as_mat().clone();
        for (k, f) in &self.terms {
            if y[*k] != T::zero() {
                acc += &f.scale(y[*k]);
            }
        }
        SymMatrix::symmetrize(&acc)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct VarBound<T> {
    pub lower: Option<T>,
    pub upper: Option<T>,
}

/// Standard-form semidefinite program over scalar variables.
#[derive(Debug, Clone)]
pub struct SdpProblem<T: Real> {
    nvars: usize,
    objective: Vec<T>,
    constraints: Vec<LmiConstraint<T>>,
    var_bounds: Vec<VarBound<T>>,
}

impl<T: Real> SdpProblem<T> {
    pub fn new(
        nvars: usize,
        objective: Vec<T>,
        constraints: Vec<LmiConstraint<T>>,
    ) -> Result<Self, SdpError> {
        let p = Self {
            nvars,
            objective,
            constraints,
            var_bounds: vec![VarBound::default(); nvars],
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_bounds(mut self, bounds: Vec<VarBound<T>>) -> Result<Self, SdpError> {
        if bounds.len() != self.nvars {
            return Err(SdpError::Argument(format!(
                "{} bounds for {} variables",
                bounds.len(),
                self.nvars
            )));
        }
        for (k, b) in bounds.iter().enumerate() {
            if let (Some(l), Some(u)) = (b.lower, b.upper) {
                if l > u {
                    return Err(SdpError::Argument(format!("variable {k}: lower bound above upper")));
                }
            }
        }
        self.var_bounds = bounds;
        Ok(self)
    }

    fn validate(&self) -> Result<(), SdpError> {
        if self.objective.len() != self.nvars {
            return Err(SdpError::Argument(format!(
                "objective has {} entries for {} variables",
                self.objective.len(),
                self.nvars
            )));
        }
        let mut used = vec![false; self.nvars];
        for (j, c) in self.constraints.iter().enumerate() {
            let d = c.dim();
            for (k, f) in &c.terms {
                if *k >= self.nvars {
                    return Err(SdpError::Argument(format!(
                        "constraint {j} references variable {k} of {}",
                        self.nvars
                    )));
                }
                if f.dim() != d {
                    return Err(SdpError::Dimension {
                        constraint: j,
                        source: MatrixError::DimensionMismatch {
                            op: "lmi term",
                            left: (d, d),
                            right: (f.dim(), f.dim()),
                        },
                    });
                }
                used[*k] = true;
            }
        }
        if let Some(k) = used.iter().position(|u| !u) {
            return Err(SdpError::Argument(format!(
                "variable {k} appears in no constraint"
            )));
        }
        Ok(())
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn objective(&self) -> &[T] {
        &self.objective
    }

    pub fn constraints(&self) -> &[LmiConstraint<T>] {
        &self.constraints
    }

    pub fn var_bounds(&self) -> &[VarBound<T>] {
        &self.var_bounds
    }

    pub fn objective_value(&self, y: &[T]) -> T {
        self.objective.iter().zip(y).map(|(&c, &v)| c * v).sum()
    }

    /// Constraint blocks with variable bounds appended as `1×1` blocks.
    pub(crate) fn expanded_constraints(&self) -> Vec<LmiConstraint<T>> {
        let mut out = self.constraints.clone();
        for (k, b) in self.var_bounds.iter().enumerate() {
            if let Some(l) = b.lower {
                out.push(
                    LmiConstraint::new(SymMatrix::from_diag(&[-l]))
                        .with_term(k, SymMatrix::from_diag(&[T::one()])),
                );
            }
            if let Some(u) = b.upper {
                out.push(
                    LmiConstraint::new(SymMatrix::from_diag(&[u]))
                        .with_term(k, SymMatrix::from_diag(&[-T::one()])),
                );
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SdpOptions<T> {
    pub feas_tol: T,
    pub gap_tol: T,
    pub max_iter: usize,
}

impl<T: Real> Default for SdpOptions<T> {
    fn default() -> Self {
        Self {
            feas_tol: T::lit(SDP_FEAS_TOL),
            gap_tol: T::lit(SDP_GAP_TOL),
            max_iter: SDP_MAX_ITER,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SdpStatus {
    Optimal,
    Feasible,
    Infeasible,
    NumericalFailure,
}

/// Per-iteration solver record.
#[derive(Debug, Clone, Copy)]
pub struct IterationLog<T> {
    pub primal_objective: T,
    pub dual_objective: T,
    /// `‖c - A(X)‖ / (1 + ‖c‖)`.
    pub equality_residual: T,
    /// `‖F(y) - S‖ / (1 + ‖F₀‖)`.
    pub slack_residual: T,
    pub mu: T,
    pub step_primal: T,
    pub step_dual: T,
}

#[derive(Debug, Clone)]
pub struct SdpSolution<T: Real> {
    pub status: SdpStatus,
    pub y: Vec<T>,
    pub objective_value: T,
    pub dual_objective: T,
    /// `λ_min(F(y))` per original constraint block.
    pub min_eigs: Vec<T>,
    pub iterations: usize,
    /// Relative duality gap `|cᵀy + ⟨F₀,X⟩| / (1 + |cᵀy| + |⟨F₀,X⟩|)`.
    pub duality_gap: T,
    /// Dual matrices, one per original constraint block.
    pub dual: Vec<SymMatrix<T>>,
    /// When infeasible: `X ⪰ 0` with `⟨Fₖ,X⟩ ≈ 0` for all `k` and
    /// `Σ⟨F₀,X⟩ = -1`, one matrix per original constraint block.
    pub infeasibility_certificate: Option<Vec<SymMatrix<T>>>,
    pub history: Vec<IterationLog<T>>,
    pub message: String,
}

impl<T: Real> SdpSolution<T> {
    pub fn is_success(&self) -> bool {
        matches!(self.status, SdpStatus::Optimal | SdpStatus::Feasible)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityReport<T> {
    pub min_eigs: Vec<T>,
    pub passed: Vec<bool>,
    pub all_passed: bool,
}

/// Evaluates every constraint block at `y` and compares its smallest
/// eigenvalue against `-tol`. Variable bounds are checked as well and
/// reported after the matrix blocks.
pub fn check_feasibility<T: Real>(
    problem: &SdpProblem<T>,
    y: &[T],
    tol: T,
) -> Result<FeasibilityReport<T>, SdpError> {
    if y.len() != problem.nvars {
        return Err(SdpError::Argument(format!(
            "point has {} entries for {} variables",
            y.len(),
            problem.nvars
        )));
    }
    let min_eigs: Vec<T> = problem
        .expanded_constraints()
        .iter()
        .map(|c| c.evaluate(y).min_eigenvalue())
        .collect();
    let passed: Vec<bool> = min_eigs.iter().map(|&l| l >= -tol).collect();
    let all_passed = passed.iter().all(|&p| p);
    Ok(FeasibilityReport {
        min_eigs,
        passed,
        all_passed,
    })
}

/// Solves with default options.
pub fn solve_default<T: Real>(problem: &SdpProblem<T>) -> Result<SdpSolution<T>, SdpError> {
    solve(problem, &SdpOptions::default())
}

/// Basis matrix `E_ij + E_ji` (or `E_ii`) of the symmetric `n×n` space,
/// used when a symmetric matrix variable is flattened to scalars.
pub fn sym_basis<T: Real>(n: usize, i: usize, j: usize) -> SymMatrix<T> {
    let mut m = Mat::zeros(n, n);
    m[(i, j)] = T::one();
    m[(j, i)] = T::one();
    SymMatrix::symmetrize(&m)
}
