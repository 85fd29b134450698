use serde::{Deserialize, Serialize};

use super::{CertifyError, Settings, StabilityCertificate};
use crate::lmi::{
    analysis_matrix, build_analysis_lmi, build_inclusion_lmi, build_positivity, design_matrix,
    enumerate_vertices, inclusion_matrix, LmiVariables, Mode, PlantModel, VarLayout,
};
use crate::scalar::Real;
use crate::sdp::{phase1_with, LmiConstraint, PhaseOneOutcome, SdpProblem};
use crate::symmat::{sym_eig, Mat, SymMatrix};
use crate::tolerances::{DEFINITE_MARGIN, STRICT_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    /// `λ_min > 1e-9`.
    PositiveDefinite,
    /// `λ_min ≥ -tol`.
    PositiveSemidefinite,
    /// `λ_max < tol`.
    NegativeDefinite,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockCheck {
    pub name: String,
    pub kind: CheckKind,
    /// `λ_min` for the positive kinds, `λ_max` for negative definiteness.
    pub value: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub tol: f64,
    pub checks: Vec<BlockCheck>,
    pub passed: bool,
}

impl VerificationReport {
    pub fn failures(&self) -> Vec<String> {
        self.checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.name.clone())
            .collect()
    }

    pub fn check(&self, name: &str) -> Option<&BlockCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Decision variables of a certificate, for evaluating the LMI blocks directly.
pub fn cert_vars<T: Real>(plant: &PlantModel<T>, cert: &StabilityCertificate<T>) -> LmiVariables<T> {
    let (n, m) = (plant.n(), plant.m());
    LmiVariables {
        w: cert.w.clone(),
        y: cert.y.clone().unwrap_or_else(|| Mat::zeros(m, n)),
        r: cert.r.clone(),
        s: cert.s.clone(),
        z: cert.z.clone(),
        j: cert.j.clone(),
        iota: T::one() / cert.mu_bar,
        mw: cert.mw.clone().unwrap_or_else(|| SymMatrix::zeros(n)),
        sigma: cert.sigma.clone(),
        alpha: cert.alpha,
    }
}

fn judge<T: Real>(name: String, kind: CheckKind, m: Result<SymMatrix<T>, String>, tol: f64) -> BlockCheck {
    let value = match &m {
        Ok(m) if m.as_slice().iter().all(|v| v.is_finite()) => {
            let e = sym_eig(m);
            match kind {
                CheckKind::NegativeDefinite => e.max().to_f64_lossy(),
                _ => e.min().to_f64_lossy(),
            }
        }
        _ => f64::NAN,
    };
    let passed = match kind {
        CheckKind::PositiveDefinite => value > DEFINITE_MARGIN,
        CheckKind::PositiveSemidefinite => value >= -tol,
        CheckKind::NegativeDefinite => value < tol,
    };
    BlockCheck {
        name,
        kind,
        value,
        passed,
    }
}

/// Evaluates every matrix inequality of the certificate: positivity of
/// `W`, `Rᵢ`, `S`, `μ̄`; the `m` inclusion blocks; the analysis block at all
/// `2^q` vertices; and, for design certificates, the design block at all
/// vertices. Never fails; malformed data shows up as failing checks.
pub fn verify_certificate<T: Real>(
    plant: &PlantModel<T>,
    cert: &StabilityCertificate<T>,
    tol: T,
) -> VerificationReport {
    let tol = tol.to_f64_lossy();
    let mut checks = Vec::new();
    let pd = CheckKind::PositiveDefinite;
    checks.push(judge("W".into(), pd, Ok(cert.w.clone()), tol));
    for (i, r) in cert.r.iter().enumerate() {
        checks.push(judge(format!("R{}", i + 1), pd, Ok(r.clone()), tol));
    }
    checks.push(judge("S".into(), pd, Ok(SymMatrix::from_diag(&cert.s)), tol));
    checks.push(judge("mu_bar".into(), pd, Ok(SymMatrix::from_diag(&[cert.mu_bar])), tol));
    let shape_ok = cert.r.len() == plant.q()
        && cert.s.len() == plant.m()
        && cert.sigma.len() == plant.q()
        && cert.w.dim() == plant.n()
        && cert.z.shape() == (plant.m(), plant.n())
        && cert.j.shape() == (plant.m(), plant.n())
        && cert.k.shape() == (plant.m(), plant.n())
        && cert.r.iter().zip(plant.partition().dims()).all(|(r, &d)| r.dim() == d);
    if !shape_ok {
        checks.push(BlockCheck {
            name: "dimensions".into(),
            kind: CheckKind::PositiveSemidefinite,
            value: f64::NAN,
            passed: false,
        });
        return VerificationReport {
            tol,
            passed: false,
            checks,
        };
    }
    let vars = cert_vars(plant, cert);
    for i in 0..plant.m() {
        let m = inclusion_matrix(plant, &vars, i, cert.mode).map_err(|e| e.to_string());
        checks.push(judge(format!("inclusion[{}]", i + 1), CheckKind::PositiveSemidefinite, m, tol));
    }
    match enumerate_vertices(&cert.sigma, plant.t2(), plant.partition()) {
        Ok(vs) => {
            for (idx, v) in vs.iter().enumerate() {
                let m = analysis_matrix(plant, &cert.k, &vars, &v.psi).map_err(|e| e.to_string());
                checks.push(judge(format!("analysis[{idx}]"), CheckKind::NegativeDefinite, m, tol));
                if cert.mode == Mode::Design {
                    let m = match cert.alpha {
                        Some(a) => design_matrix(plant, &vars, a, &v.psi).map_err(|e| e.to_string()),
                        None => Err("missing alpha".into()),
                    };
                    checks.push(judge(format!("design[{idx}]"), CheckKind::NegativeDefinite, m, tol));
                }
            }
        }
        Err(e) => checks.push(BlockCheck {
            name: format!("vertices: {e}"),
            kind: CheckKind::NegativeDefinite,
            value: f64::NAN,
            passed: false,
        }),
    }
    let passed = checks.iter().all(|c| c.passed);
    VerificationReport { tol, checks, passed }
}

/// Multipliers recovered for externally supplied `(K, W⁻¹, R, σ, μ̄)`.
#[derive(Debug, Clone)]
pub struct Recovery<T: Real> {
    pub certificate: StabilityCertificate<T>,
    /// Largest achieved `t` with every block satisfied by margin `t`.
    pub margin: T,
}

/// Rewrites `c` over the free variables only, folding fixed values into the
/// constant term.
fn restrict<T: Real>(c: &LmiConstraint<T>, y0: &[T], new_index: &[Option<usize>]) -> LmiConstraint<T> {
    let mut constant = c.constant.as_mat().clone();
    let mut terms = Vec::new();
    for (k, f) in &c.terms {
        match new_index[*k] {
            Some(nk) => terms.push((nk, f.clone())),
            None => {
                if y0[*k] != T::zero() {
                    constant += &f.scale(y0[*k]);
                }
            }
        }
    }
    LmiConstraint {
        constant: SymMatrix::symmetrize(&constant),
        terms,
    }
}

/// Feasibility re-solve over `(S, Z, J)` with `K`, `W`, `Rᵢ`, `σ`, `μ̄` held
/// fixed, maximizing the common margin of all blocks.
pub fn recover_multipliers<T: Real>(
    plant: &PlantModel<T>,
    k: &Mat<T>,
    w_inv: &SymMatrix<T>,
    r: &[SymMatrix<T>],
    sigma: &[T],
    mu_bar: T,
    settings: &Settings<T>,
) -> Result<Recovery<T>, CertifyError> {
    if r.len() != plant.q() || w_inv.dim() != plant.n() {
        return Err(CertifyError::Argument("W⁻¹ / R dimensions do not match the plant".into()));
    }
    if !(mu_bar > T::zero()) {
        return Err(CertifyError::Argument("mu_bar must be positive".into()));
    }
    let layout = VarLayout::new(plant, Mode::Analysis, sigma.to_vec(), None)?;
    let w = SymMatrix::symmetrize(&w_inv.inverse()?);
    let mut fixed = LmiVariables::zeros(plant.n(), plant.m(), plant.partition().dims(), sigma.to_vec(), None);
    fixed.w = w.clone();
    fixed.r = r.to_vec();
    fixed.iota = T::one() / mu_bar;
    fixed.mw = w_inv.clone();
    let y0 = layout.pack(&fixed);

    let mut free: Vec<usize> = layout.s_indices().collect();
    free.extend(layout.z_indices());
    free.extend(layout.j_indices().expect("analysis layout"));
    let mut new_index = vec![None; layout.nvars()];
    for (nk, &k) in free.iter().enumerate() {
        new_index[k] = Some(nk);
    }

    let mut constraints = Vec::new();
    for i in 0..plant.m() {
        constraints.push(build_inclusion_lmi(plant, &layout, i)?);
    }
    for v in enumerate_vertices(sigma, plant.t2(), plant.partition())?.iter() {
        constraints.push(build_analysis_lmi(plant, k, &layout, &v.psi, T::zero())?);
    }
    constraints.push(build_positivity(&layout, T::zero())?);
    let constraints: Vec<LmiConstraint<T>> =
        constraints.iter().map(|c| restrict(c, &y0, &new_index)).collect();
    let problem = SdpProblem::new(free.len(), vec![T::zero(); free.len()], constraints)?;
    let outcome = phase1_with(&problem, &settings.sdp, T::lit(STRICT_TOL))?;
    let (yf, margin) = match outcome {
        PhaseOneOutcome::StrictlyFeasible { y, margin } => (y, margin),
        PhaseOneOutcome::NotStrictlyFeasible { y, margin, .. } => (y, margin),
    };
    let mut y = y0;
    for (nk, &k) in free.iter().enumerate() {
        y[k] = yf[nk];
    }
    let vars = layout.unpack(&y);
    Ok(Recovery {
        certificate: StabilityCertificate {
            mode: Mode::Analysis,
            k: k.clone(),
            w,
            r: r.to_vec(),
            s: vars.s,
            z: vars.z,
            j: vars.j,
            y: None,
            mw: None,
            sigma: sigma.to_vec(),
            alpha: None,
            mu_bar,
            solver: None,
        },
        margin,
    })
}
