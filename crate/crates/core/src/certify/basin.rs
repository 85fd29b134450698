use super::{verify::cert_vars, BasinEstimate, CertifyError, DecayCertificate, StabilityCertificate};
use crate::lmi::{analysis_matrix, enumerate_vertices, theta, PlantModel};
use crate::scalar::Real;
use crate::symmat::{Mat, SymMatrix};

/// Timer argument for set membership.
#[derive(Debug, Clone, PartialEq)]
pub enum Tau<T> {
    /// `τ* = (T₂⁽¹⁾, …, T₂⁽q⁾)`, where `P̂` is largest.
    Worst,
    At(Vec<T>),
}

/// `P̂(τ) = W⁻¹ ⊕ (⊕ᵢ e^{σᵢτᵢ} Rᵢ)`.
pub fn p_hat<T: Real>(cert: &StabilityCertificate<T>, tau: &[T]) -> Result<SymMatrix<T>, CertifyError> {
    if tau.len() != cert.r.len() {
        return Err(CertifyError::Argument(format!(
            "tau has {} entries for {} channels",
            tau.len(),
            cert.r.len()
        )));
    }
    let mut blocks = vec![cert.w_inv()?];
    let th = theta(&cert.sigma, tau);
    blocks.extend(cert.r.iter().zip(&th).map(|(r, &e)| r.scale(e)));
    Ok(SymMatrix::direct_sum(&blocks)?)
}

pub fn basin_sets<T: Real>(
    plant: &PlantModel<T>,
    cert: &StabilityCertificate<T>,
) -> Result<BasinEstimate<T>, CertifyError> {
    let p_hat_star = p_hat(cert, plant.t2())?;
    let th = theta(&cert.sigma, plant.t2());
    let weighted: Vec<SymMatrix<T>> = cert.r.iter().zip(&th).map(|(r, &e)| r.scale(e)).collect();
    let n = cert.w_inv()?.add(&SymMatrix::direct_sum(&weighted)?);
    let volume_proxy = p_hat_star.trace() / cert.mu_bar;
    Ok(BasinEstimate {
        p_hat_star,
        mu_bar: cert.mu_bar,
        n,
        volume_proxy,
    })
}

fn resolve_tau<T: Real>(plant: &PlantModel<T>, tau: &Tau<T>) -> Result<Vec<T>, CertifyError> {
    match tau {
        Tau::Worst => Ok(plant.t2().to_vec()),
        Tau::At(t) => {
            if t.len() != plant.q() {
                return Err(CertifyError::Argument(format!(
                    "tau has {} entries for {} channels",
                    t.len(),
                    plant.q()
                )));
            }
            for (i, (&ti, &t2)) in t.iter().zip(plant.t2()).enumerate() {
                if !(ti >= T::zero() && ti <= t2) {
                    return Err(CertifyError::Argument(format!(
                        "tau[{i}] = {ti} outside [0, {t2}]"
                    )));
                }
            }
            Ok(t.clone())
        }
    }
}

/// `x̄ᵀ P̂(τ) x̄`.
pub fn quadratic_level<T: Real>(
    plant: &PlantModel<T>,
    cert: &StabilityCertificate<T>,
    xbar: &[T],
    tau: &Tau<T>,
) -> Result<T, CertifyError> {
    if xbar.len() != 2 * plant.n() {
        return Err(CertifyError::Argument(format!(
            "state has {} entries, expected {}",
            xbar.len(),
            2 * plant.n()
        )));
    }
    let t = resolve_tau(plant, tau)?;
    Ok(p_hat(cert, &t)?.quad_form(xbar)?)
}

/// `x̄ᵀ P̂(τ) x̄ ≤ μ̄`.
pub fn membership<T: Real>(
    plant: &PlantModel<T>,
    cert: &StabilityCertificate<T>,
    xbar: &[T],
    tau: &Tau<T>,
) -> Result<bool, CertifyError> {
    Ok(quadratic_level(plant, cert, xbar, tau)? <= cert.mu_bar)
}

/// Decay constants from the certificate: `c₁ = λ_min(P̂(0))`,
/// `c₂ = λ_max(P̂(τ*))`, `c₃ = -max_Ψ λ_max(Ĵ 𝔑(Ψ) Ĵ)` with
/// `Ĵ = W⁻¹ ⊕ I ⊕ S⁻¹`, then the hybrid rate and overshoot.
pub fn decay_certificate<T: Real>(
    plant: &PlantModel<T>,
    cert: &StabilityCertificate<T>,
) -> Result<DecayCertificate<T>, CertifyError> {
    let (n, m) = (plant.n(), plant.m());
    let c1 = p_hat(cert, &vec![T::zero(); plant.q()])?.min_eigenvalue();
    let c2 = p_hat(cert, plant.t2())?.max_eigenvalue();
    if cert.s.iter().any(|&s| !(s > T::zero())) {
        return Err(CertifyError::Argument("S must be positive definite".into()));
    }
    let s_inv: Vec<T> = cert.s.iter().map(|&s| T::one() / s).collect();
    let jhat = Mat::from_blocks(&[
        vec![Some(cert.w_inv()?.as_mat()), None, None],
        vec![None, Some(&Mat::identity(n)), None],
        vec![None, None, Some(&Mat::from_diag(&s_inv))],
    ])?;
    debug_assert_eq!(jhat.rows(), 2 * n + m);
    let vars = cert_vars(plant, cert);
    let mut worst = T::neg_infinity();
    let mut worst_idx = 0;
    for (idx, v) in enumerate_vertices(&cert.sigma, plant.t2(), plant.partition())?.iter().enumerate() {
        let nm = analysis_matrix(plant, &cert.k, &vars, &v.psi)?;
        let l = nm.congruence(&jhat)?.max_eigenvalue();
        if l > worst {
            worst = l;
            worst_idx = idx;
        }
    }
    let c3 = -worst;
    if !(c3 > T::zero()) {
        return Err(CertifyError::Marginal {
            vertex: worst_idx,
            c3: c3.to_f64_lossy(),
        });
    }
    let v_rate = c3 / c2;
    let lambda_t = v_rate / T::two();
    let tau_d = plant.tau_d();
    let (lambda, vartheta) = hybrid_rate(lambda_t, tau_d, plant.q());
    let kappa = vartheta.exp() * (c2 / c1).sqrt();
    Ok(DecayCertificate {
        c1,
        c2,
        c3,
        v_rate,
        lambda_t,
        tau_d,
        lambda,
        vartheta,
        kappa,
    })
}

/// Hybrid-time rate `λ = λ_t τ_D / (1 + τ_D)` and offset `ϑ = λq`.
pub fn hybrid_rate<T: Real>(lambda_t: T, tau_d: T, q: usize) -> (T, T) {
    let lambda = lambda_t * tau_d / (T::one() + tau_d);
    (lambda, lambda * T::of_usize(q))
}
