use serde::{Deserialize, Serialize};

use super::{LmiError, LmiVariables, Mode, PlantModel, VarLayout};
use crate::scalar::Real;
use crate::sdp::LmiConstraint;
use crate::symmat::{he, Mat, SymMatrix};

/// Objective weights `(ϱ₁, ϱ₂)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Weights<T> {
    pub rho1: T,
    pub rho2: T,
}

impl<T: Real> Default for Weights<T> {
    fn default() -> Self {
        Self {
            rho1: T::one(),
            rho2: T::one(),
        }
    }
}

/// `Θ(τ)` weights `e^{σᵢτᵢ}` per channel.
pub fn theta<T: Real>(sigma: &[T], tau: &[T]) -> Vec<T> {
    sigma.iter().zip(tau).map(|(&s, &t)| (s * t).exp()).collect()
}

fn check_psi<T: Real>(plant: &PlantModel<T>, psi: &[T]) -> Result<(), LmiError> {
    if psi.len() != plant.q() {
        return Err(LmiError::Argument(format!(
            "vertex has {} weights for {} channels",
            psi.len(),
            plant.q()
        )));
    }
    Ok(())
}

fn grid<T: Real>(cells: &[Vec<Option<&Mat<T>>>]) -> Result<SymMatrix<T>, LmiError> {
    Ok(SymMatrix::new(Mat::from_blocks(cells)?)?)
}

/// Inclusion matrix for channel `i` (0-based):
///
/// ```text
/// [ W   0   Z₍ᵢ₎ᵀ ]
/// [ ⋆   R̂   J₍ᵢ₎ᵀ ]  ⪰ 0
/// [ ⋆   ⋆   ūᵢ²ι  ]
/// ```
///
/// with `J ≡ 0` in design mode.
pub fn inclusion_matrix<T: Real>(
    plant: &PlantModel<T>,
    vars: &LmiVariables<T>,
    i: usize,
    mode: Mode,
) -> Result<SymMatrix<T>, LmiError> {
    let (n, m) = (plant.n(), plant.m());
    if i >= m {
        return Err(LmiError::Argument(format!("channel {i} out of range for m = {m}")));
    }
    let zi = vars.z.submatrix(i, 0, 1, n);
    let ji = match mode {
        Mode::Analysis => vars.j.submatrix(i, 0, 1, n),
        Mode::Design => Mat::zeros(1, n),
    };
    let u2 = plant.ubar()[i] * plant.ubar()[i];
    let corner = Mat::from_diag(&[u2 * vars.iota]);
    let zero = Mat::zeros(n, n);
    let rh = vars.r_hat();
    let (zt, jt) = (zi.transpose(), ji.transpose());
    grid(&[
        vec![Some(vars.w.as_mat()), Some(&zero), Some(&zt)],
        vec![Some(&zero), Some(rh.as_mat()), Some(&jt)],
        vec![Some(&zi), Some(&ji), Some(&corner)],
    ])
}

/// Analysis matrix `𝔑(Ψ)` for gain `K` and per-channel weights `ψ`:
///
/// ```text
/// [ He((A+BK)W)   -BK                 BS - WKᵀ - Zᵀ ]
/// [ ⋆             He(R̂ΨA) - ΣR̂Ψ      Kᵀ - Jᵀ       ]  ≺ 0
/// [ ⋆             ⋆                   -2S           ]
/// ```
pub fn analysis_matrix<T: Real>(
    plant: &PlantModel<T>,
    k: &Mat<T>,
    vars: &LmiVariables<T>,
    psi: &[T],
) -> Result<SymMatrix<T>, LmiError> {
    check_psi(plant, psi)?;
    let (a, b) = (plant.a(), plant.b());
    if k.shape() != (plant.m(), plant.n()) {
        return Err(LmiError::Argument(format!(
            "gain is {:?}, expected {:?}",
            k.shape(),
            (plant.m(), plant.n())
        )));
    }
    let bk = b.matmul(k)?;
    let acl = a + &bk;
    let w = vars.w.as_mat();
    let s = vars.s_matrix();
    let b11 = he(&acl.matmul(w)?)?.into_mat();
    let b12 = -&bk;
    let b13 = &(&b.matmul(&s)? - &w.matmul(&k.transpose())?) - &vars.z.transpose();
    let rpsi = vars.r_weighted(psi);
    let sig_psi: Vec<T> = vars.sigma.iter().zip(psi).map(|(&s, &p)| s * p).collect();
    let b22 = &he(&rpsi.matmul(a)?)?.into_mat() - vars.r_weighted(&sig_psi).as_mat();
    let b23 = &k.transpose() - &vars.j.transpose();
    let b33 = s.scale(-T::two());
    let (b21, b31, b32) = (b12.transpose(), b13.transpose(), b23.transpose());
    grid(&[
        vec![Some(&b11), Some(&b12), Some(&b13)],
        vec![Some(&b21), Some(&b22), Some(&b23)],
        vec![Some(&b31), Some(&b32), Some(&b33)],
    ])
}

/// Design matrix for `α > 0` and per-channel weights `ψ`:
///
/// ```text
/// [ He(AW+BY)   -BY     BS - Yᵀ - Zᵀ   0               ]
/// [ ⋆           -2αW    Yᵀ             αI              ]
/// [ ⋆           ⋆       -2S            0               ]  ≺ 0
/// [ ⋆           ⋆       ⋆              He(R̂ΨA) - ΣR̂Ψ  ]
/// ```
pub fn design_matrix<T: Real>(
    plant: &PlantModel<T>,
    vars: &LmiVariables<T>,
    alpha: T,
    psi: &[T],
) -> Result<SymMatrix<T>, LmiError> {
    if !(alpha > T::zero()) {
        return Err(LmiError::Argument("alpha must be positive".into()));
    }
    check_psi(plant, psi)?;
    let (a, b) = (plant.a(), plant.b());
    let (n, m) = (plant.n(), plant.m());
    let w = vars.w.as_mat();
    let s = vars.s_matrix();
    let by = b.matmul(&vars.y)?;
    let b11 = he(&(&a.matmul(w)? + &by))?.into_mat();
    let b12 = -&by;
    let b13 = &(&b.matmul(&s)? - &vars.y.transpose()) - &vars.z.transpose();
    let b22 = w.scale(-T::two() * alpha);
    let b23 = vars.y.transpose();
    let b24 = Mat::identity(n).scale(alpha);
    let b33 = s.scale(-T::two());
    let rpsi = vars.r_weighted(psi);
    let sig_psi: Vec<T> = vars.sigma.iter().zip(psi).map(|(&s, &p)| s * p).collect();
    let b44 = &he(&rpsi.matmul(a)?)?.into_mat() - vars.r_weighted(&sig_psi).as_mat();
    let z_nn = Mat::zeros(n, n);
    let z_nm = Mat::zeros(n, m);
    let z_mn = Mat::zeros(m, n);
    let (b21, b31, b32) = (b12.transpose(), b13.transpose(), b23.transpose());
    grid(&[
        vec![Some(&b11), Some(&b12), Some(&b13), Some(&z_nn)],
        vec![Some(&b21), Some(&b22), Some(&b23), Some(&b24)],
        vec![Some(&b31), Some(&b32), Some(&b33), Some(&z_mn)],
        vec![Some(&z_nn), Some(&b24), Some(&z_nm), Some(&b44)],
    ])
    .map(|g| {
        debug_assert_eq!(g.dim(), 3 * n + m);
        g
    })
}

/// `[[M_W, I], [I, W]] ⪰ 0`, equivalent to `M_W ⪰ W⁻¹` for `W ≻ 0`.
pub fn mw_link_matrix<T: Real>(vars: &LmiVariables<T>) -> SymMatrix<T> {
    let n = vars.w.dim();
    let id = Mat::identity(n);
    grid(&[
        vec![Some(vars.mw.as_mat()), Some(&id)],
        vec![Some(&id), Some(vars.w.as_mat())],
    ])
    .expect("square blocks")
}

/// Flattens an affine matrix-valued map of the decision variables.
fn flatten<T: Real>(
    layout: &VarLayout<T>,
    f: impl Fn(&LmiVariables<T>) -> Result<SymMatrix<T>, LmiError>,
) -> Result<LmiConstraint<T>, LmiError> {
    let nv = layout.nvars();
    let mut y = vec![T::zero(); nv];
    let f0 = f(&layout.unpack(&y))?;
    let mut c = LmiConstraint::new(f0.clone());
    for k in 0..nv {
        y[k] = T::one();
        let fk = f(&layout.unpack(&y))?;
        y[k] = T::zero();
        let diff = fk.sub(&f0);
        if diff.max_abs() > T::zero() {
            c = c.with_term(k, diff);
        }
    }
    Ok(c)
}

fn negate_with_margin<T: Real>(mut c: LmiConstraint<T>, margin: T) -> LmiConstraint<T> {
    let d = c.dim();
    c.constant = c.constant.scale(-T::one()).sub(&SymMatrix::identity(d).scale(margin));
    for (_, f) in c.terms.iter_mut() {
        *f = f.scale(-T::one());
    }
    c
}

/// Inclusion constraint for channel `i`, `⪰ 0` form.
pub fn build_inclusion_lmi<T: Real>(
    plant: &PlantModel<T>,
    layout: &VarLayout<T>,
    i: usize,
) -> Result<LmiConstraint<T>, LmiError> {
    let mode = layout.mode();
    flatten(layout, |v| inclusion_matrix(plant, v, i, mode))
}

/// `-𝔑(Ψ) - margin·I ⪰ 0`.
pub fn build_analysis_lmi<T: Real>(
    plant: &PlantModel<T>,
    k: &Mat<T>,
    layout: &VarLayout<T>,
    psi: &[T],
    margin: T,
) -> Result<LmiConstraint<T>, LmiError> {
    if layout.mode() != Mode::Analysis {
        return Err(LmiError::Argument("analysis block needs an analysis layout".into()));
    }
    let c = flatten(layout, |v| analysis_matrix(plant, k, v, psi))?;
    Ok(negate_with_margin(c, margin))
}

/// `-(design matrix) - margin·I ⪰ 0`.
pub fn build_design_lmi<T: Real>(
    plant: &PlantModel<T>,
    layout: &VarLayout<T>,
    alpha: T,
    psi: &[T],
    margin: T,
) -> Result<LmiConstraint<T>, LmiError> {
    if layout.mode() != Mode::Design {
        return Err(LmiError::Argument("design block needs a design layout".into()));
    }
    let c = flatten(layout, |v| design_matrix(plant, v, alpha, psi))?;
    Ok(negate_with_margin(c, margin))
}

pub fn build_mw_link<T: Real>(layout: &VarLayout<T>) -> Result<LmiConstraint<T>, LmiError> {
    flatten(layout, |v| Ok(mw_link_matrix(v)))
}

/// `Rᵢ - margin·I ⪰ 0` for every channel and `sₖ ≥ margin` for every
/// multiplier, as one block-diagonal constraint.
pub fn build_positivity<T: Real>(layout: &VarLayout<T>, margin: T) -> Result<LmiConstraint<T>, LmiError> {
    let c = flatten(layout, |v| {
        let mut blocks: Vec<SymMatrix<T>> = v.r.clone();
        blocks.push(SymMatrix::from_diag(&v.s));
        Ok(SymMatrix::direct_sum(&blocks)?)
    })?;
    let d = c.dim();
    let mut c = c;
    c.constant = c.constant.sub(&SymMatrix::identity(d).scale(margin));
    Ok(c)
}

/// Coefficients of `ϱ₁ι + ϱ₂(tr M_W + Σᵢ tr(Rᵢ)e^{σᵢT₂⁽ⁱ⁾})`.
pub fn assemble_objective<T: Real>(
    layout: &VarLayout<T>,
    weights: Weights<T>,
    plant: &PlantModel<T>,
) -> Vec<T> {
    let mut c = vec![T::zero(); layout.nvars()];
    c[layout.iota_index()] = weights.rho1;
    for (i, j, k) in layout.mw_indices() {
        if i == j {
            c[k] = weights.rho2;
        }
    }
    for (ch, (&s, &t2)) in layout.sigma().iter().zip(plant.t2()).enumerate() {
        let e = (s * t2).exp();
        for (i, j, k) in layout.r_indices(ch) {
            if i == j {
                c[k] = weights.rho2 * e;
            }
        }
    }
    c
}
