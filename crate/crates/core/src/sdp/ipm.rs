//! Infeasible-start primal-dual path-following method with the HKM search
//! direction and a Mehrotra predictor-corrector step.

use super::{IterationLog, LmiConstraint, SdpError, SdpOptions, SdpProblem, SdpSolution, SdpStatus};
use crate::scalar::Real;
use crate::symmat::{sym_eig, Mat, SymMatrix};

const INFEAS_TOL: f64 = 1e-8;
const PROGRESS_WINDOW: usize = 10;
const PROGRESS_GAP: f64 = 1e-4;
const STALL_LIMIT: usize = 4;

struct Block<T: Real> {
    f0: Mat<T>,
    terms: Vec<(usize, Mat<T>)>,
    dim: usize,
}

impl<T: Real> Block<T> {
    fn from_constraint(c: &LmiConstraint<T>) -> Self {
        Self {
            f0: c.constant.as_mat().clone(),
            terms: c
                .terms
                .iter()
                .map(|(k, f)| (*k, f.as_mat().clone()))
                .collect(),
            dim: c.dim(),
        }
    }

    fn apply(&self, y: &[T]) -> Mat<T> {
        let mut acc = Mat::zeros(self.dim, self.dim);
        for (k, f) in &self.terms {
            if y[*k] != T::zero() {
                acc += &f.scale(y[*k]);
            }
        }
        acc
    }
}

struct Iterate<T: Real> {
    x: Vec<Mat<T>>,
    s: Vec<Mat<T>>,
    y: Vec<T>,
}

fn sym<T: Real>(m: &Mat<T>) -> Mat<T> {
    SymMatrix::symmetrize(m).into_mat()
}

/// Inverse of a symmetric positive definite matrix via Cholesky.
fn spd_inverse<T: Real>(m: &Mat<T>) -> Option<Mat<T>> {
    let l = m.cholesky().ok()?;
    let linv = l.solve_lower(&Mat::identity(m.rows()));
    Some(sym(&(&linv.transpose() * &linv)))
}

/// Largest `α` with `x + α·dx ⪰ 0`, `+∞` when unbounded.
fn max_step<T: Real>(x: &Mat<T>, dx: &Mat<T>) -> T {
    if x.rows() == 1 {
        let d = dx[(0, 0)];
        return if d < T::zero() {
            -x[(0, 0)] / d
        } else {
            T::infinity()
        };
    }
    let l = match x.cholesky() {
        Ok(l) => l,
        Err(_) => return T::zero(),
    };
    let half = l.solve_lower(dx);
    let q = l.solve_lower(&half.transpose());
    let lmin = sym_eig(&SymMatrix::symmetrize(&q)).min();
    if lmin >= T::zero() {
        T::infinity()
    } else {
        -T::one() / lmin
    }
}

fn solve_spd_or_general<T: Real>(m: &Mat<T>, rhs: &[T]) -> Option<Vec<T>> {
    let n = m.rows();
    if n == 0 {
        return Some(Vec::new());
    }
    let b = Mat::column(rhs);
    let scale = (0..n).map(|i| m[(i, i)].abs()).fold(T::zero(), T::max);
    let mut reg = T::zero();
    for _ in 0..6 {
        let mut mm = m.clone();
        for i in 0..n {
            mm[(i, i)] += reg;
        }
        if let Ok(l) = mm.cholesky() {
            let z = l.solve_lower(&b);
            let x = l.solve_lower_transpose(&z);
            return Some(x.as_slice().to_vec());
        }
        reg = if reg == T::zero() {
            scale * T::lit(1e-14)
        } else {
            reg * T::lit(100.0)
        };
    }
    m.solve(&b).ok().map(|x| x.as_slice().to_vec())
}

fn norm2<T: Real>(v: &[T]) -> T {
    v.iter().map(|&x| x * x).sum::<T>().sqrt()
}

struct Direction<T: Real> {
    dx: Vec<Mat<T>>,
    ds: Vec<Mat<T>>,
    dy: Vec<T>,
}

/// Solves the HKM Newton system for given complementarity targets `targets`
/// (`σμS⁻¹ - X - corrector` per block).
fn direction<T: Real>(
    blocks: &[Block<T>],
    nv: usize,
    it: &Iterate<T>,
    schur: &Mat<T>,
    rd: &[Mat<T>],
    xrs: &[Mat<T>],
    sinv: &[Mat<T>],
    rp: &[T],
    targets: &[Mat<T>],
) -> Option<Direction<T>> {
    let mut rhs: Vec<T> = rp.iter().map(|&r| -r).collect();
    for (b, blk) in blocks.iter().enumerate() {
        let g = &targets[b] - &xrs[b];
        for (k, f) in &blk.terms {
            rhs[*k] += f.dot(&g);
        }
    }
    let dy = solve_spd_or_general(schur, &rhs)?;
    let mut dx = Vec::with_capacity(blocks.len());
    let mut ds = Vec::with_capacity(blocks.len());
    for (b, blk) in blocks.iter().enumerate() {
        let dsb = &rd[b] + &blk.apply(&dy);
        let xdss = &(&it.x[b] * &dsb) * &sinv[b];
        let dxb = &targets[b] - &sym(&xdss);
        dx.push(sym(&dxb));
        ds.push(sym(&dsb));
    }
    debug_assert_eq!(dy.len(), nv);
    Some(Direction { dx, ds, dy })
}

fn initial_point<T: Real>(blocks: &[Block<T>], c: &[T], nv: usize) -> Iterate<T> {
    let ten = T::lit(10.0);
    let mut x = Vec::with_capacity(blocks.len());
    let mut s = Vec::with_capacity(blocks.len());
    for blk in blocks {
        let d = T::of_usize(blk.dim);
        let mut xi = ten.max(d.sqrt());
        let mut eta = ten.max(d.sqrt()).max(blk.f0.frobenius_norm());
        for (k, f) in &blk.terms {
            let fnorm = f.frobenius_norm();
            xi = xi.max(d * (T::one() + c[*k].abs()) / (T::one() + fnorm));
            eta = eta.max(fnorm);
        }
        x.push(Mat::identity(blk.dim).scale(xi));
        s.push(Mat::identity(blk.dim).scale(eta));
    }
    Iterate {
        x,
        s,
        y: vec![T::zero(); nv],
    }
}

/// Solves `problem` to the tolerances in `opts`.
pub fn solve<T: Real>(problem: &SdpProblem<T>, opts: &SdpOptions<T>) -> Result<SdpSolution<T>, SdpError> {
    let nv = problem.nvars();
    let c = problem.objective().to_vec();
    let n_orig = problem.constraints().len();
    let blocks: Vec<Block<T>> = problem
        .expanded_constraints()
        .iter()
        .map(Block::from_constraint)
        .collect();
    if blocks.is_empty() {
        return Err(SdpError::Argument("problem has no constraints".into()));
    }
    let total_dim = T::of_usize(blocks.iter().map(|b| b.dim).sum());
    let cnorm = norm2(&c);
    let f0norm = blocks
        .iter()
        .map(|b| b.f0.frobenius_norm().powi(2))
        .sum::<T>()
        .sqrt();

    let mut it = initial_point(&blocks, &c, nv);
    let mut history = Vec::new();
    let mut last_steps = (T::zero(), T::zero());
    let mut stalls = 0usize;
    let mut best_gap = T::infinity();
    let mut since_best = 0usize;
    let mut status = None;
    let mut message = String::new();
    let mut certificate = None;
    let mut iterations = 0;

    for iter in 0..=opts.max_iter {
        iterations = iter;
        let mut sinv = Vec::with_capacity(blocks.len());
        for s in &it.s {
            match spd_inverse(s) {
                Some(si) => sinv.push(si),
                None => {
                    status = Some(SdpStatus::NumericalFailure);
                    message = "slack matrix lost definiteness".into();
                    break;
                }
            }
        }
        if status.is_some() {
            break;
        }

        let mut ax = vec![T::zero(); nv];
        let mut f0x = T::zero();
        let mut xs = T::zero();
        let mut rd = Vec::with_capacity(blocks.len());
        for (b, blk) in blocks.iter().enumerate() {
            for (k, f) in &blk.terms {
                ax[*k] += f.dot(&it.x[b]);
            }
            f0x += blk.f0.dot(&it.x[b]);
            xs += it.x[b].dot(&it.s[b]);
            let mut r = &blk.f0 + &blk.apply(&it.y);
            r -= &it.s[b];
            rd.push(r);
        }
        let rp: Vec<T> = c.iter().zip(&ax).map(|(&ck, &a)| ck - a).collect();
        let pobj: T = c.iter().zip(&it.y).map(|(&ck, &yk)| ck * yk).sum();
        let dobj = -f0x;
        let mu = xs / total_dim;
        let pinf = norm2(&rp) / (T::one() + cnorm);
        let dinf = rd.iter().map(|r| r.frobenius_norm().powi(2)).sum::<T>().sqrt()
            / (T::one() + f0norm);
        let denom = T::one() + pobj.abs() + dobj.abs();
        let gap = ((pobj - dobj).abs() / denom).max(xs / denom);
        history.push(IterationLog {
            primal_objective: pobj,
            dual_objective: dobj,
            equality_residual: pinf,
            slack_residual: dinf,
            mu,
            step_primal: last_steps.0,
            step_dual: last_steps.1,
        });

        if gap <= opts.gap_tol && pinf <= opts.feas_tol && dinf <= opts.feas_tol {
            let feasible = blocks
                .iter()
                .map(|b| {
                    SymMatrix::symmetrize(&(&b.f0 + &b.apply(&it.y))).min_eigenvalue()
                })
                .all(|l| l >= -opts.feas_tol);
            if feasible {
                status = Some(SdpStatus::Optimal);
                message = "converged".into();
                break;
            }
        }

        // Certificate that the matrix inequalities admit no solution:
        // X ⪰ 0 with A(X) ≈ 0 and ⟨F₀, X⟩ < 0.
        if dobj > T::zero() && iter > 0 {
            let ratio = norm2(&ax) / dobj;
            if ratio <= T::lit(INFEAS_TOL) {
                status = Some(SdpStatus::Infeasible);
                message = format!("infeasibility certificate found (residual ratio {ratio:.2e})");
                certificate = Some(
                    it.x[..n_orig]
                        .iter()
                        .map(|x| SymMatrix::symmetrize(&x.scale(T::one() / dobj)))
                        .collect(),
                );
                break;
            }
        }
        if norm2(&it.y) > T::lit(1e12) {
            status = Some(SdpStatus::NumericalFailure);
            message = "iterates diverged (problem may be unbounded)".into();
            break;
        }
        if iter == opts.max_iter {
            break;
        }
        if gap < best_gap * T::lit(0.9) {
            best_gap = gap;
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= PROGRESS_WINDOW && gap < T::lit(PROGRESS_GAP) {
                message = format!("no progress in {PROGRESS_WINDOW} iterations");
                break;
            }
        }

        // Schur complement M_kl = Σ_b tr(F_k X F_l S⁻¹).
        let mut schur = Mat::zeros(nv, nv);
        for (b, blk) in blocks.iter().enumerate() {
            let g: Vec<Mat<T>> = blk
                .terms
                .iter()
                .map(|(_, f)| &(&it.x[b] * f) * &sinv[b])
                .collect();
            for (a, (k, fk)) in blk.terms.iter().enumerate() {
                for (l, _) in blk.terms.iter().enumerate().skip(a) {
                    let v = fk.dot(&g[l]);
                    let kl = blk.terms[l].0;
                    schur[(*k, kl)] += v;
                    if kl != *k || l != a {
                        schur[(kl, *k)] += v;
                    }
                }
            }
        }
        let schur = sym_full(&schur);
        let xrs: Vec<Mat<T>> = (0..blocks.len())
            .map(|b| &(&it.x[b] * &rd[b]) * &sinv[b])
            .collect();

        // Predictor.
        let pred_targets: Vec<Mat<T>> = it.x.iter().map(|x| -x).collect();
        let Some(pred) = direction(&blocks, nv, &it, &schur, &rd, &xrs, &sinv, &rp, &pred_targets)
        else {
            status = Some(SdpStatus::NumericalFailure);
            message = "Schur complement system could not be solved".into();
            break;
        };
        let ap = step_all(&it.x, &pred.dx).min(T::one());
        let ad = step_all(&it.s, &pred.ds).min(T::one());
        let mut xs_aff = T::zero();
        for b in 0..blocks.len() {
            let xa = &it.x[b] + &pred.dx[b].scale(ap);
            let sa = &it.s[b] + &pred.ds[b].scale(ad);
            xs_aff += xa.dot(&sa);
        }
        let mu_aff = xs_aff / total_dim;
        let expon = T::one().max(T::lit(3.0) * ap.min(ad).powi(2));
        let sigma = if mu > T::zero() {
            (mu_aff / mu).max(T::zero()).min(T::one()).powf(expon)
        } else {
            T::zero()
        };

        // Corrector.
        let corr_targets: Vec<Mat<T>> = (0..blocks.len())
            .map(|b| {
                let mut t = sinv[b].scale(sigma * mu);
                t -= &it.x[b];
                let cross = &(&pred.dx[b] * &pred.ds[b]) * &sinv[b];
                t -= &sym(&cross);
                t
            })
            .collect();
        let Some(dir) = direction(&blocks, nv, &it, &schur, &rd, &xrs, &sinv, &rp, &corr_targets)
        else {
            status = Some(SdpStatus::NumericalFailure);
            message = "Schur complement system could not be solved".into();
            break;
        };
        let gamma = T::lit(0.9) + T::lit(0.09) * ap.min(ad);
        let ap = (gamma * step_all(&it.x, &dir.dx)).min(T::one());
        let ad = (gamma * step_all(&it.s, &dir.ds)).min(T::one());
        for b in 0..blocks.len() {
            it.x[b] = sym(&(&it.x[b] + &dir.dx[b].scale(ap)));
            it.s[b] = sym(&(&it.s[b] + &dir.ds[b].scale(ad)));
        }
        for (yk, dk) in it.y.iter_mut().zip(&dir.dy) {
            *yk += ad * *dk;
        }
        last_steps = (ap, ad);
        if ap.max(ad) < T::lit(1e-9) {
            stalls += 1;
            if stalls >= STALL_LIMIT {
                message = "step lengths collapsed".into();
                break;
            }
        } else {
            stalls = 0;
        }
    }

    let y = it.y.clone();
    let min_eigs: Vec<T> = problem
        .constraints()
        .iter()
        .map(|c| c.evaluate(&y).min_eigenvalue())
        .collect();
    let bound_ok = blocks[n_orig..]
        .iter()
        .all(|b| b.f0[(0, 0)] + b.apply(&y)[(0, 0)] >= -opts.feas_tol);
    let pobj = problem.objective_value(&y);
    let dobj = -blocks
        .iter()
        .zip(&it.x)
        .map(|(b, x)| b.f0.dot(x))
        .sum::<T>();
    let gap = (pobj - dobj).abs() / (T::one() + pobj.abs() + dobj.abs());
    let status = match status {
        Some(s) => s,
        None => {
            let feasible = bound_ok && min_eigs.iter().all(|&l| l >= -opts.feas_tol);
            if iterations >= opts.max_iter {
                if message.is_empty() {
                    message = format!("iteration limit {} reached", opts.max_iter);
                }
                SdpStatus::NumericalFailure
            } else if feasible {
                message = format!("{message}; returning feasible point (gap {gap:.2e})");
                SdpStatus::Feasible
            } else {
                SdpStatus::NumericalFailure
            }
        }
    };
    Ok(SdpSolution {
        status,
        objective_value: pobj,
        dual_objective: dobj,
        min_eigs,
        iterations,
        duality_gap: gap,
        dual: it.x[..n_orig].iter().map(SymMatrix::symmetrize).collect(),
        infeasibility_certificate: certificate,
        history,
        message,
        y,
    })
}

fn step_all<T: Real>(m: &[Mat<T>], dm: &[Mat<T>]) -> T {
    m.iter()
        .zip(dm)
        .map(|(a, d)| max_step(a, d))
        .fold(T::infinity(), T::min)
}

fn sym_full<T: Real>(m: &Mat<T>) -> Mat<T> {
    if m.rows() == 0 {
        return m.clone();
    }
    sym(m)
}
