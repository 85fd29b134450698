use std::cmp::Ordering;

use rayon::prelude::*;

use super::{
    basin_sets, verify_certificate, CertifyError, GridRecord, PointStatus, SearchResult, Settings,
    SolverStats, StabilityCertificate,
};
use crate::lmi::{
    assemble_objective, build_analysis_lmi, build_design_lmi, build_inclusion_lmi, build_mw_link,
    build_positivity, enumerate_vertices, Mode, PlantModel, VarLayout, Weights,
};
use crate::scalar::Real;
use crate::sdp::{self, SdpProblem, SdpStatus, VarBound};
use crate::symmat::Mat;

pub const DEFAULT_ALPHAS: [f64; 6] = [0.05, 0.1, 0.2, 0.4, 0.8, 1.6];
pub const DEFAULT_SIGMAS: [f64; 8] = [0.3, 0.8, 1.3, 1.8, 2.3, 2.8, 3.3, 3.8];

/// Search grid: `α` values and one list of `σ` values per channel.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid<T> {
    pub alphas: Vec<T>,
    pub sigmas: Vec<Vec<T>>,
}

impl<T: Real> Grid<T> {
    pub fn default_for(q: usize) -> Self {
        Self {
            alphas: DEFAULT_ALPHAS.iter().map(|&a| T::lit(a)).collect(),
            sigmas: vec![DEFAULT_SIGMAS.iter().map(|&s| T::lit(s)).collect(); q],
        }
    }

    /// A grid with a single point.
    pub fn single(sigma: Vec<T>, alpha: T) -> Self {
        Self {
            alphas: vec![alpha],
            sigmas: sigma.into_iter().map(|s| vec![s]).collect(),
        }
    }

    pub fn validate(&self, q: usize, need_alpha: bool) -> Result<(), CertifyError> {
        if self.sigmas.len() != q {
            return Err(CertifyError::Argument(format!(
                "grid has {} sigma lists for {q} channels",
                self.sigmas.len()
            )));
        }
        if need_alpha && self.alphas.is_empty() {
            return Err(CertifyError::Argument("empty alpha grid".into()));
        }
        let positive = |v: &T| *v > T::zero() && v.is_finite();
        if self.sigmas.iter().any(|l| l.is_empty() || !l.iter().all(positive)) {
            return Err(CertifyError::Argument("sigma lists must be nonempty and positive".into()));
        }
        if need_alpha && !self.alphas.iter().all(positive) {
            return Err(CertifyError::Argument("alpha values must be positive".into()));
        }
        Ok(())
    }

    /// Cartesian product of the `σ` lists in lexicographic order.
    pub fn sigma_points(&self) -> Vec<Vec<T>> {
        let mut out: Vec<Vec<T>> = vec![Vec::new()];
        for list in &self.sigmas {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    list.iter().map(move |&s| {
                        let mut p = prefix.clone();
                        p.push(s);
                        p
                    })
                })
                .collect();
        }
        out
    }
}

/// Result of solving a single grid point.
#[derive(Debug, Clone)]
pub struct PointOutcome<T: Real> {
    pub record: GridRecord,
    pub certificate: Option<StabilityCertificate<T>>,
}

/// Thread cap from `SATSTAB_THREADS`, if set to a positive integer.
pub fn worker_threads() -> Option<usize> {
    std::env::var("SATSTAB_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
}

fn f64s<T: Real>(v: &[T]) -> Vec<f64> {
    v.iter().map(|x| x.to_f64_lossy()).collect()
}

/// Flattens the design (`k = None`) or analysis problem at one `(σ, α)`
/// point into an SDP over the layout's decision vector.
pub fn build_problem<T: Real>(
    plant: &PlantModel<T>,
    k: Option<&Mat<T>>,
    sigma: &[T],
    alpha: Option<T>,
    weights: Weights<T>,
    settings: &Settings<T>,
) -> Result<(VarLayout<T>, SdpProblem<T>), CertifyError> {
    let mode = if k.is_some() { Mode::Analysis } else { Mode::Design };
    let layout = VarLayout::new(plant, mode, sigma.to_vec(), alpha)?;
    let mut constraints = Vec::new();
    for i in 0..plant.m() {
        constraints.push(build_inclusion_lmi(plant, &layout, i)?);
    }
    for v in enumerate_vertices(sigma, plant.t2(), plant.partition())?.iter() {
        constraints.push(match (mode, k) {
            (Mode::Analysis, Some(k)) => build_analysis_lmi(plant, k, &layout, &v.psi, settings.margin)?,
            _ => build_design_lmi(plant, &layout, alpha.unwrap_or_else(T::one), &v.psi, settings.margin)?,
        });
    }
    constraints.push(build_mw_link(&layout)?);
    constraints.push(build_positivity(&layout, settings.margin)?);
    let objective = assemble_objective(&layout, weights, plant);
    let b = settings.var_box;
    let mut bounds = vec![
        VarBound {
            lower: Some(-b),
            upper: Some(b),
        };
        layout.nvars()
    ];
    bounds[layout.iota_index()].lower = Some(T::one() / b);
    let problem = SdpProblem::new(layout.nvars(), objective, constraints)?.with_bounds(bounds)?;
    Ok((layout, problem))
}

/// Assembles and solves the design (`k = None`) or analysis problem at one
/// `(σ, α)` point.
pub fn solve_point<T: Real>(
    plant: &PlantModel<T>,
    k: Option<&Mat<T>>,
    sigma: &[T],
    alpha: Option<T>,
    weights: Weights<T>,
    settings: &Settings<T>,
) -> Result<PointOutcome<T>, CertifyError> {
    let mode = if k.is_some() { Mode::Analysis } else { Mode::Design };
    let (layout, problem) = build_problem(plant, k, sigma, alpha, weights, settings)?;
    let sol = sdp::solve(&problem, &settings.sdp)?;

    let mut record = GridRecord {
        sigma: f64s(sigma),
        alpha: alpha.map(|a| a.to_f64_lossy()),
        status: match sol.status {
            SdpStatus::Optimal => PointStatus::Optimal,
            SdpStatus::Feasible => PointStatus::Feasible,
            SdpStatus::Infeasible => PointStatus::Infeasible,
            SdpStatus::NumericalFailure => PointStatus::NumericalFailure,
        },
        objective: None,
        mu_bar: None,
        iterations: sol.iterations,
        message: sol.message.clone(),
    };
    if !sol.is_success() {
        return Ok(PointOutcome {
            record,
            certificate: None,
        });
    }
    let vars = layout.unpack(&sol.y);
    let gain = match k {
        Some(k) => k.clone(),
        // K = Y W⁻¹ = (W⁻¹ Yᵀ)ᵀ
        None => vars.w.solve(&vars.y.transpose())?.transpose(),
    };
    let cert = StabilityCertificate {
        mode,
        k: gain,
        w: vars.w.clone(),
        r: vars.r.clone(),
        s: vars.s.clone(),
        z: vars.z.clone(),
        j: match mode {
            Mode::Analysis => vars.j.clone(),
            Mode::Design => Mat::zeros(plant.m(), plant.n()),
        },
        y: (mode == Mode::Design).then(|| vars.y.clone()),
        mw: Some(vars.mw.clone()),
        sigma: sigma.to_vec(),
        alpha,
        mu_bar: vars.mu_bar(),
        solver: Some(SolverStats {
            status: sol.status,
            iterations: sol.iterations,
            duality_gap: sol.duality_gap.to_f64_lossy(),
            objective: sol.objective_value.to_f64_lossy(),
        }),
    };
    record.objective = Some(sol.objective_value.to_f64_lossy());
    record.mu_bar = Some(cert.mu_bar.to_f64_lossy());
    let report = verify_certificate(plant, &cert, settings.verify_tol);
    if !report.passed {
        record.status = PointStatus::Rejected;
        record.message = format!("verification failed: {}", report.failures().join(", "));
        return Ok(PointOutcome {
            record,
            certificate: None,
        });
    }
    Ok(PointOutcome {
        record,
        certificate: Some(cert),
    })
}

fn cmp_lex<T: Real>(a: &[T], b: &[T]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.partial_cmp(y) {
            Some(Ordering::Equal) | None => continue,
            Some(o) => return o,
        }
    }
    a.len().cmp(&b.len())
}

fn run_grid<T: Real>(
    plant: &PlantModel<T>,
    k: Option<&Mat<T>>,
    points: Vec<(Vec<T>, Option<T>)>,
    weights: Weights<T>,
    settings: &Settings<T>,
) -> Result<SearchResult<T>, CertifyError> {
    let work = || -> Vec<Result<PointOutcome<T>, CertifyError>> {
        points
            .par_iter()
            .map(|(s, a)| solve_point(plant, k, s, *a, weights, settings))
            .collect()
    };
    let outcomes = match worker_threads() {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CertifyError::Numerical(format!("thread pool: {e}")))?
            .install(work),
        None => work(),
    };
    let mut log = Vec::with_capacity(outcomes.len());
    let mut best: Option<(f64, usize, StabilityCertificate<T>)> = None;
    for (idx, (out, (sigma, alpha))) in outcomes.into_iter().zip(&points).enumerate() {
        let out = match out {
            Ok(o) => o,
            Err(e) => PointOutcome {
                record: GridRecord {
                    sigma: f64s(sigma),
                    alpha: alpha.map(|a| a.to_f64_lossy()),
                    status: PointStatus::NumericalFailure,
                    objective: None,
                    mu_bar: None,
                    iterations: 0,
                    message: e.to_string(),
                },
                certificate: None,
            },
        };
        if let (Some(cert), Some(obj)) = (out.certificate, out.record.objective) {
            let better = match &best {
                None => true,
                Some((bobj, bidx, _)) => match obj.partial_cmp(bobj) {
                    Some(Ordering::Less) => true,
                    Some(Ordering::Equal) => {
                        let (bs, ba) = &points[*bidx];
                        match cmp_lex(sigma, bs) {
                            Ordering::Less => true,
                            Ordering::Equal => alpha.partial_cmp(ba) == Some(Ordering::Less),
                            Ordering::Greater => false,
                        }
                    }
                    _ => false,
                },
            };
            if better {
                best = Some((obj, idx, cert));
            }
        }
        log.push(out.record);
    }
    match best {
        Some((_, _, certificate)) => {
            let basin = basin_sets(plant, &certificate)?;
            Ok(SearchResult {
                certificate,
                basin,
                log,
            })
        }
        None => Err(CertifyError::NoCertificate { log }),
    }
}

/// Design search: solves the design problem at every `(σ, α)` grid point and
/// returns the certificate with the smallest objective.
pub fn synthesize<T: Real>(
    plant: &PlantModel<T>,
    grid: &Grid<T>,
    weights: Weights<T>,
    settings: &Settings<T>,
) -> Result<SearchResult<T>, CertifyError> {
    grid.validate(plant.q(), true)?;
    let points = grid
        .sigma_points()
        .into_iter()
        .flat_map(|s| grid.alphas.iter().map(move |&a| (s.clone(), Some(a))))
        .collect();
    run_grid(plant, None, points, weights, settings)
}

/// Analysis search for a given gain over the `σ` grid (`α` is unused).
pub fn analyze<T: Real>(
    plant: &PlantModel<T>,
    k: &Mat<T>,
    grid: &Grid<T>,
    weights: Weights<T>,
    settings: &Settings<T>,
) -> Result<SearchResult<T>, CertifyError> {
    grid.validate(plant.q(), false)?;
    if k.shape() != (plant.m(), plant.n()) {
        return Err(CertifyError::Argument(format!(
            "gain is {:?}, expected {:?}",
            k.shape(),
            (plant.m(), plant.n())
        )));
    }
    let points = grid.sigma_points().into_iter().map(|s| (s, None)).collect();
    run_grid(plant, Some(k), points, weights, settings)
}
