use std::sync::OnceLock;

use proptest::prelude::*;

use super::*;
use crate::hybrid_sim::deadzone;
use crate::lmi::{analysis_matrix, enumerate_vertices, LmiVariables, Mode, PlantModel, Weights};
use crate::symmat::{Mat, SymMatrix};

pub(crate) fn example_plant() -> PlantModel<f64> {
    PlantModel::new(
        Mat::from_f64_rows(&[&[-0.8, -0.01], &[1.0, 0.1]]).unwrap(),
        Mat::from_f64_rows(&[&[0.4], &[0.1]]).unwrap(),
        vec![1.0],
        vec![1, 1],
        vec![0.05, 0.05],
        vec![0.3, 0.7],
    )
    .unwrap()
}

fn design_point() -> &'static StabilityCertificate<f64> {
    static CERT: OnceLock<StabilityCertificate<f64>> = OnceLock::new();
    CERT.get_or_init(|| {
        let out = solve_point(&example_plant(), None, &[1.8, 2.3], Some(0.4), Weights::default(), &Settings::default()).unwrap();
        out.certificate.unwrap_or_else(|| panic!("{:?}", out.record))
    })
}

fn analysis_point() -> &'static StabilityCertificate<f64> {
    static CERT: OnceLock<StabilityCertificate<f64>> = OnceLock::new();
    CERT.get_or_init(|| {
        let k = design_point().k.clone();
        let out = solve_point(&example_plant(), Some(&k), &[3.8, 2.3], None, Weights::default(), &Settings::default()).unwrap();
        out.certificate.unwrap_or_else(|| panic!("{:?}", out.record))
    })
}

/// `W⁻¹`, `R`, `μ̄` and `K` reported for the example at `σ = (3.8, 2.3)`.
fn reported_certificate() -> StabilityCertificate<f64> {
    let w_inv = SymMatrix::from_f64_rows(&[&[0.0983, 0.0788], &[0.0788, 0.0694]]).unwrap();
    StabilityCertificate {
        mode: Mode::Analysis,
        k: Mat::from_f64_rows(&[&[-0.444, -0.495]]).unwrap(),
        w: SymMatrix::symmetrize(&w_inv.inverse().unwrap()),
        r: vec![SymMatrix::from_diag(&[0.0141]), SymMatrix::from_diag(&[0.01172])],
        s: vec![1.0],
        z: Mat::zeros(1, 2),
        j: Mat::zeros(1, 2),
        y: None,
        mw: None,
        sigma: vec![3.8, 2.3],
        alpha: None,
        mu_bar: 2.66,
        solver: None,
    }
}

fn unit_plant(a: &[&[f64]], b: &[&[f64]]) -> PlantModel<f64> {
    PlantModel::new(
        Mat::from_f64_rows(a).unwrap(),
        Mat::from_f64_rows(b).unwrap(),
        vec![1.0],
        vec![1, 1],
        vec![0.05, 0.05],
        vec![0.3, 0.7],
    )
    .unwrap()
}

fn small_grid() -> Grid<f64> {
    Grid {
        alphas: vec![0.2, 0.8],
        sigmas: vec![vec![0.8, 2.3], vec![0.8, 2.3]],
    }
}

#[test]
fn design_point_is_verified() {
    let cert = design_point();
    assert_eq!(cert.mode, Mode::Design);
    let report = verify_certificate(&example_plant(), cert, 1e-7);
    assert!(report.passed, "{:?}", report.failures());
    assert!(report.check("design[3]").is_some());
}

#[test]
fn gain_recovery() {
    let cert = design_point();
    let y = cert.y.as_ref().unwrap();
    let kw = cert.k.matmul(cert.w.as_mat()).unwrap();
    let err = (&kw - y).frobenius_norm();
    assert!(err <= 1e-8 * (1.0 + y.frobenius_norm()), "{err}");
}

#[test]
fn design_implies_analysis() {
    let plant = example_plant();
    let cert = design_point();
    let mut vars = verify::cert_vars(&plant, cert);
    vars.j = Mat::zeros(1, 2);
    for v in enumerate_vertices(&cert.sigma, plant.t2(), plant.partition()).unwrap().iter() {
        let l = analysis_matrix(&plant, &cert.k, &vars, &v.psi).unwrap().max_eigenvalue();
        assert!(l < 0.0, "vertex {:?}: {l}", v.psi);
    }
}

#[test]
fn stable_plant_without_input_is_certified() {
    let plant = unit_plant(&[&[-1.0, 0.0], &[0.0, -1.0]], &[&[0.0], &[0.0]]);
    let res = synthesize(&plant, &small_grid(), Weights::default(), &Settings::default()).unwrap();
    assert!(verify_certificate(&plant, &res.certificate, 1e-7).passed);
    let k0 = Mat::zeros(1, 2);
    let res = analyze(&plant, &k0, &Grid { alphas: vec![], sigmas: vec![vec![1.0], vec![1.0]] }, Weights::default(), &Settings::default()).unwrap();
    assert!(res.certificate.mu_bar > 0.0);
}

#[test]
fn zero_gain_on_stable_plant_with_input() {
    let plant = unit_plant(&[&[-1.0, 0.0], &[0.0, -1.0]], &[&[0.7], &[-0.3]]);
    let k0 = Mat::zeros(1, 2);
    let grid = Grid { alphas: vec![], sigmas: vec![vec![1.0], vec![1.0]] };
    let res = analyze(&plant, &k0, &grid, Weights::default(), &Settings::default()).unwrap();
    assert!(verify_certificate(&plant, &res.certificate, 1e-7).passed);
}

#[test]
fn unstable_plant_without_input_has_no_certificate() {
    let plant = unit_plant(&[&[0.5, 0.0], &[0.0, -1.0]], &[&[0.0], &[0.0]]);
    match synthesize(&plant, &small_grid(), Weights::default(), &Settings::default()) {
        Err(CertifyError::NoCertificate { log }) => {
            assert_eq!(log.len(), 8);
            assert!(log.iter().all(|r| !r.status.is_success()), "{log:?}");
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn grid_validation() {
    let plant = example_plant();
    let bad = Grid { alphas: vec![0.4], sigmas: vec![vec![1.0]] };
    assert!(matches!(synthesize(&plant, &bad, Weights::default(), &Settings::default()), Err(CertifyError::Argument(_))));
    let neg = Grid { alphas: vec![-0.4], sigmas: vec![vec![1.0], vec![1.0]] };
    assert!(synthesize(&plant, &neg, Weights::default(), &Settings::default()).is_err());
    let g = Grid { alphas: vec![0.1], sigmas: vec![vec![1.0, 2.0], vec![3.0, 4.0]] };
    assert_eq!(g.sigma_points(), vec![vec![1.0, 3.0], vec![1.0, 4.0], vec![2.0, 3.0], vec![2.0, 4.0]]);
}

#[test]
fn example_analysis_estimate() {
    let cert = analysis_point();
    assert!(cert.mu_bar >= 2.0, "{}", cert.mu_bar);
    let w_inv = cert.w_inv().unwrap();
    let reported = [[0.0983, 0.0788], [0.0788, 0.0694]];
    for i in 0..2 {
        for j in 0..2 {
            let rel = (w_inv[(i, j)] - reported[i][j]).abs() / reported[i][j];
            assert!(rel <= 0.25, "W⁻¹[{i},{j}] = {} vs {}", w_inv[(i, j)], reported[i][j]);
        }
    }
    assert!(verify_certificate(&example_plant(), cert, 1e-7).passed);
}

#[test]
fn free_j_never_worsens_the_objective() {
    let plant = example_plant();
    let design = design_point();
    let out = solve_point(&plant, Some(&design.k), &design.sigma, None, Weights::default(), &Settings::default()).unwrap();
    let analysis = out.record.objective.unwrap();
    let d = design.solver.unwrap().objective;
    assert!(analysis <= d + 1e-6, "{analysis} vs {d}");
}

#[test]
fn negated_multiplier_fails_verification() {
    let plant = example_plant();
    let mut cert = analysis_point().clone();
    cert.s = cert.s.iter().map(|s| -s).collect();
    let report = verify_certificate(&plant, &cert, 1e-7);
    assert!(!report.passed);
    let failures = report.failures();
    assert!(failures.iter().any(|f| f == "S"));
    assert!(failures.iter().any(|f| f.starts_with("analysis[")), "{failures:?}");
}

#[test]
fn reported_values_recover_multipliers() {
    let plant = example_plant();
    let p = reported_certificate();
    let rec = recover_multipliers(&plant, &p.k, &p.w_inv().unwrap(), &p.r, &p.sigma, p.mu_bar, &Settings::default()).unwrap();
    assert!(rec.margin > 0.0, "margin {}", rec.margin);
    let report = verify_certificate(&plant, &rec.certificate, 1e-6);
    assert!(report.passed, "{:?}", report.failures());
}

#[test]
fn basin_matrix_from_reported_values() {
    let plant = example_plant();
    let b = basin_sets(&plant, &reported_certificate()).unwrap();
    let expected = [[0.0983 + 0.0141 * 1.14f64.exp(), 0.0788], [0.0788, 0.0694 + 0.01172 * 1.61f64.exp()]];
    for i in 0..2 {
        for j in 0..2 {
            assert!((b.n[(i, j)] - expected[i][j]).abs() < 1e-12);
        }
    }
    assert!((b.n[(0, 0)] - 0.1424).abs() < 1e-4 && (b.n[(1, 1)] - 0.1280).abs() < 1e-4);
    assert!((b.volume_proxy - b.p_hat_star.trace() / 2.66).abs() < 1e-15);
}

#[test]
fn basin_limits() {
    let plant = example_plant();
    let mut c = reported_certificate();
    c.r = vec![SymMatrix::from_diag(&[0.0]), SymMatrix::from_diag(&[0.0])];
    let b = basin_sets(&plant, &c).unwrap();
    assert!((&b.n.into_mat() - c.w_inv().unwrap().as_mat()).max_abs() < 1e-15);
    let mut c = reported_certificate();
    c.sigma = vec![0.0, 0.0];
    let b = basin_sets(&plant, &c).unwrap();
    assert!((b.n[(0, 0)] - (0.0983 + 0.0141)).abs() < 1e-12);
    assert!((b.n[(1, 1)] - (0.0694 + 0.01172)).abs() < 1e-12);
}

#[test]
fn membership_examples() {
    let plant = example_plant();
    let c = reported_certificate();
    assert!(membership(&plant, &c, &[0.0; 4], &Tau::Worst).unwrap());
    assert!(membership(&plant, &c, &[0.0; 4], &Tau::At(vec![0.1, 0.2])).unwrap());
    // x_pᵀW⁻¹x_p = 4·0.0983 − 32·0.0788 + 64·0.0694
    let lvl = quadratic_level(&plant, &c, &[2.0, -8.0, 0.0, 0.0], &Tau::Worst).unwrap();
    assert!((lvl - 2.3132).abs() < 1e-9, "{lvl}");
    assert!(membership(&plant, &c, &[2.0, -8.0, 0.0, 0.0], &Tau::Worst).unwrap());
    // controller started at zero: η̃ = x_p
    let lvl = quadratic_level(&plant, &c, &[2.0, -8.0, 2.0, -8.0], &Tau::Worst).unwrap();
    let expected = 2.3132 + 4.0 * 0.0141 * 1.14f64.exp() + 64.0 * 0.01172 * 1.61f64.exp();
    assert!((lvl - expected).abs() < 1e-9);
    assert!(!membership(&plant, &c, &[2.0, -8.0, 2.0, -8.0], &Tau::Worst).unwrap());
    assert!(matches!(membership(&plant, &c, &[0.0; 4], &Tau::At(vec![0.5, 0.2])), Err(CertifyError::Argument(_))));
    assert!(membership(&plant, &c, &[0.0; 3], &Tau::Worst).is_err());
}

#[test]
fn hybrid_rate_arithmetic() {
    let (l, th) = hybrid_rate(1.0f64, 0.5, 2);
    assert!((l - 1.0 / 3.0).abs() < 1e-15);
    assert!((th - 2.0 / 3.0).abs() < 1e-15);
}

#[test]
fn decay_constants_are_consistent() {
    let plant = example_plant();
    let d = decay_certificate(&plant, analysis_point()).unwrap();
    assert!(d.c1 > 0.0 && d.c1 <= d.c2 && d.c3 > 0.0);
    assert!(d.lambda > 0.0 && d.lambda <= d.lambda_t * d.tau_d / (1.0 + d.tau_d) * (1.0 + 1e-12));
    assert!(d.vartheta >= d.lambda * 2.0 * (1.0 - 1e-12));
    assert!((d.kappa - d.vartheta.exp() * (d.c2 / d.c1).sqrt()).abs() < 1e-12 * d.kappa);
    assert_eq!(d.tau_d, 0.05);
}

#[test]
fn flat_lyapunov_gives_minimal_overshoot() {
    // W⁻¹ = I, Rᵢ = 1 and σ → 0: P̂ is constant, so κ = e^ϑ.
    let plant = unit_plant(&[&[-1.0, 0.0], &[0.0, -1.0]], &[&[0.0], &[0.0]]);
    let cert = StabilityCertificate {
        mode: Mode::Analysis,
        k: Mat::zeros(1, 2),
        w: SymMatrix::identity(2),
        r: vec![SymMatrix::identity(1), SymMatrix::identity(1)],
        s: vec![1.0],
        z: Mat::zeros(1, 2),
        j: Mat::zeros(1, 2),
        y: None,
        mw: None,
        sigma: vec![1e-14, 1e-14],
        alpha: None,
        mu_bar: 1.0,
        solver: None,
    };
    let d = decay_certificate(&plant, &cert).unwrap();
    assert!((d.c1 - d.c2).abs() < 1e-12);
    assert!((d.kappa - d.vartheta.exp()).abs() < 1e-12);
}

#[test]
fn marginal_certificate_is_reported() {
    let plant = unit_plant(&[&[0.0, 0.0], &[0.0, -1.0]], &[&[0.0], &[0.0]]);
    let mut cert = reported_certificate();
    cert.k = Mat::zeros(1, 2);
    cert.w = SymMatrix::identity(2);
    assert!(matches!(decay_certificate(&plant, &cert), Err(CertifyError::Marginal { .. })));
}

#[test]
fn document_round_trip() {
    let plant = example_plant();
    let cert = design_point();
    let basin = basin_sets(&plant, cert).unwrap();
    let doc = CertificateDocument::new(cert, Some(&basin), vec![]);
    let text = serde_json::to_string_pretty(&doc).unwrap();
    let back: CertificateDocument = serde_json::from_str(&text).unwrap();
    let c2: StabilityCertificate<f64> = back.certificate().unwrap();
    assert_eq!(&c2, cert);
    let mut bad = back.clone();
    bad.schema_version += 1;
    assert!(bad.certificate::<f64>().is_err());
}

fn in_estimate(cert: &StabilityCertificate<f64>, dir: &[f64], scale: f64) -> Vec<f64> {
    let plant = example_plant();
    let lvl = quadratic_level(&plant, cert, dir, &Tau::Worst).unwrap();
    dir.iter().map(|d| d * scale * (cert.mu_bar / lvl).sqrt()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn inner_ellipsoid_lies_in_every_slice(
        dir in proptest::collection::vec(-1.0f64..1.0, 4),
        scale in 0.0f64..1.0,
        t1 in 0.0f64..=0.3,
        t2 in 0.0f64..=0.7,
    ) {
        prop_assume!(dir.iter().any(|d| d.abs() > 1e-3));
        let cert = analysis_point();
        let x = in_estimate(cert, &dir, scale);
        prop_assert!(membership(&example_plant(), cert, &x, &Tau::At(vec![t1, t2])).unwrap());
    }

    #[test]
    fn level_set_respects_input_bound(
        dir in proptest::collection::vec(-1.0f64..1.0, 4),
        scale in 0.0f64..1.0,
        t1 in 0.0f64..=0.3,
        t2 in 0.0f64..=0.7,
    ) {
        prop_assume!(dir.iter().any(|d| d.abs() > 1e-3));
        let plant = example_plant();
        let cert = analysis_point();
        let lvl = quadratic_level(&plant, cert, &dir, &Tau::At(vec![t1, t2])).unwrap();
        let x: Vec<f64> = dir.iter().map(|d| d * scale * (cert.mu_bar / lvl).sqrt()).collect();
        let l = cert.l_matrix().unwrap();
        let lx = l.matvec(&x).unwrap();
        prop_assert!(lx[0].abs() <= 1.0 + 1e-8, "{}", lx[0]);
    }

    #[test]
    fn sector_condition_holds(
        dir in proptest::collection::vec(-1.0f64..1.0, 4),
        scale in 0.0f64..1.0,
        u in -50.0f64..50.0,
    ) {
        prop_assume!(dir.iter().any(|d| d.abs() > 1e-3));
        let cert = analysis_point();
        let x = in_estimate(cert, &dir, scale);
        let lx = cert.l_matrix().unwrap().matvec(&x).unwrap()[0];
        let dz = deadzone(&[u], &[1.0])[0];
        let v = dz / cert.s[0] * (dz + u + lx);
        prop_assert!(v <= 1e-9, "{v}");
    }
}

#[test]
fn lmi_variables_round_trip_through_certificate() {
    let plant = example_plant();
    let cert = analysis_point();
    let vars: LmiVariables<f64> = verify::cert_vars(&plant, cert);
    assert_eq!(vars.w, cert.w);
    assert_eq!(vars.s, cert.s);
}
