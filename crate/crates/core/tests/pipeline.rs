use satstab_core::certify::{
    analyze, basin_sets, decay_certificate, membership, synthesize, verify_certificate, CertificateDocument,
    Grid, Settings, Tau,
};
use satstab_core::hybrid_sim::{monitor, simulate, HybridState, SamplingSchedule, ScheduleMode, SimOptions};
use satstab_core::lmi::{PlantModel, Weights};
use satstab_core::symmat::{Mat, SymMatrix};
use satstab_core::{Certificate, Plant};

fn example() -> Plant {
    PlantModel::new(
        Mat::from_f64_rows(&[&[-0.8, -0.01], &[1.0, 0.1]]).unwrap(),
        Mat::from_f64_rows(&[&[0.4], &[0.1]]).unwrap(),
        vec![1.0],
        vec![1, 1],
        vec![0.015, 0.035],
        vec![0.3, 0.7],
    )
    .unwrap()
}

fn design() -> Certificate {
    let grid = Grid {
        alphas: vec![0.2, 0.4],
        sigmas: vec![vec![1.8], vec![2.3]],
    };
    synthesize(&example(), &grid, Weights::default(), &Settings::default())
        .unwrap()
        .certificate
}

#[test]
fn design_then_analysis_round_trips_through_json() {
    let plant = example();
    let cert = design();
    assert!(verify_certificate(&plant, &cert, 1e-7).passed);

    let res = analyze(&plant, &cert.k, &Grid::single(vec![3.8, 2.3], 1.0), Weights::default(), &Settings::default())
        .unwrap();
    let doc = CertificateDocument::new(&res.certificate, Some(&res.basin), res.log.clone());
    let text = serde_json::to_string(&doc).unwrap();
    let back: CertificateDocument = serde_json::from_str(&text).unwrap();
    let reloaded: Certificate = back.certificate().unwrap();
    assert_eq!(reloaded, res.certificate);
    assert!(verify_certificate(&plant, &reloaded, 1e-7).passed);
    assert!(reloaded.mu_bar >= cert.mu_bar * 0.9);
}

#[test]
fn basin_slice_is_inside_the_estimate() {
    let plant = example();
    let cert = design();
    let basin = basin_sets(&plant, &cert).unwrap();
    let w_inv = cert.w_inv().unwrap();
    let sum = w_inv.add(&SymMatrix::from_diag(&[
        cert.r[0].as_mat().row(0)[0] * (cert.sigma[0] * 0.3).exp(),
        cert.r[1].as_mat().row(0)[0] * (cert.sigma[1] * 0.7).exp(),
    ]));
    for (a, b) in basin.n.as_slice().iter().zip(sum.as_slice()) {
        assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
    }
    // Boundary points of the slice with η̃ = x_p lie in every timer slice.
    for k in 0..16 {
        let th = k as f64 * std::f64::consts::PI / 8.0;
        let d = [th.cos(), th.sin()];
        let s = (basin.mu_bar / basin.n.quad_form(&d).unwrap()).sqrt() * (1.0 - 1e-9);
        let x = [s * d[0], s * d[1], s * d[0], s * d[1]];
        assert!(membership(&plant, &cert, &x, &Tau::Worst).unwrap());
        assert!(membership(&plant, &cert, &x, &Tau::At(vec![0.1, 0.2])).unwrap());
    }
}

#[test]
fn monitored_runs_respect_the_certificate() {
    let plant = example();
    let cert = design();
    let decay = decay_certificate(&plant, &cert).unwrap();
    assert!(decay.c1 <= decay.c2 && decay.kappa >= 1.0);
    let x0 = HybridState::new(vec![-1.0, 2.0], vec![0.0, 0.0], vec![0.3, 0.7]);
    for mode in [ScheduleMode::ConstantT2, ScheduleMode::UniformRandom { seed: 3 }] {
        let mut sched = SamplingSchedule::for_plant(mode, &plant).unwrap();
        let traj = simulate(&x0, &plant, &cert.k, &mut sched, &SimOptions::horizon(5.0), Some(&cert)).unwrap();
        let report = monitor(&traj, &plant, &cert).unwrap();
        assert!(report.in_region_start);
        assert_eq!(report.lyapunov_violations(), 0, "{:?}", report.violations);
        assert!(report.jumps_checked > 10);
    }
}

#[test]
fn single_precision_simulation_tracks_double() {
    let p64 = example();
    let p32: PlantModel<f32> = PlantModel::new(
        Mat::from_f64_rows(&[&[-0.8, -0.01], &[1.0, 0.1]]).unwrap(),
        Mat::from_f64_rows(&[&[0.4], &[0.1]]).unwrap(),
        vec![1.0],
        vec![1, 1],
        vec![0.015, 0.035],
        vec![0.3, 0.7],
    )
    .unwrap();
    let k64 = Mat::from_f64_rows(&[&[-0.444, -0.495]]).unwrap();
    let k32: Mat<f32> = Mat::from_f64_rows(&[&[-0.444, -0.495]]).unwrap();
    let opts64 = SimOptions::horizon(5.0);
    let opts32 = SimOptions { t_max: 5.0f32, j_max: opts64.j_max, h_max: 1e-3 };
    let mut s64 = SamplingSchedule::for_plant(ScheduleMode::ConstantT2, &p64).unwrap();
    let mut s32 = SamplingSchedule::for_plant(ScheduleMode::ConstantT2, &p32).unwrap();
    let a = simulate(&HybridState::new(vec![-2.0, 5.0], vec![0.0; 2], vec![0.3, 0.7]), &p64, &k64, &mut s64, &opts64, None)
        .unwrap();
    let b = simulate(
        &HybridState::new(vec![-2.0f32, 5.0], vec![0.0; 2], vec![0.3, 0.7]),
        &p32,
        &k32,
        &mut s32,
        &opts32,
        None,
    )
    .unwrap();
    assert_eq!(a.jumps(), b.jumps());
    for (x, y) in a.last().state.xp.iter().zip(&b.last().state.xp) {
        assert!((x - *y as f64).abs() < 1e-3, "{x} vs {y}");
    }
}
