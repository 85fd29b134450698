use proptest::prelude::*;

use super::*;
use crate::lmi::Mode;
use crate::symmat::SymMatrix;

fn example(t1: f64) -> PlantModel<f64> {
    PlantModel::new(
        Mat::from_f64_rows(&[&[-0.8, -0.01], &[1.0, 0.1]]).unwrap(),
        Mat::from_f64_rows(&[&[0.4], &[0.1]]).unwrap(),
        vec![1.0],
        vec![1, 1],
        vec![t1, t1],
        vec![0.3, 0.7],
    )
    .unwrap()
}

fn reported_k() -> Mat<f64> {
    Mat::from_f64_rows(&[&[-0.444, -0.495]]).unwrap()
}

fn null_plant() -> PlantModel<f64> {
    PlantModel::new(Mat::zeros(2, 2), Mat::zeros(2, 1), vec![1.0], vec![1, 1], vec![0.05, 0.05], vec![0.3, 0.7]).unwrap()
}

fn identity_cert(sigma: f64) -> StabilityCertificate<f64> {
    StabilityCertificate {
        mode: Mode::Analysis,
        k: Mat::zeros(1, 2),
        w: SymMatrix::identity(2),
        r: vec![SymMatrix::identity(1), SymMatrix::identity(1)],
        s: vec![1.0],
        z: Mat::zeros(1, 2),
        j: Mat::zeros(1, 2),
        y: None,
        mw: None,
        sigma: vec![sigma, sigma],
        alpha: None,
        mu_bar: 1.0,
        solver: None,
    }
}

fn state(x: [f64; 4], tau: [f64; 2]) -> HybridState<f64> {
    HybridState::new(x[..2].to_vec(), x[2..].to_vec(), tau.to_vec())
}

#[test]
fn saturation_examples() {
    let u = [1.0];
    assert_eq!(saturate(&[1.5], &u), vec![1.0]);
    assert_eq!(deadzone(&[1.5], &u), vec![-0.5]);
    assert_eq!(saturate(&[-0.3], &u), vec![-0.3]);
    assert_eq!(deadzone(&[-0.3], &u), vec![0.0]);
    assert_eq!(saturate(&[-2.0], &u), vec![-1.0]);
    assert_eq!(deadzone(&[-2.0], &u), vec![1.0]);
}

#[test]
fn null_flow_only_moves_timers() {
    let (dx, dt) = flow_field(&state([1.0, 2.0, 3.0, 4.0], [0.1, 0.2]), &null_plant(), &Mat::zeros(1, 2)).unwrap();
    assert_eq!(dx, vec![0.0; 4]);
    assert_eq!(dt, vec![-1.0, -1.0]);
}

#[test]
fn linear_region_flow() {
    let plant = example(0.05);
    let k = reported_k();
    let xp = [0.5, -0.4];
    let (dx, _) = flow_field(&state([xp[0], xp[1], 0.0, 0.0], [0.1, 0.1]), &plant, &k).unwrap();
    let kx = -0.444 * xp[0] - 0.495 * xp[1];
    let expected = [-0.8 * xp[0] - 0.01 * xp[1] + 0.4 * kx, xp[0] + 0.1 * xp[1] + 0.1 * kx];
    assert!((dx[0] - expected[0]).abs() < 1e-15 && (dx[1] - expected[1]).abs() < 1e-15);
    assert_eq!(&dx[2..], &[0.0, 0.0]);
}

#[test]
fn saturated_flow_example() {
    let plant = example(0.05);
    let s = state([-2.0, 5.0, 0.0, 0.0], [0.3, 0.7]);
    let cl = ClosedLoop::new(&plant, &reported_k()).unwrap();
    let v = -0.444 * -2.0 + -0.495 * 5.0;
    assert!((v - -1.587f64).abs() < 1e-12);
    assert_eq!(cl.input(&s.xbar()), vec![-1.0]);
    let (dx, _) = flow_field(&s, &plant, &reported_k()).unwrap();
    assert!((dx[0] - 1.15).abs() < 1e-12, "{}", dx[0]);
    assert!((dx[1] - -1.6).abs() < 1e-12, "{}", dx[1]);
}

#[test]
fn flow_rejects_bad_timers() {
    assert!(matches!(
        flow_field(&state([0.0; 4], [0.4, 0.1]), &null_plant(), &Mat::zeros(1, 2)),
        Err(SimError::Contract(_))
    ));
    assert!(flow_field(&state([0.0; 4], [0.1, 0.1]), &null_plant(), &Mat::zeros(2, 2)).is_err());
}

#[test]
fn single_channel_jump() {
    let plant = null_plant();
    let mut sched = SamplingSchedule::for_plant(ScheduleMode::UniformRandom { seed: 3 }, &plant).unwrap();
    let out = jump(&state([1.0, 2.0, 3.0, 4.0], [0.0, 0.5]), &plant, &mut sched, 0.0).unwrap();
    assert_eq!(out.len(), 1);
    let g = &out[0];
    assert_eq!(g.eta_tilde, vec![0.0, 4.0]);
    assert_eq!(g.xp, vec![1.0, 2.0]);
    assert!(g.tau[0] >= 0.05 && g.tau[0] <= 0.3);
    assert_eq!(g.tau[1], 0.5);
}

#[test]
fn simultaneous_jumps_are_sequential() {
    let plant = null_plant();
    let mut sched = SamplingSchedule::for_plant(ScheduleMode::ConstantT2, &plant).unwrap();
    let out = jump(&state([1.0, 2.0, 3.0, 4.0], [0.0, 0.0]), &plant, &mut sched, 1.0).unwrap();
    assert_eq!(out.len(), 2);
    assert_eq!(out[0].eta_tilde, vec![0.0, 4.0]);
    assert_eq!(out[0].tau, vec![0.3, 0.0]);
    assert_eq!(out[1].eta_tilde, vec![0.0, 0.0]);
    assert_eq!(out[1].tau, vec![0.3, 0.7]);
    assert!(out.iter().all(|s| s.xp == vec![1.0, 2.0]));
    assert!(matches!(
        jump(&state([0.0; 4], [0.1, 0.1]), &plant, &mut sched, 0.0),
        Err(SimError::Contract(_))
    ));
}

#[test]
fn first_jump_lands_on_the_timer() {
    let plant = null_plant();
    let mut sched = SamplingSchedule::for_plant(ScheduleMode::ConstantT2, &plant).unwrap();
    let traj = simulate(&state([1.0, 1.0, 1.0, 1.0], [0.3, 0.7]), &plant, &Mat::zeros(1, 2), &mut sched, &SimOptions::horizon(1.0), None).unwrap();
    let first = traj.samples.iter().find(|s| s.j == 1).unwrap();
    assert_eq!(first.t, 0.3);
    assert_eq!(first.state.eta_tilde, vec![0.0, 1.0]);
    assert_eq!(traj.status, SimStatus::Completed);
    // jumps at 0.3, 0.6, 0.7, 0.9
    assert_eq!(traj.jumps(), 4);
    assert_eq!(traj.last().t, 1.0);
}

#[test]
fn timers_decrease_exactly_between_jumps() {
    let plant = example(0.05);
    let mut sched = SamplingSchedule::for_plant(ScheduleMode::Sinusoidal { frequency: 10.0 }, &plant).unwrap();
    let traj = simulate(&state([-2.0, 5.0, 0.0, 0.0], [0.3, 0.7]), &plant, &reported_k(), &mut sched, &SimOptions::horizon(3.0), None).unwrap();
    let mut anchor = &traj.samples[0];
    for s in &traj.samples[1..] {
        if s.j != anchor.j {
            anchor = s;
            continue;
        }
        for (a, b) in anchor.state.tau.iter().zip(&s.state.tau) {
            let expected = (a - (s.t - anchor.t)).max(0.0);
            assert!((b - expected).abs() <= 4.0 * f64::EPSILON, "{b} vs {expected}");
        }
    }
}

#[test]
fn hybrid_time_domain_is_well_formed() {
    let plant = example(0.05);
    let mut sched = SamplingSchedule::for_plant(ScheduleMode::UniformRandom { seed: 11 }, &plant).unwrap();
    let traj = simulate(&state([-2.0, 5.0, 1.0, -1.0], [0.0, 0.0]), &plant, &reported_k(), &mut sched, &SimOptions::horizon(5.0), None).unwrap();
    for w in traj.samples.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        if b.j == a.j {
            assert!(b.t > a.t);
        } else {
            assert_eq!(b.j, a.j + 1);
            assert_eq!(b.t, a.t);
        }
        for (ti, t2) in b.state.tau.iter().zip(plant.t2()) {
            assert!(*ti >= 0.0 && ti <= t2);
        }
    }
    assert_eq!(traj.domain.last().unwrap().j, traj.jumps());
    for w in traj.domain.windows(2) {
        assert_eq!(w[1].j, w[0].j + 1);
        assert_eq!(w[1].t_start, w[0].t_end);
    }
    let tau_d = plant.tau_d();
    for s in &traj.samples {
        assert!(tau_d * s.j as f64 <= s.t + 2.0 * tau_d + 1e-12);
    }
}

#[test]
fn jump_limit_stops_the_run() {
    let plant = null_plant();
    let mut sched = SamplingSchedule::for_plant(ScheduleMode::ConstantT2, &plant).unwrap();
    let opts = SimOptions { t_max: 100.0, j_max: 5, h_max: 1e-2 };
    let traj = simulate(&state([0.0; 4], [0.3, 0.7]), &plant, &Mat::zeros(1, 2), &mut sched, &opts, None).unwrap();
    assert_eq!(traj.status, SimStatus::JumpLimit);
    assert_eq!(traj.jumps(), 5);
}

#[test]
fn divergence_is_flagged() {
    let plant = PlantModel::new(Mat::from_f64_rows(&[&[5.0]]).unwrap(), Mat::zeros(1, 1), vec![1.0], vec![1], vec![0.1], vec![0.2]).unwrap();
    let mut sched = SamplingSchedule::for_plant(ScheduleMode::ConstantT2, &plant).unwrap();
    let x0 = HybridState::new(vec![1.0], vec![0.0], vec![0.2]);
    let traj = simulate(&x0, &plant, &Mat::zeros(1, 1), &mut sched, &SimOptions::horizon(100.0), None).unwrap();
    assert_eq!(traj.status, SimStatus::Diverged);
    assert!(traj.last().t < 10.0);
}

fn expm(a: &Mat<f64>, t: f64) -> Mat<f64> {
    let s = 10;
    let m = a.scale(t / f64::powi(2.0, s));
    let mut term = Mat::identity(a.rows());
    let mut acc = term.clone();
    for k in 1..30 {
        term = (&term * &m).scale(1.0 / k as f64);
        acc = &acc + &term;
    }
    for _ in 0..s {
        acc = &acc * &acc;
    }
    acc
}

#[test]
fn zero_error_run_matches_linear_flow() {
    let plant = PlantModel::new(
        Mat::from_f64_rows(&[&[-0.8, -0.01], &[1.0, 0.1]]).unwrap(),
        Mat::from_f64_rows(&[&[0.4], &[0.1]]).unwrap(),
        vec![1.0],
        vec![1, 1],
        vec![0.3, 0.7],
        vec![0.3, 0.7],
    )
    .unwrap();
    let k = reported_k();
    let mut sched = SamplingSchedule::for_plant(ScheduleMode::ConstantT2, &plant).unwrap();
    let x0 = [0.5, -0.6];
    let traj = simulate(&state([x0[0], x0[1], 0.0, 0.0], [0.3, 0.7]), &plant, &k, &mut sched, &SimOptions::horizon(5.0), None).unwrap();
    let acl = plant.a() + &plant.b().matmul(&k).unwrap();
    for s in traj.samples.iter().step_by(97) {
        assert!(s.u[0].abs() < 1.0);
        assert_eq!(s.state.eta_tilde, vec![0.0, 0.0]);
        let exact = expm(&acl, s.t).matvec(&x0).unwrap();
        for (a, b) in s.state.xp.iter().zip(&exact) {
            assert!((a - b).abs() < 1e-10, "t = {}: {a} vs {b}", s.t);
        }
    }
}

#[test]
fn rk4_converges_at_fourth_order() {
    let plant = example(0.05);
    let run = |h: f64| {
        let mut sched = SamplingSchedule::for_plant(ScheduleMode::Sinusoidal { frequency: 10.0 }, &plant).unwrap();
        let opts = SimOptions { t_max: 2.0, j_max: usize::MAX, h_max: h };
        simulate(&state([-2.0, 5.0, 0.0, 0.0], [0.3, 0.7]), &plant, &reported_k(), &mut sched, &opts, None)
            .unwrap()
            .last()
            .state
            .xp
            .clone()
    };
    let hs = [4e-2, 2e-2, 1e-2, 5e-3];
    let xs: Vec<Vec<f64>> = hs.iter().map(|&h| run(h)).collect();
    let diff = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    for w in 0..2 {
        let e1 = diff(&xs[w], &xs[w + 1]);
        let e2 = diff(&xs[w + 1], &xs[w + 2]);
        let order = (e1 / e2).log2();
        assert!(order >= 3.5, "observed order {order} ({e1:e}, {e2:e})");
    }
}

#[test]
fn lyapunov_examples() {
    let plant = null_plant();
    let c = identity_cert(0.0);
    assert_eq!(lyapunov_eval(&state([0.0; 4], [0.1, 0.2]), &c, &plant).unwrap(), 0.0);
    assert!((lyapunov_eval(&state([1.0, 2.0, 3.0, 4.0], [0.1, 0.2]), &c, &plant).unwrap() - 30.0).abs() < 1e-12);
    let c = identity_cert(2.0);
    let a = lyapunov_eval(&state([1.0, 2.0, 0.0, 0.0], [0.0, 0.0]), &c, &plant).unwrap();
    let b = lyapunov_eval(&state([1.0, 2.0, 0.0, 0.0], [0.3, 0.7]), &c, &plant).unwrap();
    assert_eq!(a, b);
    let v = lyapunov_eval(&state([0.0, 0.0, 1.0, 0.0], [0.3, 0.0]), &c, &plant).unwrap();
    assert!((v - 0.6f64.exp()).abs() < 1e-12);
}

#[test]
fn jumps_drop_v_by_the_zeroed_term() {
    let plant = null_plant();
    let cert = identity_cert(1.0);
    let mut sched = SamplingSchedule::for_plant(ScheduleMode::ConstantT2, &plant).unwrap();
    let traj = simulate(&state([0.0, 0.0, 2.0, 3.0], [0.3, 0.7]), &plant, &Mat::zeros(1, 2), &mut sched, &SimOptions::horizon(0.8), Some(&cert)).unwrap();
    let pre = traj.samples.iter().rposition(|s| s.j == 0).unwrap();
    let (a, b) = (&traj.samples[pre], &traj.samples[pre + 1]);
    assert_eq!(a.t, 0.3);
    assert!((a.v - b.v - 4.0).abs() < 1e-12, "{} -> {}", a.v, b.v);
    let report = monitor(&traj, &plant, &cert).unwrap();
    assert_eq!(report.count(ViolationKind::JumpIncrease), 0);
    assert_eq!(report.jumps_checked, 3);
    assert!(!report.in_region_start);
    assert_eq!(report.flow_steps_checked, 0);
}

#[test]
fn schedule_parsing() {
    assert_eq!("constant".parse::<ScheduleMode>().unwrap(), ScheduleMode::ConstantT2);
    assert_eq!("uniform:7".parse::<ScheduleMode>().unwrap(), ScheduleMode::UniformRandom { seed: 7 });
    assert_eq!("random".parse::<ScheduleMode>().unwrap(), ScheduleMode::UniformRandom { seed: 0 });
    assert_eq!("sinusoidal:10".parse::<ScheduleMode>().unwrap(), ScheduleMode::Sinusoidal { frequency: 10.0 });
    assert!("sinusoidal".parse::<ScheduleMode>().is_err());
    assert!("sinusoidal:-1".parse::<ScheduleMode>().is_err());
    assert!("weekly".parse::<ScheduleMode>().is_err());
    for m in ["constant", "uniform:3", "sinusoidal:2.5"] {
        let parsed: ScheduleMode = m.parse().unwrap();
        assert_eq!(parsed.to_string(), m);
    }
}

#[test]
fn seeded_schedules_repeat() {
    let mk = || SamplingSchedule::<f64>::new(ScheduleMode::UniformRandom { seed: 42 }, vec![0.05], vec![0.3]).unwrap();
    let (mut a, mut b) = (mk(), mk());
    for k in 0..50 {
        assert_eq!(a.next(0, k as f64), b.next(0, k as f64));
    }
    assert!(SamplingSchedule::<f64>::new(ScheduleMode::ConstantT2, vec![0.4], vec![0.3]).is_err());
}

proptest! {
    #[test]
    fn schedule_values_stay_in_range(
        seed in any::<u64>(),
        t in 0.0f64..100.0,
        t1 in 0.01f64..1.0,
        width in 0.0f64..1.0,
        freq in 0.1f64..50.0,
    ) {
        let t2 = t1 + width;
        for mode in [ScheduleMode::ConstantT2, ScheduleMode::UniformRandom { seed }, ScheduleMode::Sinusoidal { frequency: freq }] {
            let mut s = SamplingSchedule::new(mode, vec![t1], vec![t2]).unwrap();
            for k in 0..5 {
                let v = s.next(0, t + k as f64);
                prop_assert!(v >= t1 && v <= t2);
            }
        }
    }

    #[test]
    fn deadzone_is_sat_minus_identity(v in -10.0f64..10.0, u in 0.01f64..5.0) {
        let s = saturate(&[v], &[u])[0];
        prop_assert!(s.abs() <= u);
        prop_assert_eq!(deadzone(&[v], &[u])[0], s - v);
        if v.abs() <= u {
            prop_assert_eq!(s, v);
        }
    }
}
