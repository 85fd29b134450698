use super::*;
use crate::sdp::LmiConstraint;
use crate::symmat::{sym_eig, BlockSpec, Mat, SymMatrix};
use proptest::prelude::*;

fn example_plant() -> PlantModel<f64> {
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

fn stable_plant(b: f64) -> PlantModel<f64> {
    PlantModel::new(
        Mat::identity(2).scale(-1.0),
        Mat::from_f64_rows(&[&[b], &[0.0]]).unwrap(),
        vec![1.0],
        vec![1, 1],
        vec![0.1, 0.1],
        vec![0.3, 0.7],
    )
    .unwrap()
}

fn unit_vars(plant: &PlantModel<f64>, sigma: f64) -> LmiVariables<f64> {
    let mut v = LmiVariables::zeros(plant.n(), plant.m(), plant.partition().dims(), vec![sigma; plant.q()], None);
    v.w = SymMatrix::identity(plant.n());
    v.r = plant.partition().dims().iter().map(|&d| SymMatrix::identity(d)).collect();
    v.s = vec![1.0; plant.m()];
    v.iota = 1.0;
    v
}

#[test]
fn example_vertices() {
    let p = BlockSpec::new(vec![1, 1]).unwrap();
    let vs = enumerate_vertices(&[1.8, 2.3], &[0.3, 0.7], &p).unwrap();
    assert_eq!(vs.len(), 4);
    let e1 = 0.54f64.exp();
    let e2 = 1.61f64.exp();
    assert!((e1 - 1.7160).abs() < 1e-4 && (e2 - 5.0028).abs() < 1e-4);
    let expected = [[1.0, 1.0], [1.0, e2], [e1, 1.0], [e1, e2]];
    for (v, e) in vs.iter().zip(expected) {
        assert!((v.psi[0] - e[0]).abs() < 1e-15 && (v.psi[1] - e[1]).abs() < 1e-15);
    }
}

#[test]
fn degenerate_interval_vertices_collapse() {
    let p = BlockSpec::new(vec![1]).unwrap();
    let vs = enumerate_vertices(&[1.0], &[0.0], &p).unwrap();
    assert_eq!(vs.len(), 2);
    for v in vs.iter() {
        assert_eq!(v.matrix(&p), Mat::identity(1));
    }
}

#[test]
fn three_channel_vertices_are_theta_corners() {
    let p = BlockSpec::new(vec![1, 1, 1]).unwrap();
    let sigma = [0.7, 1.9, 3.1];
    let t2 = [0.2, 0.45, 0.9];
    let vs = enumerate_vertices(&sigma, &t2, &p).unwrap();
    assert_eq!(vs.len(), 8);
    let mut corners = Vec::new();
    for c in 0..8usize {
        let tau: Vec<f64> = (0..3).map(|i| if c & (1 << i) != 0 { t2[i] } else { 0.0 }).collect();
        corners.push(theta(&sigma, &tau));
    }
    for v in vs.iter() {
        assert!(corners.iter().any(|c| c.iter().zip(&v.psi).all(|(a, b)| (a - b).abs() < 1e-14)));
        assert!(v.psi.iter().all(|&x| x >= 1.0));
    }
    for c in &corners {
        assert!(vs.iter().any(|v| c.iter().zip(&v.psi).all(|(a, b)| (a - b).abs() < 1e-14)));
    }
}

#[test]
fn too_many_channels_refused() {
    let p = BlockSpec::new(vec![1; 21]).unwrap();
    assert!(enumerate_vertices(&[1.0; 21], &[0.1; 21], &p).is_err());
}

#[test]
fn inclusion_examples() {
    let plant = stable_plant(1.0);
    let mut v = unit_vars(&plant, 1.0);
    let m = inclusion_matrix(&plant, &v, 0, Mode::Analysis).unwrap();
    assert_eq!(m.dim(), 5);
    assert!((m.min_eigenvalue() - 1.0).abs() < 1e-12);
    v.iota = 0.0;
    let m = inclusion_matrix(&plant, &v, 0, Mode::Design).unwrap();
    assert!(m.min_eigenvalue().abs() < 1e-12);
    assert!(inclusion_matrix(&plant, &v, 1, Mode::Design).is_err());
}

#[test]
fn analysis_hand_assembly() {
    let plant = stable_plant(0.0);
    let mut v = unit_vars(&plant, 1.0);
    let k = Mat::zeros(1, 2);
    let m = analysis_matrix(&plant, &k, &v, &[1.0, 1.0]).unwrap();
    let expected = Mat::from_diag(&[-2.0, -2.0, -3.0, -3.0, -2.0]);
    assert_eq!(m.as_mat(), &expected);
    assert!(is_neg(&m));
    v.s = vec![0.0];
    let m = analysis_matrix(&plant, &k, &v, &[1.0, 1.0]).unwrap();
    assert!(!is_neg(&m));
}

fn is_neg(m: &SymMatrix<f64>) -> bool {
    crate::symmat::is_definite(m, crate::symmat::Definiteness::Neg, 0.0)
}

#[test]
fn design_hand_assembly() {
    let plant = stable_plant(0.0);
    let v = unit_vars(&plant, 1.0);
    let m = design_matrix(&plant, &v, 1.0, &[1.0, 1.0]).unwrap();
    assert_eq!(m.dim(), 7);
    // The αI coupling pairs -2 with He(-I) - I = -3: eigenvalues (-5 ± √5)/2.
    let lmax = sym_eig(&m).max();
    assert!((lmax - (-5.0 + 5f64.sqrt()) / 2.0).abs() < 1e-12, "{lmax}");
    assert!(design_matrix(&plant, &v, 0.0, &[1.0, 1.0]).is_err());
}

#[test]
fn weighted_r_is_exactly_symmetric() {
    let plant = example_plant();
    let mut v = unit_vars(&plant, 1.0);
    v.sigma = vec![3.8, 2.3];
    v.r = vec![SymMatrix::from_diag(&[0.0141]), SymMatrix::from_diag(&[0.01172])];
    let vs = enumerate_vertices(&v.sigma, plant.t2(), plant.partition()).unwrap();
    let k = Mat::from_f64_rows(&[&[-0.444, -0.495]]).unwrap();
    for vx in vs.iter() {
        let m = analysis_matrix(&plant, &k, &v, &vx.psi).unwrap();
        let raw = m.as_mat();
        assert_eq!(raw, &raw.transpose());
    }
}

#[test]
fn objective_coefficients() {
    let plant = example_plant();
    let layout = VarLayout::new(&plant, Mode::Design, vec![1.8, 2.3], Some(0.4)).unwrap();
    let c = assemble_objective(&layout, Weights { rho1: 1.0, rho2: 1.0 }, &plant);
    let r1 = layout.r_indices(0)[0].2;
    let r2 = layout.r_indices(1)[0].2;
    assert!((c[r1] - 1.7160).abs() < 1e-4);
    assert!((c[r2] - 5.0028).abs() < 1e-4);
    assert_eq!(c[layout.iota_index()], 1.0);
    let only_iota = assemble_objective(&layout, Weights { rho1: 2.5, rho2: 0.0 }, &plant);
    assert_eq!(only_iota.iter().filter(|&&x| x != 0.0).count(), 1);
    let doubled = assemble_objective(&layout, Weights { rho1: 2.0, rho2: 2.0 }, &plant);
    for (a, b) in c.iter().zip(&doubled) {
        assert_eq!(2.0 * a, *b);
    }
}

#[test]
fn layout_round_trip() {
    let plant = example_plant();
    for (mode, alpha) in [(Mode::Design, Some(0.4)), (Mode::Analysis, None)] {
        let layout = VarLayout::new(&plant, mode, vec![1.8, 2.3], alpha).unwrap();
        let y: Vec<f64> = (0..layout.nvars()).map(|k| k as f64 * 0.37 - 1.1).collect();
        let v = layout.unpack(&y);
        assert_eq!(layout.pack(&v), y);
    }
    assert!(VarLayout::new(&plant, Mode::Design, vec![1.8, 2.3], None).is_err());
    assert!(VarLayout::new(&plant, Mode::Analysis, vec![1.8], None).is_err());
}

#[test]
fn plant_validation_names_field() {
    let err = PlantModel::new(
        Mat::<f64>::identity(2),
        Mat::zeros(2, 1),
        vec![1.0],
        vec![1, 2],
        vec![0.1, 0.1],
        vec![0.3, 0.7],
    )
    .unwrap_err();
    assert!(matches!(err, LmiError::Validation { field: "partition", .. }), "{err}");
    let err = PlantModel::new(
        Mat::<f64>::identity(2),
        Mat::zeros(2, 1),
        vec![-1.0],
        vec![1, 1],
        vec![0.1, 0.1],
        vec![0.3, 0.7],
    )
    .unwrap_err();
    assert!(matches!(err, LmiError::Validation { field: "ubar", .. }));
    let err = PlantModel::new(
        Mat::<f64>::identity(2),
        Mat::zeros(2, 1),
        vec![1.0],
        vec![1, 1],
        vec![0.5, 0.1],
        vec![0.3, 0.7],
    )
    .unwrap_err();
    assert!(matches!(err, LmiError::Validation { field: "T2", .. }));
}

fn all_builders(plant: &PlantModel<f64>, mode: Mode) -> (VarLayout<f64>, Vec<LmiConstraint<f64>>) {
    let sigma = vec![1.3, 2.8];
    let alpha = (mode == Mode::Design).then_some(0.4);
    let layout = VarLayout::new(plant, mode, sigma.clone(), alpha).unwrap();
    let k = Mat::from_f64_rows(&[&[-0.444, -0.495]]).unwrap();
    let mut cs = vec![build_inclusion_lmi(plant, &layout, 0).unwrap(), build_mw_link(&layout).unwrap()];
    cs.push(build_positivity(&layout, 1e-6).unwrap());
    for v in enumerate_vertices(&sigma, plant.t2(), plant.partition()).unwrap().iter() {
        cs.push(match mode {
            Mode::Analysis => build_analysis_lmi(plant, &k, &layout, &v.psi, 1e-6).unwrap(),
            Mode::Design => build_design_lmi(plant, &layout, 0.4, &v.psi, 1e-6).unwrap(),
        });
    }
    (layout, cs)
}

#[test]
fn flattened_blocks_match_numeric_builders() {
    let plant = example_plant();
    let (layout, cs) = all_builders(&plant, Mode::Analysis);
    let y: Vec<f64> = (0..layout.nvars()).map(|k| ((k * 7919) % 13) as f64 * 0.1 - 0.6).collect();
    let v = layout.unpack(&y);
    let k = Mat::from_f64_rows(&[&[-0.444, -0.495]]).unwrap();
    let direct = inclusion_matrix(&plant, &v, 0, Mode::Analysis).unwrap();
    assert!((cs[0].evaluate(&y).as_mat() - direct.as_mat()).max_abs() < 1e-13);
    let vs = enumerate_vertices(&[1.3, 2.8], plant.t2(), plant.partition()).unwrap();
    let n0 = analysis_matrix(&plant, &k, &v, &vs.vertices[3].psi).unwrap();
    let flat = cs[6].evaluate(&y);
    let expect = n0.scale(-1.0).sub(&SymMatrix::identity(n0.dim()).scale(1e-6));
    assert!((flat.as_mat() - expect.as_mat()).max_abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn builders_are_affine(lambda in 0.0f64..1.0, seed in 0u64..1000, design in any::<bool>()) {
        let plant = example_plant();
        let mode = if design { Mode::Design } else { Mode::Analysis };
        let (layout, cs) = all_builders(&plant, mode);
        let nv = layout.nvars();
        let y1: Vec<f64> = (0..nv).map(|k| (((k as u64 + 1) * (seed + 3) * 2654435761) % 1000) as f64 / 250.0 - 2.0).collect();
        let y2: Vec<f64> = (0..nv).map(|k| (((k as u64 + 7) * (seed + 11) * 40503) % 1000) as f64 / 300.0 - 1.5).collect();
        let mix: Vec<f64> = y1.iter().zip(&y2).map(|(a, b)| lambda * a + (1.0 - lambda) * b).collect();
        for c in &cs {
            let lhs = c.evaluate(&mix);
            let rhs = c.evaluate(&y1).scale(lambda).add(&c.evaluate(&y2).scale(1.0 - lambda));
            let scale = 1.0 + lhs.max_abs();
            prop_assert!((lhs.as_mat() - rhs.as_mat()).max_abs() <= 1e-12 * scale);
        }
    }
}
