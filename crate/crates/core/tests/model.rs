mod common;

use blockmilp::instances::{SplitMix64, TChoice};
use blockmilp::model::{BlockStructure, Matrix, MilSet, TwoBlockMilp, VarKind};
use blockmilp::Error;
use proptest::prelude::*;

fn toy(b: Vec<Vec<f64>>) -> TwoBlockMilp {
    TwoBlockMilp {
        c: vec![1.0, -1.0],
        g: vec![0.5, 0.5],
        a: Matrix::identity(2),
        b: Matrix::from_rows(&b, 2).unwrap(),
        x: MilSet::boxed(vec![VarKind::Continuous; 2], vec![0.0; 2], vec![2.0; 2]),
        z: MilSet::boxed(vec![VarKind::Integer; 2], vec![-1.0; 2], vec![3.0; 2]),
        blocks: None,
    }
}

#[test]
fn derived_constant_examples() {
    let p = toy(vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
    let k = p.derived_constants().unwrap();
    assert_eq!(k.k_base, 1.0);
    assert_eq!(k.x_diam_inf, 2.0);
    assert_eq!(k.z_diam_inf, 4.0);
    assert_eq!(k.z_radius_l1, 4.0);
    assert_eq!(k.z_center, vec![1.0, 1.0]);
    let t = TChoice::Mixed.matrix();
    let p = toy(t.iter().map(|r| r.to_vec()).collect());
    assert!((p.derived_constants().unwrap().k_base - 1.0).abs() < 1e-15);

    let mut wide = toy(vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
    wide.x = MilSet::boxed(vec![VarKind::Continuous; 2], vec![0.0; 2], vec![2.0; 2]);
    wide.c = vec![0.0; 2];
    assert_eq!(wide.derived_constants().unwrap().x_diam_inf, 2.0);
}

#[test]
fn validation_messages() {
    assert!(common::investment(TChoice::Identity).validate().is_empty());

    let mut p = toy(vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
    p.x.upper[0] = f64::INFINITY;
    let v = p.validate();
    assert_eq!(v, vec!["unbounded box at x[0]".to_string()]);
    assert!(matches!(p.derived_constants(), Err(Error::InvalidProblem(_))));

    let mut p = common::investment(TChoice::Identity);
    let bs = p.blocks.as_mut().unwrap();
    bs.row_partition[1].retain(|&r| r != 3);
    let v = p.validate();
    assert_eq!(v, vec!["uncovered coupling row 3".to_string()]);

    let mut p = toy(vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
    p.blocks = Some(BlockStructure {
        x_partition: vec![vec![0], vec![1]],
        row_partition: vec![vec![1], vec![0]],
    });
    assert_eq!(p.validate().len(), 2);

    let mut p = toy(vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
    p.g.push(1.0);
    assert!(!p.validate().is_empty());
}

#[test]
fn json_round_trip_is_byte_identical() {
    for (_, p) in common::all() {
        let text = p.to_json();
        let back = TwoBlockMilp::from_json(&text).unwrap();
        assert_eq!(back, p);
        assert_eq!(back.to_json(), text);
    }
}

#[test]
fn nonhomogeneous_coupling_is_folded() {
    let text = r#"{"format":"blockmilp-v1","c":[1],"g":[1],"A":[[1]],"B":[[1]],"b_rhs":[2],
        "X":{"dim":1,"integrality":["continuous"],"E":[],"f":[],"lower":[0],"upper":[5]},
        "Z":{"dim":1,"integrality":["integer"],"E":[],"f":[],"lower":[0],"upper":[5]}}"#;
    let p = TwoBlockMilp::from_json(text).unwrap();
    assert_eq!(p.d(), 2);
    assert_eq!(p.z.lower[1], -1.0);
    assert_eq!(p.z.upper[1], -1.0);
    // x + z = 2 holds iff the folded residual vanishes
    assert_eq!(p.residual(&[1.5], &[0.5, -1.0]), vec![0.0]);
    assert!(TwoBlockMilp::from_json(&text.replace("blockmilp-v1", "v0")).is_err());
}

#[test]
fn unbounded_bounds_travel_as_null() {
    let text = r#"{"format":"blockmilp-v1","c":[1],"g":[1],"A":[[1]],"B":[[1]],
        "X":{"dim":1,"integrality":["continuous"],"E":[],"f":[],"lower":[0],"upper":[null]},
        "Z":{"dim":1,"integrality":["integer"],"E":[],"f":[],"lower":[0],"upper":[5]}}"#;
    let p = TwoBlockMilp::from_json(text).unwrap();
    assert_eq!(p.x.upper[0], f64::INFINITY);
    assert_eq!(p.validate(), vec!["unbounded box at x[0]".to_string()]);
    assert!(p.to_json().contains("\"upper\":[null]"));
}

#[test]
fn iterate_residual_is_consistent() {
    let p = common::sslp();
    let mut rng = SplitMix64::new(3);
    for _ in 0..50 {
        let x: Vec<f64> = (0..p.n()).map(|j| rng.uniform_in(p.x.lower[j], p.x.upper[j])).collect();
        let z: Vec<f64> = (0..p.d()).map(|_| rng.int_in(0, 1) as f64).collect();
        let it = p.iterate(x, z);
        let l1: f64 = it.residual.iter().map(|v| v.abs()).sum();
        assert!((it.residual_l1 - l1).abs() <= 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn k_base_is_max_column_sum(rows in prop::collection::vec(prop::collection::vec(-5.0f64..5.0, 3), 1..5)) {
        let b = Matrix::from_rows(&rows, 3).unwrap();
        let brute = (0..3)
            .map(|j| rows.iter().map(|r| r[j].abs()).sum::<f64>())
            .fold(0.0, f64::max);
        prop_assert_eq!(b.norm1(), brute);
    }

    #[test]
    fn ax_bound_dominates_samples(
        a in prop::collection::vec(prop::collection::vec(-3.0f64..3.0, 3), 1..4),
        lo in prop::collection::vec(-2.0f64..0.0, 3),
        width in prop::collection::vec(0.0f64..3.0, 3),
        seed in any::<u64>(),
    ) {
        let m = a.len();
        let up: Vec<f64> = lo.iter().zip(&width).map(|(l, w)| l + w).collect();
        let p = TwoBlockMilp {
            c: vec![0.0; 3],
            g: vec![0.0],
            a: Matrix::from_rows(&a, 3).unwrap(),
            b: Matrix::zeros(m, 1),
            x: MilSet::boxed(vec![VarKind::Continuous; 3], lo.clone(), up.clone()),
            z: MilSet::boxed(vec![VarKind::Integer], vec![0.0], vec![1.0]),
            blocks: None,
        };
        let bound = p.derived_constants().unwrap().ax_norm_bound;
        let mut rng = SplitMix64::new(seed);
        for _ in 0..1000 {
            let x: Vec<f64> = (0..3).map(|j| rng.uniform_in(lo[j], up[j])).collect();
            let ax = p.a.mul_vec(&x);
            prop_assert!(ax.iter().map(|v| v.abs()).sum::<f64>() <= bound + 1e-9);
        }
    }
}
