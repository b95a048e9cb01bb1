mod common;

use blockmilp::instances::{gen_random_structured, RandomSpec};
use blockmilp::reference::{
    enum_dual, enum_perturbation, enum_r_rho, enumerate_extensive, extensive_solve, lattice_solve, oracle_optimum,
};
use blockmilp::Error;
use proptest::prelude::*;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[test]
fn three_exact_routes_agree() {
    for (name, p) in common::all() {
        let e = enumerate_extensive(&p).unwrap().unwrap();
        let l = lattice_solve(&p).unwrap().unwrap();
        let x = extensive_solve(&p).unwrap().unwrap();
        let o = oracle_optimum(&p).unwrap().unwrap();
        let tol = 1e-6 * e.value.abs().max(1.0);
        assert!((e.value - l.value).abs() <= tol, "{name}: enumerate {} lattice {}", e.value, l.value);
        assert!((e.value - x.value).abs() <= tol, "{name}: extensive {}", x.value);
        assert!((e.value - o.value).abs() <= tol, "{name}");
        // the reported points attain the reported value
        for s in [&e, &l, &x] {
            let it = p.iterate(s.x.clone(), s.z.clone());
            assert!(it.residual_l1 <= 1e-6, "{name}");
            assert!((it.primal_obj - s.value).abs() <= 1e-6, "{name}");
        }
    }
}

#[test]
fn unpenalized_dual_is_decoupled_minimum() {
    for (name, p) in common::all() {
        let d = enum_dual(&p, &vec![0.0; p.m()], 0.0).unwrap();
        let decoupled = common::z_points(&p)
            .iter()
            .map(|z| dot(&p.g, z) + enum_r_rho(&p, z, 0.0).unwrap())
            .fold(f64::INFINITY, f64::min);
        assert!((d.value - decoupled).abs() <= 1e-9, "{name}");
    }
}

#[test]
fn perturbation_at_zero_is_optimum() {
    for (name, p) in common::all() {
        let v = enum_perturbation(&p, &vec![0.0; p.m()]).unwrap();
        assert!((v - common::p_star(&p)).abs() <= 1e-9, "{name}");
    }
    let p = common::random(1);
    assert!(matches!(enum_perturbation(&p, &[0.0]), Err(Error::Dimension(_))));
}

#[test]
fn size_guard_trips() {
    let big = gen_random_structured(&RandomSpec {
        blocks: 40,
        dim: 50,
        int_count: 30,
        eq_rows: 30,
        copies: 3,
        slack: 50,
        seed: 1,
    })
    .unwrap()
    .problem;
    assert!(matches!(extensive_solve(&big), Err(Error::SizeGuard(_))));
    assert!(matches!(enumerate_extensive(&big), Err(Error::SizeGuard(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(30))]

    #[test]
    fn weak_duality_on_random_multipliers(
        seed in 1u64..500,
        lambda in prop::collection::vec(-4.0f64..4.0, 2),
        rho in 0.0f64..6.0,
    ) {
        let p = common::random(seed);
        let p_star = common::p_star(&p);
        let d = enum_dual(&p, &lambda, rho).unwrap();
        prop_assert!(d.value <= p_star + 1e-9);
        // the oracle's minimizer attains d
        let r = p.residual(&d.x, &d.z);
        let l = p.objective(&d.x, &d.z) + dot(&lambda, &r) + rho * r.iter().map(|v| v.abs()).sum::<f64>();
        prop_assert!((l - d.value).abs() <= 1e-7);
    }
}
