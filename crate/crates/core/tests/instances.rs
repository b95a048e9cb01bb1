mod common;

use blockmilp::instances::{
    gen_investment, gen_random_structured, gen_sslp, investment_scenarios, sslp_data, GenSpec, RandomSpec, SplitMix64,
    TChoice,
};
use blockmilp::reference::{enumerate_extensive, extensive_solve, lattice_solve};
use proptest::prelude::*;

#[test]
fn splitmix_reference_values() {
    // widely quoted reference outputs for seed 1234567
    let mut rng = SplitMix64::new(1234567);
    let expect = [
        6457827717110365317u64,
        3203168211198807973,
        9817491932198370423,
        4593380528125082431,
        16408922859458223821,
    ];
    for e in expect {
        assert_eq!(rng.next_u64(), e);
    }
}

#[test]
fn investment_grid_and_matrix() {
    assert_eq!(investment_scenarios(2), vec![[5.0, 5.0], [5.0, 15.0], [15.0, 5.0], [15.0, 15.0]]);
    let p = gen_investment(2, TChoice::Mixed, 5).unwrap();
    assert_eq!(p.blocks.as_ref().unwrap().len(), 4);
    assert!(p.validate().is_empty());
    // each coupling row is y_i − z_i = 0, so ‖B‖₁ counts one entry per scenario copy
    assert_eq!(p.b.norm1(), 4.0);
    let t = TChoice::Mixed.matrix();
    for j in 0..2 {
        assert!((t[0][j] + t[1][j] - 1.0).abs() < 1e-15);
    }
    assert!(gen_investment(1, TChoice::Identity, 5).is_err());
}

#[test]
fn investment_s3_double_enumeration() {
    let p = gen_investment(3, TChoice::Identity, 5).unwrap();
    let enumerated = enumerate_extensive(&p).unwrap().unwrap();
    let lattice = lattice_solve(&p).unwrap().unwrap();
    assert!((enumerated.value - lattice.value).abs() <= 1e-9);
    assert!((enumerated.value + 190.0 / 3.0).abs() <= 1e-9, "{}", enumerated.value);
}

#[test]
fn sslp_degenerate_and_structure() {
    let data = sslp_data(1, 1, 1, 5);
    let p = gen_sslp(1, 1, 1, 5, 1.0).unwrap();
    assert!(p.validate().is_empty());
    assert_eq!(data.capacity, data.demand[0][0]);

    let (m, n, np) = (2, 3, 2);
    let data = sslp_data(m, n, np, 7);
    let p = gen_sslp(m, n, np, 7, 1.0).unwrap();
    assert!(p.validate().is_empty());
    assert!(data.cost.iter().all(|&c| (40.0..=80.0).contains(&c) && c.fract() == 0.0));
    assert!(data.demand.iter().flatten().all(|&d| (0.0..=25.0).contains(&d)));
    let total: f64 = data.demand.iter().flatten().sum();
    assert!((data.capacity - total / m as f64).abs() < 1e-12);
    // assignment rows Σ_j x_ij = h_i in every scenario
    let bs = p.blocks.as_ref().unwrap();
    for (s, cols) in bs.x_partition.iter().enumerate() {
        for i in 0..n {
            let found = (0..p.x.eq.rows()).any(|r| {
                let row = p.x.eq.row(r);
                (0..m).all(|j| row[cols[i * m + j]] == 1.0)
                    && cols.iter().filter(|&&c| row[c] != 0.0).count() == m
                    && p.x.rhs[r] == data.presence[s][i]
            });
            assert!(found, "missing assignment row for client {i} in scenario {s}");
        }
    }
    let ext = extensive_solve(&p).unwrap().unwrap();
    let lat = lattice_solve(&p).unwrap().unwrap();
    assert!((ext.value - lat.value).abs() <= 1e-6 * lat.value.abs().max(1.0));
}

#[test]
fn random_decoupled_case() {
    let spec = RandomSpec {
        blocks: 1,
        dim: 4,
        int_count: 2,
        eq_rows: 1,
        copies: 0,
        slack: 0,
        seed: 9,
    };
    let pl = gen_random_structured(&spec).unwrap();
    assert_eq!(pl.problem.d(), 0);
    assert_eq!(pl.problem.m(), 0);
    assert!(pl.problem.validate().is_empty());
}

#[test]
fn random_planted_point_bounds_optimum() {
    let pl = gen_random_structured(&RandomSpec::small(5, 3)).unwrap();
    let p = &pl.problem;
    assert!(p.validate().is_empty());
    assert!(p.x.contains(&pl.x, 1e-8, 0.0));
    assert!(p.z.contains(&pl.z, 1e-8, 0.0));
    assert!(p.iterate(pl.x.clone(), pl.z.clone()).residual_l1 <= 1e-12);
    let planted = p.objective(&pl.x, &pl.z);
    let opt = lattice_solve(p).unwrap().unwrap();
    assert!(opt.value <= planted + 1e-9);
}

#[test]
fn invalid_sizes_are_rejected() {
    let bad = RandomSpec {
        copies: 7,
        ..RandomSpec::small(2, 1)
    };
    assert!(gen_random_structured(&bad).is_err());
    let bad = RandomSpec {
        eq_rows: 10,
        ..RandomSpec::small(2, 1)
    };
    assert!(gen_random_structured(&bad).is_err());
    assert!(gen_sslp(0, 1, 1, 1, 1.0).is_err());
}

#[test]
fn spec_labels_and_generation() {
    let specs = [
        GenSpec::Investment {
            scenarios: 3,
            t: TChoice::Mixed,
            upper: 10,
        },
        GenSpec::Sslp {
            servers: 3,
            clients: 5,
            scenarios: 3,
            seed: 2,
            revenue_scale: 1.0,
        },
        GenSpec::Random(RandomSpec::small(5, 1)),
    ];
    for s in &specs {
        let a = s.generate().unwrap();
        let b = s.generate().unwrap();
        assert_eq!(a.to_json(), b.to_json());
        assert!(!s.label().is_empty());
    }
    assert_eq!(specs[0].label(), "investment-T-u10-S3");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn generators_are_deterministic_and_valid(seed in 0u64..10_000, blocks in 1usize..6) {
        let a = gen_random_structured(&RandomSpec::small(blocks, seed)).unwrap();
        let b = gen_random_structured(&RandomSpec::small(blocks, seed)).unwrap();
        prop_assert_eq!(a.problem.to_json(), b.problem.to_json());
        prop_assert!(a.problem.validate().is_empty());
        let p = &a.problem;
        prop_assert!(p.x.contains(&a.x, 1e-8, 0.0));
        prop_assert!(p.z.contains(&a.z, 1e-8, 0.0));
        prop_assert!(p.iterate(a.x.clone(), a.z.clone()).residual_l1 <= 1e-8);

        let s1 = gen_sslp(2, 3, 2, seed, 1.0).unwrap();
        let s2 = gen_sslp(2, 3, 2, seed, 1.0).unwrap();
        prop_assert_eq!(s1.to_json(), s2.to_json());
        prop_assert!(s1.validate().is_empty());
    }
}
