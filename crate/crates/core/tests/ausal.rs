mod common;

use blockmilp::ausal::{ausal, eval_p, eval_r, AusalConfig, Context};
use blockmilp::instances::{gen_investment, SplitMix64, TChoice};
use blockmilp::model::{norm1, TwoBlockMilp};
use blockmilp::reference::{enum_dual, enum_p, enum_r};
use blockmilp::subsolver::BranchAndBound;

fn draw(rng: &mut SplitMix64, m: usize, scale: f64) -> Vec<f64> {
    (0..m).map(|_| rng.uniform_in(-scale, scale)).collect()
}

fn pick<'a>(rng: &mut SplitMix64, pts: &'a [Vec<f64>]) -> &'a Vec<f64> {
    &pts[rng.int_in(0, pts.len() as i64 - 1) as usize]
}

#[test]
fn decoupled_x_part() {
    // A = 0: R(z) = min cᵀx + ρ|z|
    let text = r#"{"format":"blockmilp-v1","c":[-1,2],"g":[0],"A":[[0,0]],"B":[[1]],
        "X":{"dim":2,"integrality":["integer","integer"],"E":[],"f":[],"lower":[0,0],"upper":[1,1]},
        "Z":{"dim":1,"integrality":["integer"],"E":[],"f":[],"lower":[0],"upper":[2]}}"#;
    let p = TwoBlockMilp::from_json(text).unwrap();
    let ctx = Context::new(&p).unwrap();
    for (z, rho) in [(0.0, 1.0), (1.0, 3.0), (2.0, 0.5)] {
        let ev = eval_r(&ctx, &[z], &[0.0], rho).unwrap();
        assert!((ev.value - (-1.0 + rho * z)).abs() < 1e-9);
        assert_eq!(ev.argmin_x, vec![1.0, 0.0]);
    }
}

#[test]
fn investment_value_matches_enumeration() {
    let p = gen_investment(2, TChoice::Identity, 5).unwrap();
    let ctx = Context::new(&p).unwrap();
    let lambda = vec![0.0; p.m()];
    for z in [[0.0, 0.0], [5.0, 5.0], [2.0, 4.0]] {
        let ev = eval_r(&ctx, &z, &lambda, 10.0).unwrap();
        let (v, _) = enum_r(&p, &z, &lambda, 10.0).unwrap();
        assert!((ev.value - v).abs() < 1e-7, "{} vs {v}", ev.value);
        assert_eq!(ev.per_block_values.len(), 4);
    }
}

#[test]
fn blocked_unblocked_and_oracle_agree() {
    let mut rng = SplitMix64::new(21);
    let mut queries = 0;
    for (name, p) in common::all() {
        let flat = TwoBlockMilp { blocks: None, ..p.clone() };
        let ctx = Context::new(&p).unwrap();
        let ctx_flat = Context::new(&flat).unwrap();
        let pts = common::box_points(&p);
        for _ in 0..20 {
            let z = pick(&mut rng, &pts);
            let lambda = draw(&mut rng, p.m(), 3.0);
            let rho = rng.uniform_in(0.1, 10.0);
            let ev = eval_r(&ctx, z, &lambda, rho).unwrap();
            let flat_ev = eval_r(&ctx_flat, z, &lambda, rho).unwrap();
            let (v, _) = enum_r(&p, z, &lambda, rho).unwrap();
            let sum: f64 = ev.per_block_values.iter().sum();
            assert!((ev.value - sum).abs() <= 1e-8, "{name}: block sum");
            assert!((ev.value - flat_ev.value).abs() <= 1e-7, "{name}: blocked vs flat");
            assert!((ev.value - v).abs() <= 1e-7, "{name}: {} vs oracle {v}", ev.value);
            let pv = eval_p(&ctx, z, &lambda, rho).unwrap().value;
            assert!((pv - enum_p(&p, z, &lambda, rho).unwrap()).abs() <= 1e-7);
            queries += 1;
        }
    }
    assert_eq!(queries, 100);
}

#[test]
fn value_function_is_lipschitz() {
    let mut rng = SplitMix64::new(22);
    for (name, p) in common::all() {
        let ctx = Context::new(&p).unwrap();
        let pts = common::box_points(&p);
        let k_base = p.b.norm1();
        for _ in 0..100 {
            let lambda = draw(&mut rng, p.m(), 2.0);
            let rho = rng.uniform_in(0.1, 8.0);
            let (z1, z2) = (pick(&mut rng, &pts), pick(&mut rng, &pts));
            let r1 = eval_r(&ctx, z1, &lambda, rho).unwrap().value;
            let r2 = eval_r(&ctx, z2, &lambda, rho).unwrap().value;
            let dist = norm1(&z1.iter().zip(z2).map(|(a, b)| a - b).collect::<Vec<_>>());
            assert!((r1 - r2).abs() <= rho * k_base * dist + 1e-7, "{name}");
        }
    }
}

#[test]
fn exact_ausal_attains_dual_value() {
    let mut rng = SplitMix64::new(23);
    for (name, p) in common::all() {
        let p_star = common::p_star(&p);
        let ctx = Context::new(&p).unwrap();
        for round in 0..4 {
            let lambda = if round == 0 { vec![0.0; p.m()] } else { draw(&mut rng, p.m(), 2.0) };
            let rho = rng.uniform_in(0.2, 12.0);
            let d = enum_dual(&p, &lambda, rho).unwrap().value;
            assert!(d <= p_star + 1e-7, "{name}: weak duality of the oracle");
            let out = ausal(&ctx, &lambda, rho, &AusalConfig::new(0.0)).unwrap();
            assert!((out.value - d).abs() <= 1e-6, "{name}: L {} vs d {d}", out.value);
            assert!(out.lower_bound <= d + 1e-6);
            for it in &out.report.iterates {
                assert!(it.lower <= d + 1e-6, "{name}: lower {} above d {d}", it.lower);
            }
            // L at the returned pair, recomputed from scratch
            let r = p.residual(&out.x, &out.z);
            let l = p.objective(&out.x, &out.z)
                + lambda.iter().zip(&r).map(|(a, b)| a * b).sum::<f64>()
                + rho * norm1(&r);
            assert!((l - out.value).abs() <= 1e-7);
        }
    }
}

#[test]
fn ausal_respects_covering_cap() {
    let mut rng = SplitMix64::new(24);
    for (name, p) in common::all() {
        let ctx = Context::new(&p).unwrap();
        let consts = &ctx.consts;
        for eps in [0.05, 0.5] {
            let lambda = draw(&mut rng, p.m(), 1.0);
            let rho = rng.uniform_in(0.5, 5.0);
            let out = ausal(&ctx, &lambda, rho, &AusalConfig::new(eps)).unwrap();
            let d = enum_dual(&p, &lambda, rho).unwrap().value;
            assert!(out.value <= d + eps + 1e-7, "{name}");
            let cap = (1.0 + 4.0 * rho * consts.k_base * consts.z_radius_l1 / eps).powi(p.d() as i32);
            assert!((out.report.iterates.len() as f64) <= cap, "{name}");
        }
    }
}

#[test]
fn singleton_z_needs_one_evaluation() {
    let mut p = common::investment(TChoice::Identity);
    p.z.lower = vec![1.0, 2.0];
    p.z.upper = vec![1.0, 2.0];
    let ctx = Context::new(&p).unwrap();
    let out = ausal(&ctx, &vec![0.0; p.m()], 3.0, &AusalConfig::new(0.0)).unwrap();
    assert_eq!(out.z, vec![1.0, 2.0]);
    assert_eq!(out.report.q_evals, 1);
}

#[test]
fn worker_count_does_not_change_results() {
    let mut rng = SplitMix64::new(25);
    for (name, p) in common::all() {
        let one = Context::with_solver(&p, &BranchAndBound, 1).unwrap();
        let four = Context::with_solver(&p, &BranchAndBound, 4).unwrap();
        assert_eq!(four.workers(), 4);
        let pts = common::box_points(&p);
        for _ in 0..5 {
            let z = pick(&mut rng, &pts);
            let lambda = draw(&mut rng, p.m(), 2.0);
            let a = eval_r(&one, z, &lambda, 2.5).unwrap();
            let b = eval_r(&four, z, &lambda, 2.5).unwrap();
            assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap(), "{name}");
        }
        let lambda = draw(&mut rng, p.m(), 1.0);
        let a = ausal(&one, &lambda, 4.0, &AusalConfig::new(0.0)).unwrap();
        let b = ausal(&four, &lambda, 4.0, &AusalConfig::new(0.0)).unwrap();
        assert_eq!(a.x, b.x);
        assert_eq!(a.z, b.z);
        assert_eq!(
            serde_json::to_string(&a.report).unwrap(),
            serde_json::to_string(&b.report).unwrap(),
            "{name}"
        );
    }
}
