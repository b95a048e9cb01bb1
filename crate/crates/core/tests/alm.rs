mod common;

use blockmilp::alm::{
    penalty_formula, penalty_solve, postprocess_exact_penalty, postprocess_penalty, practical_alm, practical_step,
    subgrad_finite, subgrad_gap, AlmParams, AlmStatus, AlmVariant,
};
use blockmilp::ausal::Context;
use blockmilp::instances::TChoice;
use blockmilp::model::{norm1, norm_inf, TwoBlockMilp};
use blockmilp::reference::{enum_dual, enum_perturbation};

#[test]
fn formula_arithmetic() {
    assert_eq!(penalty_formula(10.0, 2.0, 4.0, 5.0, 0.5, 0.0), 81.0);
    assert_eq!(penalty_formula(0.0, 2.0, 0.0, 5.0, 0.1, 0.0), 1.0);
    assert!((practical_step(200.0, 2, 4.0) - 25.0 / 2f64.sqrt()).abs() < 1e-12);
    // residuals below one do not enlarge the step
    assert_eq!(practical_step(10.0, 1, 0.25), practical_step(10.0, 1, 1.0));
    assert_eq!(postprocess_penalty(&[9.0, -2.0], 3.0, 2.0), 9.0);
    assert_eq!(postprocess_penalty(&[0.5, -2.0], 3.0, 0.0), 4.0);
    assert_eq!(postprocess_penalty(&[0.5, -7.0], 3.0, 0.0), 7.0);
}

#[test]
fn penalty_method_gives_eps_solutions() {
    for (name, p) in common::all() {
        let p_star = common::p_star(&p);
        let ctx = Context::new(&p).unwrap();
        for eps in [0.1, 0.01] {
            let (it, rep) = penalty_solve(&ctx, &vec![0.0; p.m()], eps).unwrap();
            assert_eq!(rep.status, AlmStatus::Converged);
            assert!(
                common::is_eps_solution(&p, &it.x, &it.z, p_star, eps),
                "{name} eps {eps}: obj {} p* {p_star} residual {}",
                it.primal_obj,
                it.residual_l1
            );
        }
    }
}

#[test]
fn penalty_method_rejects_nonpositive_eps() {
    let p = common::random(1);
    let ctx = Context::new(&p).unwrap();
    assert!(penalty_solve(&ctx, &vec![0.0; p.m()], 0.0).is_err());
}

#[test]
fn gap_variant_steps_and_bounds() {
    for (name, p) in common::all() {
        let p_star = common::p_star(&p);
        let ctx = Context::new(&p).unwrap();
        let params = AlmParams {
            variant: AlmVariant::Gap,
            rho0: 0.2,
            tau: 1.0,
            outer_limit: 12,
            eps_d: 1e-9,
            ..AlmParams::default()
        };
        let rep = subgrad_gap(&ctx, &params).unwrap();
        let mut best_gap = f64::INFINITY;
        for (k, w) in rep.outer.windows(2).enumerate() {
            let r1 = w[0].residual_l1;
            let tau_k = params.tau / ((k + 1) as f64).sqrt();
            assert!((w[1].rho - w[0].rho - tau_k / 2f64.sqrt()).abs() <= 1e-9, "{name}: penalty step");
            assert!(w[1].rho > w[0].rho);
            // ‖(r, ‖r‖₁)‖₂² ≤ 2‖r‖₁²
            let dl: Vec<f64> = w[1].lambda.iter().zip(&w[0].lambda).map(|(a, b)| a - b).collect();
            let alpha = tau_k / (2f64.sqrt() * r1);
            let r_sq: f64 = dl.iter().map(|v| (v / alpha).powi(2)).sum();
            assert!(r_sq + r1 * r1 <= 2.0 * r1 * r1 + 1e-9);
        }
        let mut trace = Vec::new();
        for rec in &rep.outer {
            assert!(rec.dual_lower <= p_star + 1e-6, "{name}: dual bound above p*");
            let d = enum_dual(&p, &rec.lambda, rec.rho).unwrap().value;
            assert!((rec.dual_value - d).abs() <= 1e-6, "{name}: AUSAL vs oracle d");
            best_gap = best_gap.min(p_star - d);
            trace.push(best_gap);
        }
        assert!(trace.windows(2).all(|w| w[1] <= w[0]));
        assert!(trace.last().unwrap() < &trace[0] || trace[0] <= 1e-6, "{name}: no progress {trace:?}");
    }
}

#[test]
fn finite_variant_growth_and_solution() {
    for (name, p) in common::all() {
        let p_star = common::p_star(&p);
        let ctx = Context::new(&p).unwrap();
        let params = AlmParams {
            variant: AlmVariant::Finite,
            rho0: 0.2,
            tau: 0.5,
            eps_p: 0.05,
            eps_d: 1e-9,
            outer_limit: 500,
            ..AlmParams::default()
        };
        let (sol, rep) = subgrad_finite(&ctx, &params).unwrap();
        let rho1 = rep.outer[0].rho;
        for (k, rec) in rep.outer.iter().enumerate() {
            assert!(rec.rho >= norm_inf(&rec.lambda) - 1e-12, "{name}");
            assert!(rec.rho >= rho1 + k as f64 * params.tau - 1e-9, "{name}: growth at {k}");
        }
        assert!(rep.rho >= norm_inf(&rep.lambda) - 1e-12);
        assert_eq!(rep.status, AlmStatus::Converged, "{name}");
        let it = sol.unwrap();
        assert!(common::is_eps_solution(&p, &it.x, &it.z, p_star, params.eps_p), "{name}");
    }
}

#[test]
fn finite_variant_stops_at_once_when_feasible() {
    let p = common::investment(TChoice::Identity);
    let ctx = Context::new(&p).unwrap();
    let params = AlmParams {
        variant: AlmVariant::Finite,
        rho0: 1000.0,
        eps_p: 0.05,
        eps_d: 1e-9,
        ..AlmParams::default()
    };
    let (sol, rep) = subgrad_finite(&ctx, &params).unwrap();
    assert_eq!(rep.outer.len(), 1);
    assert!(sol.unwrap().residual_l1 <= 0.05);
}

#[test]
fn stationary_duals_without_step() {
    let p = common::sslp();
    let ctx = Context::new(&p).unwrap();
    let params = AlmParams {
        gamma: 1.0,
        alm_step: 0.0,
        rho0: 0.5,
        inner_alm: 2,
        outer_limit: 4,
        ..AlmParams::default()
    };
    let rep = practical_alm(&ctx, &params).unwrap();
    for rec in &rep.outer {
        assert!(rec.lambda.iter().all(|&l| l == 0.0));
        assert_eq!(rec.rho, 0.5);
    }
}

#[test]
fn practical_scheme_solves_tiny_instances() {
    for (name, p) in common::all() {
        let p_star = common::p_star(&p);
        let ctx = Context::new(&p).unwrap();
        let rep = practical_alm(&ctx, &AlmParams::default()).unwrap();
        assert_eq!(rep.status, AlmStatus::Converged, "{name}");
        assert!(rep.gap <= 1e-4);
        assert!((rep.upper_bound - p_star).abs() <= 1e-6 * p_star.abs().max(1.0), "{name}");
        for rec in &rep.outer {
            assert!(rec.dual_lower <= p_star + 1e-6, "{name}");
        }
        let best = rep.best.unwrap();
        assert!(best.residual_l1 <= 1e-6);
    }
}

/// Smallest ρ on the grid `step, 2·step, …` with `d(0, ρ) = p*`.
fn scan_exact_penalty(p: &TwoBlockMilp, p_star: f64, step: f64) -> f64 {
    let zero = vec![0.0; p.m()];
    (1..2000)
        .map(|k| k as f64 * step)
        .find(|&rho| enum_dual(p, &zero, rho).unwrap().value >= p_star - 1e-9)
        .expect("exact penalty within the scan range")
}

#[test]
fn exact_penalization_probe() {
    for (name, p) in [("random-1", common::random(1)), ("random-2", common::random(2)), ("sslp", common::sslp())] {
        let p_star = common::p_star(&p);
        let step = 0.25;
        let rho_hat = scan_exact_penalty(&p, p_star, step);
        let zero = vec![0.0; p.m()];
        // above the threshold the minimizers of L are feasible optima
        for rho in [rho_hat, rho_hat + step, 2.0 * rho_hat] {
            let sol = enum_dual(&p, &zero, rho).unwrap();
            let it = p.iterate(sol.x.clone(), sol.z.clone());
            assert!(it.residual_l1 <= 1e-9, "{name}: infeasible minimizer at {rho}");
            assert!((it.primal_obj - p_star).abs() <= 1e-9);
        }
        // p(u) ≥ p(0) − ρ̂‖u‖₁ on an ℓ1 grid of radius 1
        let m = p.m();
        let mut grid = vec![vec![0.0; m]];
        for i in 0..m {
            for s in [-1.0, -0.5, 0.5, 1.0] {
                let mut u = vec![0.0; m];
                u[i] = s;
                grid.push(u);
            }
        }
        for i in 0..m {
            for j in (i + 1)..m {
                for (a, b) in [(0.5, 0.5), (0.5, -0.5), (-0.5, 0.5), (-0.5, -0.5)] {
                    let mut u = vec![0.0; m];
                    u[i] = a;
                    u[j] = b;
                    grid.push(u);
                }
            }
        }
        let p0 = enum_perturbation(&p, &zero).unwrap();
        assert!((p0 - p_star).abs() <= 1e-9);
        for u in &grid {
            let pu = enum_perturbation(&p, u).unwrap();
            assert!(pu >= p0 - rho_hat * norm1(u) - 1e-9, "{name}: criterion fails at {u:?}");
        }
        // below the threshold the dual minimizer exhibits a violating u
        if rho_hat > step {
            let rho = rho_hat - step;
            let sol = enum_dual(&p, &zero, rho).unwrap();
            assert!(sol.value < p_star - 1e-9);
            let u: Vec<f64> = p.residual(&sol.x, &sol.z).iter().map(|r| -r).collect();
            let pu = enum_perturbation(&p, &u).unwrap();
            assert!(pu < p0 - rho * norm1(&u) + 1e-9, "{name}: no violation below threshold");
        }
    }
}

#[test]
fn perturbation_oracle_marks_infeasible() {
    let p = common::random(1);
    // u far outside the range of Ax + Bz
    let u = vec![50.0; p.m()];
    assert_eq!(enum_perturbation(&p, &u).unwrap(), f64::INFINITY);
}

#[test]
fn postprocessing_recovers_solution_from_grid_dual() {
    for (name, p) in [("random-1", common::random(1)), ("sslp", common::sslp())] {
        let p_star = common::p_star(&p);
        let step = 0.25;
        let rho_hat = scan_exact_penalty(&p, p_star, step);
        let ctx = Context::new(&p).unwrap();
        let zero = vec![0.0; p.m()];
        // a grid point one resolution below the threshold, slack = resolution
        let it = postprocess_exact_penalty(&ctx, &zero, (rho_hat - step).max(step), step, 0.0).unwrap();
        assert!(common::is_eps_solution(&p, &it.x, &it.z, p_star, 1e-6), "{name}");
    }
}
