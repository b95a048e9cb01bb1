//! The one-shot penalty method and the two subgradient variants side by side.

use anyhow::Result;
use blockmilp::alm::{penalty_solve, subgrad_finite, subgrad_gap, AlmParams, AlmVariant};
use blockmilp::ausal::Context;
use blockmilp::instances::gen_sslp;
use blockmilp::reference::oracle_optimum;

fn main() -> Result<()> {
    let p = gen_sslp(2, 3, 2, 4, 1.0)?;
    let ctx = Context::new(&p)?;
    let p_star = oracle_optimum(&p)?.map(|s| s.value);
    println!("oracle p* = {p_star:?}");

    for eps in [0.1, 0.01] {
        let (it, rep) = penalty_solve(&ctx, &vec![0.0; p.m()], eps)?;
        println!(
            "penalty eps={eps}: rho={:.1}, objective {:.6}, residual {:.1e}",
            rep.rho, it.primal_obj, it.residual_l1
        );
    }

    let gap = AlmParams {
        variant: AlmVariant::Gap,
        rho0: 0.2,
        outer_limit: 15,
        ..AlmParams::default()
    };
    let rep = subgrad_gap(&ctx, &gap)?;
    let best_d = rep.outer.iter().map(|o| o.dual_value).fold(f64::NEG_INFINITY, f64::max);
    println!("gap variant: {} phases, best dual value {best_d:.6}", rep.outer.len());

    let finite = AlmParams {
        variant: AlmVariant::Finite,
        rho0: 0.2,
        tau: 0.5,
        eps_p: 0.05,
        outer_limit: 200,
        ..AlmParams::default()
    };
    let (sol, rep) = subgrad_finite(&ctx, &finite)?;
    println!("finite variant: {:?} after {} phases, final rho {:.2}", rep.status, rep.outer.len(), rep.rho);
    if let Some(it) = sol {
        println!("  objective {:.6}, residual {:.1e}", it.primal_obj, it.residual_l1);
    }
    Ok(())
}
