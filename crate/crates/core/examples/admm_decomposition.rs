//! ADMM with the practical dual rule, then with a projected box on μ.

use anyhow::Result;
use blockmilp::admm::{admm_solve, AdmmParams, DualScheme};
use blockmilp::ausal::Context;
use blockmilp::instances::{gen_random_structured, RandomSpec};

fn main() -> Result<()> {
    let planted = gen_random_structured(&RandomSpec::small(5, 2))?;
    let p = &planted.problem;
    let ctx = Context::new(p)?;

    let (best, rep) = admm_solve(&ctx, None, &AdmmParams::default())?;
    println!("practical: {:?} after {} z-solves, gap {:.2e}", rep.status, rep.z_iterations, rep.gap);
    if let Some(it) = best {
        println!("  objective {:.6}, residual {:.1e}", it.primal_obj, it.residual_l1);
    }

    let projected = AdmmParams {
        scheme: DualScheme::Projected,
        mu_box: Some((-5.0, 5.0)),
        beta_cap: Some(50.0),
        ..AdmmParams::default()
    };
    let (_, rep) = admm_solve(&ctx, None, &projected)?;
    println!("projected: {:?} after {} z-solves, {} cuts kept", rep.status, rep.z_iterations, rep.cuts.len());
    for it in rep.iterations.iter().take(5) {
        println!("  beta {:.3}  lower {:.6}  upper {:.6}", it.beta, it.lower, it.upper);
    }
    Ok(())
}
