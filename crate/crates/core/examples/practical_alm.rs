//! Practical ALM on a small investment instance, checked against the oracle.

use anyhow::Result;
use blockmilp::alm::{practical_alm, AlmParams};
use blockmilp::ausal::Context;
use blockmilp::instances::{gen_investment, TChoice};
use blockmilp::reference::oracle_optimum;

fn main() -> Result<()> {
    let p = gen_investment(5, TChoice::Identity, 5)?;
    let ctx = Context::new(&p)?;
    let rep = practical_alm(&ctx, &AlmParams::default())?;
    println!("phase      rho   |lambda|_inf   residual   lower bound");
    for (k, o) in rep.outer.iter().enumerate() {
        let lam = o.lambda.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        println!("{:>5} {:>8.3} {:>14.4} {:>10.2e} {:>13.6}", k + 1, o.rho, lam, o.residual_l1, o.dual_lower);
    }
    let oracle = oracle_optimum(&p)?.map(|s| s.value);
    println!(
        "status {:?}  upper {:.6}  lower {:.6}  z-solves {}  oracle {:?}",
        rep.status, rep.upper_bound, rep.lower_bound, rep.z_iterations, oracle
    );
    Ok(())
}
