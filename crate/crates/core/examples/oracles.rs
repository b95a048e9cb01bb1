//! Brute-force reference values: optimum, dual function, perturbation function.

use anyhow::Result;
use blockmilp::instances::{gen_investment, TChoice};
use blockmilp::reference::{enum_dual, enum_perturbation, enumerate_extensive, extensive_solve, lattice_solve};

fn main() -> Result<()> {
    let p = gen_investment(3, TChoice::Identity, 5)?;
    let by_lattice = lattice_solve(&p)?.expect("feasible");
    let by_enum = enumerate_extensive(&p)?.expect("feasible");
    let by_bnb = extensive_solve(&p)?.expect("feasible");
    println!("p* lattice {:.6}  enumeration {:.6}  monolithic {:.6}", by_lattice.value, by_enum.value, by_bnb.value);
    println!("first-stage decision z = {:?}", by_lattice.z);

    let zero = vec![0.0; p.m()];
    for rho in [0.01, 0.1, 1.0, 10.0] {
        let d = enum_dual(&p, &zero, rho)?;
        println!("d(0, {rho:<5}) = {:.6}", d.value);
    }
    let mut u = zero.clone();
    u[0] = 0.5;
    println!("p(u) with u_0 = 0.5 (inf: no integer z absorbs it): {:.6}", enum_perturbation(&p, &u)?);
    Ok(())
}
