//! The text exchange format used by the external-solver adapter: write an
//! instance, answer it with the bundled solver, parse the answer back.

use anyhow::Result;
use blockmilp::subsolver::{parse_solution, solve, write_lp, MilpInstance, SolveOptions};

fn main() -> Result<()> {
    let mut inst = MilpInstance::default();
    let x = inst.add_var(-5.0, 0.0, 4.0, true);
    let y = inst.add_var(-4.0, 0.0, 4.0, true);
    let s = inst.add_var(0.0, 0.0, 10.0, false);
    inst.add_le(vec![(x, 6.0), (y, 4.0)], 24.0);
    inst.add_eq(vec![(x, 1.0), (y, 2.0), (s, 1.0)], 6.0);
    let lp = write_lp(&inst);
    print!("{lp}");

    // what an external command would write to its solution file
    let res = solve(&inst, &SolveOptions::default())?;
    let mut answer = String::from("status optimal\n");
    for (j, v) in res.point.iter().enumerate() {
        answer.push_str(&format!("x{j} {v}\n"));
    }
    answer.push_str(&format!("bound {}\n", res.bound));
    let (status, point, bound) = parse_solution(&answer, inst.num_vars())?;
    println!("{status:?} {point:?} objective {} bound {bound:?}", inst.objective(&point));
    println!("set BLOCKMILP_SOLVER_CMD to route subproblems through an external command");
    Ok(())
}
