//! The reverse-norm cut loop on its own: minimize a Lipschitz black box over
//! an integer box.

use anyhow::Result;
use blockmilp::cuts::CutPool;
use blockmilp::lipmin::{minimize, LipMinConfig, QEval};
use blockmilp::model::{Matrix, MilSet, VarKind};
use blockmilp::subsolver::{BranchAndBound, CutGeometry};

fn main() -> Result<()> {
    let z = MilSet::boxed(vec![VarKind::Integer; 2], vec![-6.0; 2], vec![6.0; 2]);
    // 1.5-Lipschitz in the l1 norm, minimized at (2, -3)
    let q = |p: &[f64]| (p[0] - 2.0).abs().max((p[1] + 3.0).abs()) + 0.5 * (p[0] + p[1] + 1.0).abs().min(1.0);
    let geom = CutGeometry::new(&Matrix::zeros(0, 2), &z);
    let mut pool = CutPool::new(None);
    let mut calls = 0;
    let mut oracle = |p: &[f64]| {
        calls += 1;
        let v = q(p);
        Ok((QEval { value: v, lower: v }, ()))
    };
    let cfg = LipMinConfig::new(1.5, 0.0, -1.0);
    let out = minimize(&[0.0, 0.0], &mut oracle, &z, &geom, &mut pool, &cfg, &BranchAndBound)?;
    for it in &out.report.iterates {
        println!("z={:?}  lower {:.3}  upper {:.3}", it.z, it.lower, it.upper);
    }
    println!(
        "argmin {:?}, Q = {}, {:?}, {calls} oracle calls on a 169-point box",
        out.z, out.q, out.report.termination
    );
    Ok(())
}
