//! Brute-force oracles for small instances.
//!
//! Everything here works by enumerating integer lattices and solving the
//! continuous remainder as an LP. None of it goes through the decomposition
//! code, so tests can compare the two. Size guards are hard errors.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{dot, Block, MilSet, TwoBlockMilp};
use crate::subsolver::simplex::{solve_lp, Lp, LpRow, LpStatus, Sense};
use crate::subsolver::{solve, MilpInstance, SolveOptions, SolveStatus};

/// Largest integer lattice one enumeration may walk.
pub const LATTICE_LIMIT: f64 = 1e6;
/// Largest z lattice for the value-function oracles.
pub const Z_LATTICE_LIMIT: f64 = 1e4;
/// Largest monolithic instance, measured as columns × rows.
pub const EXTENSIVE_LIMIT: f64 = 1e6;

const FEAS_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleSolution {
    pub value: f64,
    pub x: Vec<f64>,
    pub z: Vec<f64>,
}

fn int_range(lo: f64, hi: f64) -> (i64, i64) {
    ((lo - 1e-9).ceil() as i64, (hi + 1e-9).floor() as i64)
}

fn lattice_size(inst: &MilpInstance) -> f64 {
    (0..inst.num_vars())
        .filter(|&j| inst.integer[j])
        .map(|j| {
            let (a, b) = int_range(inst.lower[j], inst.upper[j]);
            (b - a + 1).max(0) as f64
        })
        .product()
}

/// Exact optimum of a small MILP: every integer assignment in the box, with
/// an LP over the continuous variables. `None` when infeasible.
pub fn enumerate_milp(inst: &MilpInstance, limit: f64) -> Result<Option<(f64, Vec<f64>)>> {
    inst.validate()?;
    let size = lattice_size(inst);
    if size > limit {
        return Err(Error::SizeGuard(format!(
            "integer lattice has {size} points, limit {limit}"
        )));
    }
    let n = inst.num_vars();
    let ints: Vec<usize> = (0..n).filter(|&j| inst.integer[j]).collect();
    let conts: Vec<usize> = (0..n).filter(|&j| !inst.integer[j]).collect();
    let mut cpos = vec![usize::MAX; n];
    for (k, &j) in conts.iter().enumerate() {
        cpos[j] = k;
    }
    let ranges: Vec<(i64, i64)> = ints
        .iter()
        .map(|&j| int_range(inst.lower[j], inst.upper[j]))
        .collect();
    if ranges.iter().any(|(a, b)| a > b) {
        return Ok(None);
    }
    let rows: Vec<(&[(usize, f64)], f64, Sense)> = inst
        .eq
        .iter()
        .map(|r| (r.terms.as_slice(), r.rhs, Sense::Eq))
        .chain(inst.le.iter().map(|r| (r.terms.as_slice(), r.rhs, Sense::Le)))
        .collect();

    let mut x = vec![0.0; n];
    let mut cur: Vec<i64> = ranges.iter().map(|r| r.0).collect();
    let mut best: Option<(f64, Vec<f64>)> = None;
    loop {
        for (k, &j) in ints.iter().enumerate() {
            x[j] = cur[k] as f64;
        }
        if let Some(v) = complete(inst, &rows, &conts, &cpos, &mut x) {
            if best.as_ref().map_or(true, |(b, _)| v < *b) {
                best = Some((v, x.clone()));
            }
        }
        // odometer
        let mut k = 0;
        loop {
            if k == cur.len() {
                return Ok(best);
            }
            if cur[k] < ranges[k].1 {
                cur[k] += 1;
                break;
            }
            cur[k] = ranges[k].0;
            k += 1;
        }
    }
}

/// Fills the continuous part of `x` optimally for the integer part already
/// in place; returns the objective, or `None` if infeasible.
fn complete(
    inst: &MilpInstance,
    rows: &[(&[(usize, f64)], f64, Sense)],
    conts: &[usize],
    cpos: &[usize],
    x: &mut [f64],
) -> Option<f64> {
    let mut lp = Lp {
        c: conts.iter().map(|&j| inst.obj[j]).collect(),
        rows: Vec::new(),
        lower: conts.iter().map(|&j| inst.lower[j]).collect(),
        upper: conts.iter().map(|&j| inst.upper[j]).collect(),
    };
    for &(terms, rhs, sense) in rows {
        let mut fixed = 0.0;
        let mut cterms = Vec::new();
        for &(j, a) in terms {
            if cpos[j] == usize::MAX {
                fixed += a * x[j];
            } else {
                cterms.push((cpos[j], a));
            }
        }
        let r = rhs - fixed;
        if cterms.is_empty() {
            let tol = FEAS_TOL * (1.0 + rhs.abs());
            let ok = match sense {
                Sense::Eq => r.abs() <= tol,
                Sense::Le => r >= -tol,
            };
            if !ok {
                return None;
            }
        } else {
            lp.rows.push(LpRow {
                terms: cterms,
                rhs: r,
                sense,
            });
        }
    }
    if !conts.is_empty() {
        let sol = solve_lp(&lp, FEAS_TOL);
        match sol.status {
            LpStatus::Optimal => {
                for (k, &j) in conts.iter().enumerate() {
                    x[j] = sol.x[k];
                }
            }
            _ => return None,
        }
    }
    Some(inst.objective(x))
}

/// How a block's coupling rows enter its subproblem.
#[derive(Clone, Copy, Debug)]
enum Coupling {
    Hard,
    /// `ρ Σ |row|` with `ρ ≥ 0`, encoded through epigraph variables.
    Penalty(f64),
}

/// `min ⟨obj, x⟩ (+ penalty)` over one block with `A_p x + B_p z + u_p`
/// as the coupling rows.
fn block_instance(block: &Block, obj: &[f64], offsets: &[f64], coupling: Coupling) -> MilpInstance {
    let set = &block.x;
    let mut inst = MilpInstance::default();
    for j in 0..set.dim() {
        inst.add_var(obj[j], set.lower[j], set.upper[j], set.is_integer(j));
    }
    for r in 0..set.eq.rows() {
        let terms = nonzeros(set.eq.row(r));
        inst.add_eq(terms, set.rhs[r]);
    }
    for (i, &off) in offsets.iter().enumerate() {
        let terms = nonzeros(block.a.row(i));
        match coupling {
            Coupling::Hard => inst.add_eq(terms, -off),
            Coupling::Penalty(rho) => {
                let (mut lo, mut hi) = (off, off);
                for &(j, a) in &terms {
                    let (p, q) = (a * set.lower[j], a * set.upper[j]);
                    lo += p.min(q);
                    hi += p.max(q);
                }
                let e = inst.add_var(rho, 0.0, lo.abs().max(hi.abs()), false);
                // row + off ≤ e and −(row + off) ≤ e
                let mut up = terms.clone();
                up.push((e, -1.0));
                inst.add_le(up, -off);
                let mut down: Vec<(usize, f64)> = terms.iter().map(|&(j, a)| (j, -a)).collect();
                down.push((e, -1.0));
                inst.add_le(down, off);
            }
        }
    }
    inst
}

fn nonzeros(row: &[f64]) -> Vec<(usize, f64)> {
    row.iter()
        .enumerate()
        .filter(|(_, a)| **a != 0.0)
        .map(|(j, a)| (j, *a))
        .collect()
}

fn block_offsets(block: &Block, z: &[f64], u: Option<&[f64]>) -> Vec<f64> {
    let bz = block.b.mul_vec(z);
    bz.iter()
        .enumerate()
        .map(|(i, v)| v + u.map_or(0.0, |u| u[block.rows[i]]))
        .collect()
}

/// Integer points of `set`, in odometer order (first coordinate fastest).
/// Continuous coordinates must be pinned by their box.
pub fn lattice_points(set: &MilSet, limit: f64) -> Result<Vec<Vec<f64>>> {
    let d = set.dim();
    let mut ranges = Vec::with_capacity(d);
    let mut size = 1.0;
    for i in 0..d {
        if set.is_integer(i) {
            let (a, b) = int_range(set.lower[i], set.upper[i]);
            size *= (b - a + 1).max(0) as f64;
            ranges.push((a as f64, b as f64, true));
        } else if set.is_fixed(i) {
            ranges.push((set.lower[i], set.lower[i], false));
        } else {
            return Err(Error::SizeGuard(format!(
                "z[{i}] is continuous and not pinned; lattice oracles need a finite Z"
            )));
        }
    }
    if size > limit {
        return Err(Error::SizeGuard(format!("Z lattice has {size} points, limit {limit}")));
    }
    let mut out = Vec::new();
    if ranges.iter().any(|(a, b, _)| a > b) {
        return Ok(out);
    }
    let mut cur: Vec<f64> = ranges.iter().map(|r| r.0).collect();
    loop {
        let ok = (0..set.eq.rows()).all(|r| {
            (dot(set.eq.row(r), &cur) - set.rhs[r]).abs() <= 1e-7 * (1.0 + set.rhs[r].abs())
        });
        if ok {
            out.push(cur.clone());
        }
        let mut k = 0;
        loop {
            if k == d {
                return Ok(out);
            }
            if ranges[k].2 && cur[k] < ranges[k].1 {
                cur[k] += 1.0;
                break;
            }
            cur[k] = ranges[k].0;
            k += 1;
        }
    }
}

fn scatter(problem: &TwoBlockMilp, parts: Vec<(f64, Vec<f64>)>, blocks: &[Block]) -> (f64, Vec<f64>) {
    let mut x = vec![0.0; problem.n()];
    let mut v = 0.0;
    for (block, (val, xp)) in blocks.iter().zip(parts) {
        v += val;
        for (k, &j) in block.cols.iter().enumerate() {
            x[j] = xp[k];
        }
    }
    (v, x)
}

/// `R(z; λ, ρ)` and a minimizer, by enumeration over each block.
pub fn enum_r(problem: &TwoBlockMilp, z: &[f64], lambda: &[f64], rho: f64) -> Result<(f64, Vec<f64>)> {
    if rho < 0.0 {
        return Err(Error::Parameter("penalty must be nonnegative".into()));
    }
    let blocks = problem.decompose();
    enum_r_blocks(problem, &blocks, z, lambda, rho)
}

fn enum_r_blocks(
    problem: &TwoBlockMilp,
    blocks: &[Block],
    z: &[f64],
    lambda: &[f64],
    rho: f64,
) -> Result<(f64, Vec<f64>)> {
    let mut parts = Vec::with_capacity(blocks.len());
    for (p, block) in blocks.iter().enumerate() {
        let lam: Vec<f64> = block.rows.iter().map(|&i| lambda[i]).collect();
        let lin = block.a.tmul_vec(&lam);
        let obj: Vec<f64> = block.c.iter().zip(&lin).map(|(a, b)| a + b).collect();
        let offsets = block_offsets(block, z, None);
        let inst = block_instance(block, &obj, &offsets, Coupling::Penalty(rho));
        let (v, x) = enumerate_milp(&inst, LATTICE_LIMIT)?
            .ok_or_else(|| Error::Infeasible(format!("block {p} of X is empty")))?;
        parts.push((v, x[..block.cols.len()].to_vec()));
    }
    Ok(scatter(problem, parts, blocks))
}

/// `P(z, μ, β) = R(z; μ, β) + μᵀBz`.
pub fn enum_p(problem: &TwoBlockMilp, z: &[f64], mu: &[f64], beta: f64) -> Result<f64> {
    Ok(enum_r(problem, z, mu, beta)?.0 + dot(mu, &problem.b.mul_vec(z)))
}

/// `R_ρ(z) = R(z; 0, ρ)`.
pub fn enum_r_rho(problem: &TwoBlockMilp, z: &[f64], rho: f64) -> Result<f64> {
    Ok(enum_r(problem, z, &vec![0.0; problem.m()], rho)?.0)
}

/// `min cᵀx  s.t.  x ∈ X, Ax + Bz + u = 0`, `None` if infeasible.
pub fn constrained_value(problem: &TwoBlockMilp, z: &[f64], u: Option<&[f64]>) -> Result<Option<(f64, Vec<f64>)>> {
    let blocks = problem.decompose();
    constrained_blocks(problem, &blocks, z, u, true)
}

fn constrained_blocks(
    problem: &TwoBlockMilp,
    blocks: &[Block],
    z: &[f64],
    u: Option<&[f64]>,
    enumerate: bool,
) -> Result<Option<(f64, Vec<f64>)>> {
    let mut parts = Vec::with_capacity(blocks.len());
    for block in blocks {
        let offsets = block_offsets(block, z, u);
        let inst = block_instance(block, &block.c, &offsets, Coupling::Hard);
        let sol = if enumerate {
            enumerate_milp(&inst, LATTICE_LIMIT)?
        } else {
            let opts = SolveOptions {
                rel_gap: 1e-12,
                ..SolveOptions::default()
            };
            let r = solve(&inst, &opts)?;
            match r.status {
                SolveStatus::Optimal | SolveStatus::GapReached => Some((r.value, r.point)),
                SolveStatus::Infeasible => None,
                SolveStatus::IterLimit => {
                    return Err(Error::Subsolver {
                        step: "oracle block",
                        block: None,
                        reason: "node limit".into(),
                    })
                }
            }
        };
        match sol {
            Some((v, x)) => parts.push((v, x[..block.cols.len()].to_vec())),
            None => return Ok(None),
        }
    }
    Ok(Some(scatter(problem, parts, blocks)))
}

/// Minimum of `score(z)` over the Z lattice; ties go to the earliest point.
fn argmin_over_z<T: Send>(
    points: &[Vec<f64>],
    score: impl Fn(&[f64]) -> Result<Option<(f64, T)>> + Sync,
) -> Result<Option<(f64, Vec<f64>, T)>> {
    let scored: Vec<Option<(f64, T)>> = points.par_iter().map(|z| score(z)).collect::<Result<_>>()?;
    let mut best: Option<(f64, Vec<f64>, T)> = None;
    for (z, s) in points.iter().zip(scored) {
        if let Some((v, t)) = s {
            if best.as_ref().map_or(true, |b| v < b.0) {
                best = Some((v, z.clone(), t));
            }
        }
    }
    Ok(best)
}

fn p_star(problem: &TwoBlockMilp, u: Option<&[f64]>, enumerate: bool, limit: f64) -> Result<Option<OracleSolution>> {
    problem.ensure_valid()?;
    let blocks = problem.decompose();
    let points = lattice_points(&problem.z, limit)?;
    let best = argmin_over_z(&points, |z| {
        Ok(constrained_blocks(problem, &blocks, z, u, enumerate)?
            .map(|(v, x)| (v + dot(&problem.g, z), x)))
    })?;
    Ok(best.map(|(value, z, x)| OracleSolution { value, x, z }))
}

/// `p*` by enumerating Z and solving each block exactly with its coupling
/// rows as hard constraints (bundled branch-and-bound per block).
pub fn lattice_solve(problem: &TwoBlockMilp) -> Result<Option<OracleSolution>> {
    p_star(problem, None, false, LATTICE_LIMIT)
}

/// `p*` by pure enumeration of both Z and every block of X.
pub fn enumerate_extensive(problem: &TwoBlockMilp) -> Result<Option<OracleSolution>> {
    p_star(problem, None, true, Z_LATTICE_LIMIT)
}

/// `p(u) = min cᵀx + gᵀz  s.t.  Ax + Bz + u = 0`; `+∞` when infeasible.
pub fn enum_perturbation(problem: &TwoBlockMilp, u: &[f64]) -> Result<f64> {
    if u.len() != problem.m() {
        return Err(Error::Dimension("perturbation has the wrong length".into()));
    }
    Ok(p_star(problem, Some(u), true, Z_LATTICE_LIMIT)?.map_or(f64::INFINITY, |s| s.value))
}

/// `d(λ, ρ) = min L(x, z, λ, ρ)` over the Z lattice and X.
pub fn enum_dual(problem: &TwoBlockMilp, lambda: &[f64], rho: f64) -> Result<OracleSolution> {
    problem.ensure_valid()?;
    if lambda.len() != problem.m() {
        return Err(Error::Dimension("multiplier has the wrong length".into()));
    }
    let blocks = problem.decompose();
    let points = lattice_points(&problem.z, Z_LATTICE_LIMIT)?;
    let mut f = problem.g.clone();
    for (i, v) in problem.b.tmul_vec(lambda).into_iter().enumerate() {
        f[i] += v;
    }
    let best = argmin_over_z(&points, |z| {
        let (r, x) = enum_r_blocks(problem, &blocks, z, lambda, rho)?;
        Ok(Some((r + dot(&f, z), x)))
    })?;
    let (value, z, x) = best.ok_or_else(|| Error::Infeasible("Z has no lattice point".into()))?;
    Ok(OracleSolution { value, x, z })
}

/// `p*` by the cheapest exact route: Z enumeration with per-block solves
/// when Z's lattice is small, the monolithic solve otherwise.
pub fn oracle_optimum(problem: &TwoBlockMilp) -> Result<Option<OracleSolution>> {
    let z = &problem.z;
    let enumerable = (0..z.dim()).all(|i| z.is_integer(i) || z.is_fixed(i))
        && (0..z.dim())
            .filter(|&i| z.is_integer(i))
            .map(|i| {
                let (a, b) = int_range(z.lower[i], z.upper[i]);
                (b - a + 1).max(0) as f64
            })
            .product::<f64>()
            <= Z_LATTICE_LIMIT;
    if enumerable {
        lattice_solve(problem)
    } else {
        extensive_solve(problem)
    }
}

/// `p*` from the monolithic MILP solved by the bundled branch-and-bound.
pub fn extensive_solve(problem: &TwoBlockMilp) -> Result<Option<OracleSolution>> {
    problem.ensure_valid()?;
    let (n, d, m) = (problem.n(), problem.d(), problem.m());
    let rows = problem.x.eq.rows() + problem.z.eq.rows() + m;
    let work = ((n + d) * rows.max(1)) as f64;
    if work > EXTENSIVE_LIMIT {
        return Err(Error::SizeGuard(format!(
            "monolithic form has {} columns and {rows} rows",
            n + d
        )));
    }
    let mut inst = MilpInstance::default();
    for j in 0..n {
        inst.add_var(problem.c[j], problem.x.lower[j], problem.x.upper[j], problem.x.is_integer(j));
    }
    for i in 0..d {
        inst.add_var(problem.g[i], problem.z.lower[i], problem.z.upper[i], problem.z.is_integer(i));
    }
    for r in 0..problem.x.eq.rows() {
        inst.add_eq(nonzeros(problem.x.eq.row(r)), problem.x.rhs[r]);
    }
    for r in 0..problem.z.eq.rows() {
        let terms = nonzeros(problem.z.eq.row(r)).into_iter().map(|(j, a)| (n + j, a)).collect();
        inst.add_eq(terms, problem.z.rhs[r]);
    }
    for r in 0..m {
        let mut terms = nonzeros(problem.a.row(r));
        terms.extend(nonzeros(problem.b.row(r)).into_iter().map(|(j, a)| (n + j, a)));
        inst.add_eq(terms, 0.0);
    }
    let opts = SolveOptions {
        rel_gap: 1e-9,
        node_limit: 2_000_000,
        ..SolveOptions::default()
    };
    let res = solve(&inst, &opts)?;
    match res.status {
        SolveStatus::Infeasible => Ok(None),
        SolveStatus::Optimal | SolveStatus::GapReached => Ok(Some(OracleSolution {
            value: res.value,
            x: res.point[..n].to_vec(),
            z: res.point[n..].to_vec(),
        })),
        SolveStatus::IterLimit => Err(Error::SizeGuard("monolithic solve hit its node limit".into())),
    }
}
