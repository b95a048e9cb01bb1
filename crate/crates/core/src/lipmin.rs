//! Global minimization of `f(z) + Q(z)` over a mixed-integer set by
//! reverse-norm cuts, for a linear `f` and a `K`-Lipschitz (ℓ1) oracle `Q`.

use serde::{Deserialize, Serialize};

use crate::cuts::{reverse_norm_cut, CutPool};
use crate::error::{Error, Result};
use crate::model::{dot, MilSet};
use crate::subsolver::{
    encode_cut_epigraph, solve_required, CutGeometry, MilpSolver, SolveOptions,
};

/// One evaluation of `Q`: `value` is attained, `lower` is a proven lower
/// bound on the exact value (they coincide for exact subproblem solves).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QEval {
    pub value: f64,
    pub lower: f64,
}

#[derive(Clone, Debug)]
pub struct LipMinConfig {
    pub k: f64,
    pub eps: f64,
    /// Also stop when `UB − LB ≤ rel_eps · max(1, |UB|)`; 0 disables.
    pub rel_eps: f64,
    pub max_iter: usize,
    pub z0: Option<Vec<f64>>,
    /// Finite lower bound on `Q` over Z's box.
    pub t_lower: f64,
    /// Stop when `Q(z^k) − t^k ≤ ε` instead of the UB test.
    pub alt_stop: bool,
    pub sub_opts: SolveOptions,
    /// Dual state recorded on new cuts, for later revalidation.
    pub born: Option<(Vec<f64>, f64)>,
}

impl LipMinConfig {
    pub fn new(k: f64, eps: f64, t_lower: f64) -> Self {
        LipMinConfig {
            k,
            eps,
            rel_eps: 0.0,
            max_iter: 10_000,
            z0: None,
            t_lower,
            alt_stop: false,
            sub_opts: SolveOptions::tight(),
            born: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    Gap,
    Repeat,
    AltStop,
    IterLimit,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LipIter {
    pub z: Vec<f64>,
    /// Proven lower bound of the epigraph problem, `f(z^k) + t^k`.
    pub lower: f64,
    pub upper: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LipMinReport {
    pub iterates: Vec<LipIter>,
    pub termination: Termination,
    pub lower: f64,
    pub upper: f64,
    pub gap: f64,
    /// Epigraph MILP solves, the presolve included.
    pub z_solves: usize,
    pub q_evals: usize,
}

/// Result of a run: best point, its `Q`, the oracle payload there, report.
pub struct LipMinOutcome<A> {
    pub z: Vec<f64>,
    pub q: f64,
    pub aux: A,
    pub report: LipMinReport,
}

/// `argmin f(z) + t` over Z with `t` held at `t_lower`.
pub fn presolve_start(
    f: &[f64],
    z_set: &MilSet,
    t_lower: f64,
    solver: &dyn MilpSolver,
    opts: &SolveOptions,
) -> Result<Vec<f64>> {
    let geom = CutGeometry::new(&crate::model::Matrix::zeros(0, z_set.dim()), z_set);
    let (inst, layout) = encode_cut_epigraph(z_set, f, &[], &geom, t_lower)?;
    let res = solver.solve(&inst, opts)?;
    if !res.has_point() {
        return Err(Error::Infeasible("Z is empty".into()));
    }
    Ok(snap(z_set, &res.point[..layout.d]))
}

/// Rounds integer components and clamps to the box.
pub(crate) fn snap(z_set: &MilSet, z: &[f64]) -> Vec<f64> {
    z.iter()
        .enumerate()
        .map(|(i, &v)| {
            let v = if z_set.is_integer(i) { v.round() } else { v };
            v.clamp(z_set.lower[i], z_set.upper[i])
        })
        .collect()
}

fn same_point(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-9 * (1.0 + x.abs()))
}

/// Runs the reverse-norm cut loop.
///
/// `pool` may already hold cuts valid for `Q`; new cuts use modulus `cfg.k`
/// and are appended. `geom` supplies the z geometry for the epigraph.
pub fn minimize<A: Clone>(
    f: &[f64],
    q: &mut dyn FnMut(&[f64]) -> Result<(QEval, A)>,
    z_set: &MilSet,
    geom: &CutGeometry,
    pool: &mut CutPool,
    cfg: &LipMinConfig,
    solver: &dyn MilpSolver,
) -> Result<LipMinOutcome<A>> {
    if !(cfg.k > 0.0) || cfg.eps < 0.0 {
        return Err(Error::Parameter(format!(
            "lipmin needs K > 0 and eps >= 0 (K = {}, eps = {})",
            cfg.k, cfg.eps
        )));
    }
    let mut z_solves = 0;
    let z0 = match &cfg.z0 {
        Some(z) => snap(z_set, z),
        None => {
            z_solves += 1;
            presolve_start(f, z_set, cfg.t_lower, solver, &cfg.sub_opts)?
        }
    };
    let new_cut = |z: &[f64], v: f64| -> Result<crate::cuts::Cut> {
        let cut = reverse_norm_cut(z, v, cfg.k)?;
        Ok(match &cfg.born {
            Some((lam, rho)) => cut.born_under(lam, *rho),
            None => cut,
        })
    };
    let mut seen: Vec<(Vec<f64>, QEval)> = Vec::new();
    let (e0, a0) = q(&z0)?;
    pool.push(new_cut(&z0, e0.lower)?);
    let mut upper = dot(f, &z0) + e0.value;
    let mut best = (z0.clone(), e0.value, a0);
    seen.push((z0, e0));

    let mut lower = f64::NEG_INFINITY;
    let mut iterates = Vec::new();
    let mut termination = Termination::IterLimit;
    for _k in 1..=cfg.max_iter {
        let cuts = pool.as_vec();
        let (inst, layout) = encode_cut_epigraph(z_set, f, &cuts, geom, cfg.t_lower)?;
        let res = solve_required(solver, &inst, &cfg.sub_opts, "z-subproblem", None)?;
        z_solves += 1;
        let zk = snap(z_set, &res.point[..layout.d]);
        let tk = res.point[layout.t];
        lower = lower.max(res.bound);

        let cached = seen.iter().find(|(s, _)| same_point(s, &zk)).map(|(_, e)| *e);
        let ek = match cached {
            Some(e) => e,
            None => {
                let (e, a) = q(&zk)?;
                pool.push(new_cut(&zk, e.lower)?);
                let val = dot(f, &zk) + e.value;
                if val < upper {
                    upper = val;
                    best = (zk.clone(), e.value, a);
                }
                seen.push((zk.clone(), e));
                e
            }
        };
        iterates.push(LipIter {
            z: zk.clone(),
            lower,
            upper,
        });
        let tol = cfg.eps.max(cfg.rel_eps * upper.abs().max(1.0));
        if cfg.alt_stop {
            if ek.value - tk <= cfg.eps {
                termination = Termination::AltStop;
                break;
            }
        } else if upper - lower <= tol {
            termination = Termination::Gap;
            break;
        }
        if cached.is_some() {
            termination = Termination::Repeat;
            break;
        }
    }
    let q_evals = seen.len();
    Ok(LipMinOutcome {
        z: best.0,
        q: best.1,
        aux: best.2,
        report: LipMinReport {
            iterates,
            termination,
            lower,
            upper,
            gap: (upper - lower).max(0.0),
            z_solves,
            q_evals,
        },
    })
}
