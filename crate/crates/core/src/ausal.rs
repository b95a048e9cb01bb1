//! Alternating minimization of the sharp augmented Lagrangian.
//!
//! `R(z; λ, ρ) = min_{x∈X} ⟨c + Aᵀλ, x⟩ + ρ‖Ax + Bz‖₁` is evaluated block by
//! block and minimized over z by [`lipmin`](crate::lipmin) with modulus
//! `ρ‖B‖₁`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cuts::CutPool;
use crate::error::{Error, Result};
use crate::lipmin::{self, LipMinConfig, LipMinReport, QEval};
use crate::model::{dot, interval_dot, Block, DerivedConstants, Iterate, TwoBlockMilp};
use crate::subsolver::{
    encode_l1_objective, solve_required, BranchAndBound, CutGeometry, L1Rows, MilpInstance,
    MilpSolver, SolveOptions,
};

/// Shared, immutable data for one solve.
pub struct Context<'a> {
    pub problem: &'a TwoBlockMilp,
    pub blocks: Vec<Block>,
    pub consts: DerivedConstants,
    pub geom: CutGeometry,
    pub solver: &'a dyn MilpSolver,
    pub sub_opts: SolveOptions,
    pool: Option<rayon::ThreadPool>,
}

static BUNDLED: BranchAndBound = BranchAndBound;

impl<'a> Context<'a> {
    pub fn new(problem: &'a TwoBlockMilp) -> Result<Self> {
        Self::with_solver(problem, &BUNDLED, 1)
    }

    pub fn with_solver(problem: &'a TwoBlockMilp, solver: &'a dyn MilpSolver, workers: usize) -> Result<Self> {
        let consts = problem.derived_constants()?;
        let pool = if workers > 1 {
            Some(
                rayon::ThreadPoolBuilder::new()
                    .num_threads(workers)
                    .build()
                    .map_err(|e| Error::Parameter(format!("worker pool: {e}")))?,
            )
        } else {
            None
        };
        Ok(Context {
            problem,
            blocks: problem.decompose(),
            consts,
            geom: CutGeometry::new(&problem.b, &problem.z),
            solver,
            sub_opts: SolveOptions::tight(),
            pool,
        })
    }

    pub fn workers(&self) -> usize {
        self.pool.as_ref().map_or(1, |p| p.current_num_threads())
    }

    /// Applies `f` to every block, in parallel when a pool is configured;
    /// the output keeps block order.
    pub(crate) fn map_blocks<T: Send>(&self, f: impl Fn(usize, &Block) -> Result<T> + Sync) -> Result<Vec<T>> {
        match &self.pool {
            Some(pool) => pool.install(|| {
                self.blocks
                    .par_iter()
                    .enumerate()
                    .map(|(p, b)| f(p, b))
                    .collect()
            }),
            None => self.blocks.iter().enumerate().map(|(p, b)| f(p, b)).collect(),
        }
    }

    /// Interval lower bound of `⟨c + Aᵀλ, x⟩` over X's box, a valid lower
    /// bound on `R(·; λ, ρ)` for every ρ ≥ 0.
    pub fn r_lower_bound(&self, lambda: &[f64]) -> f64 {
        let p = self.problem;
        let mut coef = p.c.clone();
        for (j, v) in p.a.tmul_vec(lambda).into_iter().enumerate() {
            coef[j] += v;
        }
        interval_dot(&coef, &p.x.lower, &p.x.upper).0
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ValueEval {
    pub z: Vec<f64>,
    pub value: f64,
    /// Proven lower bound on the exact value.
    pub lower: f64,
    pub argmin_x: Vec<f64>,
    pub per_block_values: Vec<f64>,
}

/// Builds the ℓ1-penalised x-subproblem of one block.
pub(crate) fn block_instance(block: &Block, z: &[f64], lambda: &[f64], rho: f64) -> Result<MilpInstance> {
    let mut obj = block.c.clone();
    let lam: Vec<f64> = block.rows.iter().map(|&i| lambda[i]).collect();
    for (j, v) in block.a.tmul_vec(&lam).into_iter().enumerate() {
        obj[j] += v;
    }
    let mut inst = MilpInstance::from_milset(&block.x, &obj);
    let bz = block.b.mul_vec(z);
    let rows = L1Rows {
        rows: (0..block.a.rows())
            .map(|i| {
                let terms = block
                    .a
                    .row(i)
                    .iter()
                    .enumerate()
                    .filter(|(_, a)| **a != 0.0)
                    .map(|(j, a)| (j, *a))
                    .collect();
                (terms, bz[i])
            })
            .collect(),
    };
    encode_l1_objective(&mut inst, &rows, rho)?;
    Ok(inst)
}

/// `R(z; λ, ρ)` with its minimizer.
pub fn eval_r(ctx: &Context, z: &[f64], lambda: &[f64], rho: f64) -> Result<ValueEval> {
    let p = ctx.problem;
    if z.len() != p.d() || lambda.len() != p.m() {
        return Err(Error::Dimension("eval_r: z or λ has the wrong length".into()));
    }
    let solved = ctx.map_blocks(|idx, block| {
        let inst = block_instance(block, z, lambda, rho)?;
        let res = solve_required(ctx.solver, &inst, &ctx.sub_opts, "x-subproblem", Some(idx))?;
        Ok((res.value, res.bound, res.point[..block.cols.len()].to_vec()))
    })?;
    let mut x = vec![0.0; p.n()];
    let mut value = 0.0;
    let mut lower = 0.0;
    let mut per_block_values = Vec::with_capacity(solved.len());
    for (block, (v, lb, xp)) in ctx.blocks.iter().zip(solved) {
        value += v;
        lower += lb;
        per_block_values.push(v);
        for (k, &j) in block.cols.iter().enumerate() {
            x[j] = xp[k];
        }
    }
    Ok(ValueEval {
        z: z.to_vec(),
        value,
        lower,
        argmin_x: x,
        per_block_values,
    })
}

/// `P(z, μ, β) = R(z; μ, β) + μᵀBz`.
pub fn eval_p(ctx: &Context, z: &[f64], mu: &[f64], beta: f64) -> Result<ValueEval> {
    let mut ev = eval_r(ctx, z, mu, beta)?;
    let shift = dot(mu, &ctx.problem.b.mul_vec(z));
    ev.value += shift;
    ev.lower += shift;
    Ok(ev)
}

#[derive(Clone, Debug)]
pub struct AusalConfig {
    pub eps: f64,
    pub rel_eps: f64,
    pub max_iter: usize,
    pub z0: Option<Vec<f64>>,
    /// Coupling residual below which an evaluated pair counts as feasible.
    pub feas_tol: f64,
}

impl AusalConfig {
    pub fn new(eps: f64) -> Self {
        AusalConfig {
            eps,
            rel_eps: 0.0,
            max_iter: 10_000,
            z0: None,
            feas_tol: 1e-6,
        }
    }
}

pub struct AusalOutcome {
    pub x: Vec<f64>,
    pub z: Vec<f64>,
    /// `L(x, z, λ, ρ)` at the returned pair.
    pub value: f64,
    /// Proven lower bound on `d(λ, ρ)`.
    pub lower_bound: f64,
    pub iterate: Iterate,
    /// Cheapest coupling-feasible pair met while evaluating `R`.
    pub best_feasible: Option<Iterate>,
    pub report: LipMinReport,
}

/// Minimizes `L(·, ·, λ, ρ)` over X × Z, adding cuts to `pool`.
pub fn ausal_with_pool(
    ctx: &Context,
    lambda: &[f64],
    rho: f64,
    cfg: &AusalConfig,
    pool: &mut CutPool,
) -> Result<AusalOutcome> {
    if !(rho > 0.0) {
        return Err(Error::Parameter(format!("penalty must be positive, got {rho}")));
    }
    let p = ctx.problem;
    let mut f = p.g.clone();
    for (i, v) in p.b.tmul_vec(lambda).into_iter().enumerate() {
        f[i] += v;
    }
    let k = (rho * ctx.consts.k_base).max(f64::MIN_POSITIVE);
    let t_lower = ctx.r_lower_bound(lambda);
    let lcfg = LipMinConfig {
        k,
        eps: cfg.eps,
        rel_eps: cfg.rel_eps,
        max_iter: cfg.max_iter,
        z0: cfg.z0.clone(),
        t_lower,
        alt_stop: false,
        sub_opts: ctx.sub_opts,
        born: Some((lambda.to_vec(), rho)),
    };
    let mut best_feasible: Option<Iterate> = None;
    let mut oracle = |z: &[f64]| -> Result<(QEval, Vec<f64>)> {
        let ev = eval_r(ctx, z, lambda, rho)?;
        let it = p.iterate(ev.argmin_x.clone(), z.to_vec());
        if it.residual_l1 <= cfg.feas_tol
            && best_feasible.as_ref().map_or(true, |b| it.primal_obj < b.primal_obj)
        {
            best_feasible = Some(it);
        }
        Ok((
            QEval {
                value: ev.value,
                lower: ev.lower,
            },
            ev.argmin_x,
        ))
    };
    let out = lipmin::minimize(&f, &mut oracle, &p.z, &ctx.geom, pool, &lcfg, ctx.solver)?;
    let iterate = p.iterate(out.aux.clone(), out.z.clone());
    let value = dot(&f, &out.z) + out.q;
    Ok(AusalOutcome {
        x: out.aux,
        z: out.z,
        value,
        lower_bound: out.report.lower,
        iterate,
        best_feasible,
        report: out.report,
    })
}

/// [`ausal_with_pool`] with a fresh, unbounded cut pool.
pub fn ausal(ctx: &Context, lambda: &[f64], rho: f64, cfg: &AusalConfig) -> Result<AusalOutcome> {
    let mut pool = CutPool::new(None);
    ausal_with_pool(ctx, lambda, rho, cfg, &mut pool)
}
