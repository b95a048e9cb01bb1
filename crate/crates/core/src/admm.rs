//! Single-loop ADMM scheme driven by augmented Lagrangian cuts.
//!
//! Each iteration solves the ℓ1-penalised x-step at the previous `z`,
//! turns its value into an AL cut over z, and minimizes `gᵀz + t` over the
//! cut epigraph. `gᵀz^k + t^k` is a running lower bound; coupling-feasible
//! x-step pairs give upper bounds.

use serde::{Deserialize, Serialize};

use crate::alm::relative_gap;
use crate::ausal::{eval_p, eval_r, Context};
use crate::cuts::{al_cut, CutPool};
use crate::error::{Error, Result};
use crate::lipmin::{presolve_start, snap};
use crate::model::{interval_dot, norm_inf, Iterate};
use crate::subsolver::{encode_cut_epigraph, solve_required};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DualScheme {
    /// `μ ← μ + step·β·r`, `β ← γβ` every `inner_admm` iterations.
    Practical,
    /// `μ ← Π_box(μ + β r)`, `β ← min(β̄, γβ)`.
    Projected,
}

/// Which residual drives the dual step.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ResidualMode {
    /// `Ax^k + Bz^{k−1}`, the pair the x-step actually saw.
    XStep,
    /// `Ax^k + Bz^k`.
    ZStep,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdmmParams {
    pub beta0: f64,
    pub gamma: f64,
    pub inner_admm: usize,
    pub step: f64,
    pub beta_cap: Option<f64>,
    pub mu_box: Option<(f64, f64)>,
    pub scheme: DualScheme,
    pub residual: ResidualMode,
    /// Relative UB/LB gap for the stop.
    pub gap_tol: f64,
    /// Coupling feasibility tolerance for upper bounds.
    pub eps_p: f64,
    pub iter_limit: usize,
    pub cut_window: Option<usize>,
}

impl Default for AdmmParams {
    fn default() -> Self {
        AdmmParams {
            beta0: 1.0,
            gamma: 1.1,
            inner_admm: 50,
            step: 200.0,
            beta_cap: None,
            mu_box: None,
            scheme: DualScheme::Practical,
            residual: ResidualMode::XStep,
            gap_tol: 1e-4,
            eps_p: 1e-6,
            iter_limit: 10_000,
            cut_window: None,
        }
    }
}

impl AdmmParams {
    fn check(&self) -> Result<()> {
        let mut ok = self.beta0 > 0.0
            && self.gamma >= 1.0
            && self.inner_admm > 0
            && self.step >= 0.0
            && self.gap_tol >= 0.0
            && self.eps_p >= 0.0;
        if let Some(cap) = self.beta_cap {
            ok &= cap >= self.beta0;
        }
        if let Some((lo, hi)) = self.mu_box {
            ok &= lo <= hi;
        }
        if self.scheme == DualScheme::Projected {
            ok &= self.mu_box.is_some();
        }
        if ok {
            Ok(())
        } else {
            Err(Error::Parameter(format!("invalid ADMM parameters {self:?}")))
        }
    }
}

/// `(μ^{k+1}, β^{k+1})` for the projected scheme.
pub fn dual_update_projected(mu: &[f64], beta: f64, residual: &[f64], params: &AdmmParams) -> Result<(Vec<f64>, f64)> {
    let (lo, hi) = params
        .mu_box
        .ok_or_else(|| Error::Parameter("projected update needs a multiplier box".into()))?;
    let next = mu
        .iter()
        .zip(residual)
        .map(|(m, r)| (m + beta * r).clamp(lo, hi))
        .collect();
    let beta = match params.beta_cap {
        Some(cap) => cap.min(params.gamma * beta),
        None => params.gamma * beta,
    };
    Ok((next, beta))
}

/// `(μ^{k+1}, β^{k+1})` for the practical scheme at iteration `k`.
pub fn dual_update_practical(mu: &[f64], beta: f64, residual: &[f64], k: usize, params: &AdmmParams) -> (Vec<f64>, f64) {
    let next = mu
        .iter()
        .zip(residual)
        .map(|(m, r)| m + params.step * beta * r)
        .collect();
    let beta = if k % params.inner_admm == 0 {
        beta * params.gamma
    } else {
        beta
    };
    (next, beta)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum AdmmStatus {
    Converged,
    IterLimit,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AdmmIter {
    pub x: Vec<f64>,
    pub z: Vec<f64>,
    pub t: f64,
    /// Duals used by this iteration's x-step.
    pub mu: Vec<f64>,
    pub beta: f64,
    /// `β − ‖μ‖∞`.
    pub margin: f64,
    /// ‖Ax^k + Bz^{k−1}‖₁.
    pub residual_l1: f64,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AdmmReport {
    pub iterations: Vec<AdmmIter>,
    pub best: Option<Iterate>,
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub gap: f64,
    /// z-subproblem solves, the presolve included.
    pub z_iterations: usize,
    pub status: AdmmStatus,
    pub cuts: CutPool,
}

impl AdmmReport {
    pub fn lower_history(&self) -> Vec<f64> {
        self.iterations.iter().map(|i| i.lower).collect()
    }

    pub fn upper_history(&self) -> Vec<f64> {
        self.iterations.iter().map(|i| i.upper).collect()
    }
}

/// Interval lower bound of `cᵀx` over X's box; every AL cut lies above it.
pub fn t_lower_bound(ctx: &Context) -> f64 {
    let p = ctx.problem;
    interval_dot(&p.c, &p.x.lower, &p.x.upper).0
}

pub fn admm_solve(ctx: &Context, z0: Option<&[f64]>, params: &AdmmParams) -> Result<(Option<Iterate>, AdmmReport)> {
    params.check()?;
    let p = ctx.problem;
    let t_lower = t_lower_bound(ctx);
    let mut z_iterations = 0;
    let mut z = match z0 {
        Some(z) => {
            if z.len() != p.d() {
                return Err(Error::Dimension("z0 has the wrong length".into()));
            }
            snap(&p.z, z)
        }
        None => {
            z_iterations += 1;
            presolve_start(&p.g, &p.z, t_lower, ctx.solver, &ctx.sub_opts)?
        }
    };
    let mut mu = vec![0.0; p.m()];
    let mut beta = params.beta0;
    let mut pool = CutPool::new(params.cut_window);
    let mut best: Option<Iterate> = None;
    let mut lower = f64::NEG_INFINITY;
    let mut iterations = Vec::new();
    let mut status = AdmmStatus::IterLimit;

    let upper_of = |best: &Option<Iterate>| best.as_ref().map_or(f64::INFINITY, |b| b.primal_obj);
    for k in 1..=params.iter_limit {
        let ev = eval_p(ctx, &z, &mu, beta)?;
        let pair = p.iterate(ev.argmin_x.clone(), z.clone());
        if pair.residual_l1 <= params.eps_p && upper_of(&best) > pair.primal_obj {
            best = Some(pair.clone());
        }
        if relative_gap(upper_of(&best), lower) <= params.gap_tol {
            iterations.push(AdmmIter {
                x: pair.x.clone(),
                z: z.clone(),
                t: f64::NAN,
                mu: mu.clone(),
                beta,
                margin: beta - norm_inf(&mu),
                residual_l1: pair.residual_l1,
                lower,
                upper: upper_of(&best),
            });
            status = AdmmStatus::Converged;
            break;
        }
        pool.push(al_cut(&z, ev.lower, &mu, beta, &p.b)?);

        let (inst, layout) = encode_cut_epigraph(&p.z, &p.g, &pool.as_vec(), &ctx.geom, t_lower)?;
        let res = solve_required(ctx.solver, &inst, &ctx.sub_opts, "z-step", None)?;
        z_iterations += 1;
        let z_next = snap(&p.z, &res.point[..layout.d]);
        let t = res.point[layout.t];
        lower = lower.max(res.bound);

        let residual = match params.residual {
            ResidualMode::XStep => pair.residual.clone(),
            ResidualMode::ZStep => p.residual(&pair.x, &z_next),
        };
        iterations.push(AdmmIter {
            x: pair.x,
            z: z_next.clone(),
            t,
            mu: mu.clone(),
            beta,
            margin: beta - norm_inf(&mu),
            residual_l1: pair.residual_l1,
            lower,
            upper: upper_of(&best),
        });
        if relative_gap(upper_of(&best), lower) <= params.gap_tol {
            status = AdmmStatus::Converged;
            break;
        }
        (mu, beta) = match params.scheme {
            DualScheme::Practical => dual_update_practical(&mu, beta, &residual, k, params),
            DualScheme::Projected => dual_update_projected(&mu, beta, &residual, params)?,
        };
        z = z_next;
    }
    let upper = upper_of(&best);
    let report = AdmmReport {
        iterations,
        best: best.clone(),
        lower_bound: lower,
        upper_bound: upper,
        gap: relative_gap(upper, lower),
        z_iterations,
        status,
        cuts: pool,
    };
    Ok((best, report))
}

/// One ℓ1-penalised x-solve at `z` with zero multipliers and penalty `rho`.
pub fn admm_postprocess(ctx: &Context, z: &[f64], rho: f64) -> Result<Iterate> {
    if rho < 0.0 {
        return Err(Error::Parameter("penalty estimate must be nonnegative".into()));
    }
    let ev = eval_r(ctx, z, &vec![0.0; ctx.problem.m()], rho)?;
    Ok(ctx.problem.iterate(ev.argmin_x, z.to_vec()))
}
