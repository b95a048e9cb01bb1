//! Outer loops over AUSAL: the one-shot penalty method, two subgradient
//! dual schemes, the exact-penalty post-processing step, and the practical
//! scheme with persistent, revalidated cuts.

use serde::{Deserialize, Serialize};

use crate::ausal::{ausal, ausal_with_pool, AusalConfig, AusalOutcome, Context};
use crate::cuts::{Cut, CutPool};
use crate::error::{Error, Result};
use crate::lipmin::{presolve_start, Termination};
use crate::model::{norm1, norm_inf, Iterate};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlmVariant {
    Penalty,
    Gap,
    Finite,
    Practical,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlmParams {
    pub rho0: f64,
    pub gamma: f64,
    pub inner_alm: usize,
    pub alm_step: f64,
    /// Relative gap that ends one AUSAL phase.
    pub inner_gap: f64,
    /// Coupling feasibility tolerance.
    pub eps_p: f64,
    /// AUSAL accuracy for the subgradient variants.
    pub eps_d: f64,
    /// Relative UB/LB gap for the global stop.
    pub gap_tol: f64,
    pub outer_limit: usize,
    pub variant: AlmVariant,
    /// τ₀ for `τ_k = τ₀/√k`, or the constant τ of the finite variant.
    pub tau: f64,
    pub cut_window: Option<usize>,
}

impl Default for AlmParams {
    fn default() -> Self {
        AlmParams {
            rho0: 1.0,
            gamma: 1.1,
            inner_alm: 100,
            alm_step: 200.0,
            inner_gap: 1e-4,
            eps_p: 1e-6,
            eps_d: 1e-6,
            gap_tol: 1e-4,
            outer_limit: 100,
            variant: AlmVariant::Practical,
            tau: 1.0,
            cut_window: None,
        }
    }
}

impl AlmParams {
    fn check(&self) -> Result<()> {
        let ok = self.rho0 > 0.0
            && self.gamma >= 1.0
            && self.inner_alm > 0
            && self.alm_step >= 0.0
            && self.eps_p >= 0.0
            && self.eps_d >= 0.0
            && self.tau > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::Parameter(format!("invalid ALM parameters {self:?}")))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum AlmStatus {
    Converged,
    /// Zero coupling residual ended a subgradient run.
    ZeroResidual,
    IterLimit,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OuterRecord {
    pub lambda: Vec<f64>,
    pub rho: f64,
    /// z returned by the AUSAL call.
    pub z: Vec<f64>,
    /// AUSAL lower bound on `d(λ, ρ)`.
    pub dual_lower: f64,
    /// `L` at the AUSAL output.
    pub dual_value: f64,
    pub residual_l1: f64,
    pub z_solves: usize,
    pub termination: Termination,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AlmReport {
    pub variant: AlmVariant,
    pub outer: Vec<OuterRecord>,
    pub best: Option<Iterate>,
    /// Last AUSAL output.
    pub last: Option<Iterate>,
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub gap: f64,
    pub z_iterations: usize,
    pub status: AlmStatus,
    pub lambda: Vec<f64>,
    pub rho: f64,
    /// Final cut pool of the practical scheme; empty for the other variants.
    pub cuts: Vec<Cut>,
}

pub fn relative_gap(upper: f64, lower: f64) -> f64 {
    if !upper.is_finite() || !lower.is_finite() {
        return f64::INFINITY;
    }
    ((upper - lower) / upper.abs().max(1.0)).max(0.0)
}

struct Tracker {
    best: Option<Iterate>,
    lower: f64,
}

impl Tracker {
    fn new() -> Self {
        Tracker {
            best: None,
            lower: f64::NEG_INFINITY,
        }
    }

    fn offer(&mut self, it: &Iterate, feas_tol: f64) {
        if it.residual_l1 <= feas_tol && self.best.as_ref().map_or(true, |b| it.primal_obj < b.primal_obj) {
            self.best = Some(it.clone());
        }
    }

    fn absorb(&mut self, out: &AusalOutcome, feas_tol: f64) {
        if let Some(b) = &out.best_feasible {
            self.offer(b, feas_tol);
        }
        self.offer(&out.iterate, feas_tol);
        self.lower = self.lower.max(out.lower_bound);
    }

    fn upper(&self) -> f64 {
        self.best.as_ref().map_or(f64::INFINITY, |b| b.primal_obj)
    }
}

/// `ρ = (‖c‖₁ D∞(X) + ‖g‖₁ D∞(Z)) / ε + ‖λ‖∞ + 1`.
pub fn penalty_formula(c_l1: f64, x_diam: f64, g_l1: f64, z_diam: f64, eps: f64, lambda_inf: f64) -> f64 {
    (c_l1 * x_diam + g_l1 * z_diam) / eps + lambda_inf + 1.0
}

pub fn theorem_penalty(ctx: &Context, lambda: &[f64], eps: f64) -> f64 {
    let p = ctx.problem;
    penalty_formula(
        norm1(&p.c),
        ctx.consts.x_diam_inf,
        norm1(&p.g),
        ctx.consts.z_diam_inf,
        eps,
        norm_inf(lambda),
    )
}

fn record(out: &AusalOutcome, lambda: &[f64], rho: f64) -> OuterRecord {
    OuterRecord {
        lambda: lambda.to_vec(),
        rho,
        z: out.z.clone(),
        dual_lower: out.lower_bound,
        dual_value: out.value,
        residual_l1: out.iterate.residual_l1,
        z_solves: out.report.z_solves,
        termination: out.report.termination,
    }
}

fn finish(
    variant: AlmVariant,
    outer: Vec<OuterRecord>,
    tracker: Tracker,
    last: Option<Iterate>,
    z_iterations: usize,
    status: AlmStatus,
    lambda: Vec<f64>,
    rho: f64,
) -> AlmReport {
    let upper = tracker.upper();
    AlmReport {
        variant,
        outer,
        gap: relative_gap(upper, tracker.lower),
        best: tracker.best,
        last,
        lower_bound: tracker.lower,
        upper_bound: upper,
        z_iterations,
        status,
        lambda,
        rho,
        cuts: Vec::new(),
    }
}

/// One AUSAL call at the penalty of the ε-solution theorem.
pub fn penalty_solve(ctx: &Context, lambda: &[f64], eps: f64) -> Result<(Iterate, AlmReport)> {
    if !(eps > 0.0) {
        return Err(Error::Parameter("penalty_solve needs eps > 0".into()));
    }
    let rho = theorem_penalty(ctx, lambda, eps);
    let cfg = AusalConfig::new(eps);
    let out = ausal(ctx, lambda, rho, &cfg)?;
    let mut tracker = Tracker::new();
    tracker.absorb(&out, eps);
    let it = out.iterate.clone();
    let status = match out.report.termination {
        Termination::IterLimit => AlmStatus::IterLimit,
        _ => AlmStatus::Converged,
    };
    let rep = finish(
        AlmVariant::Penalty,
        vec![record(&out, lambda, rho)],
        tracker,
        Some(it.clone()),
        out.report.z_solves,
        status,
        lambda.to_vec(),
        rho,
    );
    Ok((it, rep))
}

/// Re-runs AUSAL at `max{‖λ‖∞, ρ + 2l + 1}`.
pub fn postprocess_exact_penalty(ctx: &Context, lambda: &[f64], rho: f64, slack: f64, eps: f64) -> Result<Iterate> {
    if slack < 0.0 {
        return Err(Error::Parameter("slack must be nonnegative".into()));
    }
    let rho_pp = postprocess_penalty(lambda, rho, slack);
    Ok(ausal(ctx, lambda, rho_pp, &AusalConfig::new(eps))?.iterate)
}

pub fn postprocess_penalty(lambda: &[f64], rho: f64, slack: f64) -> f64 {
    norm_inf(lambda).max(rho + 2.0 * slack + 1.0)
}

/// Subgradient scheme with `α_k = τ_k / (√2 ‖r^k‖₁)` and `τ_k = τ₀/√k`.
pub fn subgrad_gap(ctx: &Context, params: &AlmParams) -> Result<AlmReport> {
    params.check()?;
    let m = ctx.problem.m();
    let mut lambda = vec![0.0; m];
    let mut rho = params.rho0;
    let mut tracker = Tracker::new();
    let mut outer = Vec::new();
    let mut z_iterations = 0;
    let mut last = None;
    let cfg = AusalConfig {
        feas_tol: params.eps_p,
        ..AusalConfig::new(params.eps_d)
    };
    for k in 1..=params.outer_limit {
        let out = ausal(ctx, &lambda, rho, &cfg)?;
        z_iterations += out.report.z_solves;
        tracker.absorb(&out, params.eps_p);
        outer.push(record(&out, &lambda, rho));
        let r = out.iterate.residual.clone();
        let r1 = out.iterate.residual_l1;
        last = Some(out.iterate);
        if r1 <= 1e-12 {
            return Ok(finish(
                AlmVariant::Gap,
                outer,
                tracker,
                last,
                z_iterations,
                AlmStatus::ZeroResidual,
                lambda,
                rho,
            ));
        }
        let tau_k = params.tau / (k as f64).sqrt();
        let alpha = tau_k / (std::f64::consts::SQRT_2 * r1);
        for (l, ri) in lambda.iter_mut().zip(&r) {
            *l += alpha * ri;
        }
        rho += alpha * r1;
    }
    Ok(finish(
        AlmVariant::Gap,
        outer,
        tracker,
        last,
        z_iterations,
        AlmStatus::IterLimit,
        lambda,
        rho,
    ))
}

/// Subgradient scheme with finite termination: `α_k = τ/‖r^k‖₁`,
/// `ρ^{k+1} = max{‖λ^{k+1}‖∞, ρ^k + τ}`.
pub fn subgrad_finite(ctx: &Context, params: &AlmParams) -> Result<(Option<Iterate>, AlmReport)> {
    params.check()?;
    if !(params.eps_p > 0.0) {
        return Err(Error::Parameter("finite variant needs eps_p > 0".into()));
    }
    let m = ctx.problem.m();
    let mut lambda = vec![0.0; m];
    let mut rho = params.rho0.max(norm_inf(&lambda));
    let mut tracker = Tracker::new();
    let mut outer = Vec::new();
    let mut z_iterations = 0;
    let cfg = AusalConfig {
        feas_tol: params.eps_p,
        ..AusalConfig::new(params.eps_d)
    };
    let mut last = None;
    for _k in 1..=params.outer_limit {
        let out = ausal(ctx, &lambda, rho, &cfg)?;
        z_iterations += out.report.z_solves;
        tracker.absorb(&out, params.eps_p);
        outer.push(record(&out, &lambda, rho));
        let r = out.iterate.residual.clone();
        let r1 = out.iterate.residual_l1;
        last = Some(out.iterate.clone());
        if r1 <= params.eps_p {
            let rep = finish(
                AlmVariant::Finite,
                outer,
                tracker,
                last.clone(),
                z_iterations,
                AlmStatus::Converged,
                lambda,
                rho,
            );
            return Ok((last, rep));
        }
        let alpha = params.tau / r1;
        for (l, ri) in lambda.iter_mut().zip(&r) {
            *l += alpha * ri;
        }
        rho = norm_inf(&lambda).max(rho + alpha * r1);
    }
    let rep = finish(
        AlmVariant::Finite,
        outer,
        tracker,
        last,
        z_iterations,
        AlmStatus::IterLimit,
        lambda,
        rho,
    );
    Ok((None, rep))
}

/// `α_k = step / (k √2 max{1, r})`.
pub fn practical_step(step: f64, k: usize, r1: f64) -> f64 {
    step / (k as f64 * std::f64::consts::SQRT_2 * r1.max(1.0))
}

/// The practical scheme: AUSAL phases with persistent cuts, revalidated at
/// every dual update; `ρ ← γρ` and `λ ← λ + α_k r^k` between phases.
pub fn practical_alm(ctx: &Context, params: &AlmParams) -> Result<AlmReport> {
    params.check()?;
    let p = ctx.problem;
    let mut lambda = vec![0.0; p.m()];
    let mut rho = params.rho0;
    let mut pool = CutPool::new(params.cut_window);
    let mut tracker = Tracker::new();
    let mut outer = Vec::new();

    let z_start = presolve_start(&p.g, &p.z, ctx.r_lower_bound(&lambda), ctx.solver, &ctx.sub_opts)?;
    let mut z_start = Some(z_start);
    let mut z_iterations = 1;
    let mut last = None;
    for k in 1..=params.outer_limit {
        let cfg = AusalConfig {
            eps: 0.0,
            rel_eps: params.inner_gap,
            max_iter: params.inner_alm,
            z0: z_start.take(),
            feas_tol: params.eps_p,
        };
        let out = ausal_with_pool(ctx, &lambda, rho, &cfg, &mut pool)?;
        z_iterations += out.report.z_solves;
        tracker.absorb(&out, params.eps_p);
        outer.push(record(&out, &lambda, rho));
        last = Some(out.iterate.clone());
        if relative_gap(tracker.upper(), tracker.lower) <= params.gap_tol {
            let mut rep = finish(
                AlmVariant::Practical,
                outer,
                tracker,
                last,
                z_iterations,
                AlmStatus::Converged,
                lambda,
                rho,
            );
            rep.cuts = pool.as_vec();
            return Ok(rep);
        }
        let r1 = out.iterate.residual_l1;
        let alpha = practical_step(params.alm_step, k, r1);
        for (l, ri) in lambda.iter_mut().zip(&out.iterate.residual) {
            *l += alpha * ri;
        }
        rho *= params.gamma;
        pool.revalidate_all(&lambda, rho, ctx.consts.k_base, ctx.consts.ax_norm_bound)?;
        z_start = Some(out.z);
    }
    let mut rep = finish(
        AlmVariant::Practical,
        outer,
        tracker,
        last,
        z_iterations,
        AlmStatus::IterLimit,
        lambda,
        rho,
    );
    rep.cuts = pool.as_vec();
    Ok(rep)
}
