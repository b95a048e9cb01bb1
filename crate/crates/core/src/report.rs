//! Run configuration, the JSON run report and its one-line CSV summary.
//!
//! A [`RunConfig`] is also the `parameters` block of every report, so a
//! report can be replayed by feeding that block back as a config file.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::admm::{admm_solve, AdmmParams, AdmmStatus, DualScheme, ResidualMode};
use crate::alm::{
    penalty_solve, practical_alm, subgrad_finite, subgrad_gap, AlmParams, AlmReport, AlmStatus,
    AlmVariant,
};
use crate::ausal::Context;
use crate::cuts::Cut;
use crate::error::{Error, Result};
use crate::model::{norm_inf, Iterate, TwoBlockMilp};
use crate::subsolver::MilpSolver;

pub const REPORT_FORMAT: &str = "blockmilp-report-v1";

/// Fixed CSV columns, in order.
pub const CSV_COLUMNS: [&str; 9] = [
    "instance",
    "algorithm",
    "variant",
    "status",
    "gap_percent",
    "iterations",
    "objective",
    "lower_bound",
    "time_seconds",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Alm,
    Admm,
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::Alm => "alm",
            Algorithm::Admm => "admm",
        })
    }
}

/// `(ρ₀, γ, innerALM, innerADMM, almDualStepSize, admmDualStepSize)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SixTuple {
    pub rho0: f64,
    pub gamma: f64,
    pub inner_alm: usize,
    pub inner_admm: usize,
    pub alm_step: f64,
    pub admm_step: f64,
}

impl FromStr for SixTuple {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let body = s.trim().trim_start_matches('(').trim_end_matches(')');
        let parts: Vec<&str> = body.split(',').map(str::trim).collect();
        if parts.len() != 6 {
            return Err(Error::Parameter(format!(
                "parameter tuple needs 6 comma-separated values, got {}",
                parts.len()
            )));
        }
        let float = |i: usize| -> Result<f64> {
            parts[i]
                .parse::<f64>()
                .map_err(|_| Error::Parameter(format!("bad number {:?} in parameter tuple", parts[i])))
        };
        let count = |i: usize| -> Result<usize> {
            parts[i]
                .parse::<usize>()
                .map_err(|_| Error::Parameter(format!("bad count {:?} in parameter tuple", parts[i])))
        };
        Ok(SixTuple {
            rho0: float(0)?,
            gamma: float(1)?,
            inner_alm: count(2)?,
            inner_admm: count(3)?,
            alm_step: float(4)?,
            admm_step: float(5)?,
        })
    }
}

impl fmt::Display for SixTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{},{},{},{},{},{}",
            self.rho0, self.gamma, self.inner_alm, self.inner_admm, self.alm_step, self.admm_step
        )
    }
}

/// Every knob of a run. Missing fields in a config file take the defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub algorithm: Algorithm,
    pub variant: AlmVariant,
    /// The 6-tuple as given on the command line, echoed verbatim.
    pub params: Option<String>,
    pub rho0: f64,
    pub gamma: f64,
    pub inner_alm: usize,
    pub alm_step: f64,
    pub inner_gap: f64,
    pub eps_p: f64,
    pub eps_d: f64,
    pub gap_tol: f64,
    pub outer_limit: usize,
    pub tau: f64,
    /// ε of the one-shot penalty variant.
    pub penalty_eps: f64,
    pub beta0: f64,
    pub inner_admm: usize,
    pub admm_step: f64,
    pub beta_cap: Option<f64>,
    pub mu_lo: Option<f64>,
    pub mu_hi: Option<f64>,
    pub scheme: DualScheme,
    pub residual: ResidualMode,
    pub iter_limit: usize,
    pub cut_window: Option<usize>,
    pub workers: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        let a = AlmParams::default();
        let d = AdmmParams::default();
        RunConfig {
            algorithm: Algorithm::Alm,
            variant: a.variant,
            params: None,
            rho0: a.rho0,
            gamma: a.gamma,
            inner_alm: a.inner_alm,
            alm_step: a.alm_step,
            inner_gap: a.inner_gap,
            eps_p: a.eps_p,
            eps_d: a.eps_d,
            gap_tol: a.gap_tol,
            outer_limit: a.outer_limit,
            tau: a.tau,
            penalty_eps: 0.01,
            beta0: d.beta0,
            inner_admm: d.inner_admm,
            admm_step: d.step,
            beta_cap: d.beta_cap,
            mu_lo: None,
            mu_hi: None,
            scheme: d.scheme,
            residual: d.residual,
            iter_limit: d.iter_limit,
            cut_window: None,
            workers: 1,
        }
    }
}

impl RunConfig {
    pub fn alm(variant: AlmVariant) -> Self {
        RunConfig {
            algorithm: Algorithm::Alm,
            variant,
            ..RunConfig::default()
        }
    }

    pub fn admm() -> Self {
        RunConfig {
            algorithm: Algorithm::Admm,
            ..RunConfig::default()
        }
    }

    /// Applies a 6-tuple; ADMM's β₀ follows ρ₀ as in the experiments.
    pub fn apply_tuple(&mut self, text: &str) -> Result<()> {
        let t: SixTuple = text.parse()?;
        self.rho0 = t.rho0;
        self.beta0 = t.rho0;
        self.gamma = t.gamma;
        self.inner_alm = t.inner_alm;
        self.inner_admm = t.inner_admm;
        self.alm_step = t.alm_step;
        self.admm_step = t.admm_step;
        self.params = Some(text.to_string());
        Ok(())
    }

    pub fn with_tuple(mut self, text: &str) -> Result<Self> {
        self.apply_tuple(text)?;
        Ok(self)
    }

    pub fn alm_params(&self) -> AlmParams {
        AlmParams {
            rho0: self.rho0,
            gamma: self.gamma,
            inner_alm: self.inner_alm,
            alm_step: self.alm_step,
            inner_gap: self.inner_gap,
            eps_p: self.eps_p,
            eps_d: self.eps_d,
            gap_tol: self.gap_tol,
            outer_limit: self.outer_limit,
            variant: self.variant,
            tau: self.tau,
            cut_window: self.cut_window,
        }
    }

    pub fn admm_params(&self) -> Result<AdmmParams> {
        let mu_box = match (self.mu_lo, self.mu_hi) {
            (Some(lo), Some(hi)) => Some((lo, hi)),
            (None, None) => None,
            _ => return Err(Error::Parameter("give both --mu-lo and --mu-hi or neither".into())),
        };
        Ok(AdmmParams {
            beta0: self.beta0,
            gamma: self.gamma,
            inner_admm: self.inner_admm,
            step: self.admm_step,
            beta_cap: self.beta_cap,
            mu_box,
            scheme: self.scheme,
            residual: self.residual,
            gap_tol: self.gap_tol,
            eps_p: self.eps_p,
            iter_limit: self.iter_limit,
            cut_window: self.cut_window,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunStatus {
    Converged,
    IterationLimit,
}

impl fmt::Display for RunStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RunStatus::Converged => "converged",
            RunStatus::IterationLimit => "iteration-limit",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub x: Vec<f64>,
    pub z: Vec<f64>,
    pub objective: f64,
    pub residual_l1: f64,
}

impl From<&Iterate> for Solution {
    fn from(it: &Iterate) -> Self {
        Solution {
            x: it.x.clone(),
            z: it.z.clone(),
            objective: it.primal_obj,
            residual_l1: it.residual_l1,
        }
    }
}

/// One outer phase (ALM) or one iteration (ADMM).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub step: usize,
    pub z: Vec<f64>,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub residual_l1: f64,
    /// ρ for ALM, β for ADMM.
    pub penalty: f64,
    pub multiplier_inf: f64,
    pub z_solves: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub total_seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub format: String,
    pub instance: String,
    pub parameters: RunConfig,
    pub status: RunStatus,
    /// Best coupling-feasible objective, if any.
    pub objective: Option<f64>,
    pub lower_bound: Option<f64>,
    pub gap: Option<f64>,
    /// Cumulative z-subproblem solves.
    pub iterations: usize,
    pub solution: Option<Solution>,
    pub history: Vec<HistoryEntry>,
    pub cuts: Vec<Cut>,
    pub timings: Timings,
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

impl RunReport {
    pub fn converged(&self) -> bool {
        self.status == RunStatus::Converged
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// The report minus timings and worker count: equal across reruns and
    /// across worker counts.
    pub fn numeric_fingerprint(&self) -> Result<String> {
        let mut r = self.clone();
        r.timings.total_seconds = 0.0;
        r.parameters.workers = 0;
        Ok(serde_json::to_string(&r)?)
    }

    pub fn csv_header() -> String {
        CSV_COLUMNS.join(",")
    }

    pub fn csv_row(&self) -> String {
        let opt = |v: Option<f64>| v.map_or(String::new(), |v| format!("{v}"));
        let variant = match self.parameters.algorithm {
            Algorithm::Alm => format!("{:?}", self.parameters.variant).to_lowercase(),
            Algorithm::Admm => format!("{:?}", self.parameters.scheme).to_lowercase(),
        };
        [
            csv_field(&self.instance),
            self.parameters.algorithm.to_string(),
            variant,
            self.status.to_string(),
            self.gap.map_or(String::new(), |g| format!("{:.2}", 100.0 * g)),
            self.iterations.to_string(),
            opt(self.objective),
            opt(self.lower_bound),
            format!("{:.3}", self.timings.total_seconds),
        ]
        .join(",")
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn alm_history(rep: &AlmReport) -> Vec<HistoryEntry> {
    rep.outer
        .iter()
        .enumerate()
        .map(|(k, o)| HistoryEntry {
            step: k + 1,
            z: o.z.clone(),
            lower: finite(o.dual_lower),
            upper: None,
            residual_l1: o.residual_l1,
            penalty: o.rho,
            multiplier_inf: norm_inf(&o.lambda),
            z_solves: o.z_solves,
        })
        .collect()
}

/// Runs the configured algorithm on `problem`.
pub fn run(problem: &TwoBlockMilp, instance: &str, config: &RunConfig, solver: &dyn MilpSolver) -> Result<RunReport> {
    if config.workers == 0 {
        return Err(Error::Parameter("workers must be at least 1".into()));
    }
    let ctx = Context::with_solver(problem, solver, config.workers)?;
    let start = Instant::now();
    let mut report = RunReport {
        format: REPORT_FORMAT.to_string(),
        instance: instance.to_string(),
        parameters: config.clone(),
        status: RunStatus::IterationLimit,
        objective: None,
        lower_bound: None,
        gap: None,
        iterations: 0,
        solution: None,
        history: Vec::new(),
        cuts: Vec::new(),
        timings: Timings { total_seconds: 0.0 },
    };
    match config.algorithm {
        Algorithm::Alm => {
            let params = config.alm_params();
            let rep = match config.variant {
                AlmVariant::Practical => practical_alm(&ctx, &params)?,
                AlmVariant::Gap => subgrad_gap(&ctx, &params)?,
                AlmVariant::Finite => subgrad_finite(&ctx, &params)?.1,
                AlmVariant::Penalty => penalty_solve(&ctx, &vec![0.0; problem.m()], config.penalty_eps)?.1,
            };
            report.status = match rep.status {
                AlmStatus::Converged | AlmStatus::ZeroResidual => RunStatus::Converged,
                AlmStatus::IterLimit => RunStatus::IterationLimit,
            };
            report.objective = finite(rep.upper_bound);
            report.lower_bound = finite(rep.lower_bound);
            report.gap = finite(rep.gap);
            report.iterations = rep.z_iterations;
            // the penalty and finite variants return their last pair
            let sol = match config.variant {
                AlmVariant::Penalty | AlmVariant::Finite => rep.last.as_ref().or(rep.best.as_ref()),
                _ => rep.best.as_ref(),
            };
            report.solution = sol.map(Solution::from);
            report.history = alm_history(&rep);
            report.cuts = rep.cuts;
        }
        Algorithm::Admm => {
            let params = config.admm_params()?;
            let (_, rep) = admm_solve(&ctx, None, &params)?;
            report.status = match rep.status {
                AdmmStatus::Converged => RunStatus::Converged,
                AdmmStatus::IterLimit => RunStatus::IterationLimit,
            };
            report.objective = finite(rep.upper_bound);
            report.lower_bound = finite(rep.lower_bound);
            report.gap = finite(rep.gap);
            report.iterations = rep.z_iterations;
            report.solution = rep.best.as_ref().map(Solution::from);
            report.history = rep
                .iterations
                .iter()
                .enumerate()
                .map(|(k, it)| HistoryEntry {
                    step: k + 1,
                    z: it.z.clone(),
                    lower: finite(it.lower),
                    upper: finite(it.upper),
                    residual_l1: it.residual_l1,
                    penalty: it.beta,
                    multiplier_inf: norm_inf(&it.mu),
                    z_solves: 1,
                })
                .collect();
            report.cuts = rep.cuts.as_vec();
        }
    }
    report.timings.total_seconds = start.elapsed().as_secs_f64();
    Ok(report)
}
