//! MILP subproblem oracle.
//!
//! [`BranchAndBound`] is the bundled solver; [`ExternalSolver`] shells out to
//! a user-configured executable. Both implement [`MilpSolver`].

mod bnb;
pub mod encode;
mod external;
pub mod simplex;

pub use bnb::BranchAndBound;
pub use encode::{encode_cut_epigraph, encode_l1_objective, CutGeometry, EpigraphLayout, L1Rows};
pub use external::{parse_solution, write_lp, ExternalSolver, SOLVER_ENV};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{MilSet, VarKind};

/// Sparse linear row `Σ a_j x_j (=|≤) rhs`.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseRow {
    pub terms: Vec<(usize, f64)>,
    pub rhs: f64,
}

impl SparseRow {
    pub fn new(terms: Vec<(usize, f64)>, rhs: f64) -> Self {
        SparseRow { terms, rhs }
    }

    pub fn activity(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|&(j, a)| a * x[j]).sum()
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct MilpInstance {
    pub obj: Vec<f64>,
    pub obj_offset: f64,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub integer: Vec<bool>,
    /// Branching priority: fractional variables of the highest class are
    /// branched on first. Empty means all zero.
    pub priority: Vec<u8>,
    pub eq: Vec<SparseRow>,
    pub le: Vec<SparseRow>,
}

impl MilpInstance {
    pub fn num_vars(&self) -> usize {
        self.obj.len()
    }

    pub fn add_var(&mut self, obj: f64, lower: f64, upper: f64, integer: bool) -> usize {
        self.obj.push(obj);
        self.lower.push(lower);
        self.upper.push(upper);
        self.integer.push(integer);
        if !self.priority.is_empty() {
            self.priority.push(0);
        }
        self.obj.len() - 1
    }

    pub fn set_priority(&mut self, j: usize, p: u8) {
        if self.priority.is_empty() {
            self.priority = vec![0; self.num_vars()];
        }
        self.priority[j] = p;
    }

    pub fn priority_of(&self, j: usize) -> u8 {
        self.priority.get(j).copied().unwrap_or(0)
    }

    pub fn add_eq(&mut self, terms: Vec<(usize, f64)>, rhs: f64) {
        self.eq.push(SparseRow::new(terms, rhs));
    }

    pub fn add_le(&mut self, terms: Vec<(usize, f64)>, rhs: f64) {
        self.le.push(SparseRow::new(terms, rhs));
    }

    /// Instance over the variables of `set` with objective `obj`.
    pub fn from_milset(set: &MilSet, obj: &[f64]) -> Self {
        let mut inst = MilpInstance::default();
        for i in 0..set.dim() {
            inst.add_var(
                obj[i],
                set.lower[i],
                set.upper[i],
                set.integrality[i] == VarKind::Integer,
            );
        }
        for r in 0..set.eq.rows() {
            let terms = set
                .eq
                .row(r)
                .iter()
                .enumerate()
                .filter(|(_, a)| **a != 0.0)
                .map(|(j, a)| (j, *a))
                .collect();
            inst.add_eq(terms, set.rhs[r]);
        }
        inst
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        self.obj_offset + self.obj.iter().zip(x).map(|(a, b)| a * b).sum::<f64>()
    }

    /// Largest scaled violation of rows and bounds.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut v: f64 = 0.0;
        for j in 0..self.num_vars() {
            v = v.max(self.lower[j] - x[j]).max(x[j] - self.upper[j]);
        }
        for r in &self.eq {
            v = v.max((r.activity(x) - r.rhs).abs() / (1.0 + r.rhs.abs()));
        }
        for r in &self.le {
            v = v.max((r.activity(x) - r.rhs) / (1.0 + r.rhs.abs()));
        }
        v
    }

    pub fn is_feasible(&self, x: &[f64], feas_tol: f64, int_tol: f64) -> bool {
        x.len() == self.num_vars()
            && self.max_violation(x) <= feas_tol
            && (0..self.num_vars())
                .all(|j| !self.integer[j] || (x[j] - x[j].round()).abs() <= int_tol)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        if self.lower.len() != n || self.upper.len() != n || self.integer.len() != n {
            return Err(Error::Dimension("variable vectors differ in length".into()));
        }
        if !self.priority.is_empty() && self.priority.len() != n {
            return Err(Error::Dimension("priority vector length".into()));
        }
        for j in 0..n {
            if !self.lower[j].is_finite() || !self.upper[j].is_finite() {
                return Err(Error::Dimension(format!("unbounded variable {j}")));
            }
            if !self.obj[j].is_finite() {
                return Err(Error::Dimension(format!("non-finite objective at {j}")));
            }
        }
        for r in self.eq.iter().chain(&self.le) {
            if r.terms.iter().any(|&(j, a)| j >= n || !a.is_finite()) || !r.rhs.is_finite() {
                return Err(Error::Dimension("row references a missing variable".into()));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub rel_gap: f64,
    pub feas_tol: f64,
    pub int_tol: f64,
    pub node_limit: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            rel_gap: 1e-4,
            feas_tol: 1e-7,
            int_tol: 1e-6,
            node_limit: 200_000,
        }
    }
}

impl SolveOptions {
    /// Tight settings used for the subproblems inside the decomposition loops.
    pub fn tight() -> Self {
        SolveOptions {
            rel_gap: 1e-9,
            ..Default::default()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    Optimal,
    GapReached,
    Infeasible,
    IterLimit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubSolveResult {
    pub status: SolveStatus,
    pub point: Vec<f64>,
    pub value: f64,
    /// Proven lower bound.
    pub bound: f64,
    pub gap: f64,
    pub nodes: usize,
}

impl SubSolveResult {
    pub fn has_point(&self) -> bool {
        matches!(self.status, SolveStatus::Optimal | SolveStatus::GapReached)
            || (self.status == SolveStatus::IterLimit && self.value.is_finite())
    }
}

pub fn relative_gap(value: f64, bound: f64) -> f64 {
    if !value.is_finite() {
        return f64::INFINITY;
    }
    ((value - bound) / value.abs().max(1.0)).max(0.0)
}

pub trait MilpSolver: Send + Sync {
    fn solve(&self, inst: &MilpInstance, opts: &SolveOptions) -> Result<SubSolveResult>;
}

/// Solves with the bundled branch-and-bound.
pub fn solve(inst: &MilpInstance, opts: &SolveOptions) -> Result<SubSolveResult> {
    BranchAndBound.solve(inst, opts)
}

/// Solves and insists on a usable point.
pub(crate) fn solve_required(
    solver: &dyn MilpSolver,
    inst: &MilpInstance,
    opts: &SolveOptions,
    step: &'static str,
    block: Option<usize>,
) -> Result<SubSolveResult> {
    let res = solver.solve(inst, opts)?;
    match res.status {
        SolveStatus::Optimal | SolveStatus::GapReached => Ok(res),
        s => Err(Error::Subsolver {
            step,
            block,
            reason: format!("status {s:?}"),
        }),
    }
}
