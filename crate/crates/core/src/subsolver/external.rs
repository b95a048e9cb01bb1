//! Subprocess adapter for an external MILP solver.
//!
//! The instance is written in a small line-oriented text format (see
//! `docs/formats.md`), the executable named by `BLOCKMILP_SOLVER_CMD` is run
//! as `<cmd> <lp-file> <solution-file>`, and the solution file is read back.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::atomic::{AtomicUsize, Ordering};

use super::{relative_gap, MilpInstance, MilpSolver, SolveOptions, SolveStatus, SubSolveResult};
use crate::error::{Error, Result};

pub const SOLVER_ENV: &str = "BLOCKMILP_SOLVER_CMD";

/// Fixed-point decimal with trailing zeros trimmed.
fn fixed(v: f64) -> String {
    let mut s = format!("{v:.15}");
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    if s == "-0" {
        s = "0".into();
    }
    s
}

fn write_row(out: &mut String, tag: &str, terms: &[(usize, f64)], rhs: f64) {
    let _ = write!(out, "{tag} {} :", fixed(rhs));
    for &(j, a) in terms {
        let _ = write!(out, " {}*x{j}", fixed(a));
    }
    out.push('\n');
}

/// Renders an instance in the LP text format.
pub fn write_lp(inst: &MilpInstance) -> String {
    let mut out = String::new();
    out.push_str("BLOCKMILP-LP 1\n");
    let _ = writeln!(out, "VARS {}", inst.num_vars());
    for j in 0..inst.num_vars() {
        let _ = writeln!(
            out,
            "x{j} {} {} {} {}",
            if inst.integer[j] { "I" } else { "C" },
            fixed(inst.lower[j]),
            fixed(inst.upper[j]),
            fixed(inst.obj[j])
        );
    }
    let _ = writeln!(out, "OFFSET {}", fixed(inst.obj_offset));
    let _ = writeln!(out, "ROWS {}", inst.eq.len() + inst.le.len());
    for r in &inst.eq {
        write_row(&mut out, "EQ", &r.terms, r.rhs);
    }
    for r in &inst.le {
        write_row(&mut out, "LE", &r.terms, r.rhs);
    }
    out.push_str("END\n");
    out
}

/// Parses `var value` lines plus optional `status` and `bound` lines.
pub fn parse_solution(text: &str, n: usize) -> Result<(SolveStatus, Vec<f64>, Option<f64>)> {
    let mut x = vec![f64::NAN; n];
    let mut status = None;
    let mut bound = None;
    for (ln, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut it = line.split_whitespace();
        let (Some(key), Some(val), None) = (it.next(), it.next(), it.next()) else {
            return Err(Error::External(format!("line {}: expected two fields", ln + 1)));
        };
        match key {
            "status" => {
                status = Some(match val {
                    "optimal" => SolveStatus::Optimal,
                    "gap" => SolveStatus::GapReached,
                    "infeasible" => SolveStatus::Infeasible,
                    "limit" => SolveStatus::IterLimit,
                    other => return Err(Error::External(format!("unknown status {other}"))),
                })
            }
            "bound" => {
                bound = Some(val.parse().map_err(|_| Error::External(format!("bad bound {val}")))?)
            }
            _ => {
                let j: usize = key
                    .strip_prefix('x')
                    .and_then(|s| s.parse().ok())
                    .filter(|&j| j < n)
                    .ok_or_else(|| Error::External(format!("unknown variable {key}")))?;
                x[j] = val
                    .parse()
                    .map_err(|_| Error::External(format!("bad value for {key}: {val}")))?;
            }
        }
    }
    let status = status.unwrap_or(SolveStatus::Optimal);
    if status != SolveStatus::Infeasible && x.iter().any(|v| v.is_nan()) {
        return Err(Error::External("solution is missing variables".into()));
    }
    Ok((status, x, bound))
}

#[derive(Clone, Debug)]
pub struct ExternalSolver {
    pub command: String,
    pub workdir: PathBuf,
}

static COUNTER: AtomicUsize = AtomicUsize::new(0);

impl ExternalSolver {
    pub fn new(command: impl Into<String>) -> Self {
        ExternalSolver {
            command: command.into(),
            workdir: std::env::temp_dir(),
        }
    }

    /// Adapter configured through `BLOCKMILP_SOLVER_CMD`, if set.
    pub fn from_env() -> Option<Self> {
        std::env::var(SOLVER_ENV)
            .ok()
            .filter(|s| !s.trim().is_empty())
            .map(Self::new)
    }

    fn paths(&self) -> (PathBuf, PathBuf) {
        let k = COUNTER.fetch_add(1, Ordering::Relaxed);
        let stem = format!("blockmilp-{}-{k}", std::process::id());
        (
            self.workdir.join(format!("{stem}.lp")),
            self.workdir.join(format!("{stem}.sol")),
        )
    }

    fn run(&self, lp: &Path, sol: &Path) -> Result<()> {
        let status = Command::new(&self.command)
            .arg(lp)
            .arg(sol)
            .status()
            .map_err(|e| Error::External(format!("cannot run {}: {e}", self.command)))?;
        if !status.success() {
            return Err(Error::External(format!("{} exited with {status}", self.command)));
        }
        Ok(())
    }
}

impl MilpSolver for ExternalSolver {
    fn solve(&self, inst: &MilpInstance, opts: &SolveOptions) -> Result<SubSolveResult> {
        inst.validate()?;
        let (lp, sol) = self.paths();
        std::fs::write(&lp, write_lp(inst))?;
        let run = self.run(&lp, &sol);
        let text = run.and_then(|_| Ok(std::fs::read_to_string(&sol)?));
        let _ = std::fs::remove_file(&lp);
        let _ = std::fs::remove_file(&sol);
        let (status, point, bound) = parse_solution(&text?, inst.num_vars())?;
        if status == SolveStatus::Infeasible {
            return Ok(SubSolveResult {
                status,
                point: Vec::new(),
                value: f64::INFINITY,
                bound: f64::INFINITY,
                gap: f64::INFINITY,
                nodes: 0,
            });
        }
        if !inst.is_feasible(&point, opts.feas_tol.max(1e-6), opts.int_tol) {
            return Err(Error::External("returned point violates the instance".into()));
        }
        let value = inst.objective(&point);
        let bound = bound.unwrap_or(value).min(value);
        Ok(SubSolveResult {
            status,
            gap: relative_gap(value, bound),
            point,
            value,
            bound,
            nodes: 0,
        })
    }
}
