//! Best-bound branch-and-bound over the dense simplex.
//!
//! Each node tightens variable bounds by activity-based propagation, drops
//! fixed columns and redundant rows, and solves the remaining LP from scratch.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::simplex::{solve_lp, Lp, LpRow, LpStatus, Sense};
use super::{relative_gap, MilpInstance, MilpSolver, SolveOptions, SolveStatus, SubSolveResult};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default)]
pub struct BranchAndBound;

struct Node {
    bound: f64,
    id: usize,
    lb: Vec<f64>,
    ub: Vec<f64>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    // Reversed so the max-heap pops the smallest (bound, id).
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then_with(|| other.id.cmp(&self.id))
    }
}

const FIX_TOL: f64 = 1e-12;

/// Activity-based bound tightening. Returns false when the box is empty.
pub(crate) fn propagate(
    inst: &MilpInstance,
    lb: &mut [f64],
    ub: &mut [f64],
    int_tol: f64,
    feas_tol: f64,
) -> bool {
    for _pass in 0..20 {
        let mut changed = false;
        let rows = inst
            .le
            .iter()
            .map(|r| (r, 1.0))
            .chain(inst.eq.iter().flat_map(|r| [(r, 1.0), (r, -1.0)]));
        for (row, sign) in rows {
            // sign · row ≤ sign · rhs
            let rhs = sign * row.rhs;
            let mut minact = 0.0;
            for &(j, a) in &row.terms {
                let a = sign * a;
                minact += if a > 0.0 { a * lb[j] } else { a * ub[j] };
            }
            let slack_tol = feas_tol * (1.0 + rhs.abs());
            if minact > rhs + slack_tol {
                return false;
            }
            for &(j, a) in &row.terms {
                let a = sign * a;
                if a.abs() < 1e-9 {
                    continue;
                }
                let own = if a > 0.0 { a * lb[j] } else { a * ub[j] };
                let room = rhs - (minact - own);
                let width = ub[j] - lb[j];
                if width <= FIX_TOL {
                    continue;
                }
                if a > 0.0 {
                    let mut nb = room / a;
                    if inst.integer[j] {
                        nb = (nb + int_tol).floor();
                    } else {
                        if nb >= ub[j] - 1e-3 * width - 1e-9 {
                            continue;
                        }
                        nb += 1e-9 * (1.0 + nb.abs());
                    }
                    if nb < ub[j] {
                        if nb < lb[j] - feas_tol * (1.0 + lb[j].abs()) {
                            return false;
                        }
                        ub[j] = nb.max(lb[j]);
                        changed = true;
                    }
                } else {
                    let mut nb = room / a;
                    if inst.integer[j] {
                        nb = (nb - int_tol).ceil();
                    } else {
                        if nb <= lb[j] + 1e-3 * width + 1e-9 {
                            continue;
                        }
                        nb -= 1e-9 * (1.0 + nb.abs());
                    }
                    if nb > lb[j] {
                        if nb > ub[j] + feas_tol * (1.0 + ub[j].abs()) {
                            return false;
                        }
                        lb[j] = nb.min(ub[j]);
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    true
}

enum NodeLp {
    Infeasible,
    Solved { x: Vec<f64>, value: f64 },
}

/// Builds the LP over the non-fixed columns and solves it.
fn solve_node_lp(inst: &MilpInstance, lb: &[f64], ub: &[f64], feas_tol: f64) -> Result<NodeLp> {
    let n = inst.num_vars();
    let mut map = vec![usize::MAX; n];
    let mut free = Vec::new();
    for j in 0..n {
        if ub[j] - lb[j] > FIX_TOL {
            map[j] = free.len();
            free.push(j);
        }
    }
    let mut lp = Lp {
        c: free.iter().map(|&j| inst.obj[j]).collect(),
        rows: Vec::new(),
        lower: free.iter().map(|&j| lb[j]).collect(),
        upper: free.iter().map(|&j| ub[j]).collect(),
    };
    let all_rows = inst
        .eq
        .iter()
        .map(|r| (r, Sense::Eq))
        .chain(inst.le.iter().map(|r| (r, Sense::Le)));
    for (row, sense) in all_rows {
        let mut rhs = row.rhs;
        let mut terms = Vec::with_capacity(row.terms.len());
        let mut maxact = 0.0;
        for &(j, a) in &row.terms {
            if map[j] == usize::MAX {
                rhs -= a * lb[j];
            } else if a != 0.0 {
                terms.push((map[j], a));
                maxact += if a > 0.0 { a * ub[j] } else { a * lb[j] };
            }
        }
        let tol = feas_tol * (1.0 + row.rhs.abs());
        if terms.is_empty() {
            let ok = match sense {
                Sense::Eq => rhs.abs() <= tol,
                Sense::Le => rhs >= -tol,
            };
            if !ok {
                return Ok(NodeLp::Infeasible);
            }
            continue;
        }
        if sense == Sense::Le && maxact <= rhs + 1e-9 {
            continue;
        }
        lp.rows.push(LpRow { terms, rhs, sense });
    }
    let sol = solve_lp(&lp, feas_tol);
    match sol.status {
        LpStatus::Infeasible => Ok(NodeLp::Infeasible),
        LpStatus::Optimal => {
            let mut x: Vec<f64> = lb.to_vec();
            for (k, &j) in free.iter().enumerate() {
                x[j] = sol.x[k];
            }
            let value = inst.objective(&x);
            Ok(NodeLp::Solved { x, value })
        }
        s => Err(Error::Subsolver {
            step: "lp relaxation",
            block: None,
            reason: format!("simplex returned {s:?}"),
        }),
    }
}

fn branching_var(inst: &MilpInstance, x: &[f64], int_tol: f64) -> Option<usize> {
    let mut best: Option<(u8, f64, usize)> = None;
    for j in 0..x.len() {
        if !inst.integer[j] {
            continue;
        }
        let f = x[j] - x[j].floor();
        let score = f.min(1.0 - f);
        if score <= int_tol {
            continue;
        }
        let p = inst.priority_of(j);
        let better = match best {
            None => true,
            Some((bp, bs, _)) => p > bp || (p == bp && score > bs + 1e-12),
        };
        if better {
            best = Some((p, score, j));
        }
    }
    best.map(|(_, _, j)| j)
}

fn rounded(inst: &MilpInstance, x: &[f64]) -> Vec<f64> {
    x.iter()
        .enumerate()
        .map(|(j, &v)| if inst.integer[j] { v.round() } else { v })
        .collect()
}

impl MilpSolver for BranchAndBound {
    fn solve(&self, inst: &MilpInstance, opts: &SolveOptions) -> Result<SubSolveResult> {
        inst.validate()?;
        let n = inst.num_vars();
        let mut lb = inst.lower.clone();
        let mut ub = inst.upper.clone();
        for j in 0..n {
            if inst.integer[j] {
                lb[j] = (lb[j] - opts.int_tol).ceil();
                ub[j] = (ub[j] + opts.int_tol).floor();
            }
        }
        let infeasible = || SubSolveResult {
            status: SolveStatus::Infeasible,
            point: Vec::new(),
            value: f64::INFINITY,
            bound: f64::INFINITY,
            gap: f64::INFINITY,
            nodes: 0,
        };
        if (0..n).any(|j| lb[j] > ub[j]) {
            return Ok(infeasible());
        }

        let prune_tol = |inc: f64| (opts.rel_gap * inc.abs().max(1.0)).max(1e-9);
        let mut heap = BinaryHeap::new();
        heap.push(Node {
            bound: f64::NEG_INFINITY,
            id: 0,
            lb,
            ub,
        });
        let mut next_id = 1;
        let mut incumbent: Option<(Vec<f64>, f64)> = None;
        let mut closed_min = f64::INFINITY;
        let mut nodes = 0usize;
        let mut hit_limit = false;

        while let Some(node) = heap.pop() {
            if let Some((_, inc)) = &incumbent {
                if node.bound >= inc - prune_tol(*inc) {
                    closed_min = closed_min.min(node.bound);
                    break;
                }
            }
            if nodes >= opts.node_limit {
                heap.push(node);
                hit_limit = true;
                break;
            }
            nodes += 1;
            let Node {
                bound: parent_bound,
                mut lb,
                mut ub,
                ..
            } = node;
            if !propagate(inst, &mut lb, &mut ub, opts.int_tol, opts.feas_tol) {
                continue;
            }
            let (x, value) = match solve_node_lp(inst, &lb, &ub, opts.feas_tol)? {
                NodeLp::Infeasible => continue,
                NodeLp::Solved { x, value } => (x, value),
            };
            let bound = value.max(parent_bound);
            if let Some((_, inc)) = &incumbent {
                if bound >= inc - prune_tol(*inc) {
                    closed_min = closed_min.min(bound);
                    continue;
                }
            }
            match branching_var(inst, &x, opts.int_tol) {
                None => {
                    let point = rounded(inst, &x);
                    let v = inst.objective(&point);
                    closed_min = closed_min.min(bound);
                    if incumbent.as_ref().map_or(true, |(_, inc)| v < *inc) {
                        incumbent = Some((point, v));
                    }
                }
                Some(j) => {
                    let guess = rounded(inst, &x);
                    if inst.max_violation(&guess) <= opts.feas_tol {
                        let v = inst.objective(&guess);
                        if incumbent.as_ref().map_or(true, |(_, inc)| v < *inc) {
                            incumbent = Some((guess, v));
                        }
                    }
                    let mut left_ub = ub.clone();
                    left_ub[j] = x[j].floor();
                    let mut right_lb = lb.clone();
                    right_lb[j] = x[j].ceil();
                    heap.push(Node {
                        bound,
                        id: next_id,
                        lb: lb.clone(),
                        ub: left_ub,
                    });
                    heap.push(Node {
                        bound,
                        id: next_id + 1,
                        lb: right_lb,
                        ub,
                    });
                    next_id += 2;
                }
            }
        }

        let open_min = heap.iter().map(|n| n.bound).fold(f64::INFINITY, f64::min);
        match incumbent {
            None if hit_limit => Ok(SubSolveResult {
                status: SolveStatus::IterLimit,
                point: Vec::new(),
                value: f64::INFINITY,
                bound: open_min.min(closed_min),
                gap: f64::INFINITY,
                nodes,
            }),
            None => Ok(SubSolveResult {
                nodes,
                ..infeasible()
            }),
            Some((point, value)) => {
                let bound = value.min(closed_min).min(open_min);
                let gap = relative_gap(value, bound);
                let status = if hit_limit {
                    SolveStatus::IterLimit
                } else {
                    SolveStatus::Optimal
                };
                Ok(SubSolveResult {
                    status,
                    point,
                    value,
                    bound,
                    gap,
                    nodes,
                })
            }
        }
    }
}
