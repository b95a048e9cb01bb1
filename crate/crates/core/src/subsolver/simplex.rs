//! Dense two-phase primal simplex with implicit variable bounds.
//!
//! Pricing is Dantzig (largest reduced cost); after a run of degenerate
//! pivots the method falls back to Bland's rule until progress resumes.

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Eq,
    Le,
}

#[derive(Clone, Debug)]
pub struct LpRow {
    pub terms: Vec<(usize, f64)>,
    pub rhs: f64,
    pub sense: Sense,
}

/// `min cᵀx  s.t.  rows, lower ≤ x ≤ upper` with finite bounds.
#[derive(Clone, Debug, Default)]
pub struct Lp {
    pub c: Vec<f64>,
    pub rows: Vec<LpRow>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterLimit,
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub value: f64,
}

const PIV_TOL: f64 = 1e-9;
const COST_TOL: f64 = 1e-9;
const DEGEN_SWITCH: usize = 40;

struct Tableau {
    m: usize,
    ncol: usize,
    t: Vec<f64>,
    beta: Vec<f64>,
    basis: Vec<usize>,
    upper: Vec<f64>,
    at_upper: Vec<bool>,
    is_basic: Vec<bool>,
    d: Vec<f64>,
}

enum Step {
    Optimal,
    Unbounded,
    Moved,
}

impl Tableau {
    fn col(&self, i: usize, j: usize) -> f64 {
        self.t[i * self.ncol + j]
    }

    fn price(&mut self, cost: &[f64]) {
        self.d.copy_from_slice(cost);
        for i in 0..self.m {
            let cb = cost[self.basis[i]];
            if cb == 0.0 {
                continue;
            }
            let row = &self.t[i * self.ncol..(i + 1) * self.ncol];
            for (dj, a) in self.d.iter_mut().zip(row) {
                *dj -= cb * a;
            }
        }
        for i in 0..self.m {
            self.d[self.basis[i]] = 0.0;
        }
    }

    fn entering(&self, bland: bool) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for j in 0..self.ncol {
            if self.is_basic[j] || self.upper[j] <= 0.0 {
                continue;
            }
            let dj = self.d[j];
            let dir = if !self.at_upper[j] && dj < -COST_TOL {
                1.0
            } else if self.at_upper[j] && dj > COST_TOL {
                -1.0
            } else {
                continue;
            };
            if bland {
                return Some((j, dir));
            }
            if best.map_or(true, |(b, _)| dj.abs() > self.d[b].abs()) {
                best = Some((j, dir));
            }
        }
        best
    }

    fn step(&mut self, bland: bool, degenerate: &mut bool) -> Step {
        let Some((q, dir)) = self.entering(bland) else {
            return Step::Optimal;
        };
        // Ratio test over basic variables, then the entering bound flip.
        let mut theta = self.upper[q];
        let mut leave: Option<(usize, bool)> = None;
        let mut best_alpha = 0.0;
        for i in 0..self.m {
            let alpha = dir * self.col(i, q);
            let b = self.basis[i];
            let (limit, to_upper) = if alpha > PIV_TOL {
                (self.beta[i].max(0.0) / alpha, false)
            } else if alpha < -PIV_TOL && self.upper[b].is_finite() {
                ((self.upper[b] - self.beta[i]).max(0.0) / -alpha, true)
            } else {
                continue;
            };
            let better = match leave {
                None => limit < theta,
                Some((r, _)) => {
                    if limit < theta - 1e-12 {
                        true
                    } else if limit <= theta + 1e-12 {
                        if bland {
                            b < self.basis[r]
                        } else {
                            alpha.abs() > best_alpha
                        }
                    } else {
                        false
                    }
                }
            };
            if better {
                theta = limit;
                leave = Some((i, to_upper));
                best_alpha = alpha.abs();
            }
        }
        if !theta.is_finite() {
            return Step::Unbounded;
        }
        *degenerate = theta <= 1e-12;
        if theta > 0.0 {
            for i in 0..self.m {
                let a = self.t[i * self.ncol + q];
                if a != 0.0 {
                    self.beta[i] -= dir * theta * a;
                }
            }
        }
        match leave {
            None => {
                // Bound flip, no basis change.
                self.at_upper[q] = !self.at_upper[q];
            }
            Some((r, to_upper)) => {
                let entering_value = if self.at_upper[q] {
                    self.upper[q] - theta
                } else {
                    theta
                };
                let out = self.basis[r];
                self.pivot(r, q);
                self.beta[r] = entering_value;
                self.basis[r] = q;
                self.is_basic[q] = true;
                self.is_basic[out] = false;
                self.at_upper[q] = false;
                self.at_upper[out] = to_upper;
            }
        }
        Step::Moved
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let n = self.ncol;
        let p = self.t[r * n + q];
        {
            let row = &mut self.t[r * n..(r + 1) * n];
            for v in row.iter_mut() {
                *v /= p;
            }
            row[q] = 1.0;
        }
        let (before, rest) = self.t.split_at_mut(r * n);
        let (prow, after) = rest.split_at_mut(n);
        for chunk in before.chunks_mut(n).chain(after.chunks_mut(n)) {
            let f = chunk[q];
            if f == 0.0 {
                continue;
            }
            for (v, pv) in chunk.iter_mut().zip(prow.iter()) {
                *v -= f * pv;
            }
            chunk[q] = 0.0;
        }
        let f = self.d[q];
        if f != 0.0 {
            for (v, pv) in self.d.iter_mut().zip(prow.iter()) {
                *v -= f * pv;
            }
            self.d[q] = 0.0;
        }
    }

    fn run(&mut self, cost: &[f64], limit: usize) -> Option<Step> {
        self.price(cost);
        let mut bland = false;
        let mut streak = 0usize;
        for _ in 0..limit {
            let mut degenerate = false;
            match self.step(bland, &mut degenerate) {
                Step::Moved => {
                    if degenerate {
                        streak += 1;
                        if streak > DEGEN_SWITCH {
                            bland = true;
                        }
                    } else {
                        streak = 0;
                        bland = false;
                    }
                }
                s => return Some(s),
            }
        }
        None
    }
}

/// Solves the LP. Bounds must be finite with `lower ≤ upper`.
pub fn solve_lp(lp: &Lp, feas_tol: f64) -> LpSolution {
    let n = lp.c.len();
    let m = lp.rows.len();
    let range: Vec<f64> = (0..n).map(|j| lp.upper[j] - lp.lower[j]).collect();

    if m == 0 {
        let x: Vec<f64> = (0..n)
            .map(|j| if lp.c[j] < 0.0 { lp.upper[j] } else { lp.lower[j] })
            .collect();
        let value = lp.c.iter().zip(&x).map(|(a, b)| a * b).sum();
        return LpSolution {
            status: LpStatus::Optimal,
            x,
            value,
        };
    }

    // Shift to x' = x - lower and normalise rows to nonnegative rhs.
    let mut rhs = Vec::with_capacity(m);
    let mut slack_of = vec![usize::MAX; m];
    let mut n_slack = 0;
    for (i, row) in lp.rows.iter().enumerate() {
        let shift: f64 = row.terms.iter().map(|&(j, a)| a * lp.lower[j]).sum();
        rhs.push(row.rhs - shift);
        if row.sense == Sense::Le {
            slack_of[i] = n + n_slack;
            n_slack += 1;
        }
    }
    let mut needs_art = vec![false; m];
    let mut n_art = 0;
    let mut art_of = vec![usize::MAX; m];
    for i in 0..m {
        let ok_slack = lp.rows[i].sense == Sense::Le && rhs[i] >= 0.0;
        if !ok_slack {
            needs_art[i] = true;
            art_of[i] = n + n_slack + n_art;
            n_art += 1;
        }
    }
    let ncol = n + n_slack + n_art;
    let mut t = vec![0.0; m * ncol];
    let mut beta = vec![0.0; m];
    let mut basis = vec![0; m];
    for (i, row) in lp.rows.iter().enumerate() {
        let sign = if rhs[i] < 0.0 { -1.0 } else { 1.0 };
        let base = i * ncol;
        for &(j, a) in &row.terms {
            t[base + j] += sign * a;
        }
        if slack_of[i] != usize::MAX {
            t[base + slack_of[i]] = sign;
        }
        beta[i] = sign * rhs[i];
        if needs_art[i] {
            t[base + art_of[i]] = 1.0;
            basis[i] = art_of[i];
        } else {
            basis[i] = slack_of[i];
        }
    }
    let mut upper = vec![f64::INFINITY; ncol];
    upper[..n].copy_from_slice(&range);
    let mut is_basic = vec![false; ncol];
    for &b in &basis {
        is_basic[b] = true;
    }
    let mut tab = Tableau {
        m,
        ncol,
        t,
        beta,
        basis,
        upper,
        at_upper: vec![false; ncol],
        is_basic,
        d: vec![0.0; ncol],
    };
    let limit = 50 * (m + ncol) + 1000;

    if n_art > 0 {
        let mut cost1 = vec![0.0; ncol];
        for c in cost1.iter_mut().skip(n + n_slack) {
            *c = 1.0;
        }
        if tab.run(&cost1, limit).is_none() {
            return fail(LpStatus::IterLimit, n);
        }
        let infeas: f64 = (0..m)
            .filter(|&i| tab.basis[i] >= n + n_slack)
            .map(|i| tab.beta[i].max(0.0))
            .sum();
        let scale = 1.0 + rhs.iter().fold(0.0f64, |a, r| a.max(r.abs()));
        if infeas > feas_tol * scale {
            return fail(LpStatus::Infeasible, n);
        }
        for j in n + n_slack..ncol {
            tab.upper[j] = 0.0;
            tab.at_upper[j] = false;
        }
        for i in 0..m {
            if tab.basis[i] >= n + n_slack {
                tab.beta[i] = 0.0;
            }
        }
    }

    let mut cost2 = vec![0.0; ncol];
    cost2[..n].copy_from_slice(&lp.c);
    match tab.run(&cost2, limit) {
        None => return fail(LpStatus::IterLimit, n),
        Some(Step::Unbounded) => return fail(LpStatus::Unbounded, n),
        _ => {}
    }

    let mut xs = vec![0.0; ncol];
    for j in 0..ncol {
        if tab.at_upper[j] {
            xs[j] = tab.upper[j];
        }
    }
    for i in 0..m {
        xs[tab.basis[i]] = tab.beta[i];
    }
    let x: Vec<f64> = (0..n)
        .map(|j| (lp.lower[j] + xs[j].clamp(0.0, range[j])).clamp(lp.lower[j], lp.upper[j]))
        .collect();
    let value = lp.c.iter().zip(&x).map(|(a, b)| a * b).sum();
    LpSolution {
        status: LpStatus::Optimal,
        x,
        value,
    }
}

fn fail(status: LpStatus, n: usize) -> LpSolution {
    LpSolution {
        status,
        x: vec![0.0; n],
        value: f64::NAN,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(terms: &[(usize, f64)], rhs: f64, sense: Sense) -> LpRow {
        LpRow {
            terms: terms.to_vec(),
            rhs,
            sense,
        }
    }

    #[test]
    fn small_lp() {
        // max x + y s.t. x + 2y <= 4, 3x + y <= 6 → (1.6, 1.2), value 2.8
        let lp = Lp {
            c: vec![-1.0, -1.0],
            rows: vec![
                row(&[(0, 1.0), (1, 2.0)], 4.0, Sense::Le),
                row(&[(0, 3.0), (1, 1.0)], 6.0, Sense::Le),
            ],
            lower: vec![0.0, 0.0],
            upper: vec![10.0, 10.0],
        };
        let s = solve_lp(&lp, 1e-9);
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.value + 2.8).abs() < 1e-9);
        assert!((s.x[0] - 1.6).abs() < 1e-9 && (s.x[1] - 1.2).abs() < 1e-9);
    }

    #[test]
    fn equality_and_bounds() {
        // min x - y s.t. x + y = 3, x in [1,2], y in [0, 1.5] → x = 1.5, y = 1.5
        let lp = Lp {
            c: vec![1.0, -1.0],
            rows: vec![row(&[(0, 1.0), (1, 1.0)], 3.0, Sense::Eq)],
            lower: vec![1.0, 0.0],
            upper: vec![2.0, 1.5],
        };
        let s = solve_lp(&lp, 1e-9);
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.value - 0.0).abs() < 1e-9, "{:?}", s);
    }

    #[test]
    fn infeasible() {
        let lp = Lp {
            c: vec![0.0],
            rows: vec![row(&[(0, 1.0)], -1.0, Sense::Eq)],
            lower: vec![0.0],
            upper: vec![5.0],
        };
        assert_eq!(solve_lp(&lp, 1e-9).status, LpStatus::Infeasible);
    }
}
