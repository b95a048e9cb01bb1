//! Encodings of ℓ1 penalties and cut epigraphs into plain MILP form.

use super::MilpInstance;
use crate::cuts::{Cut, CutKind};
use crate::error::{Error, Result};
use crate::model::{dot, interval_dot, Matrix, MilSet};

/// Rows `aᵢᵀx + offsetᵢ` whose ℓ1 norm is penalised.
#[derive(Clone, Debug, Default)]
pub struct L1Rows {
    pub rows: Vec<(Vec<(usize, f64)>, f64)>,
}

/// Adds `weight · Σ |aᵢᵀx + offsetᵢ|` to the objective through split slacks
/// `aᵢᵀx + offsetᵢ = s⁺ᵢ − s⁻ᵢ`. Returns the index of the first slack.
pub fn encode_l1_objective(inst: &mut MilpInstance, rows: &L1Rows, weight: f64) -> Result<usize> {
    if weight < 0.0 || !weight.is_finite() {
        return Err(Error::Parameter(format!("l1 weight {weight}")));
    }
    let first = inst.num_vars();
    for (terms, offset) in &rows.rows {
        let mut lo = *offset;
        let mut hi = *offset;
        for &(j, a) in terms {
            if j >= first {
                return Err(Error::Dimension(format!("l1 row references variable {j}")));
            }
            if a > 0.0 {
                lo += a * inst.lower[j];
                hi += a * inst.upper[j];
            } else {
                lo += a * inst.upper[j];
                hi += a * inst.lower[j];
            }
        }
        let sp = inst.add_var(weight, 0.0, hi.max(0.0), false);
        let sm = inst.add_var(weight, 0.0, (-lo).max(0.0), false);
        let mut row = terms.clone();
        row.push((sp, -1.0));
        row.push((sm, 1.0));
        inst.add_eq(row, -offset);
    }
    Ok(first)
}

/// Absolute-value directions used when encoding cuts over z.
///
/// Rows of `B` that are positive or negative multiples of each other are
/// merged, since `|αbᵀδ| = |α|·|bᵀδ|`.
#[derive(Clone, Debug)]
pub struct CutGeometry {
    pub d: usize,
    pub free: Vec<usize>,
    /// `(direction over z, weight)` pairs with `‖B δ‖₁ = Σ wᵢ |dᵢᵀδ|`.
    pub b_dirs: Vec<(Vec<f64>, f64)>,
    pub b: Matrix,
}

impl CutGeometry {
    pub fn new(b: &Matrix, z: &MilSet) -> Self {
        let d = z.dim();
        let free: Vec<usize> = (0..d).collect();
        let mut dirs: Vec<(Vec<f64>, f64)> = Vec::new();
        for r in 0..b.rows() {
            let row = b.row(r);
            let Some(k) = free.iter().copied().find(|&j| row[j] != 0.0) else {
                continue;
            };
            let s = row[k];
            let mut dir = vec![0.0; d];
            for &j in &free {
                dir[j] = row[j] / s;
            }
            let w = s.abs();
            match dirs.iter_mut().find(|(e, _)| {
                e.iter()
                    .zip(&dir)
                    .all(|(a, b)| (a - b).abs() <= 1e-12 * (1.0 + a.abs()))
            }) {
                Some(entry) => entry.1 += w,
                None => dirs.push((dir, w)),
            }
        }
        CutGeometry {
            d,
            free,
            b_dirs: dirs,
            b: b.clone(),
        }
    }

    /// `(direction, weight)` list for the cut's absolute-value argument.
    fn abs_terms(&self, kind: CutKind) -> Vec<(Vec<f64>, f64)> {
        match kind {
            CutKind::ReverseNorm => self
                .free
                .iter()
                .map(|&i| {
                    let mut e = vec![0.0; self.d];
                    e[i] = 1.0;
                    (e, 1.0)
                })
                .collect(),
            CutKind::AugLag => self.b_dirs.clone(),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct EpigraphLayout {
    pub d: usize,
    pub t: usize,
}

/// `min gᵀz + t  s.t.  z ∈ Z, t ≥ cutⱼ(z)` with `t ≥ t_lower`.
pub fn encode_cut_epigraph(
    z_set: &MilSet,
    g: &[f64],
    cuts: &[Cut],
    geom: &CutGeometry,
    t_lower: f64,
) -> Result<(MilpInstance, EpigraphLayout)> {
    let d = z_set.dim();
    if g.len() != d || geom.d != d {
        return Err(Error::Dimension("epigraph objective and Z differ".into()));
    }
    if !t_lower.is_finite() {
        return Err(Error::Parameter("t lower bound must be finite".into()));
    }
    let mut inst = MilpInstance::from_milset(z_set, g);
    for i in 0..d {
        if z_set.is_integer(i) {
            inst.set_priority(i, 2);
        }
    }
    // dominated cuts are dropped; of two identical cuts the first is kept
    let cuts: Vec<&Cut> = cuts
        .iter()
        .enumerate()
        .filter(|(i, c)| {
            !cuts.iter().enumerate().any(|(j, o)| {
                j != *i && o.dominates(c) && (j < *i || !c.dominates(o))
            })
        })
        .map(|(_, c)| c)
        .collect();
    let mut t_upper = t_lower;
    let mut linears = Vec::with_capacity(cuts.len());
    for cut in &cuts {
        if cut.modulus < 0.0 {
            return Err(Error::NegativeModulus(cut.modulus));
        }
        let lin = cut.linear_over_z(&geom.b);
        let (_, lhi) = interval_dot(&lin, &z_set.lower, &z_set.upper);
        t_upper = t_upper.max(cut.constant + lhi - dot(&lin, &cut.anchor));
        linears.push(lin);
    }
    let t = inst.add_var(1.0, t_lower, t_upper + 1.0, false);

    for (cut, lin) in cuts.iter().zip(&linears) {
        // -t + ℓᵀz - K Σ ω(p+q) ≤ -v + ℓᵀz̄
        let mut zcoef = lin.clone();
        let mut extra: Vec<(usize, f64)> = Vec::new();
        let mut rhs = -cut.constant + dot(lin, &cut.anchor);
        if cut.modulus > 0.0 {
            for (dir, w) in geom.abs_terms(cut.kind) {
                let shift = dot(&dir, &cut.anchor);
                let (lo, hi) = interval_dot(&dir, &z_set.lower, &z_set.upper);
                let (wlo, whi) = (lo - shift, hi - shift);
                let k = cut.modulus * w;
                // constant over the box, e.g. a pinned coordinate
                if whi - wlo <= 0.0 {
                    rhs += k * wlo.abs();
                    continue;
                }
                // one-signed over the box: |w| is linear
                if wlo >= 0.0 || whi <= 0.0 {
                    let sign = if wlo >= 0.0 { 1.0 } else { -1.0 };
                    for (zc, a) in zcoef.iter_mut().zip(&dir) {
                        *zc -= sign * k * a;
                    }
                    rhs -= sign * k * shift;
                    continue;
                }
                let p = inst.add_var(0.0, 0.0, whi, false);
                let q = inst.add_var(0.0, 0.0, -wlo, false);
                let mut def: Vec<(usize, f64)> = vec![(p, 1.0), (q, -1.0)];
                for (j, &a) in dir.iter().enumerate() {
                    if a != 0.0 {
                        def.push((j, -a));
                    }
                }
                inst.add_eq(def, -shift);
                let y = inst.add_var(0.0, 0.0, 1.0, true);
                inst.set_priority(y, 1);
                inst.add_le(vec![(p, 1.0), (y, -whi)], 0.0);
                inst.add_le(vec![(q, 1.0), (y, -wlo)], -wlo);
                extra.push((p, -k));
                extra.push((q, -k));
            }
        }
        let mut row: Vec<(usize, f64)> = vec![(t, -1.0)];
        row.extend(zcoef.iter().enumerate().filter(|(_, a)| **a != 0.0).map(|(i, a)| (i, *a)));
        row.extend(extra);
        inst.add_le(row, rhs);
    }
    Ok((inst, EpigraphLayout { d, t }))
}
