//! Problem data for `min cᵀx + gᵀz  s.t.  Ax + Bz = 0, x ∈ X, z ∈ Z`.
//!
//! `X` and `Z` are [`MilSet`]s: boxes intersected with equality rows and
//! integrality flags. An optional [`BlockStructure`] marks the problem as
//! block-angular so x-subproblems can be split per block.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const FORMAT_TAG: &str = "blockmilp-v1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VarKind {
    Continuous,
    Integer,
}

/// Dense row-major matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Builds from a list of rows. `cols` is needed when `rows` is empty.
    pub fn from_rows(rows: &[Vec<f64>], cols: usize) -> Result<Self> {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return Err(Error::Dimension(format!(
                    "row {i} has {} entries, expected {cols}",
                    r.len()
                )));
            }
            data.extend_from_slice(r);
        }
        Ok(Matrix {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        debug_assert_eq!(v.len(), self.cols);
        (0..self.rows).map(|i| dot(self.row(i), v)).collect()
    }

    /// `selfᵀ v`
    pub fn tmul_vec(&self, v: &[f64]) -> Vec<f64> {
        debug_assert_eq!(v.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for (i, &vi) in v.iter().enumerate() {
            if vi == 0.0 {
                continue;
            }
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o += a * vi;
            }
        }
        out
    }

    /// Induced ℓ1 norm: max absolute column sum.
    pub fn norm1(&self) -> f64 {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self[(i, j)].abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Copy of the submatrix on the given rows and columns.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Matrix {
        let mut m = Matrix::zeros(rows.len(), cols.len());
        for (a, &i) in rows.iter().enumerate() {
            for (b, &j) in cols.iter().enumerate() {
                m[(a, b)] = self[(i, j)];
            }
        }
        m
    }

    /// Appends a column.
    pub fn push_col(&mut self, col: &[f64]) {
        assert_eq!(col.len(), self.rows);
        let mut data = Vec::with_capacity(self.rows * (self.cols + 1));
        for i in 0..self.rows {
            data.extend_from_slice(self.row(i));
            data.push(col[i]);
        }
        self.cols += 1;
        self.data = data;
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm1(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).sum()
}

pub fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// `{ x : E x = f, lower ≤ x ≤ upper, x_i ∈ ℤ for integer i }`
#[derive(Clone, Debug, PartialEq)]
pub struct MilSet {
    pub integrality: Vec<VarKind>,
    pub eq: Matrix,
    pub rhs: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl MilSet {
    /// A box with no equality rows.
    pub fn boxed(integrality: Vec<VarKind>, lower: Vec<f64>, upper: Vec<f64>) -> Self {
        let n = integrality.len();
        MilSet {
            integrality,
            eq: Matrix::zeros(0, n),
            rhs: Vec::new(),
            lower,
            upper,
        }
    }

    pub fn dim(&self) -> usize {
        self.integrality.len()
    }

    pub fn is_integer(&self, i: usize) -> bool {
        self.integrality[i] == VarKind::Integer
    }

    pub fn is_fixed(&self, i: usize) -> bool {
        self.lower[i] == self.upper[i]
    }

    /// Largest box edge, an upper bound on the ℓ∞ diameter of the set.
    pub fn diam_inf(&self) -> f64 {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(l, u)| u - l)
            .fold(0.0, f64::max)
    }

    /// Membership test with a feasibility and integrality tolerance.
    pub fn contains(&self, x: &[f64], feas_tol: f64, int_tol: f64) -> bool {
        if x.len() != self.dim() {
            return false;
        }
        for i in 0..self.dim() {
            if x[i] < self.lower[i] - feas_tol || x[i] > self.upper[i] + feas_tol {
                return false;
            }
            if self.is_integer(i) && (x[i] - x[i].round()).abs() > int_tol {
                return false;
            }
        }
        (0..self.eq.rows()).all(|r| {
            let lhs = dot(self.eq.row(r), x);
            (lhs - self.rhs[r]).abs() <= feas_tol * (1.0 + self.rhs[r].abs())
        })
    }

    fn violations(&self, name: &str, out: &mut Vec<String>) {
        let n = self.dim();
        if self.lower.len() != n || self.upper.len() != n {
            out.push(format!("{name}: bound vectors do not match dim {n}"));
            return;
        }
        if self.eq.cols() != n {
            out.push(format!(
                "{name}: E has {} columns, expected {n}",
                self.eq.cols()
            ));
        }
        if self.rhs.len() != self.eq.rows() {
            out.push(format!(
                "{name}: f has length {}, E has {} rows",
                self.rhs.len(),
                self.eq.rows()
            ));
        }
        for i in 0..n {
            let (l, u) = (self.lower[i], self.upper[i]);
            if !l.is_finite() || !u.is_finite() {
                out.push(format!("unbounded box at {name}[{i}]"));
                continue;
            }
            if l > u {
                out.push(format!("empty box at {name}[{i}]: {l} > {u}"));
                continue;
            }
            if self.is_integer(i) && l.ceil() > u.floor() {
                out.push(format!("integer variable {name}[{i}] has no integral value in [{l}, {u}]"));
            }
        }
    }
}

/// Block-angular annotation: block `p` owns x columns `x_partition[p]` and
/// coupling rows `row_partition[p]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockStructure {
    pub x_partition: Vec<Vec<usize>>,
    pub row_partition: Vec<Vec<usize>>,
}

impl BlockStructure {
    pub fn len(&self) -> usize {
        self.x_partition.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x_partition.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TwoBlockMilp {
    pub c: Vec<f64>,
    pub g: Vec<f64>,
    pub a: Matrix,
    pub b: Matrix,
    pub x: MilSet,
    pub z: MilSet,
    pub blocks: Option<BlockStructure>,
}

/// Multipliers and penalty, `(λ, ρ)` for ALM or `(μ, β)` for ADMM.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualState {
    pub multipliers: Vec<f64>,
    pub penalty: f64,
    pub iteration: usize,
}

impl DualState {
    pub fn new(m: usize, penalty: f64) -> Self {
        DualState {
            multipliers: vec![0.0; m],
            penalty,
            iteration: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Iterate {
    pub x: Vec<f64>,
    pub z: Vec<f64>,
    pub residual: Vec<f64>,
    pub residual_l1: f64,
    pub primal_obj: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DerivedConstants {
    /// ‖B‖₁
    pub k_base: f64,
    /// Interval-arithmetic bound on max over X's box of ‖Ax‖₁.
    pub ax_norm_bound: f64,
    pub x_diam_inf: f64,
    pub z_diam_inf: f64,
    /// Half the ℓ1 diameter of Z's box.
    pub z_radius_l1: f64,
    pub z_center: Vec<f64>,
}

/// Interval range of `row · x` over a box.
pub fn interval_dot(row: &[f64], lower: &[f64], upper: &[f64]) -> (f64, f64) {
    let mut lo = 0.0;
    let mut hi = 0.0;
    for ((&a, &l), &u) in row.iter().zip(lower).zip(upper) {
        if a > 0.0 {
            lo += a * l;
            hi += a * u;
        } else if a < 0.0 {
            lo += a * u;
            hi += a * l;
        }
    }
    (lo, hi)
}

impl TwoBlockMilp {
    pub fn n(&self) -> usize {
        self.c.len()
    }

    pub fn d(&self) -> usize {
        self.g.len()
    }

    pub fn m(&self) -> usize {
        self.a.rows()
    }

    pub fn residual(&self, x: &[f64], z: &[f64]) -> Vec<f64> {
        let ax = self.a.mul_vec(x);
        let bz = self.b.mul_vec(z);
        ax.iter().zip(&bz).map(|(p, q)| p + q).collect()
    }

    pub fn objective(&self, x: &[f64], z: &[f64]) -> f64 {
        dot(&self.c, x) + dot(&self.g, z)
    }

    pub fn iterate(&self, x: Vec<f64>, z: Vec<f64>) -> Iterate {
        let residual = self.residual(&x, &z);
        let residual_l1 = norm1(&residual);
        let primal_obj = self.objective(&x, &z);
        Iterate {
            x,
            z,
            residual,
            residual_l1,
            primal_obj,
        }
    }

    /// Every invariant violation, empty when the problem is well formed.
    pub fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        let (n, d) = (self.n(), self.d());
        if self.x.dim() != n {
            out.push(format!("|c| = {n} but X.dim = {}", self.x.dim()));
        }
        if self.z.dim() != d {
            out.push(format!("|g| = {d} but Z.dim = {}", self.z.dim()));
        }
        if self.a.cols() != n {
            out.push(format!("A has {} columns, expected {n}", self.a.cols()));
        }
        if self.b.cols() != d {
            out.push(format!("B has {} columns, expected {d}", self.b.cols()));
        }
        if self.a.rows() != self.b.rows() {
            out.push(format!(
                "A has {} rows but B has {}",
                self.a.rows(),
                self.b.rows()
            ));
        }
        self.x.violations("x", &mut out);
        self.z.violations("z", &mut out);
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        if !finite(&self.c) || !finite(&self.g) {
            out.push("non-finite objective entry".into());
        }
        if !out.is_empty() {
            return out;
        }
        if let Some(bs) = &self.blocks {
            self.block_violations(bs, &mut out);
        }
        out
    }

    fn block_violations(&self, bs: &BlockStructure, out: &mut Vec<String>) {
        let (n, m) = (self.n(), self.m());
        if bs.x_partition.len() != bs.row_partition.len() {
            out.push(format!(
                "{} x blocks but {} row blocks",
                bs.x_partition.len(),
                bs.row_partition.len()
            ));
            return;
        }
        let mut col_owner = vec![usize::MAX; n];
        for (p, cols) in bs.x_partition.iter().enumerate() {
            for &j in cols {
                if j >= n {
                    out.push(format!("block {p} lists x column {j} out of range"));
                } else if col_owner[j] != usize::MAX {
                    out.push(format!("x column {j} assigned to more than one block"));
                } else {
                    col_owner[j] = p;
                }
            }
        }
        for (j, &o) in col_owner.iter().enumerate() {
            if o == usize::MAX {
                out.push(format!("uncovered x column {j}"));
            }
        }
        let mut row_owner = vec![usize::MAX; m];
        for (p, rows) in bs.row_partition.iter().enumerate() {
            for &i in rows {
                if i >= m {
                    out.push(format!("block {p} lists coupling row {i} out of range"));
                } else if row_owner[i] != usize::MAX {
                    out.push(format!("coupling row {i} assigned to more than one block"));
                } else {
                    row_owner[i] = p;
                }
            }
        }
        for (i, &o) in row_owner.iter().enumerate() {
            if o == usize::MAX {
                out.push(format!("uncovered coupling row {i}"));
            }
        }
        if !out.is_empty() {
            return;
        }
        for i in 0..m {
            for j in 0..n {
                if self.a[(i, j)] != 0.0 && col_owner[j] != row_owner[i] {
                    out.push(format!(
                        "A[{i},{j}] links row block {} with column block {}",
                        row_owner[i], col_owner[j]
                    ));
                }
            }
        }
        for r in 0..self.x.eq.rows() {
            let owners: std::collections::BTreeSet<usize> = (0..n)
                .filter(|&j| self.x.eq[(r, j)] != 0.0)
                .map(|j| col_owner[j])
                .collect();
            if owners.len() > 1 {
                out.push(format!("X row {r} links blocks {owners:?}"));
            }
        }
    }

    pub fn ensure_valid(&self) -> Result<()> {
        let v = self.validate();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidProblem(v))
        }
    }

    pub fn derived_constants(&self) -> Result<DerivedConstants> {
        self.ensure_valid()?;
        let mut ax_norm_bound = 0.0;
        for i in 0..self.m() {
            let (lo, hi) = interval_dot(self.a.row(i), &self.x.lower, &self.x.upper);
            ax_norm_bound += lo.abs().max(hi.abs());
        }
        let z_center: Vec<f64> = self
            .z
            .lower
            .iter()
            .zip(&self.z.upper)
            .map(|(l, u)| 0.5 * (l + u))
            .collect();
        let z_radius_l1 = 0.5
            * self
                .z
                .lower
                .iter()
                .zip(&self.z.upper)
                .map(|(l, u)| u - l)
                .sum::<f64>();
        Ok(DerivedConstants {
            k_base: self.b.norm1(),
            ax_norm_bound,
            x_diam_inf: self.x.diam_inf(),
            z_diam_inf: self.z.diam_inf(),
            z_radius_l1,
            z_center,
        })
    }

    /// Per-block views. Without a block structure the whole problem is one block.
    pub fn decompose(&self) -> Vec<Block> {
        let (n, m) = (self.n(), self.m());
        let (xp, rp) = match &self.blocks {
            Some(bs) => (bs.x_partition.clone(), bs.row_partition.clone()),
            None => (vec![(0..n).collect()], vec![(0..m).collect()]),
        };
        let mut col_owner = vec![0usize; n];
        for (p, cols) in xp.iter().enumerate() {
            for &j in cols {
                col_owner[j] = p;
            }
        }
        let mut x_rows: Vec<Vec<usize>> = vec![Vec::new(); xp.len()];
        for r in 0..self.x.eq.rows() {
            let owner = (0..n)
                .find(|&j| self.x.eq[(r, j)] != 0.0)
                .map(|j| col_owner[j])
                .unwrap_or(0);
            x_rows[owner].push(r);
        }
        let all_z: Vec<usize> = (0..self.d()).collect();
        xp.into_iter()
            .zip(rp)
            .zip(x_rows)
            .map(|((cols, rows), xr)| {
                let set = MilSet {
                    integrality: cols.iter().map(|&j| self.x.integrality[j]).collect(),
                    eq: self.x.eq.select(&xr, &cols),
                    rhs: xr.iter().map(|&r| self.x.rhs[r]).collect(),
                    lower: cols.iter().map(|&j| self.x.lower[j]).collect(),
                    upper: cols.iter().map(|&j| self.x.upper[j]).collect(),
                };
                Block {
                    c: cols.iter().map(|&j| self.c[j]).collect(),
                    a: self.a.select(&rows, &cols),
                    b: self.b.select(&rows, &all_z),
                    x: set,
                    cols,
                    rows,
                }
            })
            .collect()
    }
}

/// One x-block: its columns, coupling rows, and local data.
#[derive(Clone, Debug)]
pub struct Block {
    pub cols: Vec<usize>,
    pub rows: Vec<usize>,
    pub c: Vec<f64>,
    pub a: Matrix,
    pub b: Matrix,
    pub x: MilSet,
}

// ---------------------------------------------------------------------------
// JSON problem format

#[derive(Serialize, Deserialize)]
struct MilSetFile {
    dim: usize,
    integrality: Vec<VarKind>,
    #[serde(rename = "E")]
    e: Vec<Vec<f64>>,
    f: Vec<f64>,
    #[serde(with = "lower_bounds")]
    lower: Vec<f64>,
    #[serde(with = "upper_bounds")]
    upper: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct ProblemFile {
    format: String,
    c: Vec<f64>,
    g: Vec<f64>,
    #[serde(rename = "A")]
    a: Vec<Vec<f64>>,
    #[serde(rename = "B")]
    b: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    b_rhs: Option<Vec<f64>>,
    #[serde(rename = "X")]
    x: MilSetFile,
    #[serde(rename = "Z")]
    z: MilSetFile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    blocks: Option<BlockStructure>,
}

// Infinite bounds travel as `null`.
macro_rules! bound_serde {
    ($name:ident, $inf:expr) => {
        mod $name {
            use serde::{Deserialize, Deserializer, Serializer};

            pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
                s.collect_seq(v.iter().map(|x| if x.is_finite() { Some(*x) } else { None }))
            }

            pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
                let raw: Vec<Option<f64>> = Vec::deserialize(d)?;
                Ok(raw.into_iter().map(|x| x.unwrap_or($inf)).collect())
            }
        }
    };
}
bound_serde!(lower_bounds, f64::NEG_INFINITY);
bound_serde!(upper_bounds, f64::INFINITY);

impl MilSetFile {
    fn from_set(s: &MilSet) -> Self {
        MilSetFile {
            dim: s.dim(),
            integrality: s.integrality.clone(),
            e: s.eq.to_rows(),
            f: s.rhs.clone(),
            lower: s.lower.clone(),
            upper: s.upper.clone(),
        }
    }

    fn into_set(self, name: &str) -> Result<MilSet> {
        if self.integrality.len() != self.dim {
            return Err(Error::Dimension(format!(
                "{name}.integrality has {} entries, dim is {}",
                self.integrality.len(),
                self.dim
            )));
        }
        Ok(MilSet {
            integrality: self.integrality,
            eq: Matrix::from_rows(&self.e, self.dim)?,
            rhs: self.f,
            lower: self.lower,
            upper: self.upper,
        })
    }
}

impl TwoBlockMilp {
    /// Parses the `blockmilp-v1` JSON format. A nonhomogeneous right-hand side
    /// under key `b_rhs` is folded into an extra z column pinned at −1.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: ProblemFile = serde_json::from_str(text)?;
        if file.format != FORMAT_TAG {
            return Err(Error::InvalidProblem(vec![format!(
                "unknown format tag {:?}",
                file.format
            )]));
        }
        let n = file.c.len();
        let d = file.g.len();
        let a = Matrix::from_rows(&file.a, n)?;
        let mut b = Matrix::from_rows(&file.b, d)?;
        let mut g = file.g;
        let mut z = file.z.into_set("Z")?;
        let x = file.x.into_set("X")?;
        if let Some(rhs) = file.b_rhs {
            if rhs.len() != b.rows() {
                return Err(Error::Dimension(format!(
                    "b_rhs has {} entries, coupling has {} rows",
                    rhs.len(),
                    b.rows()
                )));
            }
            b.push_col(&rhs);
            g.push(0.0);
            z.eq.push_col(&vec![0.0; z.eq.rows()]);
            z.integrality.push(VarKind::Continuous);
            z.lower.push(-1.0);
            z.upper.push(-1.0);
        }
        Ok(TwoBlockMilp {
            c: file.c,
            g,
            a,
            b,
            x,
            z,
            blocks: file.blocks,
        })
    }

    pub fn to_json(&self) -> String {
        let file = ProblemFile {
            format: FORMAT_TAG.to_string(),
            c: self.c.clone(),
            g: self.g.clone(),
            a: self.a.to_rows(),
            b: self.b.to_rows(),
            b_rhs: None,
            x: MilSetFile::from_set(&self.x),
            z: MilSetFile::from_set(&self.z),
            blocks: self.blocks.clone(),
        };
        serde_json::to_string(&file).expect("problem serialization cannot fail")
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }
}
