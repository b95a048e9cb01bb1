//! Generators for the three test families: two-stage investment planning,
//! stochastic server location, and random block-structured MILPs.
//!
//! All of them produce block-angular problems in which each block owns its
//! x columns, its local equality rows and its coupling rows.

mod rng;

pub use rng::SplitMix64;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{BlockStructure, Matrix, MilSet, TwoBlockMilp, VarKind};

/// Local data of one block before assembly.
#[derive(Clone, Debug, Default)]
struct BlockData {
    c: Vec<f64>,
    kinds: Vec<VarKind>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    /// Local equality rows over the block's columns.
    eq: Vec<(Vec<f64>, f64)>,
    /// Coupling rows: (row over the block's columns, row over z).
    coupling: Vec<(Vec<f64>, Vec<f64>)>,
}

impl BlockData {
    fn var(&mut self, c: f64, kind: VarKind, lo: f64, hi: f64) -> usize {
        self.c.push(c);
        self.kinds.push(kind);
        self.lower.push(lo);
        self.upper.push(hi);
        self.c.len() - 1
    }
}

fn assemble(blocks: Vec<BlockData>, g: Vec<f64>, z: MilSet) -> Result<TwoBlockMilp> {
    let d = g.len();
    let n: usize = blocks.iter().map(|b| b.c.len()).sum();
    let m: usize = blocks.iter().map(|b| b.coupling.len()).sum();
    let xr: usize = blocks.iter().map(|b| b.eq.len()).sum();
    let mut c = Vec::with_capacity(n);
    let mut kinds = Vec::with_capacity(n);
    let mut lower = Vec::with_capacity(n);
    let mut upper = Vec::with_capacity(n);
    let mut a = Matrix::zeros(m, n);
    let mut b = Matrix::zeros(m, d);
    let mut e = Matrix::zeros(xr, n);
    let mut f = Vec::with_capacity(xr);
    let mut x_partition = Vec::new();
    let mut row_partition = Vec::new();
    let (mut col0, mut row0, mut xrow0) = (0, 0, 0);
    for blk in blocks {
        let w = blk.c.len();
        for (k, (row, rhs)) in blk.eq.iter().enumerate() {
            e.row_mut(xrow0 + k)[col0..col0 + w].copy_from_slice(row);
            f.push(*rhs);
        }
        for (k, (arow, brow)) in blk.coupling.iter().enumerate() {
            a.row_mut(row0 + k)[col0..col0 + w].copy_from_slice(arow);
            b.row_mut(row0 + k).copy_from_slice(brow);
        }
        x_partition.push((col0..col0 + w).collect());
        row_partition.push((row0..row0 + blk.coupling.len()).collect());
        col0 += w;
        row0 += blk.coupling.len();
        xrow0 += blk.eq.len();
        c.extend(blk.c);
        kinds.extend(blk.kinds);
        lower.extend(blk.lower);
        upper.extend(blk.upper);
    }
    let problem = TwoBlockMilp {
        c,
        g,
        a,
        b,
        x: MilSet {
            integrality: kinds,
            eq: e,
            rhs: f,
            lower,
            upper,
        },
        z,
        blocks: Some(BlockStructure {
            x_partition,
            row_partition,
        }),
    };
    problem.ensure_valid()?;
    Ok(problem)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TChoice {
    /// `T = I`
    #[serde(rename = "I")]
    Identity,
    /// `T = [2/3 1/3; 1/3 2/3]`
    #[serde(rename = "T")]
    Mixed,
}

impl TChoice {
    pub fn matrix(self) -> [[f64; 2]; 2] {
        match self {
            TChoice::Identity => [[1.0, 0.0], [0.0, 1.0]],
            TChoice::Mixed => [[2.0 / 3.0, 1.0 / 3.0], [1.0 / 3.0, 2.0 / 3.0]],
        }
    }
}

pub const INVESTMENT_Q: [f64; 4] = [-16.0, -19.0, -23.0, -28.0];
pub const INVESTMENT_W: [[f64; 4]; 2] = [[2.0, 3.0, 4.0, 5.0], [6.0, 1.0, 3.0, 1.0]];
pub const INVESTMENT_G: [f64; 2] = [-1.5, -4.0];

/// Right-hand sides of the `S²` scenarios, first coordinate outer.
pub fn investment_scenarios(s: usize) -> Vec<[f64; 2]> {
    let step = |k: usize| 5.0 + 10.0 * k as f64 / (s - 1) as f64;
    (0..s)
        .flat_map(|a| (0..s).map(move |b| [step(a), step(b)]))
        .collect()
}

/// Two-stage investment planning with `S²` equally likely scenarios.
///
/// Block layout: `x ∈ {0,1}⁴`, integer copies `y ∈ [0,u]²` of z, and
/// slacks `s ∈ [0,h]` with `Wx + Ty + s = h`. Coupling rows are `y − z = 0`.
pub fn gen_investment(s: usize, t: TChoice, u: u32) -> Result<TwoBlockMilp> {
    if s < 2 {
        return Err(Error::Parameter(format!("investment needs S >= 2, got {s}")));
    }
    if u == 0 {
        return Err(Error::Parameter("investment needs a positive z bound".into()));
    }
    let u = u as f64;
    let tm = t.matrix();
    let prob = 1.0 / (s * s) as f64;
    let blocks = investment_scenarios(s)
        .into_iter()
        .map(|h| {
            let mut b = BlockData::default();
            for q in INVESTMENT_Q {
                b.var(prob * q, VarKind::Integer, 0.0, 1.0);
            }
            for _ in 0..2 {
                b.var(0.0, VarKind::Integer, 0.0, u);
            }
            for hi in h {
                b.var(0.0, VarKind::Continuous, 0.0, hi);
            }
            for i in 0..2 {
                let mut row = vec![0.0; 8];
                row[..4].copy_from_slice(&INVESTMENT_W[i]);
                row[4] = tm[i][0];
                row[5] = tm[i][1];
                row[6 + i] = 1.0;
                b.eq.push((row, h[i]));
            }
            for i in 0..2 {
                let mut arow = vec![0.0; 8];
                arow[4 + i] = 1.0;
                let mut brow = vec![0.0; 2];
                brow[i] = -1.0;
                b.coupling.push((arow, brow));
            }
            b
        })
        .collect();
    let z = MilSet::boxed(vec![VarKind::Integer; 2], vec![0.0; 2], vec![u; 2]);
    assemble(blocks, INVESTMENT_G.to_vec(), z)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SslpData {
    /// Server costs `c_j`.
    pub cost: Vec<f64>,
    /// Demands `d_ij`, client-major.
    pub demand: Vec<Vec<f64>>,
    /// Client presence `h^p_i`.
    pub presence: Vec<Vec<f64>>,
    pub capacity: f64,
}

pub const SSLP_SHORTAGE_COST: f64 = 1000.0;

/// Draws SSLP data: costs, then demands row by row, then scenarios.
pub fn sslp_data(m: usize, n: usize, p: usize, seed: u64) -> SslpData {
    let mut rng = SplitMix64::new(seed);
    let cost = (0..m).map(|_| rng.int_in(40, 80) as f64).collect();
    let demand: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..m).map(|_| rng.int_in(0, 25) as f64).collect())
        .collect();
    let presence = (0..p)
        .map(|_| (0..n).map(|_| if rng.bernoulli_half() { 1.0 } else { 0.0 }).collect())
        .collect();
    let total: f64 = demand.iter().flatten().sum();
    SslpData {
        cost,
        demand,
        presence,
        capacity: total / m as f64,
    }
}

/// Stochastic server location with `m` servers, `n` clients, `p` scenarios.
///
/// Revenue is `revenue_scale · d_ij`. Each block holds the assignments
/// `x_ij`, binary copies `y_j` of the siting decision, shortages `s_j` and
/// capacity slacks.
pub fn gen_sslp(m: usize, n: usize, p: usize, seed: u64, revenue_scale: f64) -> Result<TwoBlockMilp> {
    if m == 0 || n == 0 || p == 0 {
        return Err(Error::Parameter("SSLP sizes must be positive".into()));
    }
    let data = sslp_data(m, n, p, seed);
    let prob = 1.0 / p as f64;
    let u = data.capacity;
    let xi = |i: usize, j: usize| i * m + j;
    let blocks = data
        .presence
        .iter()
        .map(|h| {
            let mut b = BlockData::default();
            for i in 0..n {
                for j in 0..m {
                    b.var(-prob * revenue_scale * data.demand[i][j], VarKind::Integer, 0.0, 1.0);
                }
            }
            let y0 = b.c.len();
            for _ in 0..m {
                b.var(0.0, VarKind::Integer, 0.0, 1.0);
            }
            let s0 = b.c.len();
            for j in 0..m {
                let dj: f64 = (0..n).map(|i| data.demand[i][j]).sum();
                b.var(prob * SSLP_SHORTAGE_COST, VarKind::Continuous, 0.0, dj);
            }
            let w0 = b.c.len();
            for j in 0..m {
                let dj: f64 = (0..n).map(|i| data.demand[i][j]).sum();
                b.var(0.0, VarKind::Continuous, 0.0, u + dj);
            }
            let w = b.c.len();
            for j in 0..m {
                let mut row = vec![0.0; w];
                for i in 0..n {
                    row[xi(i, j)] = data.demand[i][j];
                }
                row[y0 + j] = -u;
                row[s0 + j] = -1.0;
                row[w0 + j] = 1.0;
                b.eq.push((row, 0.0));
            }
            for i in 0..n {
                let mut row = vec![0.0; w];
                for j in 0..m {
                    row[xi(i, j)] = 1.0;
                }
                b.eq.push((row, h[i]));
            }
            for j in 0..m {
                let mut arow = vec![0.0; w];
                arow[y0 + j] = 1.0;
                let mut brow = vec![0.0; m];
                brow[j] = -1.0;
                b.coupling.push((arow, brow));
            }
            b
        })
        .collect();
    let z = MilSet::boxed(vec![VarKind::Integer; m], vec![0.0; m], vec![1.0; m]);
    assemble(blocks, data.cost, z)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RandomSpec {
    pub blocks: usize,
    pub dim: usize,
    pub int_count: usize,
    pub eq_rows: usize,
    pub copies: usize,
    pub slack: usize,
    pub seed: u64,
}

impl RandomSpec {
    /// The scaled-down recipe used in tests: dim 10, 6 integers, 4 rows,
    /// 2 copies, slack 4.
    pub fn small(blocks: usize, seed: u64) -> Self {
        RandomSpec {
            blocks,
            dim: 10,
            int_count: 6,
            eq_rows: 4,
            copies: 2,
            slack: 4,
            seed,
        }
    }
}

pub struct Planted {
    pub problem: TwoBlockMilp,
    pub x: Vec<f64>,
    pub z: Vec<f64>,
}

/// Random block-structured MILP with a planted feasible point.
///
/// Per block: Gaussian `c_p`, planted `x̄_p`, Gaussian `E_p`, `f_p = E_p x̄_p`
/// (drawn in that order); then a Gaussian `G` with `h = G z̄` over the
/// binary copies `z`.
pub fn gen_random_structured(spec: &RandomSpec) -> Result<Planted> {
    let RandomSpec {
        blocks: np,
        dim,
        int_count,
        eq_rows,
        copies,
        slack,
        seed,
    } = *spec;
    if np == 0 || int_count > dim || copies > int_count || eq_rows >= dim {
        return Err(Error::Parameter(format!("invalid random family sizes {spec:?}")));
    }
    let d = copies * np;
    let g_rows = d.saturating_sub(slack);
    let mut rng = SplitMix64::new(seed);
    let mut x_bar = Vec::with_capacity(np * dim);
    let mut z_bar = Vec::with_capacity(d);
    let mut blocks = Vec::with_capacity(np);
    for p in 0..np {
        let mut b = BlockData::default();
        let c: Vec<f64> = (0..dim).map(|_| rng.normal()).collect();
        let xb: Vec<f64> = (0..dim)
            .map(|i| {
                if i < copies {
                    rng.int_in(0, 1) as f64
                } else if i < int_count {
                    rng.int_in(0, 2) as f64
                } else {
                    rng.uniform_in(0.0, 2.0)
                }
            })
            .collect();
        for (i, &ci) in c.iter().enumerate() {
            let kind = if i < int_count {
                VarKind::Integer
            } else {
                VarKind::Continuous
            };
            b.var(ci, kind, 0.0, 2.0);
        }
        for _ in 0..eq_rows {
            let row: Vec<f64> = (0..dim).map(|_| rng.normal()).collect();
            let rhs = row.iter().zip(&xb).map(|(a, x)| a * x).sum();
            b.eq.push((row, rhs));
        }
        for i in 0..copies {
            let mut arow = vec![0.0; dim];
            arow[i] = -1.0;
            let mut brow = vec![0.0; d];
            brow[p * copies + i] = 1.0;
            b.coupling.push((arow, brow));
            z_bar.push(xb[i]);
        }
        x_bar.extend(xb);
        blocks.push(b);
    }
    let mut gm = Matrix::zeros(g_rows, d);
    let mut hv = Vec::with_capacity(g_rows);
    for r in 0..g_rows {
        for j in 0..d {
            gm[(r, j)] = rng.normal();
        }
        hv.push(gm.row(r).iter().zip(&z_bar).map(|(a, z)| a * z).sum());
    }
    let z = MilSet {
        integrality: vec![VarKind::Integer; d],
        eq: gm,
        rhs: hv,
        lower: vec![0.0; d],
        upper: vec![1.0; d],
    };
    let problem = assemble(blocks, vec![0.0; d], z)?;
    Ok(Planted {
        problem,
        x: x_bar,
        z: z_bar,
    })
}

/// Any of the three families, as named on the command line.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum GenSpec {
    Investment { scenarios: usize, t: TChoice, upper: u32 },
    Sslp { servers: usize, clients: usize, scenarios: usize, seed: u64, revenue_scale: f64 },
    Random(RandomSpec),
}

impl GenSpec {
    pub fn generate(&self) -> Result<TwoBlockMilp> {
        match self {
            GenSpec::Investment { scenarios, t, upper } => gen_investment(*scenarios, *t, *upper),
            GenSpec::Sslp {
                servers,
                clients,
                scenarios,
                seed,
                revenue_scale,
            } => gen_sslp(*servers, *clients, *scenarios, *seed, *revenue_scale),
            GenSpec::Random(spec) => Ok(gen_random_structured(spec)?.problem),
        }
    }

    pub fn label(&self) -> String {
        match self {
            GenSpec::Investment { scenarios, t, upper } => {
                let t = match t {
                    TChoice::Identity => "I",
                    TChoice::Mixed => "T",
                };
                format!("investment-{t}-u{upper}-S{scenarios}")
            }
            GenSpec::Sslp {
                servers,
                clients,
                scenarios,
                seed,
                ..
            } => format!("sslp-{servers}x{clients}x{scenarios}-seed{seed}"),
            GenSpec::Random(s) => format!("random-P{}-seed{}", s.blocks, s.seed),
        }
    }
}
