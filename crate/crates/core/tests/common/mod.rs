//! Tiny instances shared by the integration tests. Every one of them is small
//! enough for the enumeration oracles.
#![allow(dead_code)]

use blockmilp::instances::{gen_investment, gen_random_structured, gen_sslp, RandomSpec, TChoice};
use blockmilp::model::{MilSet, TwoBlockMilp};
use blockmilp::reference::{enumerate_extensive, lattice_points};

pub fn investment(t: TChoice) -> TwoBlockMilp {
    gen_investment(2, t, 2).unwrap()
}

pub fn sslp() -> TwoBlockMilp {
    gen_sslp(2, 2, 2, 7, 1.0).unwrap()
}

pub fn random_spec(seed: u64) -> RandomSpec {
    RandomSpec {
        blocks: 2,
        dim: 4,
        int_count: 3,
        eq_rows: 1,
        copies: 1,
        slack: 1,
        seed,
    }
}

pub fn random(seed: u64) -> TwoBlockMilp {
    gen_random_structured(&random_spec(seed)).unwrap().problem
}

pub fn all() -> Vec<(&'static str, TwoBlockMilp)> {
    vec![
        ("investment-I", investment(TChoice::Identity)),
        ("investment-T", investment(TChoice::Mixed)),
        ("sslp", sslp()),
        ("random-1", random(1)),
        ("random-2", random(2)),
    ]
}

pub fn p_star(p: &TwoBlockMilp) -> f64 {
    enumerate_extensive(p).unwrap().expect("tiny instance is feasible").value
}

/// Every integer point of Z's box, ignoring Z's equality rows.
pub fn box_points(p: &TwoBlockMilp) -> Vec<Vec<f64>> {
    let bx = MilSet::boxed(p.z.integrality.clone(), p.z.lower.clone(), p.z.upper.clone());
    lattice_points(&bx, 1e4).unwrap()
}

pub fn z_points(p: &TwoBlockMilp) -> Vec<Vec<f64>> {
    lattice_points(&p.z, 1e4).unwrap()
}

/// ε-solution check: objective within `eps` of `p*` and residual at most `eps`.
pub fn is_eps_solution(p: &TwoBlockMilp, x: &[f64], z: &[f64], p_star: f64, eps: f64) -> bool {
    let it = p.iterate(x.to_vec(), z.to_vec());
    p.x.contains(x, 1e-7, 1e-6)
        && p.z.contains(z, 1e-7, 1e-6)
        && it.primal_obj <= p_star + eps + 1e-9
        && it.residual_l1 <= eps + 1e-9
}
