//! Nonconvex cuts over z.
//!
//! A reverse-norm cut is `v − K‖z − z̄‖₁`. An augmented Lagrangian cut is
//! `v + μ̄ᵀB(z − z̄) − β̄‖B(z − z̄)‖₁`.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{dot, norm1, norm_inf, Matrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CutKind {
    ReverseNorm,
    AugLag,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cut {
    pub kind: CutKind,
    pub anchor: Vec<f64>,
    pub constant: f64,
    pub modulus: f64,
    /// μ̄ for AL cuts, empty for reverse-norm cuts.
    pub linear: Vec<f64>,
    /// Multipliers and penalty in force when the cut was generated.
    pub born_multipliers: Vec<f64>,
    pub born_penalty: f64,
    pub abs_dim: usize,
}

pub fn reverse_norm_cut(anchor: &[f64], q_value: f64, k: f64) -> Result<Cut> {
    if k < 0.0 {
        return Err(Error::NegativeModulus(k));
    }
    Ok(Cut {
        kind: CutKind::ReverseNorm,
        anchor: anchor.to_vec(),
        constant: q_value,
        modulus: k,
        linear: Vec::new(),
        born_multipliers: Vec::new(),
        born_penalty: 0.0,
        abs_dim: anchor.len(),
    })
}

pub fn al_cut(anchor: &[f64], p_value: f64, mu: &[f64], beta: f64, b: &Matrix) -> Result<Cut> {
    if beta < 0.0 {
        return Err(Error::NegativeModulus(beta));
    }
    if mu.len() != b.rows() || anchor.len() != b.cols() {
        return Err(Error::Dimension("AL cut data does not match B".into()));
    }
    Ok(Cut {
        kind: CutKind::AugLag,
        anchor: anchor.to_vec(),
        constant: p_value,
        modulus: beta,
        linear: mu.to_vec(),
        born_multipliers: mu.to_vec(),
        born_penalty: beta,
        abs_dim: b.rows(),
    })
}

impl Cut {
    /// Records the dual state a reverse-norm cut was generated under.
    pub fn born_under(mut self, lambda: &[f64], rho: f64) -> Self {
        self.born_multipliers = lambda.to_vec();
        self.born_penalty = rho;
        self
    }

    /// Linear coefficients over z, `Bᵀμ̄` (zero for reverse-norm cuts).
    pub fn linear_over_z(&self, b: &Matrix) -> Vec<f64> {
        match self.kind {
            CutKind::ReverseNorm => vec![0.0; self.anchor.len()],
            CutKind::AugLag => b.tmul_vec(&self.linear),
        }
    }

    /// True when `self ≥ other` everywhere by shape alone: same kind, anchor
    /// and slope, a constant at least as large and a modulus no larger.
    pub fn dominates(&self, other: &Cut) -> bool {
        self.kind == other.kind
            && self.anchor == other.anchor
            && self.linear == other.linear
            && self.constant >= other.constant
            && self.modulus <= other.modulus
    }

    pub fn evaluate(&self, z: &[f64], b: &Matrix) -> f64 {
        let delta: Vec<f64> = z.iter().zip(&self.anchor).map(|(a, c)| a - c).collect();
        match self.kind {
            CutKind::ReverseNorm => self.constant - self.modulus * norm1(&delta),
            CutKind::AugLag => {
                let bd = b.mul_vec(&delta);
                self.constant + dot(&self.linear, &bd) - self.modulus * norm1(&bd)
            }
        }
    }

    /// Moves a reverse-norm cut of `R(·; λ, ρ)` to `R(·; λ⁺, ρ⁺)`:
    /// the constant drops by `‖λ⁺ − λ‖∞ · ax_norm_bound` and the modulus
    /// becomes `ρ⁺ k_base`.
    pub fn revalidate(&self, lambda_new: &[f64], rho_new: f64, k_base: f64, ax_norm_bound: f64) -> Result<Cut> {
        if rho_new < self.born_penalty {
            return Err(Error::PenaltyDecrease {
                from: self.born_penalty,
                to: rho_new,
            });
        }
        let shift = if self.born_multipliers.is_empty() {
            norm_inf(lambda_new)
        } else {
            if self.born_multipliers.len() != lambda_new.len() {
                return Err(Error::Dimension("multiplier length changed".into()));
            }
            lambda_new
                .iter()
                .zip(&self.born_multipliers)
                .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
        };
        let unchanged = shift == 0.0 && rho_new == self.born_penalty;
        Ok(Cut {
            kind: CutKind::ReverseNorm,
            anchor: self.anchor.clone(),
            constant: self.constant - shift * ax_norm_bound,
            modulus: if unchanged { self.modulus } else { rho_new * k_base },
            linear: Vec::new(),
            born_multipliers: lambda_new.to_vec(),
            born_penalty: rho_new,
            abs_dim: self.anchor.len(),
        })
    }
}

/// Ordered cut list with oldest-first eviction.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct CutPool {
    cuts: VecDeque<Cut>,
    capacity: Option<usize>,
}

impl CutPool {
    pub fn new(capacity: Option<usize>) -> Self {
        CutPool {
            cuts: VecDeque::new(),
            capacity,
        }
    }

    pub fn push(&mut self, cut: Cut) {
        self.cuts.push_back(cut);
        if let Some(cap) = self.capacity {
            while self.cuts.len() > cap {
                self.cuts.pop_front();
            }
        }
    }

    pub fn len(&self) -> usize {
        self.cuts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cuts.is_empty()
    }

    pub fn capacity(&self) -> Option<usize> {
        self.capacity
    }

    pub fn iter(&self) -> impl Iterator<Item = &Cut> {
        self.cuts.iter()
    }

    pub fn as_vec(&self) -> Vec<Cut> {
        self.cuts.iter().cloned().collect()
    }

    /// Pointwise max of all cuts, `-∞` when empty.
    pub fn evaluate(&self, z: &[f64], b: &Matrix) -> f64 {
        self.cuts
            .iter()
            .map(|c| c.evaluate(z, b))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Replaces every cut by its revalidation under `(λ⁺, ρ⁺)`.
    pub fn revalidate_all(&mut self, lambda_new: &[f64], rho_new: f64, k_base: f64, ax_norm_bound: f64) -> Result<()> {
        for c in self.cuts.iter_mut() {
            *c = c.revalidate(lambda_new, rho_new, k_base, ax_norm_bound)?;
        }
        Ok(())
    }
}
