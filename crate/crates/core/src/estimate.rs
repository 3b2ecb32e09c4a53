//! The collision purity statistic and its closed-form moments.
//!
//! Measuring `m` copies of ρ in one basis gives outcomes `x_1..x_m`. With
//! `c_i` the number of outcomes equal to `i`,
//!
//! ```text
//! g̃ = (1/m²) Σ_i c_i² − 1/m
//! ```
//!
//! is `(m−1)/m` times the fraction of ordered pairs that collide, so its
//! expectation is `((m−1)/m) Σ_i p_i²`. Averaged over Haar-random bases this
//! becomes `(m−1)(1 + Tr ρ²) / (m(d+1))`, which is affine in the purity.

use serde::Serialize;

use crate::measure::OutcomeDistribution;
use crate::{Error, Result};

/// One collision estimate `g̃(ρ, j)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CollisionStat {
    pub g_tilde: f64,
    pub m: usize,
    pub basis_index: usize,
}

impl CollisionStat {
    pub fn with_basis(self, basis_index: usize) -> Self {
        Self { basis_index, ..self }
    }
}

/// Per-phase score `w(ρ, k)` of one surviving state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseStat {
    pub w: f64,
    pub state_id: usize,
    pub phase: usize,
    /// Bases (incoherent) or SWAP tests (coherent) averaged into `w`.
    pub n_bases: u64,
}

fn check_m(m: usize) -> Result<()> {
    if m < 2 {
        return Err(Error::CopiesPerBasis(m));
    }
    Ok(())
}

/// `g̃` from a list of outcomes in `0..d`, via bucket counts.
pub fn collision_estimator(outcomes: &[usize], d: usize) -> Result<CollisionStat> {
    let m = outcomes.len();
    check_m(m)?;
    let mut counts = vec![0u64; d];
    for &x in outcomes {
        if x >= d {
            return Err(Error::OutcomeOutOfRange { outcome: x, dim: d });
        }
        counts[x] += 1;
    }
    Ok(collision_from_counts(&counts, m))
}

pub(crate) fn collision_from_counts(counts: &[u64], m: usize) -> CollisionStat {
    let sq: u64 = counts.iter().map(|c| c * c).sum();
    let mf = m as f64;
    CollisionStat { g_tilde: sq as f64 / (mf * mf) - 1.0 / mf, m, basis_index: 0 }
}

/// `E[g̃] = ((m−1)/m) Σ p_i²` for a fixed basis.
pub fn collision_expectation(dist: &OutcomeDistribution, m: usize) -> Result<f64> {
    check_m(m)?;
    let mf = m as f64;
    Ok((mf - 1.0) / mf * dist.power_sum(2))
}

/// Upper bound `2E[g̃]/m² + (4/m) Σ p_i³` on `Var[g̃]`.
pub fn collision_variance_bound(dist: &OutcomeDistribution, m: usize) -> Result<f64> {
    let e = collision_expectation(dist, m)?;
    let mf = m as f64;
    Ok(2.0 * e / (mf * mf) + 4.0 / mf * dist.power_sum(3))
}

/// `E[g̃]` averaged over Haar-random bases: `(m−1)(1+z)/(m(d+1))`.
pub fn haar_averaged_expectation(z: f64, m: usize, d: usize) -> Result<f64> {
    check_m(m)?;
    if d < 2 {
        return Err(Error::DimensionTooSmall(d));
    }
    let df = d as f64;
    if !(1.0 / df - 1e-12..=1.0 + 1e-12).contains(&z) {
        return Err(Error::PurityOutOfRange { purity: z, floor: 1.0 / df });
    }
    let mf = m as f64;
    Ok((mf - 1.0) * (1.0 + z) / (mf * (df + 1.0)))
}
