use serde::Serialize;

use crate::qcore::{gap_profile, GapProfile, StateEnsemble};

/// Exponent arguments of the error bounds at budget `N`.
///
/// The incoherent bounds are `exp(−Ω(·))` statements; their arguments are
/// reported with the hidden constant set to 1. Only the coherent envelope
/// carries its full constant.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExponentReport {
    pub gaps: GapProfile,
    pub n: u64,
    pub dim: usize,
    pub k: usize,
    /// `N·H₁ / (loḡK·d)`; multiply by `√c` for the gap-floor form.
    pub im_exponent: f64,
    /// `N·H₂ / loḡK`, first branch of the `m = d` bound.
    pub im_lemma_h2_term: f64,
    /// `N·H₁ / (loḡK·d²)`, second branch of the `m = d` bound.
    pub im_lemma_h1_term: f64,
    /// `N·H₂ / (8·loḡK)`.
    pub cm_exponent: f64,
    /// `(K(K−1)/2)·exp(−N·H₂/(8·loḡK))`.
    pub cm_envelope: f64,
    pub im_unconstanted: bool,
}

impl ExponentReport {
    /// `min` of the two `m = d` branches.
    pub fn im_lemma_exponent(&self) -> f64 {
        self.im_lemma_h2_term.min(self.im_lemma_h1_term)
    }
}

pub fn theoretical_exponents(ens: &StateEnsemble, n: u64) -> ExponentReport {
    theoretical_exponents_for(gap_profile(ens), ens.dim(), n)
}

/// Same as [`theoretical_exponents`] from a gap profile alone.
pub fn theoretical_exponents_for(gaps: GapProfile, dim: usize, n: u64) -> ExponentReport {
    let k = gaps.deltas_sorted.len() + 1;
    let nf = n as f64;
    let d = dim as f64;
    let lb = gaps.logbar_k;
    let pairs = (k * (k - 1)) as f64 / 2.0;
    let cm_exponent = nf * gaps.h2 / (8.0 * lb);
    ExponentReport {
        im_exponent: nf * gaps.h1 / (lb * d),
        im_lemma_h2_term: nf * gaps.h2 / lb,
        im_lemma_h1_term: nf * gaps.h1 / (lb * d * d),
        cm_exponent,
        cm_envelope: pairs * (-cm_exponent).exp(),
        im_unconstanted: true,
        gaps,
        n,
        dim,
        k,
    }
}
