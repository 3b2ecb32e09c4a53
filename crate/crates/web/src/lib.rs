//! Browser bindings for the pqsi demo page.
//!
//! Each exported function runs a small seeded experiment and hands back a
//! flat `Float64Array` for the page to plot. The plain-Rust versions are
//! public too so they can be tested off the browser.

use pqsi_core::identify::{run_cm_pqsi, run_im_pqsi, BudgetPolicy};
use pqsi_core::measure::TwoOutcomePovm;
use pqsi_core::qcore::{make_ensemble, sample_haar_state, EnsembleSpec, Rotation};
use pqsi_core::stream::StreamKey;
use pqsi_core::Result;
use wasm_bindgen::prelude::*;

/// Misidentification rate at each budget, over `trials` runs on one
/// Haar-rotated ensemble. `m == 0` selects the coherent (SWAP test) driver.
pub fn error_curve(
    purities: &[f64],
    dim: usize,
    m: usize,
    budgets: &[u32],
    trials: u32,
    seed: u64,
) -> Result<Vec<f64>> {
    let spec = EnsembleSpec::Purities { purities: purities.to_vec(), dim, rotation: Rotation::Independent };
    let ens = make_ensemble(&spec, &mut StreamKey::new(seed).with_trial(u32::MAX).rng())?;
    budgets
        .iter()
        .enumerate()
        .map(|(cell, &n)| {
            let mut errors = 0u32;
            for t in 0..trials {
                let key = StreamKey::new(seed).with_cell(cell as u32).with_trial(t);
                let run = if m == 0 {
                    run_cm_pqsi(&ens, n as u64, key, BudgetPolicy::AllowOvershoot)?
                } else {
                    run_im_pqsi(&ens, n as u64, m, key, BudgetPolicy::AllowOvershoot)?
                };
                errors += (run.selected != ens.best_index()) as u32;
            }
            Ok(errors as f64 / trials as f64)
        })
        .collect()
}

/// Histogram density of `|⟨0|ψ⟩|²` for Haar-random `ψ` on `bins` equal
/// cells of `[0, 1]`.
pub fn overlap_histogram(dim: usize, samples: u32, bins: usize, seed: u64) -> Result<Vec<f64>> {
    let mut rng = StreamKey::new(seed).rng();
    let mut counts = vec![0u32; bins.max(1)];
    for _ in 0..samples {
        let x = sample_haar_state(dim, &mut rng)?[0].norm_sqr();
        let b = ((x * counts.len() as f64) as usize).min(counts.len() - 1);
        counts[b] += 1;
    }
    let scale = counts.len() as f64 / samples.max(1) as f64;
    Ok(counts.into_iter().map(|c| c as f64 * scale).collect())
}

/// Acceptance probabilities `Tr(Mσ)` of a rank-`rank` basis projector on
/// `draws` depolarized Haar states, preceded by the window center and
/// half-width.
pub fn concentration_samples(dim: usize, rank: usize, alpha: f64, draws: u32, seed: u64) -> Result<Vec<f64>> {
    let povm = TwoOutcomePovm::basis_projector(dim, rank)?;
    let d = dim as f64;
    let center = povm.trace_m() / d;
    let mut out = vec![center, 2.0 * alpha * povm.trace_m().sqrt() / d];
    let mut rng = StreamKey::new(seed).rng();
    for _ in 0..draws {
        let psi = sample_haar_state(dim, &mut rng)?;
        let overlap = povm.light_effect().expectation(&psi).re;
        out.push(alpha * overlap + (1.0 - alpha) * center);
    }
    Ok(out)
}

fn js<T>(r: Result<T>) -> std::result::Result<T, JsError> {
    r.map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen(js_name = errorCurve)]
pub fn error_curve_js(
    purities: &[f64],
    dim: usize,
    m: usize,
    budgets: &[u32],
    trials: u32,
    seed: u64,
) -> std::result::Result<Vec<f64>, JsError> {
    js(error_curve(purities, dim, m, budgets, trials, seed))
}

#[wasm_bindgen(js_name = overlapHistogram)]
pub fn overlap_histogram_js(
    dim: usize,
    samples: u32,
    bins: usize,
    seed: u64,
) -> std::result::Result<Vec<f64>, JsError> {
    js(overlap_histogram(dim, samples, bins, seed))
}

#[wasm_bindgen(js_name = concentrationSamples)]
pub fn concentration_samples_js(
    dim: usize,
    rank: usize,
    alpha: f64,
    draws: u32,
    seed: u64,
) -> std::result::Result<Vec<f64>, JsError> {
    js(concentration_samples(dim, rank, alpha, draws, seed))
}
