//! Invariant suites behind `pqsi verify`. Each check returns a named
//! pass/fail with a one-line detail; sizes are parameters so the same code
//! serves the quick CLI run and the full acceptance runs.

use pqsi_core::estimate::{
    collision_estimator, collision_expectation, collision_variance_bound, haar_averaged_expectation,
};
use pqsi_core::lowerbound::{affine_identity_check, build_prqsi_states, concentration_experiment};
use pqsi_core::measure::{
    rotated_basis_distribution, swap_accept_prob, swap_test_sample, OutcomeDistribution, RotatedBasis, TwoOutcomePovm,
};
use pqsi_core::qcore::{
    alpha_from_purity, depolarized_state, sample_haar_unitary, sample_hermitian, verify_haar_moments,
    ComplexSquareMatrix, UnitaryMatrix,
};
use pqsi_core::stream::StreamKey;
use rand::Rng;

use crate::stats::proportion_se;
use crate::HarnessError;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self { name: name.into(), passed, detail: detail.into() }
    }

    pub fn line(&self) -> String {
        format!("{} {}: {}", if self.passed { "PASS" } else { "FAIL" }, self.name, self.detail)
    }
}

/// Monte Carlo moments of Haar-random pure states for `triples` random
/// Hermitian triples, each within `n_se` standard errors of the closed form.
pub fn haar_moments(
    d: usize,
    triples: usize,
    samples: usize,
    n_se: f64,
    seed: u64,
) -> Result<CheckOutcome, HarnessError> {
    let mut worst: f64 = 0.0;
    for t in 0..triples {
        let mut rng = StreamKey::new(seed).with_trial(t as u32).rng();
        let a = sample_hermitian(d, &mut rng)?;
        let b = sample_hermitian(d, &mut rng)?;
        let c = sample_hermitian(d, &mut rng)?;
        let rep = verify_haar_moments(&a, &b, &c, samples, &mut rng)?;
        for m in [rep.first, rep.second, rep.third] {
            worst = worst.max(m.z_score());
        }
    }
    Ok(CheckOutcome::new(
        format!("haar moments d={d}"),
        worst <= n_se,
        format!("{triples} triples × {samples} samples, worst |z| = {worst:.2} (limit {n_se})"),
    ))
}

fn enumerate_moments(p: &[f64], m: usize) -> Result<(f64, f64), HarnessError> {
    let d = p.len();
    let mut seq = vec![0usize; m];
    let (mut mean, mut second) = (0.0, 0.0);
    for code in 0..d.pow(m as u32) {
        let mut c = code;
        let mut weight = 1.0;
        for slot in seq.iter_mut() {
            *slot = c % d;
            c /= d;
            weight *= p[*slot];
        }
        let g = collision_estimator(&seq, d)?.g_tilde;
        mean += weight * g;
        second += weight * g * g;
    }
    Ok((mean, second - mean * mean))
}

/// The distributions the enumeration check runs over: fixed shapes plus
/// seeded random ones for `d ∈ {2,3,4}`.
pub fn collision_test_set(seed: u64) -> Vec<Vec<f64>> {
    let mut set = vec![
        vec![0.5, 0.5],
        vec![1.0, 0.0],
        vec![0.8, 0.2],
        vec![1.0 / 3.0; 3],
        vec![0.6, 0.3, 0.1],
        vec![0.25; 4],
        vec![0.4, 0.3, 0.2, 0.1],
    ];
    let mut rng = StreamKey::new(seed).rng();
    for d in [2, 3, 4] {
        for _ in 0..5 {
            let raw: Vec<f64> = (0..d).map(|_| rng.random::<f64>() + 1e-3).collect();
            let s: f64 = raw.iter().sum();
            set.push(raw.into_iter().map(|x| x / s).collect());
        }
    }
    set
}

/// Exhaustive enumeration over all `d^m ≤ 4096` outcome sequences: the
/// mean matches `((m−1)/m)Σp²` to 1e-12 and the variance sits under its
/// bound.
pub fn collision_enumeration(seed: u64) -> Result<CheckOutcome, HarnessError> {
    let mut worst_mean: f64 = 0.0;
    let mut bound_violations = 0;
    let mut cases = 0;
    for p in collision_test_set(seed) {
        let dist = OutcomeDistribution::new(p.clone())?;
        for m in 2..=4 {
            if p.len().pow(m as u32) > 4096 {
                continue;
            }
            cases += 1;
            let (mean, var) = enumerate_moments(&p, m)?;
            worst_mean = worst_mean.max((mean - collision_expectation(&dist, m)?).abs());
            if var > collision_variance_bound(&dist, m)? {
                bound_violations += 1;
            }
        }
    }
    Ok(CheckOutcome::new(
        "collision enumeration",
        worst_mean <= 1e-12 && bound_violations == 0,
        format!("{cases} cases, max mean error {worst_mean:.1e}, variance-bound violations {bound_violations}"),
    ))
}

/// Mean of the basis-conditional collision expectation over Haar bases
/// against `(m−1)(1+z)/(m(d+1))`.
pub fn haar_averaged_law(
    d: usize,
    z: f64,
    m: usize,
    bases: usize,
    n_se: f64,
    seed: u64,
) -> Result<CheckOutcome, HarnessError> {
    let rho = depolarized_state(&UnitaryMatrix::identity(d)?, alpha_from_purity(z, d)?)?;
    let mut rng = StreamKey::new(seed).rng();
    let mut xs = Vec::with_capacity(bases);
    for _ in 0..bases {
        let basis = RotatedBasis::new(sample_haar_unitary(d, &mut rng)?);
        xs.push(collision_expectation(&rotated_basis_distribution(&rho, &basis)?, m)?);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let se = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) / n).sqrt();
    let target = haar_averaged_expectation(z, m, d)?;
    let z_score = if se > 0.0 { (mean - target).abs() / se } else { (mean - target).abs() * 1e12 };
    Ok(CheckOutcome::new(
        format!("haar-averaged law d={d} z={z} m={m}"),
        z_score <= n_se,
        format!("mean {mean:.6} vs {target:.6}, |z| = {z_score:.2} over {bases} bases"),
    ))
}

/// Accept frequency of the SWAP sampler against `(1+z)/2`.
pub fn swap_law(z: f64, draws: usize, n_se: f64, seed: u64) -> Result<CheckOutcome, HarnessError> {
    let p = swap_accept_prob(z)?;
    let mut rng = StreamKey::new(seed).rng();
    let mut hits = 0usize;
    for _ in 0..draws {
        if swap_test_sample(z, &mut rng)? {
            hits += 1;
        }
    }
    let freq = hits as f64 / draws as f64;
    let se = proportion_se(p, draws as u64);
    let passed = if se == 0.0 { hits == draws } else { (freq - p).abs() <= n_se * se };
    Ok(CheckOutcome::new(
        format!("swap law z={z}"),
        passed,
        format!("{freq:.5} vs {p:.5} (se {se:.5}) over {draws} draws"),
    ))
}

/// Random effect `V·diag(λ)·V†`, `λ ~ U[0,1]`.
fn random_effect<R: Rng>(d: usize, rng: &mut R) -> Result<TwoOutcomePovm, HarnessError> {
    let v = sample_haar_unitary(d, rng)?;
    let lam: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
    let m0 = v.matrix().mul(&ComplexSquareMatrix::from_real_diagonal(&lam)?)?.mul(v.adjoint().matrix())?;
    Ok(TwoOutcomePovm::new(m0.add(&m0.adjoint())?.scale(0.5))?)
}

/// Max residual of `Tr(Mτ_k) − (c·α_k + Tr(M)/d)` over random instances.
pub fn affine_identity(pairs: usize, dims: &[usize], seed: u64) -> Result<CheckOutcome, HarnessError> {
    let mut rng = StreamKey::new(seed).rng();
    let mut worst: f64 = 0.0;
    for i in 0..pairs {
        let d = dims[i % dims.len()];
        let k = 2 + i % 4;
        let floor = 1.0 / d as f64;
        let zs: Vec<f64> = loop {
            let zs: Vec<f64> = (0..k).map(|_| floor + (1.0 - floor) * rng.random::<f64>()).collect();
            let mut sorted = zs.clone();
            sorted.sort_by(|a, b| b.total_cmp(a));
            if sorted[0] - sorted[1] > 1e-6 {
                break zs;
            }
        };
        let u = sample_haar_unitary(d, &mut rng)?;
        let inst = build_prqsi_states(&zs, d, &u)?;
        let povm = random_effect(d, &mut rng)?;
        worst = worst.max(affine_identity_check(&inst, &povm)?);
    }
    Ok(CheckOutcome::new(
        "affine identity",
        worst <= 1e-10,
        format!("{pairs} instance/effect pairs over d ∈ {dims:?}, max residual {worst:.2e}"),
    ))
}

/// Concentration window and variance bound for a rank-`rank` projector
/// effect. The window is only asserted when `assert_window` is set.
pub fn concentration(
    d: usize,
    rank: usize,
    alpha: f64,
    draws: usize,
    assert_window: bool,
    seed: u64,
) -> Result<CheckOutcome, HarnessError> {
    let povm = TwoOutcomePovm::basis_projector(d, rank)?;
    let mut rng = StreamKey::new(seed).rng();
    let rep = concentration_experiment(&povm, alpha, draws, &mut rng)?;
    let window_floor = 0.75 - 3.0 * rep.in_window_std_error;
    let window_ok = rep.in_window_fraction >= window_floor;
    let var_ok = rep.empirical_variance <= rep.variance_bound + 3.0 * rep.variance_std_error;
    Ok(CheckOutcome::new(
        format!("concentration d={d} TrM={}", povm.trace_m()),
        var_ok && (window_ok || !assert_window),
        format!(
            "in-window {:.4} (floor {:.4}{}), var {:.3e} vs bound {:.3e} (+3se {:.1e})",
            rep.in_window_fraction,
            window_floor,
            if assert_window { "" } else { ", diagnostic" },
            rep.empirical_variance,
            rep.variance_bound,
            3.0 * rep.variance_std_error
        ),
    ))
}

/// Quick versions of every suite.
pub fn quick_suite(seed: u64) -> Result<Vec<CheckOutcome>, HarnessError> {
    let mut out = vec![
        haar_moments(2, 3, 20_000, 4.0, seed)?,
        haar_moments(4, 3, 20_000, 4.0, seed + 1)?,
        collision_enumeration(seed)?,
    ];
    for (d, z) in [(2, 0.5), (2, 1.0), (4, 0.5), (4, 1.0)] {
        out.push(haar_averaged_law(d, z, 4, 4000, 4.0, seed + 2)?);
    }
    for z in [0.5, 0.68, 0.9, 1.0] {
        out.push(swap_law(z, 100_000, 3.0, seed + 3)?);
    }
    out.push(affine_identity(50, &[2, 4, 8, 16], seed + 4)?);
    out.push(concentration(16, 8, 0.3, 2000, false, seed + 5)?);
    out.push(concentration(64, 20, 0.3, 2000, true, seed + 6)?);
    Ok(out)
}
