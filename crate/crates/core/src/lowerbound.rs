//! Lower-bound laboratory.
//!
//! All states share one hidden Haar rotation `U`:
//! `τ_k(U) = α_k·U|0⟩⟨0|U† + ((1−α_k)/d)·I`. Under a fixed two-outcome POVM
//! with light effect `M`, each state's acceptance probability is affine in
//! its depolarizing weight,
//!
//! ```text
//! Tr(M τ_k) = c(M,U)·α_k + Tr(M)/d,   c(M,U) = ⟨0|U†MU|0⟩ − Tr(M)/d,
//! ```
//!
//! so identification collapses to a classical Bernoulli best-arm problem
//! whose gaps are scaled by `|c|`. For Haar `U`, `|c|` concentrates at
//! `O(√Tr(M)/d)`, which is what the concentration experiment measures.

use rand::Rng;
use serde::Serialize;

use crate::identify::{successive_rejects, uniform_choice, ArmScores};
use crate::measure::{povm_accept_prob, TwoOutcomePovm};
use crate::qcore::{
    alpha_from_purity, depolarized_state, logbar, sample_haar_state, DensityMatrix, RunningMean, UnitaryMatrix,
    TIE_MARGIN,
};
use crate::{Error, Result};

/// `|c|` at or below this makes a trial uninformative.
pub const UNINFORMATIVE_C: f64 = 1e-12;

/// Shared-rotation instance.
#[derive(Debug, Clone)]
pub struct PrqsiInstance {
    pub zs: Vec<f64>,
    pub alphas: Vec<f64>,
    pub u: UnitaryMatrix,
    pub dim: usize,
    pub states: Vec<DensityMatrix>,
}

impl PrqsiInstance {
    pub fn best_index(&self) -> usize {
        let mut best = 0;
        for (i, z) in self.zs.iter().enumerate() {
            if *z > self.zs[best] {
                best = i;
            }
        }
        best
    }
}

pub fn build_prqsi_states(zs: &[f64], dim: usize, u: &UnitaryMatrix) -> Result<PrqsiInstance> {
    if zs.len() < 2 {
        return Err(Error::TooFewStates(zs.len()));
    }
    if u.dim() != dim {
        return Err(Error::DimensionMismatch { expected: dim, actual: u.dim() });
    }
    let alphas = zs.iter().map(|&z| alpha_from_purity(z, dim)).collect::<Result<Vec<_>>>()?;
    let mut sorted = zs.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    if sorted[0] - sorted[1] < TIE_MARGIN {
        return Err(Error::TiedBest(sorted[0] - sorted[1]));
    }
    let states = alphas.iter().map(|&a| depolarized_state(u, a)).collect::<Result<Vec<_>>>()?;
    Ok(PrqsiInstance { zs: zs.to_vec(), alphas, u: u.clone(), dim, states })
}

/// `c(M,U) = ⟨0|U†MU|0⟩ − Tr(M)/d` for the light effect `M`.
pub fn c_coefficient(povm: &TwoOutcomePovm, u: &UnitaryMatrix) -> Result<f64> {
    if povm.dim() != u.dim() {
        return Err(Error::DimensionMismatch { expected: povm.dim(), actual: u.dim() });
    }
    let psi = u.first_column();
    let overlap = povm.light_effect().expectation(&psi).re;
    Ok(overlap - povm.trace_m() / povm.dim() as f64)
}

/// Acceptance probability of each state under the light effect.
pub fn arm_parameters(inst: &PrqsiInstance, povm: &TwoOutcomePovm) -> Result<Vec<f64>> {
    inst.states.iter().map(|s| povm_accept_prob(s, povm)).collect()
}

/// Largest `|Tr(Mτ_k) − (c·α_k + Tr(M)/d)|` over the instance.
pub fn affine_identity_check(inst: &PrqsiInstance, povm: &TwoOutcomePovm) -> Result<f64> {
    let c = c_coefficient(povm, &inst.u)?;
    let offset = povm.trace_m() / inst.dim as f64;
    let params = arm_parameters(inst, povm)?;
    Ok(params.iter().zip(&inst.alphas).map(|(p, a)| (p - (c * a + offset)).abs()).fold(0.0, f64::max))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConcentrationReport {
    pub trials: usize,
    pub in_window_fraction: f64,
    /// Binomial standard error of `in_window_fraction`.
    pub in_window_std_error: f64,
    /// `2α√Tr(M)/d`.
    pub window_halfwidth: f64,
    /// Window center `Tr(M)/d`.
    pub center: f64,
    pub mean_accept: f64,
    pub empirical_variance: f64,
    pub variance_std_error: f64,
    /// `α²·Tr(M)/(d(d+1))`.
    pub variance_bound: f64,
}

/// Draws `trials` Haar unitaries and records how often the acceptance
/// probability of `α·U|0⟩⟨0|U† + ((1−α)/d)·I` falls within `2α√Tr(M)/d` of
/// `Tr(M)/d`, along with its spread.
pub fn concentration_experiment<R: Rng + ?Sized>(
    povm: &TwoOutcomePovm,
    alpha: f64,
    trials: usize,
    rng: &mut R,
) -> Result<ConcentrationReport> {
    if trials < 100 {
        return Err(Error::InvalidArgument(format!("need at least 100 trials, got {trials}")));
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::AlphaOutOfRange(alpha));
    }
    let d = povm.dim() as f64;
    let tr = povm.trace_m();
    let center = tr / d;
    let halfwidth = 2.0 * alpha * tr.sqrt() / d;

    let mut samples = Vec::with_capacity(trials);
    let mut inside = 0usize;
    for _ in 0..trials {
        // Only U|0⟩ enters the state, so draw that column directly.
        let psi = sample_haar_state(povm.dim(), rng)?;
        let overlap = povm.light_effect().expectation(&psi).re;
        let p = (alpha * overlap + (1.0 - alpha) * center).clamp(0.0, 1.0);
        // Float slack so a zero-width window still holds the exact center.
        if (p - center).abs() < halfwidth + 1e-12 {
            inside += 1;
        }
        samples.push(p);
    }

    let mut acc = RunningMean::default();
    samples.iter().for_each(|&p| acc.push(p));
    let mean = acc.mean();
    let var = acc.variance();
    let n = trials as f64;
    let m4 = samples.iter().map(|p| (p - mean).powi(4)).sum::<f64>() / n;
    let frac = inside as f64 / n;
    Ok(ConcentrationReport {
        trials,
        in_window_fraction: frac,
        in_window_std_error: (frac * (1.0 - frac) / n).sqrt(),
        window_halfwidth: halfwidth,
        center,
        mean_accept: mean,
        empirical_variance: var,
        variance_std_error: ((m4 - var * var).max(0.0) / n).sqrt(),
        variance_bound: alpha * alpha * tr / (d * (d + 1.0)),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Allocator {
    SuccessiveRejects,
    Uniform,
}

impl Allocator {
    pub fn name(&self) -> &'static str {
        match self {
            Self::SuccessiveRejects => "successive-rejects",
            Self::Uniform => "uniform",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "successive-rejects" | "successive_rejects" | "sr" => Some(Self::SuccessiveRejects),
            "uniform" => Some(Self::Uniform),
            _ => None,
        }
    }
}

/// Bernoulli arms; scores are signed so that the arm to keep scores highest.
struct BernoulliScores<'r, R: ?Sized> {
    params: Vec<f64>,
    sign: f64,
    rng: &'r mut R,
    hits: Vec<u64>,
    pulls: Vec<u64>,
}

impl<R: Rng + ?Sized> ArmScores for BernoulliScores<'_, R> {
    fn advance(&mut self, arm: usize, target: u64) -> Result<f64> {
        for _ in self.pulls[arm]..target {
            if self.rng.random::<f64>() < self.params[arm] {
                self.hits[arm] += 1;
            }
        }
        self.pulls[arm] = self.pulls[arm].max(target);
        let mean = if self.pulls[arm] == 0 { 0.0 } else { self.hits[arm] as f64 / self.pulls[arm] as f64 };
        Ok(self.sign * mean)
    }
}

/// Classical successive-rejects allotments for `n` single-copy pulls:
/// `⌈(n−K)/(loḡK·(K+1−k))⌉`.
fn classical_targets(n: u64, k: usize) -> Vec<u64> {
    let lb = logbar(k);
    let span = n.saturating_sub(k as u64) as f64;
    (1..k).map(|phase| crate::identify::robust_ceil(span / (lb * (k + 1 - phase) as f64))).collect()
}

/// One identification trial through the fixed POVM: each state becomes a
/// Bernoulli arm with parameter `Tr(Mτ_k)`. With `c > 0` the purest state
/// has the largest parameter, with `c < 0` the smallest; with `c = 0` the
/// arms are identical and the choice is uniform.
pub fn fixed_povm_bandit_trial<R: Rng + ?Sized>(
    inst: &PrqsiInstance,
    povm: &TwoOutcomePovm,
    n: u64,
    allocator: Allocator,
    rng: &mut R,
) -> Result<usize> {
    let k = inst.states.len();
    if n < k as u64 {
        return Err(Error::InsufficientBudget {
            budget: n,
            reason: format!("need at least one pull per arm (K = {k})"),
        });
    }
    let c = c_coefficient(povm, &inst.u)?;
    if c.abs() <= UNINFORMATIVE_C {
        return Ok(uniform_choice(k, rng));
    }
    let mut scores = BernoulliScores {
        params: arm_parameters(inst, povm)?,
        sign: c.signum(),
        rng,
        hits: vec![0; k],
        pulls: vec![0; k],
    };
    match allocator {
        Allocator::SuccessiveRejects => {
            let (selected, _) = successive_rejects(k, &classical_targets(n, k), &mut scores)?;
            Ok(selected)
        }
        Allocator::Uniform => {
            let per_arm = n / k as u64;
            let w = (0..k).map(|a| scores.advance(a, per_arm)).collect::<Result<Vec<_>>>()?;
            let mut best = 0;
            for (i, v) in w.iter().enumerate() {
                if *v > w[best] {
                    best = i;
                }
            }
            Ok(best)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{sample_haar_unitary, ComplexSquareMatrix, UnitaryMatrix};
    use crate::stream::StreamKey;

    #[test]
    fn endpoint_purities() {
        let mut rng = StreamKey::new(1).rng();
        let u = sample_haar_unitary(4, &mut rng).unwrap();
        let inst = build_prqsi_states(&[1.0, 0.25], 4, &u).unwrap();
        let pure = ComplexSquareMatrix::outer(&u.first_column()).unwrap();
        assert!(inst.states[0].matrix().max_abs_diff(&pure) < 1e-12);
        let mixed = DensityMatrix::maximally_mixed(4).unwrap();
        assert!(inst.states[1].matrix().max_abs_diff(mixed.matrix()) < 1e-15);
    }

    #[test]
    fn identity_rotation_diagonal_states() {
        let inst = build_prqsi_states(&[0.7, 0.4], 4, &UnitaryMatrix::identity(4).unwrap()).unwrap();
        for (s, z) in inst.states.iter().zip([0.7, 0.4]) {
            assert!((s.purity() - z).abs() < 1e-10);
            assert!(s.matrix().hermitian_deviation() == 0.0);
            let m = s.matrix();
            for i in 0..4 {
                for j in 0..4 {
                    if i != j {
                        assert_eq!(m.get(i, j).norm(), 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn states_commute() {
        let mut rng = StreamKey::new(2).rng();
        let u = sample_haar_unitary(8, &mut rng).unwrap();
        let inst = build_prqsi_states(&[0.9, 0.5, 0.3, 0.2], 8, &u).unwrap();
        for a in &inst.states {
            for b in &inst.states {
                let ab = a.matrix().mul(b.matrix()).unwrap();
                let ba = b.matrix().mul(a.matrix()).unwrap();
                assert!(ab.max_abs_diff(&ba) <= 1e-10);
            }
        }
    }

    #[test]
    fn build_errors() {
        let u = UnitaryMatrix::identity(2).unwrap();
        assert!(matches!(build_prqsi_states(&[0.7, 0.7], 2, &u), Err(Error::TiedBest(_))));
        assert!(build_prqsi_states(&[0.7, 0.4], 2, &u).is_err());
        assert!(matches!(build_prqsi_states(&[0.7, 0.6], 4, &u), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn c_coefficient_examples() {
        let mut rng = StreamKey::new(3).rng();
        let half = TwoOutcomePovm::scalar(4, 0.5).unwrap();
        let u = sample_haar_unitary(4, &mut rng).unwrap();
        assert!(c_coefficient(&half, &u).unwrap().abs() < 1e-15);

        let ket0 = TwoOutcomePovm::basis_projector(2, 1).unwrap();
        let id = UnitaryMatrix::identity(2).unwrap();
        assert!((c_coefficient(&ket0, &id).unwrap() - 0.5).abs() < 1e-15);
        let flip = UnitaryMatrix::transposition(2, 0, 1).unwrap();
        assert!((c_coefficient(&ket0, &flip).unwrap() + 0.5).abs() < 1e-15);
    }

    #[test]
    fn affine_identity_holds() {
        let mut rng = StreamKey::new(4).rng();
        let u = sample_haar_unitary(8, &mut rng).unwrap();
        let inst = build_prqsi_states(&[0.9, 0.5, 0.3], 8, &u).unwrap();
        let povm = TwoOutcomePovm::basis_projector(8, 4).unwrap();
        assert!(affine_identity_check(&inst, &povm).unwrap() <= 1e-10);

        let half = TwoOutcomePovm::scalar(8, 0.5).unwrap();
        assert!(affine_identity_check(&inst, &half).unwrap() <= 1e-15);
        for p in arm_parameters(&inst, &half).unwrap() {
            assert!((p - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn maximally_mixed_accepts_at_trace_over_d() {
        let mut rng = StreamKey::new(5).rng();
        let u = sample_haar_unitary(4, &mut rng).unwrap();
        let inst = build_prqsi_states(&[0.8, 0.25], 4, &u).unwrap();
        let povm = TwoOutcomePovm::basis_projector(4, 1).unwrap();
        let params = arm_parameters(&inst, &povm).unwrap();
        assert!((params[1] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn parameters_ordered_by_alpha_with_sign_of_c() {
        let mut rng = StreamKey::new(6).rng();
        let povm = TwoOutcomePovm::basis_projector(4, 1).unwrap();
        for _ in 0..20 {
            let u = sample_haar_unitary(4, &mut rng).unwrap();
            let inst = build_prqsi_states(&[0.9, 0.6, 0.4], 4, &u).unwrap();
            let c = c_coefficient(&povm, &u).unwrap();
            let p = arm_parameters(&inst, &povm).unwrap();
            for i in 0..3 {
                for j in 0..3 {
                    if inst.alphas[i] > inst.alphas[j] {
                        assert_eq!((p[i] - p[j]).signum(), c.signum());
                    }
                }
            }
        }
    }

    #[test]
    fn zero_alpha_concentrates_exactly() {
        let mut rng = StreamKey::new(7).rng();
        let povm = TwoOutcomePovm::basis_projector(4, 2).unwrap();
        let rep = concentration_experiment(&povm, 0.0, 100, &mut rng).unwrap();
        assert_eq!(rep.in_window_fraction, 1.0);
        assert!(rep.empirical_variance < 1e-28);
        assert!(concentration_experiment(&povm, 0.5, 99, &mut rng).is_err());
    }

    #[test]
    fn exact_small_instance() {
        // d=2, zs=[1, 0.5], M=|0⟩⟨0|, U=I: arm parameters (1, 1/2).
        let id = UnitaryMatrix::identity(2).unwrap();
        let inst = build_prqsi_states(&[1.0, 0.5], 2, &id).unwrap();
        let povm = TwoOutcomePovm::basis_projector(2, 1).unwrap();
        let p = arm_parameters(&inst, &povm).unwrap();
        assert!((p[0] - 1.0).abs() < 1e-15 && (p[1] - 0.5).abs() < 1e-15);
        let mut rng = StreamKey::new(8).rng();
        let picks: usize = (0..200)
            .map(|_| fixed_povm_bandit_trial(&inst, &povm, 60, Allocator::SuccessiveRejects, &mut rng).unwrap())
            .sum();
        // Error needs 29 straight hits from the fair arm: 2^-29.
        assert_eq!(picks, 0);
    }

    #[test]
    fn classical_schedule_matches_incoherent_formula() {
        let t = classical_targets(33, 3);
        assert_eq!(t, vec![8, 12]);
        assert_eq!(classical_targets(3, 3), vec![0, 0]);
    }
}
