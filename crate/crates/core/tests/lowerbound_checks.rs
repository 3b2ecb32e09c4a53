mod common;

use pqsi_core::lowerbound::{
    affine_identity_check, arm_parameters, build_prqsi_states, c_coefficient, concentration_experiment,
    fixed_povm_bandit_trial, Allocator,
};
use pqsi_core::measure::{povm_accept_prob, TwoOutcomePovm};
use pqsi_core::qcore::{sample_haar_unitary, ComplexSquareMatrix, UnitaryMatrix};
use pqsi_core::stream::StreamKey;
use rand::Rng;

/// Random effect `V·diag(λ)·V†` with eigenvalues in [0,1].
fn random_povm<R: Rng>(d: usize, rng: &mut R) -> TwoOutcomePovm {
    let v = sample_haar_unitary(d, rng).unwrap();
    let diag: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
    let lam = ComplexSquareMatrix::from_real_diagonal(&diag).unwrap();
    let m0 = v.matrix().mul(&lam).unwrap().mul(v.adjoint().matrix()).unwrap();
    // Symmetrize away rounding asymmetry.
    let m0 = m0.add(&m0.adjoint()).unwrap().scale(0.5);
    TwoOutcomePovm::new(m0).unwrap()
}

fn random_purities<R: Rng>(k: usize, d: usize, rng: &mut R) -> Vec<f64> {
    let floor = 1.0 / d as f64;
    loop {
        let zs: Vec<f64> = (0..k).map(|_| floor + (1.0 - floor) * rng.random::<f64>()).collect();
        let mut sorted = zs.clone();
        sorted.sort_by(|a, b| b.total_cmp(a));
        if sorted[0] - sorted[1] > 1e-6 {
            return zs;
        }
    }
}

#[test]
fn affine_identity_on_fifty_pairs() {
    let mut rng = StreamKey::new(41).rng();
    let mut worst: f64 = 0.0;
    for i in 0..50 {
        let d = [2, 4, 8, 16][i % 4];
        let k = 2 + i % 4;
        let u = sample_haar_unitary(d, &mut rng).unwrap();
        let inst = build_prqsi_states(&random_purities(k, d, &mut rng), d, &u).unwrap();
        let povm = random_povm(d, &mut rng);
        worst = worst.max(affine_identity_check(&inst, &povm).unwrap());

        // Arm parameters are ordered by α with the sign of c.
        let c = c_coefficient(&povm, &u).unwrap();
        let params = arm_parameters(&inst, &povm).unwrap();
        for a in 0..k {
            for b in 0..k {
                if inst.alphas[a] > inst.alphas[b] {
                    assert!(c * (params[a] - params[b]) >= -1e-12);
                }
            }
        }
    }
    assert!(worst <= 1e-10, "max residual {worst}");
}

#[test]
fn coefficient_worked_values() {
    let p0 = TwoOutcomePovm::basis_projector(2, 1).unwrap();
    let id = UnitaryMatrix::identity(2).unwrap();
    let flip = UnitaryMatrix::transposition(2, 0, 1).unwrap();
    assert!((c_coefficient(&p0, &id).unwrap() - 0.5).abs() < 1e-15);
    assert!((c_coefficient(&p0, &flip).unwrap() + 0.5).abs() < 1e-15);
    let half = TwoOutcomePovm::scalar(4, 0.5).unwrap();
    let u = sample_haar_unitary(4, &mut StreamKey::new(1).rng()).unwrap();
    assert!(c_coefficient(&half, &u).unwrap().abs() < 1e-15);
    let inst = build_prqsi_states(&[0.9, 0.25], 4, &u).unwrap();
    assert_eq!(povm_accept_prob(&inst.states[1], &half).unwrap(), 0.5);
}

#[test]
fn concentration_regimes() {
    let mut rng = StreamKey::new(42).rng();
    let trials = 4000;
    let slack = 3.0 * (0.25 / trials as f64).sqrt();
    for (d, rank, alpha) in [(16, 8, 0.3), (32, 17, 0.5), (64, 20, 1.0), (64, 20, 0.2)] {
        let povm = TwoOutcomePovm::basis_projector(d, rank).unwrap();
        let rep = concentration_experiment(&povm, alpha, trials, &mut rng).unwrap();
        assert!((0.0..=1.0).contains(&rep.in_window_fraction));
        if povm.trace_m() > 16.0 {
            assert!(rep.in_window_fraction >= 0.75 - slack, "d={d}: {rep:?}");
        }
        assert!(rep.empirical_variance <= rep.variance_bound + 3.0 * rep.variance_std_error, "d={d}: {rep:?}");
    }
    let povm = TwoOutcomePovm::basis_projector(8, 3).unwrap();
    let flat = concentration_experiment(&povm, 0.0, 200, &mut rng).unwrap();
    assert_eq!(flat.in_window_fraction, 1.0);
    assert_eq!(flat.empirical_variance, 0.0);
}

#[test]
fn uninformative_effect_gives_chance_accuracy() {
    let mut rng = StreamKey::new(43).rng();
    let k = 4;
    let d = 4;
    let half = TwoOutcomePovm::scalar(d, 0.5).unwrap();
    let trials = 8000;
    let mut hits = 0;
    for _ in 0..trials {
        let u = sample_haar_unitary(d, &mut rng).unwrap();
        let inst = build_prqsi_states(&[0.9, 0.7, 0.5, 0.3], d, &u).unwrap();
        if fixed_povm_bandit_trial(&inst, &half, 200, Allocator::SuccessiveRejects, &mut rng).unwrap()
            == inst.best_index()
        {
            hits += 1;
        }
    }
    let acc = hits as f64 / trials as f64;
    let p = 1.0 / k as f64;
    assert!((acc - p).abs() <= 3.0 * common::proportion_se(p, trials), "{acc}");
}

#[test]
fn two_arm_classical_exact_oracle() {
    let u = UnitaryMatrix::identity(2).unwrap();
    let inst = build_prqsi_states(&[0.9, 0.6], 2, &u).unwrap();
    let povm = TwoOutcomePovm::basis_projector(2, 1).unwrap();
    let params = arm_parameters(&inst, &povm).unwrap();
    // K=2, N=20: one phase of ⌈18/2⌉ = 9 pulls per arm.
    let exact = common::prob_second_at_least_first(9, params[0], params[1]);
    let mut rng = StreamKey::new(44).rng();
    let trials = 20_000;
    let errors = (0..trials)
        .filter(|_| fixed_povm_bandit_trial(&inst, &povm, 20, Allocator::SuccessiveRejects, &mut rng).unwrap() != 0)
        .count();
    let err = errors as f64 / trials as f64;
    assert!((err - exact).abs() <= 4.0 * common::proportion_se(exact, trials), "{err} vs {exact}");
}

#[test]
fn pure_versus_mixed_arm_parameters() {
    let inst = build_prqsi_states(&[1.0, 0.5], 2, &UnitaryMatrix::identity(2).unwrap()).unwrap();
    let povm = TwoOutcomePovm::basis_projector(2, 1).unwrap();
    let params = arm_parameters(&inst, &povm).unwrap();
    assert!((params[0] - 1.0).abs() < 1e-15);
    assert!((params[1] - 0.5).abs() < 1e-15);
}
