mod common;

use pqsi_core::measure::{
    rotated_basis_distribution, sample_outcomes, swap_accept_prob, swap_test_sample, OutcomeDistribution, RotatedBasis,
    SpectralState, TwoOutcomePovm,
};
use pqsi_core::qcore::{alpha_from_purity, depolarized_state, sample_haar_unitary, ComplexSquareMatrix};
use pqsi_core::stream::StreamKey;

// Upper 1% points of the chi-square distribution.
fn chi2_critical_1pct(df: usize) -> f64 {
    match df {
        1 => 6.635,
        2 => 9.210,
        3 => 11.345,
        4 => 13.277,
        5 => 15.086,
        7 => 18.475,
        _ => panic!("no table entry for df={df}"),
    }
}

fn chi_square(counts: &[u64], probs: &[f64], n: usize) -> (f64, usize) {
    let mut stat = 0.0;
    let mut cells = 0;
    for (c, p) in counts.iter().zip(probs) {
        if *p > 0.0 {
            let e = p * n as f64;
            stat += (*c as f64 - e).powi(2) / e;
            cells += 1;
        } else {
            assert_eq!(*c, 0, "mass drawn where probability is zero");
        }
    }
    (stat, cells - 1)
}

fn counts(outcomes: &[usize], d: usize) -> Vec<u64> {
    let mut c = vec![0u64; d];
    for &o in outcomes {
        c[o] += 1;
    }
    c
}

#[test]
fn fair_binary_frequency() {
    let mut rng = StreamKey::new(21).rng();
    let n = 100_000;
    let draws = sample_outcomes(&OutcomeDistribution::uniform(2), n, &mut rng);
    let freq = draws.iter().filter(|&&x| x == 0).count() as f64 / n as f64;
    assert!((freq - 0.5).abs() <= 3.0 * common::proportion_se(0.5, n));
}

#[test]
fn uniform_goodness_of_fit() {
    let mut rng = StreamKey::new(22).rng();
    let n = 40_000;
    let dist = OutcomeDistribution::uniform(4);
    let draws = sample_outcomes(&dist, n, &mut rng);
    let (stat, df) = chi_square(&counts(&draws, 4), dist.probs(), n);
    assert!(stat < chi2_critical_1pct(df), "chi2 {stat}");
}

#[test]
fn born_rule_consistency() {
    let mut rng = StreamKey::new(23).rng();
    for (d, z) in [(2, 0.9), (4, 0.6), (8, 0.5)] {
        let u0 = sample_haar_unitary(d, &mut rng).unwrap();
        let rho = depolarized_state(&u0, alpha_from_purity(z, d).unwrap()).unwrap();
        let basis = RotatedBasis::new(sample_haar_unitary(d, &mut rng).unwrap());
        let dist = rotated_basis_distribution(&rho, &basis).unwrap();
        let total: f64 = dist.probs().iter().sum();
        assert!((total - 1.0).abs() <= 1e-9);
        let p2 = dist.power_sum(2);
        assert!(p2 >= 1.0 / d as f64 - 1e-12 && p2 <= 1.0 + 1e-12);

        let spectral = SpectralState::new(&rho).distribution(&basis).unwrap();
        for (a, b) in dist.probs().iter().zip(spectral.probs()) {
            assert!((a - b).abs() < 1e-12);
        }

        let n = 50_000;
        let draws = sample_outcomes(&dist, n, &mut rng);
        let (stat, df) = chi_square(&counts(&draws, d), dist.probs(), n);
        assert!(stat < chi2_critical_1pct(df), "d={d}: chi2 {stat} on {df} df");
    }
}

#[test]
fn rotated_projectors_resolve_identity() {
    let mut rng = StreamKey::new(24).rng();
    let d = 4;
    let basis = RotatedBasis::new(sample_haar_unitary(d, &mut rng).unwrap());
    let mut sum = ComplexSquareMatrix::zeros(d).unwrap();
    for i in 0..d {
        sum = sum.add(&basis.projector(i).unwrap()).unwrap();
    }
    assert!(sum.max_abs_diff(&ComplexSquareMatrix::identity(d).unwrap()) <= 1e-9);
}

#[test]
fn swap_law() {
    let mut rng = StreamKey::new(25).rng();
    let n = 100_000;
    for z in [0.5, 0.68, 0.9, 1.0] {
        let p = swap_accept_prob(z).unwrap();
        let hits = (0..n).filter(|_| swap_test_sample(z, &mut rng).unwrap()).count();
        let freq = hits as f64 / n as f64;
        if z == 1.0 {
            assert_eq!(hits, n);
        } else {
            assert!((freq - p).abs() <= 3.0 * common::proportion_se(p, n), "z={z}: {freq}");
        }
    }
    assert!(swap_test_sample(1.2, &mut rng).is_err());
}

#[test]
fn povm_effects_complement() {
    for rank in 0..=4 {
        let povm = TwoOutcomePovm::basis_projector(4, rank).unwrap();
        let sum = povm.m0().add(povm.m1()).unwrap();
        assert!(sum.max_abs_diff(&ComplexSquareMatrix::identity(4).unwrap()) == 0.0);
        for e in povm.m1().hermitian_eigenvalues() {
            assert!(e >= -1e-9);
        }
        assert_eq!(povm.trace_m(), rank.min(4 - rank) as f64);
    }
}
