#![allow(dead_code)]

use nalgebra::DMatrix;
use pqsi_core::qcore::ComplexSquareMatrix;
use pqsi_core::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

/// `(G + G†)/2` for a Gaussian `G`.
pub fn random_hermitian<R: Rng>(d: usize, rng: &mut R) -> ComplexSquareMatrix {
    let g = DMatrix::from_fn(d, d, |_, _| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    let h = (&g + g.adjoint()).map(|z| z * 0.5);
    ComplexSquareMatrix::new(h).unwrap()
}

/// Random probability vector of length `d` (normalized exponentials).
pub fn random_distribution<R: Rng>(d: usize, rng: &mut R) -> Vec<f64> {
    let raw: Vec<f64> = (0..d).map(|_| -rng.random::<f64>().max(1e-300).ln()).collect();
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / s).collect()
}

pub fn binomial_pmf(n: u64, p: f64) -> Vec<f64> {
    let mut pmf = vec![0.0; n as usize + 1];
    let mut log_choose = 0.0f64;
    for k in 0..=n {
        if k > 0 {
            log_choose += ((n - k + 1) as f64).ln() - (k as f64).ln();
        }
        let term = if p == 0.0 {
            if k == 0 {
                1.0
            } else {
                0.0
            }
        } else if p == 1.0 {
            if k == n {
                1.0
            } else {
                0.0
            }
        } else {
            (log_choose + k as f64 * p.ln() + (n - k) as f64 * (1.0 - p).ln()).exp()
        };
        pmf[k as usize] = term;
    }
    pmf
}

/// `P(Y ≥ X)` for independent `X ~ Bin(n, p)`, `Y ~ Bin(n, q)`.
pub fn prob_second_at_least_first(n: u64, p: f64, q: f64) -> f64 {
    let x = binomial_pmf(n, p);
    let y = binomial_pmf(n, q);
    let mut tail = vec![0.0; y.len() + 1];
    for k in (0..y.len()).rev() {
        tail[k] = tail[k + 1] + y[k];
    }
    x.iter().enumerate().map(|(k, px)| px * tail[k]).sum()
}

/// `P(Y > X)` for the same pair.
pub fn prob_second_exceeds_first(n: u64, p: f64, q: f64) -> f64 {
    let x = binomial_pmf(n, p);
    let y = binomial_pmf(n, q);
    let mut tail = vec![0.0; y.len() + 1];
    for k in (0..y.len()).rev() {
        tail[k] = tail[k + 1] + y[k];
    }
    x.iter().enumerate().map(|(k, px)| px * tail[k + 1]).sum()
}

/// Binomial standard error of a proportion estimate at true value `p`.
pub fn proportion_se(p: f64, n: usize) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

/// Two-sample Kolmogorov–Smirnov statistic.
pub fn ks_statistic(mut a: Vec<f64>, mut b: Vec<f64>) -> f64 {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}
