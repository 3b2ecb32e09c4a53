//! Haar-random unitaries and the moment identities they satisfy.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use super::matrix::{ComplexSquareMatrix, UnitaryMatrix, HERMITIAN_TOL};
use crate::{Error, Result};

// |R_ii| below this is treated as a degenerate draw.
const DEGENERATE_PIVOT: f64 = 1e-150;

/// Draws a Haar-distributed d×d unitary.
///
/// A Ginibre matrix (i.i.d. standard complex Gaussians) is QR-factored and
/// column `i` of `Q` is multiplied by the phase `R_ii / |R_ii|`, which makes
/// the factorization unique and the distribution of `Q` invariant under left
/// and right multiplication by fixed unitaries.
pub fn sample_haar_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<UnitaryMatrix> {
    if dim < 2 {
        return Err(Error::DimensionTooSmall(dim));
    }
    loop {
        let ginibre = DMatrix::from_fn(dim, dim, |_, _| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re, im)
        });
        let qr = ginibre.qr();
        let r = qr.r();
        if (0..dim).any(|i| r[(i, i)].norm() < DEGENERATE_PIVOT) {
            continue;
        }
        let mut q = qr.q();
        for i in 0..dim {
            let phase = r[(i, i)] / r[(i, i)].norm();
            q.column_mut(i).iter_mut().for_each(|z| *z *= phase);
        }
        return Ok(UnitaryMatrix::new_unchecked(ComplexSquareMatrix::new(q)?));
    }
}

/// Draws a Haar-random pure state, distributed as the first column of a
/// Haar unitary: a standard complex Gaussian vector, normalized.
pub fn sample_haar_state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<Vec<Complex64>> {
    if dim < 2 {
        return Err(Error::DimensionTooSmall(dim));
    }
    loop {
        let v: Vec<Complex64> =
            (0..dim).map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))).collect();
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > DEGENERATE_PIVOT {
            return Ok(v.into_iter().map(|z| z / norm).collect());
        }
    }
}

/// Gaussian Hermitian matrix `(G + G†)/2` with `G` Ginibre; a convenient
/// source of random observables.
pub fn sample_hermitian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<ComplexSquareMatrix> {
    if dim < 2 {
        return Err(Error::DimensionTooSmall(dim));
    }
    let g = DMatrix::from_fn(dim, dim, |_, _| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    let h = (&g + g.adjoint()).map(|z| z * 0.5);
    ComplexSquareMatrix::new(h)
}

/// Monte Carlo estimate of one moment next to its closed form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentEstimate {
    pub estimate: f64,
    pub target: f64,
    pub std_error: f64,
}

impl MomentEstimate {
    /// Distance from the closed form in standard errors. Differences at
    /// rounding level (1e-12) count as exact agreement, which covers
    /// zero-variance estimators.
    pub fn z_score(&self) -> f64 {
        let diff = (self.estimate - self.target).abs();
        if diff <= 1e-12 {
            0.0
        } else if self.std_error > 0.0 {
            diff / self.std_error
        } else {
            f64::INFINITY
        }
    }

    pub fn within(&self, n_se: f64) -> bool {
        self.z_score() <= n_se
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentReport {
    pub samples: usize,
    pub first: MomentEstimate,
    pub second: MomentEstimate,
    pub third: MomentEstimate,
}

/// `E⟨ψ|A|ψ⟩ = Tr(A)/d`.
pub fn first_moment_closed_form(a: &ComplexSquareMatrix) -> f64 {
    a.trace().re / a.dim() as f64
}

/// `E⟨ψ|A|ψ⟩⟨ψ|B|ψ⟩ = (Tr A Tr B + Tr AB) / (d(d+1))`.
pub fn second_moment_closed_form(a: &ComplexSquareMatrix, b: &ComplexSquareMatrix) -> f64 {
    let d = a.dim() as f64;
    let v = a.trace() * b.trace() + a.trace_product(b);
    v.re / (d * (d + 1.0))
}

/// Third moment of a Haar-random pure state: the sum over the six
/// permutations of three indices, divided by `d(d+1)(d+2)`.
pub fn third_moment_closed_form(a: &ComplexSquareMatrix, b: &ComplexSquareMatrix, c: &ComplexSquareMatrix) -> f64 {
    let d = a.dim() as f64;
    let (ta, tb, tc) = (a.trace(), b.trace(), c.trace());
    let ab = a.as_matrix() * b.as_matrix();
    let ac = a.as_matrix() * c.as_matrix();
    let abc = (&ab * c.as_matrix()).trace();
    let acb = (&ac * b.as_matrix()).trace();
    let v = ta * tb * tc + a.trace_product(b) * tc + ta * b.trace_product(c) + c.trace_product(a) * tb + abc + acb;
    v.re / (d * (d + 1.0) * (d + 2.0))
}

/// Estimates the first three moments of `⟨ψ|·|ψ⟩` over Haar-random pure
/// states `ψ = U|0⟩` and pairs each with its closed form.
pub fn verify_haar_moments<R: Rng + ?Sized>(
    a: &ComplexSquareMatrix,
    b: &ComplexSquareMatrix,
    c: &ComplexSquareMatrix,
    nsamples: usize,
    rng: &mut R,
) -> Result<MomentReport> {
    for m in [a, b, c] {
        let dev = m.hermitian_deviation();
        if dev > HERMITIAN_TOL {
            return Err(Error::NotHermitian(dev));
        }
    }
    a.check_dim(b.dim())?;
    a.check_dim(c.dim())?;
    if nsamples < 2 {
        return Err(Error::InvalidArgument("need at least 2 samples".into()));
    }

    let mut acc = [RunningMean::default(); 3];
    for _ in 0..nsamples {
        let psi = sample_haar_unitary(a.dim(), rng)?.first_column();
        let ea = a.expectation(&psi).re;
        let eb = b.expectation(&psi).re;
        let ec = c.expectation(&psi).re;
        acc[0].push(ea);
        acc[1].push(ea * eb);
        acc[2].push(ea * eb * ec);
    }

    let targets = [first_moment_closed_form(a), second_moment_closed_form(a, b), third_moment_closed_form(a, b, c)];
    let [first, second, third] = std::array::from_fn(|i| MomentEstimate {
        estimate: acc[i].mean(),
        target: targets[i],
        std_error: acc[i].std_error(),
    });
    Ok(MomentReport { samples: nsamples, first, second, third })
}

/// Welford accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct RunningMean {
    n: u64,
    mean: f64,
    m2: f64,
}

impl RunningMean {
    pub(crate) fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub(crate) fn mean(&self) -> f64 {
        self.mean
    }

    pub(crate) fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    pub(crate) fn std_error(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            (self.variance() / self.n as f64).sqrt()
        }
    }
}
