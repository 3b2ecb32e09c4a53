//! Measurement layer: Born-rule distributions in rotated bases, categorical
//! sampling, the SWAP-test outcome law and two-outcome POVMs.

use num_complex::Complex64;
use rand::Rng;

use crate::qcore::{ComplexSquareMatrix, DensityMatrix, UnitaryMatrix, HERMITIAN_TOL, PSD_TOL};
use crate::{Error, Result};

const PROB_SLACK: f64 = 1e-12;
const SUM_TOL: f64 = 1e-9;

/// The projective measurement `{U†|i⟩⟨i|U}`.
#[derive(Debug, Clone, PartialEq)]
pub struct RotatedBasis {
    pub u: UnitaryMatrix,
}

impl RotatedBasis {
    pub fn new(u: UnitaryMatrix) -> Self {
        Self { u }
    }

    pub fn dim(&self) -> usize {
        self.u.dim()
    }

    /// The effect `U†|i⟩⟨i|U`.
    pub fn projector(&self, i: usize) -> Result<ComplexSquareMatrix> {
        let row: Vec<Complex64> = self.u.matrix().as_matrix().row(i).iter().map(|z| z.conj()).collect();
        ComplexSquareMatrix::outer(&row)
    }
}

/// A probability vector over `d` outcomes, clamped and renormalized.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeDistribution {
    probs: Vec<f64>,
}

impl OutcomeDistribution {
    /// Accepts entries within 1e-12 of `[0, 1]` and a sum within 1e-9 of 1;
    /// entries are clamped and the vector renormalized.
    pub fn new(mut probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::BadDistribution("empty".into()));
        }
        for &p in &probs {
            if !(-PROB_SLACK..=1.0 + PROB_SLACK).contains(&p) {
                return Err(Error::BadDistribution(format!("entry {p} outside [0, 1]")));
            }
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > SUM_TOL {
            return Err(Error::BadDistribution(format!("entries sum to {sum}")));
        }
        probs.iter_mut().for_each(|p| *p = p.clamp(0.0, 1.0));
        let sum: f64 = probs.iter().sum();
        probs.iter_mut().for_each(|p| *p /= sum);
        Ok(Self { probs })
    }

    pub fn uniform(d: usize) -> Self {
        Self { probs: vec![1.0 / d as f64; d] }
    }

    pub fn point_mass(d: usize, at: usize) -> Self {
        let mut probs = vec![0.0; d];
        probs[at] = 1.0;
        Self { probs }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// `Σ p_i^k`.
    pub fn power_sum(&self, k: i32) -> f64 {
        self.probs.iter().map(|p| p.powi(k)).sum()
    }
}

/// `p_i = ⟨i|UρU†|i⟩`, the outcome law of measuring `rho` in `basis`.
pub fn rotated_basis_distribution(rho: &DensityMatrix, basis: &RotatedBasis) -> Result<OutcomeDistribution> {
    let u = basis.u.matrix();
    u.check_dim(rho.dim())?;
    let u = u.as_matrix();
    let u_rho = u * rho.matrix().as_matrix();
    let d = rho.dim();
    let mut probs = Vec::with_capacity(d);
    for i in 0..d {
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 0..d {
            acc += u_rho[(i, k)] * u[(i, k)].conj();
        }
        if acc.im.abs() > PROB_SLACK {
            return Err(Error::BadDistribution(format!("imaginary residue {}", acc.im)));
        }
        probs.push(acc.re);
    }
    OutcomeDistribution::new(probs)
}

/// A state stored as `floor·I + Σ_k μ_k |v_k⟩⟨v_k|` with `floor` its
/// smallest eigenvalue, so that rotated-basis distributions cost
/// `O(r·d²)` for `r` nonzero `μ_k` instead of a full `UρU†`. Depolarized
/// pure states have `r = 1`.
#[derive(Debug, Clone)]
pub struct SpectralState {
    dim: usize,
    floor: f64,
    components: Vec<(f64, Vec<Complex64>)>,
}

impl SpectralState {
    pub fn new(rho: &DensityMatrix) -> Self {
        let m = rho.matrix().as_matrix();
        let herm = (m + m.adjoint()).map(|z| z * 0.5);
        let eig = herm.symmetric_eigen();
        let floor = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
        let components = eig
            .eigenvalues
            .iter()
            .enumerate()
            .filter(|(_, &l)| l - floor > 1e-13)
            .map(|(k, &l)| (l - floor, eig.eigenvectors.column(k).iter().copied().collect()))
            .collect();
        Self { dim: rho.dim(), floor, components }
    }

    pub fn rank_above_floor(&self) -> usize {
        self.components.len()
    }

    /// Same law as [`rotated_basis_distribution`].
    pub fn distribution(&self, basis: &RotatedBasis) -> Result<OutcomeDistribution> {
        let u = basis.u.matrix();
        u.check_dim(self.dim)?;
        let u = u.as_matrix();
        let mut probs = vec![self.floor; self.dim];
        for (mu, v) in &self.components {
            for (i, p) in probs.iter_mut().enumerate() {
                let mut amp = Complex64::new(0.0, 0.0);
                for (k, vk) in v.iter().enumerate() {
                    amp += u[(i, k)] * vk;
                }
                *p += mu * amp.norm_sqr();
            }
        }
        OutcomeDistribution::new(probs)
    }
}

/// Inverse-CDF sampler over a fixed distribution.
#[derive(Debug, Clone)]
pub struct Categorical {
    cdf: Vec<f64>,
}

impl Categorical {
    pub fn new(dist: &OutcomeDistribution) -> Self {
        let mut acc = 0.0;
        let mut cdf: Vec<f64> = dist
            .probs()
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        // Renormalization leaves the total within an ulp of 1; pin the tail
        // from the last positive-mass outcome so every draw in [0,1) lands
        // on an outcome with positive mass.
        let last = dist.probs().iter().rposition(|&p| p > 0.0).unwrap_or(cdf.len() - 1);
        cdf[last..].iter_mut().for_each(|c| *c = f64::INFINITY);
        Self { cdf }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        // First index whose cumulative mass exceeds u; zero-mass outcomes are
        // never selected.
        self.cdf.partition_point(|&c| c <= u)
    }
}

/// `m` independent draws from `dist`.
pub fn sample_outcomes<R: Rng + ?Sized>(dist: &OutcomeDistribution, m: usize, rng: &mut R) -> Vec<usize> {
    let cat = Categorical::new(dist);
    (0..m).map(|_| cat.sample(rng)).collect()
}

/// Probability that the SWAP test on two copies of a state with purity `z`
/// accepts (ancilla reads 0): `(1 + z)/2`.
pub fn swap_accept_prob(z: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&z) {
        return Err(Error::PurityOutOfRange { purity: z, floor: 0.0 });
    }
    Ok((1.0 + z) / 2.0)
}

/// One SWAP test. Returns `true` ("accept") with probability `(1+z)/2`,
/// so larger sample means go with larger purity. Consumes two copies.
pub fn swap_test_sample<R: Rng + ?Sized>(z: f64, rng: &mut R) -> Result<bool> {
    let p = swap_accept_prob(z)?;
    Ok(rng.random::<f64>() < p)
}

/// A two-outcome POVM `{M₀, I - M₀}`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoOutcomePovm {
    m0: ComplexSquareMatrix,
    m1: ComplexSquareMatrix,
    trace_m: f64,
    light_is_m0: bool,
}

impl TwoOutcomePovm {
    pub fn new(m0: ComplexSquareMatrix) -> Result<Self> {
        let dev = m0.hermitian_deviation();
        if dev > HERMITIAN_TOL {
            return Err(Error::NotHermitian(dev));
        }
        let ev = m0.hermitian_eigenvalues();
        let (lo, hi) = (ev[0], ev[ev.len() - 1]);
        if lo < -PSD_TOL {
            return Err(Error::BadEffect(lo));
        }
        if hi > 1.0 + PSD_TOL {
            return Err(Error::BadEffect(hi));
        }
        let d = m0.dim();
        let m1 = ComplexSquareMatrix::identity(d)?.sub(&m0)?;
        let tr0 = m0.trace().re;
        let tr1 = d as f64 - tr0;
        let light_is_m0 = tr0 <= tr1;
        Ok(Self { m0, m1, trace_m: tr0.min(tr1), light_is_m0 })
    }

    /// `M₀` = projector onto the first `rank` computational basis states.
    pub fn basis_projector(dim: usize, rank: usize) -> Result<Self> {
        if rank > dim {
            return Err(Error::InvalidArgument(format!("rank {rank} exceeds dimension {dim}")));
        }
        let diag: Vec<f64> = (0..dim).map(|i| if i < rank { 1.0 } else { 0.0 }).collect();
        Self::new(ComplexSquareMatrix::from_real_diagonal(&diag)?)
    }

    /// `M₀ = b·I`.
    pub fn scalar(dim: usize, b: f64) -> Result<Self> {
        Self::new(ComplexSquareMatrix::identity(dim)?.scale(b))
    }

    pub fn dim(&self) -> usize {
        self.m0.dim()
    }

    pub fn m0(&self) -> &ComplexSquareMatrix {
        &self.m0
    }

    pub fn m1(&self) -> &ComplexSquareMatrix {
        &self.m1
    }

    /// The effect with the smaller trace; `M₀` on a tie.
    pub fn light_effect(&self) -> &ComplexSquareMatrix {
        if self.light_is_m0 {
            &self.m0
        } else {
            &self.m1
        }
    }

    /// `min(Tr M₀, d - Tr M₀)`.
    pub fn trace_m(&self) -> f64 {
        self.trace_m
    }
}

/// `Tr(Mρ)` for the light effect `M`.
pub fn povm_accept_prob(rho: &DensityMatrix, povm: &TwoOutcomePovm) -> Result<f64> {
    povm.m0.check_dim(rho.dim())?;
    let p = povm.light_effect().trace_product(rho.matrix());
    if p.im.abs() > 1e-10 || p.re < -1e-10 || p.re > 1.0 + 1e-10 {
        return Err(Error::BadDistribution(format!("acceptance probability {p}")));
    }
    Ok(p.re.clamp(0.0, 1.0))
}
