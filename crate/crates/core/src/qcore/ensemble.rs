//! The unknown state set and its gap profile.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::matrix::{ComplexSquareMatrix, DensityMatrix, UnitaryMatrix};
use super::{alpha_from_purity, depolarized_state, sample_haar_unitary};
use crate::{Error, Result};

/// Minimum purity margin between the best and second-best state.
pub const TIE_MARGIN: f64 = 1e-9;

/// How the pure components of a purity-list ensemble are oriented.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Rotation {
    /// One Haar unitary for all states; the states commute.
    Shared,
    /// A fresh Haar unitary per state.
    Independent,
    /// No rotation; every pure component is `|0⟩`.
    Identity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Preset {
    /// d=2, purities [1.0, 0.5].
    TwoArm,
    /// d=4, purities [0.9, 0.85, 0.8, 0.7]: gaps doubling from 0.05.
    GeometricGaps,
}

impl Preset {
    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "two-arm" => Some(Self::TwoArm),
            "geometric-gaps" => Some(Self::GeometricGaps),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::TwoArm => "two-arm",
            Self::GeometricGaps => "geometric-gaps",
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::TwoArm => 2,
            Self::GeometricGaps => 4,
        }
    }

    pub fn purities(&self) -> Vec<f64> {
        match self {
            Self::TwoArm => vec![1.0, 0.5],
            Self::GeometricGaps => vec![0.9, 0.85, 0.8, 0.7],
        }
    }
}

#[derive(Debug, Clone)]
pub enum EnsembleSpec {
    Purities { purities: Vec<f64>, dim: usize, rotation: Rotation },
    Explicit(Vec<DensityMatrix>),
    Preset(Preset),
}

/// The candidate set: states with cached purities and the unique best index.
#[derive(Debug, Clone)]
pub struct StateEnsemble {
    states: Vec<DensityMatrix>,
    purities: Vec<f64>,
    best_index: usize,
    dim: usize,
}

impl StateEnsemble {
    pub fn new(states: Vec<DensityMatrix>) -> Result<Self> {
        if states.len() < 2 {
            return Err(Error::TooFewStates(states.len()));
        }
        let dim = states[0].dim();
        for s in &states {
            if s.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, actual: s.dim() });
            }
        }
        let purities: Vec<f64> = states.iter().map(DensityMatrix::purity).collect();
        let best_index = unique_argmax(&purities)?;
        Ok(Self { states, purities, best_index, dim })
    }

    pub fn states(&self) -> &[DensityMatrix] {
        &self.states
    }

    pub fn purities(&self) -> &[f64] {
        &self.purities
    }

    pub fn best_index(&self) -> usize {
        self.best_index
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

fn unique_argmax(values: &[f64]) -> Result<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    let margin = values[order[0]] - values[order[1]];
    if margin < TIE_MARGIN {
        return Err(Error::TiedBest(margin));
    }
    Ok(order[0])
}

/// Builds and validates an ensemble. `rng` is consulted only for Haar
/// rotations of purity-list specs.
pub fn make_ensemble<R: Rng + ?Sized>(spec: &EnsembleSpec, rng: &mut R) -> Result<StateEnsemble> {
    match spec {
        EnsembleSpec::Purities { purities, dim, rotation } => from_purities(purities, *dim, *rotation, rng),
        EnsembleSpec::Explicit(states) => {
            for s in states {
                s.validate()?;
            }
            StateEnsemble::new(states.clone())
        }
        EnsembleSpec::Preset(p) => from_purities(&p.purities(), p.dim(), Rotation::Identity, rng),
    }
}

fn from_purities<R: Rng + ?Sized>(
    purities: &[f64],
    dim: usize,
    rotation: Rotation,
    rng: &mut R,
) -> Result<StateEnsemble> {
    if purities.len() < 2 {
        return Err(Error::TooFewStates(purities.len()));
    }
    let alphas = purities.iter().map(|&z| alpha_from_purity(z, dim)).collect::<Result<Vec<_>>>()?;
    unique_argmax(purities)?;
    let shared = match rotation {
        Rotation::Shared => Some(sample_haar_unitary(dim, rng)?),
        Rotation::Identity => Some(UnitaryMatrix::identity(dim)?),
        Rotation::Independent => None,
    };
    let mut states = Vec::with_capacity(purities.len());
    for &alpha in &alphas {
        let u = match &shared {
            Some(u) => u.clone(),
            None => sample_haar_unitary(dim, rng)?,
        };
        states.push(depolarized_state(&u, alpha)?);
    }
    StateEnsemble::new(states)
}

/// `loḡ(K) = 1/2 + Σ_{i=2..K} 1/i`.
pub fn logbar(k: usize) -> f64 {
    0.5 + (2..=k).map(|i| 1.0 / i as f64).sum::<f64>()
}

/// Sorted purity gaps and the hardness quantities built on them.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapProfile {
    /// `Δ_(2) ≤ … ≤ Δ_(K)`; entry `i-2` is the gap to the i-th purest state.
    pub deltas_sorted: Vec<f64>,
    /// `min_i Δ_(i)/i`.
    pub h1: f64,
    /// `min_i Δ_(i)²/i`.
    pub h2: f64,
    pub logbar_k: f64,
}

pub fn gap_profile(ens: &StateEnsemble) -> GapProfile {
    gap_profile_from_purities(ens.purities())
}

/// Gap profile straight from a purity list (at least two entries).
pub fn gap_profile_from_purities(purities: &[f64]) -> GapProfile {
    let mut sorted = purities.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let best = sorted[0];
    let deltas_sorted: Vec<f64> = sorted[1..].iter().map(|z| best - z).collect();
    let (mut h1, mut h2) = (f64::INFINITY, f64::INFINITY);
    for (offset, delta) in deltas_sorted.iter().enumerate() {
        let i = (offset + 2) as f64;
        h1 = h1.min(delta / i);
        h2 = h2.min(delta * delta / i);
    }
    GapProfile { deltas_sorted, h1, h2, logbar_k: logbar(purities.len()) }
}

#[derive(Debug, Serialize, Deserialize)]
struct EnsembleHeader {
    d: usize,
    #[serde(rename = "K")]
    k: usize,
}

fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("json")
}

/// Writes the states as row-major interleaved little-endian `(re, im)` f64
/// pairs, one matrix after another, with a `{d, K}` JSON sidecar next to
/// `path` (same stem, `.json` extension).
pub fn write_ensemble(path: &Path, states: &[DensityMatrix]) -> Result<()> {
    let d = states.first().map(DensityMatrix::dim).unwrap_or(0);
    let mut buf = Vec::with_capacity(states.len() * d * d * 16);
    for s in states {
        if s.dim() != d {
            return Err(Error::DimensionMismatch { expected: d, actual: s.dim() });
        }
        let m = s.matrix().as_matrix();
        for i in 0..d {
            for j in 0..d {
                buf.extend_from_slice(&m[(i, j)].re.to_le_bytes());
                buf.extend_from_slice(&m[(i, j)].im.to_le_bytes());
            }
        }
    }
    fs::File::create(path)?.write_all(&buf)?;
    let header = EnsembleHeader { d, k: states.len() };
    fs::write(sidecar_path(path), serde_json::to_vec(&header)?)?;
    Ok(())
}

/// Reads a file written by [`write_ensemble`]; every state is validated.
pub fn read_ensemble(path: &Path) -> Result<Vec<DensityMatrix>> {
    let header: EnsembleHeader = serde_json::from_slice(&fs::read(sidecar_path(path))?)?;
    let mut raw = Vec::new();
    fs::File::open(path)?.read_to_end(&mut raw)?;
    let expected = header.k * header.d * header.d * 16;
    if raw.len() != expected {
        return Err(Error::EnsembleFormat(format!(
            "expected {expected} bytes for K={} d={}, found {}",
            header.k,
            header.d,
            raw.len()
        )));
    }
    let values: Vec<f64> =
        raw.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk"))).collect();
    let per = header.d * header.d;
    values
        .chunks_exact(2 * per)
        .map(|chunk| {
            let entries: Vec<Complex64> = chunk.chunks_exact(2).map(|p| Complex64::new(p[0], p[1])).collect();
            DensityMatrix::new(ComplexSquareMatrix::from_row_slice(header.d, &entries)?)
        })
        .collect()
}
