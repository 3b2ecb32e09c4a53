//! Complex-matrix foundation: states, unitaries, Haar sampling, the
//! depolarized-pure-state family and gap arithmetic.

mod ensemble;
mod haar;
mod matrix;

pub use ensemble::{
    gap_profile, gap_profile_from_purities, logbar, make_ensemble, read_ensemble, write_ensemble, EnsembleSpec,
    GapProfile, Preset, Rotation, StateEnsemble, TIE_MARGIN,
};
pub(crate) use haar::RunningMean;
pub use haar::{
    first_moment_closed_form, sample_haar_state, sample_haar_unitary, sample_hermitian, second_moment_closed_form,
    third_moment_closed_form, verify_haar_moments, MomentEstimate, MomentReport,
};
pub use matrix::{
    purity, ComplexSquareMatrix, DensityMatrix, UnitaryMatrix, HERMITIAN_TOL, PSD_TOL, TRACE_TOL, UNITARY_TOL,
};

use num_complex::Complex64;

use crate::{Error, Result};

// Slack for purities that land a hair outside [1/d, 1] through rounding.
const PURITY_SLACK: f64 = 1e-12;

/// Depolarizing weight `α` of the state `α|ψ⟩⟨ψ| + (1-α)I/d` with purity `z`.
pub fn alpha_from_purity(z: f64, dim: usize) -> Result<f64> {
    if dim < 2 {
        return Err(Error::DimensionTooSmall(dim));
    }
    let d = dim as f64;
    let floor = 1.0 / d;
    if !(floor - PURITY_SLACK..=1.0 + PURITY_SLACK).contains(&z) || z.is_nan() {
        return Err(Error::PurityOutOfRange { purity: z, floor });
    }
    Ok(((d * z - 1.0) / (d - 1.0)).clamp(0.0, 1.0).sqrt())
}

/// Purity `(1 + (d-1)α²)/d` of the depolarized pure state.
pub fn purity_from_alpha(alpha: f64, dim: usize) -> f64 {
    let d = dim as f64;
    (1.0 + (d - 1.0) * alpha * alpha) / d
}

/// `α·U|0⟩⟨0|U† + ((1-α)/d)·I`.
pub fn depolarized_state(u: &UnitaryMatrix, alpha: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::AlphaOutOfRange(alpha));
    }
    let d = u.dim();
    let psi = u.first_column();
    let mixed = (1.0 - alpha) / d as f64;
    let m = nalgebra::DMatrix::from_fn(d, d, |i, j| {
        let diag = if i == j { mixed } else { 0.0 };
        psi[i] * psi[j].conj() * alpha + Complex64::new(diag, 0.0)
    });
    Ok(DensityMatrix::new_unchecked(ComplexSquareMatrix::new(m)?))
}
