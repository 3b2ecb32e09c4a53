//! Purest quantum state identification, simulated at desk scale.
//!
//! The crate is split along the layers of the problem:
//!
//! - [`qcore`]: complex matrices, density matrices, Haar-random unitaries,
//!   the depolarized-pure-state family and gap/hardness arithmetic.
//! - [`measure`]: rotated-basis Born-rule distributions, categorical
//!   sampling, the SWAP-test outcome law and two-outcome POVMs.
//! - [`estimate`]: the collision purity statistic and its closed-form
//!   moments.
//! - [`identify`]: the incoherent (collision) and coherent (SWAP test)
//!   successive-rejects drivers, a uniform-allocation baseline and the
//!   theoretical error exponents.
//! - [`lowerbound`]: shared-rotation instances, fixed two-outcome POVM
//!   experiments and the concentration check behind the lower bound.
//!
//! All randomness enters through explicit streams ([`stream::StreamKey`]);
//! nothing in the crate touches global RNG state.

pub mod error;
pub mod estimate;
pub mod identify;
pub mod lowerbound;
pub mod measure;
pub mod qcore;
pub mod stream;

pub use error::{Error, Result};
pub use num_complex::Complex64;
