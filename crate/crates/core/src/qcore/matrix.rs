use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::{Error, Result};

pub const HERMITIAN_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;
pub const PSD_TOL: f64 = 1e-9;
pub const UNITARY_TOL: f64 = 1e-9;

/// A dense d×d complex matrix with d ≥ 2.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSquareMatrix(DMatrix<Complex64>);

impl ComplexSquareMatrix {
    pub fn new(mat: DMatrix<Complex64>) -> Result<Self> {
        let (rows, cols) = mat.shape();
        if rows != cols {
            return Err(Error::NotSquare { rows, cols });
        }
        if rows < 2 {
            return Err(Error::DimensionTooSmall(rows));
        }
        Ok(Self(mat))
    }

    /// Builds a matrix from row-major entries.
    pub fn from_row_slice(dim: usize, entries: &[Complex64]) -> Result<Self> {
        if dim < 2 {
            return Err(Error::DimensionTooSmall(dim));
        }
        if entries.len() != dim * dim {
            return Err(Error::InvalidArgument(format!(
                "expected {} entries for a {dim}x{dim} matrix, got {}",
                dim * dim,
                entries.len()
            )));
        }
        Ok(Self(DMatrix::from_row_slice(dim, dim, entries)))
    }

    pub fn identity(dim: usize) -> Result<Self> {
        Self::new(DMatrix::identity(dim, dim))
    }

    pub fn zeros(dim: usize) -> Result<Self> {
        Self::new(DMatrix::zeros(dim, dim))
    }

    /// Diagonal matrix with real entries.
    pub fn from_real_diagonal(diag: &[f64]) -> Result<Self> {
        let d = diag.len();
        let mut m = DMatrix::zeros(d, d);
        for (i, &v) in diag.iter().enumerate() {
            m[(i, i)] = Complex64::new(v, 0.0);
        }
        Self::new(m)
    }

    /// Projector `|v⟩⟨v|`; `v` is used as given (not normalized).
    pub fn outer(v: &[Complex64]) -> Result<Self> {
        let d = v.len();
        Self::new(DMatrix::from_fn(d, d, |i, j| v[i] * v[j].conj()))
    }

    /// `|i⟩⟨i|` in dimension `dim`.
    pub fn basis_projector(dim: usize, i: usize) -> Result<Self> {
        if i >= dim {
            return Err(Error::OutcomeOutOfRange { outcome: i, dim });
        }
        let mut m = Self::zeros(dim)?;
        m.0[(i, i)] = Complex64::new(1.0, 0.0);
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.0
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.0[(row, col)]
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    /// `Tr(self · other)` without forming the product.
    pub fn trace_product(&self, other: &Self) -> Complex64 {
        let d = self.dim();
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..d {
            for j in 0..d {
                acc += self.0[(i, j)] * other.0[(j, i)];
            }
        }
        acc
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_dim(other.dim())?;
        Ok(Self(&self.0 * &other.0))
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(self.0.map(|z| z * s))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other.dim())?;
        Ok(Self(&self.0 + &other.0))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_dim(other.dim())?;
        Ok(Self(&self.0 - &other.0))
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.0.iter().zip(other.0.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn hermitian_deviation(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in i..d {
                worst = worst.max((self.0[(i, j)] - self.0[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_deviation() <= tol
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        let herm = (&self.0 + self.0.adjoint()).map(|z| z * 0.5);
        let mut ev: Vec<f64> = herm.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// `⟨v|self|v⟩`.
    pub fn expectation(&self, v: &[Complex64]) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, vi) in v.iter().enumerate().take(self.dim()) {
            let row: Complex64 = v.iter().enumerate().map(|(j, vj)| self.0[(i, j)] * vj).sum();
            acc += vi.conj() * row;
        }
        acc
    }

    pub(crate) fn check_dim(&self, other: usize) -> Result<()> {
        if self.dim() != other {
            return Err(Error::DimensionMismatch { expected: self.dim(), actual: other });
        }
        Ok(())
    }
}

/// A d×d unitary matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryMatrix {
    mat: ComplexSquareMatrix,
}

impl UnitaryMatrix {
    pub fn new(mat: ComplexSquareMatrix) -> Result<Self> {
        let dev = unitarity_deviation(&mat);
        if dev > UNITARY_TOL {
            return Err(Error::NotUnitary(dev));
        }
        Ok(Self { mat })
    }

    pub(crate) fn new_unchecked(mat: ComplexSquareMatrix) -> Self {
        debug_assert!(unitarity_deviation(&mat) <= UNITARY_TOL);
        Self { mat }
    }

    pub fn identity(dim: usize) -> Result<Self> {
        Ok(Self { mat: ComplexSquareMatrix::identity(dim)? })
    }

    /// The permutation swapping basis states `a` and `b`.
    pub fn transposition(dim: usize, a: usize, b: usize) -> Result<Self> {
        if a >= dim || b >= dim {
            return Err(Error::OutcomeOutOfRange { outcome: a.max(b), dim });
        }
        let mut m = DMatrix::identity(dim, dim);
        m.swap_rows(a, b);
        Ok(Self { mat: ComplexSquareMatrix::new(m)? })
    }

    /// The d=2 Hadamard gate.
    pub fn hadamard() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let c = |x: f64| Complex64::new(x, 0.0);
        let mat = ComplexSquareMatrix::from_row_slice(2, &[c(s), c(s), c(s), c(-s)]).expect("2x2 literal");
        Self { mat }
    }

    pub fn dim(&self) -> usize {
        self.mat.dim()
    }

    pub fn matrix(&self) -> &ComplexSquareMatrix {
        &self.mat
    }

    /// `U|0⟩`, the first column.
    pub fn first_column(&self) -> Vec<Complex64> {
        self.mat.as_matrix().column(0).iter().copied().collect()
    }

    pub fn compose(&self, other: &Self) -> Result<Self> {
        Ok(Self::new_unchecked(self.mat.mul(&other.mat)?))
    }

    pub fn adjoint(&self) -> Self {
        Self { mat: self.mat.adjoint() }
    }

    pub fn deviation(&self) -> f64 {
        unitarity_deviation(&self.mat)
    }
}

fn unitarity_deviation(m: &ComplexSquareMatrix) -> f64 {
    let d = m.dim();
    let prod = m.as_matrix().adjoint() * m.as_matrix();
    let id = DMatrix::<Complex64>::identity(d, d);
    prod.iter().zip(id.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
}

/// A valid quantum state: Hermitian, unit trace, positive semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    mat: ComplexSquareMatrix,
}

impl DensityMatrix {
    pub fn new(mat: ComplexSquareMatrix) -> Result<Self> {
        let rho = Self { mat };
        rho.validate()?;
        Ok(rho)
    }

    /// For states that are valid by construction; only the cheap checks run
    /// in debug builds.
    pub(crate) fn new_unchecked(mat: ComplexSquareMatrix) -> Self {
        debug_assert!(mat.is_hermitian(HERMITIAN_TOL));
        debug_assert!((mat.trace().re - 1.0).abs() <= TRACE_TOL);
        Self { mat }
    }

    /// `I_d / d`.
    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        Ok(Self::new_unchecked(ComplexSquareMatrix::identity(dim)?.scale(1.0 / dim as f64)))
    }

    /// `|ψ⟩⟨ψ|` for a normalized `ψ`.
    pub fn pure(psi: &[Complex64]) -> Result<Self> {
        Self::new(ComplexSquareMatrix::outer(psi)?)
    }

    /// Re-checks every invariant, including the O(d³) eigenvalue test.
    pub fn validate(&self) -> Result<()> {
        let herm = self.mat.hermitian_deviation();
        if herm > HERMITIAN_TOL {
            return Err(Error::NotHermitian(herm));
        }
        let tr = self.mat.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::BadTrace(tr.re));
        }
        let min_ev = self.mat.hermitian_eigenvalues()[0];
        if min_ev < -PSD_TOL {
            return Err(Error::NotPositive(min_ev));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.mat.dim()
    }

    pub fn matrix(&self) -> &ComplexSquareMatrix {
        &self.mat
    }

    /// `Tr(ρ²)`, computed as the squared Frobenius norm.
    pub fn purity(&self) -> f64 {
        self.mat.as_matrix().iter().map(|z| z.norm_sqr()).sum()
    }

    /// `Tr(ρ·ρ)` through the explicit product; kept as a cross-check.
    pub fn purity_via_product(&self) -> f64 {
        let tr = self.mat.trace_product(&self.mat);
        assert!(tr.im.abs() <= 1e-12, "imaginary residue {} in Tr(ρ²)", tr.im);
        tr.re
    }

    /// `U ρ U†`.
    pub fn conjugate_by(&self, u: &UnitaryMatrix) -> Result<Self> {
        let m = u.matrix().mul(&self.mat)?.mul(&u.matrix().adjoint())?;
        Ok(Self::new_unchecked(m))
    }
}

/// Purity of a density matrix, in `[1/d, 1]`.
pub fn purity(rho: &DensityMatrix) -> f64 {
    rho.purity()
}
