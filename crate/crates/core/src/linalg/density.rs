use nalgebra::DVector;

use super::{c, is_hermitian, CMatrix};
use crate::error::{invalid, Result};
use crate::scalar::Real;

/// Hermitian, unit-trace, positive semidefinite matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix<T: Real> {
    m: CMatrix<T>,
}

impl<T: Real> DensityMatrix<T> {
    pub fn new(m: CMatrix<T>) -> Result<Self> {
        Self::with_tolerance(m, T::tol(1e-10))
    }

    /// Validation with a caller-chosen tolerance for hermiticity, trace and positivity.
    pub fn with_tolerance(m: CMatrix<T>, tol: T) -> Result<Self> {
        if !m.is_square() || m.nrows() == 0 {
            return Err(invalid("density matrix must be square and non-empty"));
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(invalid("density matrix has non-finite entries"));
        }
        if !is_hermitian(&m, tol) {
            return Err(invalid("density matrix is not Hermitian"));
        }
        let tr = m.trace();
        if (tr.re - T::one()).abs() > tol || tr.im.abs() > tol {
            return Err(invalid(format!("density matrix trace is {:e}", tr.re)));
        }
        let herm = (&m + m.adjoint()) * c(T::lit(0.5));
        let min = herm
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .fold(T::one(), |a, &b| a.min(b));
        if min < -tol {
            return Err(invalid(format!("density matrix has eigenvalue {:e}", min)));
        }
        Ok(Self { m: herm })
    }

    /// Diagonal state `Σ p_k |k⟩⟨k|`.
    pub fn from_diagonal(p: &[T]) -> Result<Self> {
        let v = DVector::from_iterator(p.len(), p.iter().map(|&x| c(x)));
        Self::new(CMatrix::from_diagonal(&v))
    }

    /// Pure state `|ψ⟩⟨ψ|` for a normalised vector.
    pub fn pure(psi: &DVector<nalgebra::Complex<T>>) -> Result<Self> {
        Self::new(psi * psi.adjoint())
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn as_matrix(&self) -> &CMatrix<T> {
        &self.m
    }

    pub fn into_matrix(self) -> CMatrix<T> {
        self.m
    }

    /// Real diagonal, the populations in the computational basis.
    pub fn diagonal(&self) -> Vec<T> {
        (0..self.dim()).map(|i| self.m[(i, i)].re).collect()
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<T> {
        let mut v: Vec<T> = self.m.clone().symmetric_eigenvalues().iter().copied().collect();
        v.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
        v
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        super::max_abs_diff_c(&self.m, &other.m)
    }
}
