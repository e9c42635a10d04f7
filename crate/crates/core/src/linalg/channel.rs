use nalgebra::DVector;

use super::{c, expm, CMatrix, DensityMatrix};
use crate::error::{invalid, Error, Result};
use crate::scalar::Real;

/// Column-major vectorisation of a square matrix.
pub(crate) fn vec_of<T: Real>(x: &CMatrix<T>) -> DVector<nalgebra::Complex<T>> {
    DVector::from_column_slice(x.as_slice())
}

pub(crate) fn unvec<T: Real>(v: &DVector<nalgebra::Complex<T>>, d: usize) -> CMatrix<T> {
    CMatrix::from_column_slice(d, d, v.as_slice())
}

/// Completely positive trace-preserving map as a Kraus list.
#[derive(Clone, Debug, PartialEq)]
pub struct KrausChannel<T: Real> {
    ops: Vec<CMatrix<T>>,
    d: usize,
}

impl<T: Real> KrausChannel<T> {
    pub fn new(ops: Vec<CMatrix<T>>) -> Result<Self> {
        Self::with_tolerance(ops, T::tol(1e-10))
    }

    pub fn with_tolerance(ops: Vec<CMatrix<T>>, tol: T) -> Result<Self> {
        let d = check_ops(&ops)?;
        let res = completeness_residual(&ops, d);
        if res > tol {
            return Err(invalid(format!("Kraus operators are not complete: residual {:e}", res)));
        }
        Ok(Self { ops, d })
    }

    pub fn identity(d: usize) -> Self {
        Self {
            ops: vec![CMatrix::identity(d, d)],
            d,
        }
    }

    /// Single-operator channel `ρ -> U ρ U†`.
    pub fn unitary(u: CMatrix<T>) -> Result<Self> {
        Self::new(vec![u])
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn ops(&self) -> &[CMatrix<T>] {
        &self.ops
    }

    /// Largest entry of `|Σ K†K − I|`.
    pub fn completeness_residual(&self) -> T {
        completeness_residual(&self.ops, self.d)
    }

    pub fn apply_matrix(&self, x: &CMatrix<T>) -> CMatrix<T> {
        apply_kraus(&self.ops, x)
    }

    pub fn apply(&self, rho: &DensityMatrix<T>) -> Result<DensityMatrix<T>> {
        if rho.dim() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                found: rho.dim(),
            });
        }
        DensityMatrix::with_tolerance(self.apply_matrix(rho.as_matrix()), T::tol(1e-9))
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if other.d != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                found: other.d,
            });
        }
        let ops = self
            .ops
            .iter()
            .flat_map(|a| other.ops.iter().map(move |b| a * b))
            .collect();
        Ok(Self { ops, d: self.d })
    }

    /// Convex mixture `w·self + (1−w)·other`.
    pub fn mix(&self, w: T, other: &Self) -> Result<Self> {
        if other.d != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                found: other.d,
            });
        }
        if !(T::zero()..=T::one()).contains(&w) {
            return Err(invalid("mixing weight outside [0, 1]"));
        }
        let sa = c(w.sqrt());
        let sb = c((T::one() - w).sqrt());
        let ops = self
            .ops
            .iter()
            .map(|k| k * sa)
            .chain(other.ops.iter().map(|k| k * sb))
            .collect();
        Ok(Self { ops, d: self.d })
    }

    pub fn superoperator(&self) -> Superoperator<T> {
        Superoperator::from_kraus(&self.ops, self.d)
    }
}

pub(crate) fn check_ops<T: Real>(ops: &[CMatrix<T>]) -> Result<usize> {
    let first = ops.first().ok_or_else(|| invalid("empty Kraus list"))?;
    let d = first.nrows();
    if d == 0 {
        return Err(invalid("zero-dimensional Kraus operator"));
    }
    for k in ops {
        if k.nrows() != d || k.ncols() != d {
            return Err(invalid("Kraus operators must all be d×d"));
        }
        if k.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(invalid("Kraus operator has non-finite entries"));
        }
    }
    Ok(d)
}

pub(crate) fn kraus_sum<T: Real>(ops: &[CMatrix<T>], d: usize) -> CMatrix<T> {
    ops.iter()
        .fold(CMatrix::zeros(d, d), |acc, k| acc + k.adjoint() * k)
}

fn completeness_residual<T: Real>(ops: &[CMatrix<T>], d: usize) -> T {
    super::max_abs_diff_c(&kraus_sum(ops, d), &CMatrix::identity(d, d))
}

pub(crate) fn apply_kraus<T: Real>(ops: &[CMatrix<T>], x: &CMatrix<T>) -> CMatrix<T> {
    let d = x.nrows();
    ops.iter()
        .fold(CMatrix::zeros(d, d), |acc, k| acc + k * x * k.adjoint())
}

/// Completely dephasing channel with Kraus operators `|k⟩⟨k|`.
pub fn dephasing_channel<T: Real>(d: usize) -> Result<KrausChannel<T>> {
    if d < 2 {
        return Err(invalid(format!("dephasing needs d ≥ 2, got {d}")));
    }
    let ops = (0..d)
        .map(|k| {
            let mut p = CMatrix::zeros(d, d);
            p[(k, k)] = c(T::one());
            p
        })
        .collect();
    Ok(KrausChannel { ops, d })
}

/// Linear map on column-major vectorised `d × d` matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct Superoperator<T: Real> {
    m: CMatrix<T>,
    d: usize,
}

impl<T: Real> Superoperator<T> {
    pub fn new(m: CMatrix<T>) -> Result<Self> {
        let n = m.nrows();
        let d = (n as f64).sqrt().round() as usize;
        if !m.is_square() || d * d != n || d == 0 {
            return Err(invalid("superoperator must be d²×d²"));
        }
        Ok(Self { m, d })
    }

    pub fn identity(d: usize) -> Self {
        Self {
            m: CMatrix::identity(d * d, d * d),
            d,
        }
    }

    /// `Σ K̄ ⊗ K`, since `vec(K X K†) = (K̄ ⊗ K) vec(X)`.
    pub fn from_kraus(ops: &[CMatrix<T>], d: usize) -> Self {
        let m = ops
            .iter()
            .fold(CMatrix::zeros(d * d, d * d), |acc, k| {
                acc + k.conjugate().kronecker(k)
            });
        Self { m, d }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn as_matrix(&self) -> &CMatrix<T> {
        &self.m
    }

    pub fn apply_matrix(&self, x: &CMatrix<T>) -> CMatrix<T> {
        unvec(&(&self.m * vec_of(x)), self.d)
    }

    pub fn apply(&self, rho: &DensityMatrix<T>) -> Result<DensityMatrix<T>> {
        if rho.dim() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                found: rho.dim(),
            });
        }
        DensityMatrix::with_tolerance(self.apply_matrix(rho.as_matrix()), T::tol(1e-9))
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if other.d != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                found: other.d,
            });
        }
        Ok(Self {
            m: &self.m * &other.m,
            d: self.d,
        })
    }

    /// `exp(t · self)`, for a superoperator that is a generator.
    pub fn exp(&self, t: T) -> Result<Self> {
        Ok(Self {
            m: expm(&self.m, t)?,
            d: self.d,
        })
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        super::max_abs_diff_c(&self.m, &other.m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Complex;

    fn plus() -> DensityMatrix<f64> {
        DensityMatrix::new(CMatrix::from_element(2, 2, Complex::new(0.5, 0.0))).unwrap()
    }

    #[test]
    fn dephasing_kills_coherence() {
        let dph = dephasing_channel::<f64>(2).unwrap();
        let out = dph.apply(&plus()).unwrap();
        assert_eq!(out.diagonal(), vec![0.5, 0.5]);
        assert_eq!(out.as_matrix()[(0, 1)], Complex::new(0.0, 0.0));
        let diag = DensityMatrix::from_diagonal(&[0.3, 0.7]).unwrap();
        assert_eq!(dph.apply(&diag).unwrap(), diag);
        assert!(dephasing_channel::<f64>(5).unwrap().completeness_residual() == 0.0);
        assert!(dephasing_channel::<f64>(1).is_err());
    }

    #[test]
    fn identity_superoperator_reproduces_input() {
        let id = KrausChannel::<f64>::identity(2).superoperator();
        let rho = plus();
        assert!(super::super::max_abs_diff_c(&id.apply_matrix(rho.as_matrix()), rho.as_matrix()) < 1e-12);
    }

    #[test]
    fn superoperator_matches_kraus_action() {
        let i = Complex::i();
        let k0 = CMatrix::from_row_slice(
            2,
            2,
            &[Complex::new(1.0, 0.0), 0.0 * i, 0.0 * i, Complex::new(0.6f64.sqrt(), 0.0)],
        );
        let k1 = CMatrix::from_row_slice(
            2,
            2,
            &[0.0 * i, 0.4f64.sqrt() * i, 0.0 * i, 0.0 * i],
        );
        let ch = KrausChannel::new(vec![k0, k1]).unwrap();
        let rho = plus();
        let a = ch.apply_matrix(rho.as_matrix());
        let b = ch.superoperator().apply_matrix(rho.as_matrix());
        assert!(super::super::max_abs_diff_c(&a, &b) < 1e-15);
    }

    #[test]
    fn rejects_incomplete_kraus() {
        let k = CMatrix::<f64>::identity(2, 2) * Complex::new(0.9, 0.0);
        assert!(KrausChannel::new(vec![k]).is_err());
    }
}
