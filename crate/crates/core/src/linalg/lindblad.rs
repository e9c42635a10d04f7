use nalgebra::ComplexField;

use super::channel::{apply_kraus, check_ops, kraus_sum};
use super::{c, is_hermitian, CMatrix, GeneratorMatrix, KrausChannel, Superoperator};
use crate::error::{invalid, Error, Result};
use crate::scalar::Real;

/// Generator `L(X) = −i[H, X] + Φ(X) − ½{Φ*(1), X}` with `Φ` given by Kraus operators.
#[derive(Clone, Debug, PartialEq)]
pub struct Lindbladian<T: Real> {
    hamiltonian: CMatrix<T>,
    cp_part: Vec<CMatrix<T>>,
}

impl<T: Real> Lindbladian<T> {
    /// `cp_part` need not be trace preserving; an empty list means a purely Hamiltonian generator.
    pub fn new(hamiltonian: CMatrix<T>, cp_part: Vec<CMatrix<T>>) -> Result<Self> {
        let d = hamiltonian.nrows();
        if !hamiltonian.is_square() || d == 0 {
            return Err(invalid("Hamiltonian must be square and non-empty"));
        }
        if hamiltonian.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(invalid("Hamiltonian has non-finite entries"));
        }
        if !is_hermitian(&hamiltonian, T::tol(1e-10)) {
            return Err(invalid("Hamiltonian is not Hermitian"));
        }
        if !cp_part.is_empty() {
            let kd = check_ops(&cp_part)?;
            if kd != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: kd,
                });
            }
        }
        let l = Self {
            hamiltonian,
            cp_part,
        };
        let worst = l.trace_defect();
        if worst > T::tol(1e-9) {
            return Err(invalid(format!("generator is not trace-annihilating: {:e}", worst)));
        }
        Ok(l)
    }

    pub fn zero(d: usize) -> Self {
        Self {
            hamiltonian: CMatrix::zeros(d, d),
            cp_part: Vec::new(),
        }
    }

    pub fn hamiltonian_only(h: CMatrix<T>) -> Result<Self> {
        Self::new(h, Vec::new())
    }

    /// `E − I` for a channel `E`: `Φ = E` and `Φ*(1) = I`.
    pub fn from_channel(e: &KrausChannel<T>) -> Self {
        Self {
            hamiltonian: CMatrix::zeros(e.dim(), e.dim()),
            cp_part: e.ops().to_vec(),
        }
    }

    /// Quantum lift of a classical rate matrix: jump operators `√L_ij |i⟩⟨j|` for `i ≠ j`.
    pub fn from_classical(l: &GeneratorMatrix<T>) -> Self {
        let d = l.dim();
        let m = l.as_matrix();
        let mut ops = Vec::new();
        for j in 0..d {
            for i in 0..d {
                if i != j && m[(i, j)] > T::zero() {
                    let mut k = CMatrix::zeros(d, d);
                    k[(i, j)] = c(m[(i, j)].sqrt());
                    ops.push(k);
                }
            }
        }
        Self {
            hamiltonian: CMatrix::zeros(d, d),
            cp_part: ops,
        }
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.nrows()
    }

    pub fn hamiltonian(&self) -> &CMatrix<T> {
        &self.hamiltonian
    }

    pub fn cp_part(&self) -> &[CMatrix<T>] {
        &self.cp_part
    }

    pub fn is_zero(&self) -> bool {
        self.cp_part.is_empty() && self.hamiltonian.iter().all(|z| *z == c(T::zero()))
    }

    /// Direct evaluation of `L(X)`.
    pub fn apply(&self, x: &CMatrix<T>) -> CMatrix<T> {
        let d = self.dim();
        let h = &self.hamiltonian;
        let mi = nalgebra::Complex::new(T::zero(), -T::one());
        let mut out = (h * x - x * h) * mi;
        if !self.cp_part.is_empty() {
            let f = kraus_sum(&self.cp_part, d);
            out += apply_kraus(&self.cp_part, x);
            out -= (&f * x + x * &f) * c(T::lit(0.5));
        }
        out
    }

    /// `−i(I⊗H − Hᵀ⊗I) + Σ K̄⊗K − ½(I⊗F + Fᵀ⊗I)` on column-major vectorisations.
    pub fn superoperator(&self) -> Superoperator<T> {
        let d = self.dim();
        let id = CMatrix::<T>::identity(d, d);
        let h = &self.hamiltonian;
        let mi = nalgebra::Complex::new(T::zero(), -T::one());
        let mut m = (id.kronecker(h) - h.transpose().kronecker(&id)) * mi;
        if !self.cp_part.is_empty() {
            let f = kraus_sum(&self.cp_part, d);
            m += Superoperator::from_kraus(&self.cp_part, d).as_matrix();
            m -= (id.kronecker(&f) + f.transpose().kronecker(&id)) * c(T::lit(0.5));
        }
        Superoperator::new(m).expect("d²×d² by construction")
    }

    /// Largest `|tr L(E_ij)|` over matrix units.
    fn trace_defect(&self) -> T {
        let d = self.dim();
        let mut worst = T::zero();
        for i in 0..d {
            for j in 0..d {
                let mut e = CMatrix::zeros(d, d);
                e[(i, j)] = c(T::one());
                let t = self.apply(&e).trace().modulus();
                if t > worst {
                    worst = t;
                }
            }
        }
        worst
    }

    /// `self + other`, both generators acting simultaneously.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if other.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        let mut ops = self.cp_part.clone();
        ops.extend(other.cp_part.iter().cloned());
        Self::new(&self.hamiltonian + &other.hamiltonian, ops)
    }
}
