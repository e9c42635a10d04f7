//! Numerical substrate: probability vectors, stochastic and rate matrices,
//! density matrices, channels, Lindbladians and their propagation.
//!
//! Conventions fixed here and inherited everywhere else:
//!
//! * stochastic matrices are column-stochastic, entry `(i, j)` is the
//!   probability of output `i` given input `j`;
//! * superoperators act on column-major vectorised density matrices, so
//!   `vec(A X B) = (Bᵀ ⊗ A) vec(X)`.

mod channel;
mod density;
pub mod expm;
mod generator;
mod lindblad;
mod prob;
mod propagate;
mod stochastic;

use nalgebra::{Complex, ComplexField, DMatrix};

use crate::scalar::Real;

pub use channel::{dephasing_channel, KrausChannel, Superoperator};
pub use density::DensityMatrix;
pub use expm::expm;
pub use generator::GeneratorMatrix;
pub use lindblad::Lindbladian;
pub use prob::ProbVector;
pub use propagate::{
    channel_to_stochastic, classical_superoperator, lindblad_channel, propagate_classical, propagate_lindblad,
    superoperator_to_stochastic, ClassicalPropagation, Duration, DEFAULT_T_TRUNC,
};
pub use stochastic::StochasticMatrix;

/// Dense complex matrix.
pub type CMatrix<T> = DMatrix<Complex<T>>;

pub(crate) fn c<T: Real>(re: T) -> Complex<T> {
    Complex::new(re, T::zero())
}

/// Largest entry modulus of `a - b`.
pub fn max_abs_diff_c<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> T {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (*x - *y).modulus())
        .fold(T::zero(), |m, v| if v > m { v } else { m })
}

/// Largest entry of `|a - b|`.
pub fn max_abs_diff<T: Real>(a: &DMatrix<T>, b: &DMatrix<T>) -> T {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (*x - *y).abs())
        .fold(T::zero(), |m, v| if v > m { v } else { m })
}

pub(crate) fn is_hermitian<T: Real>(m: &CMatrix<T>, tol: T) -> bool {
    m.is_square() && max_abs_diff_c(m, &m.adjoint()) <= tol
}

/// Writes `block` into a `d × d` zero matrix at the rows/columns listed in `levels`.
pub(crate) fn embed_block<T: Real>(block: &CMatrix<T>, levels: &[usize], d: usize) -> CMatrix<T> {
    let mut out = CMatrix::<T>::zeros(d, d);
    for (bi, &i) in levels.iter().enumerate() {
        for (bj, &j) in levels.iter().enumerate() {
            out[(i, j)] = block[(bi, bj)];
        }
    }
    out
}
