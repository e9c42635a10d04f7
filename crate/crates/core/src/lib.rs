//! Classical and quantum Markovian embeddability of finite stochastic processes.
//!
//! The [`linalg`] layer is generic over [`Real`] (`f32` or `f64`); the
//! decision procedures and constructions above it work in `f64`, and the
//! aliases below name the double-precision instances.

pub mod access;
pub mod cost;
pub mod embed;
pub mod error;
pub mod io;
pub mod linalg;
pub mod qembed;
pub mod scalar;
pub mod thermo;

pub use error::{Error, Result};
pub use scalar::Real;

pub type ProbVector = linalg::ProbVector<f64>;
pub type StochasticMatrix = linalg::StochasticMatrix<f64>;
pub type GeneratorMatrix = linalg::GeneratorMatrix<f64>;
pub type DensityMatrix = linalg::DensityMatrix<f64>;
pub type KrausChannel = linalg::KrausChannel<f64>;
pub type Lindbladian = linalg::Lindbladian<f64>;
pub type Superoperator = linalg::Superoperator<f64>;
pub type CMatrix = linalg::CMatrix<f64>;
pub type Duration = linalg::Duration<f64>;
