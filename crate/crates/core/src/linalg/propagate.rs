use nalgebra::{ComplexField, DMatrix};

use super::{
    expm, DensityMatrix, GeneratorMatrix, KrausChannel, Lindbladian, StochasticMatrix,
    Superoperator,
};
use crate::error::{invalid, Result};
use crate::scalar::Real;

/// Default stand-in for an infinite duration.
pub const DEFAULT_T_TRUNC: f64 = 40.0;

/// How long a time-independent generator is switched on.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Duration<T> {
    Finite(T),
    /// The `t -> ∞` limit, evaluated at a truncation time.
    Limit,
}

impl<T: Real> Duration<T> {
    /// Concrete time, with `Limit` mapped to `t_trunc`.
    pub fn resolve(self, t_trunc: T) -> Result<T> {
        match self {
            Duration::Finite(t) if t < T::zero() || !t.is_finite() => {
                Err(invalid(format!("duration must be finite and non-negative, got {:e}", t)))
            }
            Duration::Finite(t) => Ok(t),
            Duration::Limit => Ok(t_trunc),
        }
    }
}

/// Result of a classical schedule.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassicalPropagation<T: Real> {
    pub matrix: StochasticMatrix<T>,
    /// Sum over truncated stages of `e^{−gap·t_trunc}`; zero when no stage was truncated.
    pub residual_bound: T,
}

/// Smallest decay rate among the non-zero eigenvalues of a rate matrix.
pub(crate) fn spectral_gap<T: Real>(l: &DMatrix<T>) -> Option<T> {
    let scale = l.amax().max(T::one());
    let eig = l.clone().complex_eigenvalues();
    eig.iter()
        .filter(|z| (**z).modulus() > T::tol(1e-9) * scale)
        .map(|z| -z.re)
        .fold(None, |acc: Option<T>, g| Some(acc.map_or(g, |a| a.min(g))))
}

/// Ordered product of segment exponentials; the first segment acts first.
pub fn propagate_classical<T: Real>(
    schedule: &[(GeneratorMatrix<T>, Duration<T>)],
    t_trunc: T,
) -> Result<ClassicalPropagation<T>> {
    if !(t_trunc > T::zero()) || !t_trunc.is_finite() {
        return Err(invalid("truncation time must be positive and finite"));
    }
    let d = match schedule.first() {
        Some((l, _)) => l.dim(),
        None => {
            return Err(invalid("empty schedule has no dimension; use StochasticMatrix::identity"))
        }
    };
    let mut acc = DMatrix::<T>::identity(d, d);
    let mut bound = T::zero();
    for (l, dur) in schedule {
        if l.dim() != d {
            return Err(crate::Error::DimensionMismatch {
                expected: d,
                found: l.dim(),
            });
        }
        let t = dur.resolve(t_trunc)?;
        if *dur == Duration::Limit {
            if let Some(gap) = spectral_gap(l.as_matrix()) {
                bound += (-gap * t).exp();
            }
        }
        acc = expm(l.as_matrix(), t)? * acc;
    }
    Ok(ClassicalPropagation {
        matrix: StochasticMatrix::new(acc)?,
        residual_bound: bound,
    })
}

/// Superoperator of the whole schedule; the first segment acts first.
pub fn lindblad_channel<T: Real>(
    schedule: &[(Lindbladian<T>, Duration<T>)],
    d: usize,
    t_trunc: T,
) -> Result<Superoperator<T>> {
    let mut acc = Superoperator::identity(d);
    for (l, dur) in schedule {
        if l.dim() != d {
            return Err(crate::Error::DimensionMismatch {
                expected: d,
                found: l.dim(),
            });
        }
        let t = dur.resolve(t_trunc)?;
        if l.is_zero() || t == T::zero() {
            continue;
        }
        acc = l.superoperator().exp(t)?.compose(&acc)?;
    }
    Ok(acc)
}

/// Evolves `input` through each `(L, duration)` segment in order.
pub fn propagate_lindblad<T: Real>(
    schedule: &[(Lindbladian<T>, Duration<T>)],
    input: &DensityMatrix<T>,
    t_trunc: T,
) -> Result<DensityMatrix<T>> {
    let d = input.dim();
    let mut x = input.as_matrix().clone();
    for (l, dur) in schedule {
        if l.dim() != d {
            return Err(crate::Error::DimensionMismatch {
                expected: d,
                found: l.dim(),
            });
        }
        let t = dur.resolve(t_trunc)?;
        if l.is_zero() || t == T::zero() {
            continue;
        }
        x = l.superoperator().exp(t)?.apply_matrix(&x);
    }
    DensityMatrix::with_tolerance(x, T::tol(1e-9))
}

/// Exact superoperator of the quantum lift of a classical generator run for time `t`.
///
/// Populations evolve by `exp(L t)`; the coherence `|a⟩⟨b|` only decays, at rate
/// `(r_a + r_b) / 2` where `r_j = −L_jj` is the escape rate of state `j`.
pub fn classical_superoperator<T: Real>(l: &GeneratorMatrix<T>, t: T) -> Result<Superoperator<T>> {
    let d = l.dim();
    let p = expm(l.as_matrix(), t)?;
    let mut m = super::CMatrix::<T>::zeros(d * d, d * d);
    for j in 0..d {
        for i in 0..d {
            m[(i + i * d, j + j * d)] = super::c(p[(i, j)]);
        }
    }
    let half = T::lit(0.5);
    for b in 0..d {
        for a in 0..d {
            if a != b {
                let rate = -(l.as_matrix()[(a, a)] + l.as_matrix()[(b, b)]) * half;
                let k = a + b * d;
                m[(k, k)] = super::c((-rate * t).exp());
            }
        }
    }
    Superoperator::new(m)
}

/// `P(i|j) = ⟨i|E(|j⟩⟨j|)|i⟩ = Σ_k |K_k[i, j]|²`.
pub fn channel_to_stochastic<T: Real>(channel: &KrausChannel<T>) -> Result<StochasticMatrix<T>> {
    let d = channel.dim();
    let m = DMatrix::from_fn(d, d, |i, j| {
        channel
            .ops()
            .iter()
            .fold(T::zero(), |acc, k| acc + k[(i, j)].norm_sqr())
    });
    StochasticMatrix::new(m)
}

/// Same extraction from a superoperator: entry `(ii, jj)` of the vectorised map.
pub fn superoperator_to_stochastic<T: Real>(s: &Superoperator<T>) -> Result<StochasticMatrix<T>> {
    let d = s.dim();
    let m = DMatrix::from_fn(d, d, |i, j| s.as_matrix()[(i + i * d, j + j * d)].re);
    StochasticMatrix::new(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{dephasing_channel, CMatrix};
    use nalgebra::Complex;

    #[test]
    fn limit_stage_approaches_full_swap() {
        let l = GeneratorMatrix::<f64>::partial_swap(2, 0, 1).unwrap();
        let out = propagate_classical(&[(l, Duration::Limit)], 40.0).unwrap();
        assert!((out.matrix.get(0, 1) - 0.5).abs() < 1e-15);
        assert!((out.residual_bound - (-40.0f64).exp()).abs() < 1e-25);
    }

    #[test]
    fn two_segments_compose_right_to_left() {
        let l1 = GeneratorMatrix::new(DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 1.0, 0.0])).unwrap();
        let l2 = GeneratorMatrix::new(DMatrix::from_row_slice(2, 2, &[0.0, 2.0, 0.0, -2.0])).unwrap();
        let out = propagate_classical(
            &[(l1.clone(), Duration::Finite(0.7)), (l2.clone(), Duration::Finite(0.3))],
            40.0,
        )
        .unwrap();
        let want = expm(l2.as_matrix(), 0.3).unwrap() * expm(l1.as_matrix(), 0.7).unwrap();
        assert!(super::super::max_abs_diff(out.matrix.as_matrix(), &want) < 1e-15);
        assert!(propagate_classical(&[(l1, Duration::Finite(-1.0))], 40.0).is_err());
    }

    #[test]
    fn hamiltonian_stage_is_unitary_conjugation() {
        let h = CMatrix::from_row_slice(
            2,
            2,
            &[
                Complex::new(0.2, 0.0),
                Complex::new(0.5, 0.1),
                Complex::new(0.5, -0.1),
                Complex::new(-0.3, 0.0),
            ],
        );
        let l = Lindbladian::hamiltonian_only(h.clone()).unwrap();
        let rho = DensityMatrix::from_diagonal(&[0.8, 0.2]).unwrap();
        let out = propagate_lindblad(&[(l, Duration::Finite(1.3))], &rho, 40.0).unwrap();
        let u = expm(&(h * Complex::new(0.0, -1.0)), 1.3).unwrap();
        let want = &u * rho.as_matrix() * u.adjoint();
        assert!(super::super::max_abs_diff_c(out.as_matrix(), &want) < 1e-12);
    }

    #[test]
    fn classical_closed_form_matches_lifted_exponential() {
        let g = GeneratorMatrix::new(DMatrix::from_row_slice(
            3,
            3,
            &[-1.0, 0.5, 0.0, 0.4, -0.5, 2.0, 0.6, 0.0, -2.0],
        ))
        .unwrap();
        let fast = classical_superoperator(&g, 0.8).unwrap();
        let slow = Lindbladian::from_classical(&g).superoperator().exp(0.8).unwrap();
        assert!(fast.max_abs_diff(&slow) < 1e-13);
    }

    #[test]
    fn dephasing_extracts_identity() {
        let p = channel_to_stochastic(&dephasing_channel::<f64>(3).unwrap()).unwrap();
        assert!(p.is_identity(0.0));
        let s = dephasing_channel::<f64>(3).unwrap().superoperator();
        assert!(superoperator_to_stochastic(&s).unwrap().is_identity(0.0));
    }
}
