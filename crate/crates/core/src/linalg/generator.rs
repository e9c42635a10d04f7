use nalgebra::DMatrix;

use super::prob::ProbVector;
use crate::error::{invalid, Result};
use crate::scalar::Real;

/// Classical rate matrix: non-negative off-diagonal rates, zero column sums.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorMatrix<T: Real> {
    m: DMatrix<T>,
}

impl<T: Real> GeneratorMatrix<T> {
    pub fn new(mut m: DMatrix<T>) -> Result<Self> {
        if !m.is_square() || m.nrows() == 0 {
            return Err(invalid("generator must be square and non-empty"));
        }
        let neg = T::tol(1e-12);
        let d = m.nrows();
        for j in 0..d {
            for i in 0..d {
                let x = m[(i, j)];
                if !x.is_finite() {
                    return Err(invalid("non-finite rate"));
                }
                if i != j && x < T::zero() {
                    if x < -neg {
                        return Err(invalid(format!("negative rate {:e} at ({i}, {j})", x)));
                    }
                    m[(i, j)] = T::zero();
                }
            }
        }
        let scale = m.amax().max(T::one());
        for (j, col) in m.column_iter().enumerate() {
            if col.sum().abs() > T::tol(1e-10) * scale {
                return Err(invalid(format!("column {j} of generator sums to {:e}", col.sum())));
            }
        }
        Ok(Self { m })
    }

    pub fn zero(d: usize) -> Self {
        Self {
            m: DMatrix::zeros(d, d),
        }
    }

    /// Generator from off-diagonal rates; the diagonal is filled in to make columns sum to zero.
    pub fn from_rates(rates: DMatrix<T>) -> Result<Self> {
        let mut m = rates;
        let d = m.nrows();
        for j in 0..d.min(m.ncols()) {
            m[(j, j)] = T::zero();
            let s = m.column(j).sum();
            m[(j, j)] = -s;
        }
        Self::new(m)
    }

    /// The generator `[[-1/2, 1/2], [1/2, -1/2]]` acting on levels `i`, `j` of a `d`-level system.
    pub fn partial_swap(d: usize, i: usize, j: usize) -> Result<Self> {
        if i == j || i >= d || j >= d {
            return Err(invalid(format!("bad level pair ({i}, {j}) for d = {d}")));
        }
        let h = T::lit(0.5);
        let mut m = DMatrix::zeros(d, d);
        m[(i, i)] = -h;
        m[(j, j)] = -h;
        m[(i, j)] = h;
        m[(j, i)] = h;
        Ok(Self { m })
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<T> {
        &self.m
    }

    /// Largest entry of `|L p|`.
    pub fn residual_on(&self, p: &ProbVector<T>) -> T {
        (&self.m * p.as_vector()).amax()
    }

    /// Same rates on a larger state space, placed at `levels`.
    pub fn embed(&self, levels: &[usize], d: usize) -> Result<Self> {
        if levels.len() != self.dim() {
            return Err(invalid("level list does not match generator dimension"));
        }
        let mut m = DMatrix::zeros(d, d);
        for (bi, &i) in levels.iter().enumerate() {
            for (bj, &j) in levels.iter().enumerate() {
                m[(i, j)] = self.m[(bi, bj)];
            }
        }
        Self::new(m)
    }

    pub fn scaled(&self, s: T) -> Result<Self> {
        Self::new(&self.m * s)
    }
}
