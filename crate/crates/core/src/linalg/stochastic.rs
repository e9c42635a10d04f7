use nalgebra::{DMatrix, DVector};

use super::prob::ProbVector;
use crate::error::{invalid, Error, Result};
use crate::scalar::Real;

/// Column-stochastic transition matrix; entry `(i, j)` is `P(i | j)`.
#[derive(Clone, Debug, PartialEq)]
pub struct StochasticMatrix<T: Real> {
    m: DMatrix<T>,
}

impl<T: Real> StochasticMatrix<T> {
    pub fn new(mut m: DMatrix<T>) -> Result<Self> {
        if !m.is_square() || m.nrows() == 0 {
            return Err(invalid(format!(
                "stochastic matrix must be square and non-empty, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let neg = T::tol(1e-12);
        for x in m.iter_mut() {
            if !x.is_finite() {
                return Err(invalid("non-finite entry"));
            }
            if *x < -neg {
                return Err(invalid(format!("negative transition probability {:e}", x)));
            }
            if *x < T::zero() {
                *x = T::zero();
            }
        }
        for (j, col) in m.column_iter().enumerate() {
            let s = col.sum();
            if (s - T::one()).abs() > T::tol(1e-10) {
                return Err(invalid(format!("column {j} sums to {:e}", s)));
            }
        }
        Ok(Self { m })
    }

    /// Builds from row-major entries, `rows[i][j] = P(i | j)`.
    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let d = rows.len();
        if rows.iter().any(|r| r.len() != d) {
            return Err(invalid("rows must form a square matrix"));
        }
        Self::new(DMatrix::from_fn(d, d, |i, j| rows[i][j]))
    }

    pub fn identity(d: usize) -> Self {
        Self {
            m: DMatrix::identity(d, d),
        }
    }

    /// `{0,1}`-valued matrix of the map `j -> table[j]`.
    pub fn from_function(table: &[usize]) -> Result<Self> {
        let d = table.len();
        if let Some(&bad) = table.iter().find(|&&t| t >= d) {
            return Err(invalid(format!("function value {bad} outside 0..{d}")));
        }
        let mut m = DMatrix::zeros(d, d);
        for (j, &i) in table.iter().enumerate() {
            m[(i, j)] = T::one();
        }
        Ok(Self { m })
    }

    /// The 3×3 circulant family with first row `(1-a-b, a, b)`.
    pub fn circulant3(a: T, b: T) -> Result<Self> {
        let c = T::one() - a - b;
        Self::new(DMatrix::from_row_slice(3, 3, &[c, a, b, b, c, a, a, b, c]))
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    /// `P(i | j)`.
    pub fn get(&self, i: usize, j: usize) -> T {
        self.m[(i, j)]
    }

    pub fn as_matrix(&self) -> &DMatrix<T> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<T> {
        self.m
    }

    pub fn apply(&self, p: &ProbVector<T>) -> Result<ProbVector<T>> {
        if p.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: p.dim(),
            });
        }
        let q: DVector<T> = &self.m * p.as_vector();
        ProbVector::new(q.iter().copied().collect::<Vec<_>>())
    }

    /// Matrix product `self · other` (apply `other` first).
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if other.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Self::new(&self.m * &other.m)
    }

    pub fn det(&self) -> T {
        self.m.clone().determinant()
    }

    pub fn diagonal_product(&self) -> T {
        self.m.diagonal().iter().fold(T::one(), |acc, &x| acc * x)
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        super::max_abs_diff(&self.m, &other.m)
    }

    /// Row-major copy of the entries.
    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.dim())
            .map(|i| (0..self.dim()).map(|j| self.m[(i, j)]).collect())
            .collect()
    }

    pub fn is_identity(&self, tol: T) -> bool {
        self.max_abs_diff(&Self::identity(self.dim())) <= tol
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn column_convention() {
        // columns (0.9, 0.1) and (0.2, 0.8)
        let p = StochasticMatrix::from_rows(&[vec![0.9, 0.2], vec![0.1, 0.8]]).unwrap();
        assert_eq!(p.get(1, 0), 0.1);
        let q = p.apply(&ProbVector::sharp(2, 0)).unwrap();
        assert_eq!(q.to_vec(), vec![0.9, 0.1]);
    }

    #[test]
    fn rejects_row_stochastic() {
        assert!(StochasticMatrix::from_rows(&[vec![0.9, 0.1], vec![0.2, 0.8]]).is_err());
    }

    #[test]
    fn function_matrix() {
        let p = StochasticMatrix::<f64>::from_function(&[1, 2, 0]).unwrap();
        assert_eq!(p.get(1, 0), 1.0);
        assert_eq!(p.get(0, 2), 1.0);
        assert!(StochasticMatrix::<f64>::from_function(&[3, 0, 1]).is_err());
    }

    #[test]
    fn circulant_is_stochastic() {
        let p = StochasticMatrix::circulant3(0.2, 0.3).unwrap();
        assert_eq!(p.get(0, 1), 0.2);
        assert_eq!(p.get(2, 0), 0.2);
        assert!(f64::abs(p.det() - p.as_matrix().transpose().determinant()) < 1e-15);
    }
}
