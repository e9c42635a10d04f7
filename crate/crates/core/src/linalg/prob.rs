use nalgebra::DVector;

use crate::error::{invalid, Result};
use crate::scalar::Real;

/// Probability distribution over `d` classical states.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbVector<T: Real> {
    entries: DVector<T>,
}

impl<T: Real> ProbVector<T> {
    /// Validates and normalises round-off: entries in `[-1e-12, 0)` are clamped to zero.
    pub fn new(entries: impl Into<Vec<T>>) -> Result<Self> {
        let mut v: Vec<T> = entries.into();
        if v.is_empty() {
            return Err(invalid("empty probability vector"));
        }
        let neg = T::tol(1e-12);
        let mut sum = T::zero();
        for x in v.iter_mut() {
            if !x.is_finite() {
                return Err(invalid("non-finite probability"));
            }
            if *x < -neg {
                return Err(invalid(format!("negative probability {:e}", x)));
            }
            if *x < T::zero() {
                *x = T::zero();
            }
            sum += *x;
        }
        if (sum - T::one()).abs() > T::tol(1e-10) {
            return Err(invalid(format!("probabilities sum to {:e}", sum)));
        }
        Ok(Self {
            entries: DVector::from_vec(v),
        })
    }

    pub fn uniform(d: usize) -> Self {
        let w = T::one() / T::from_usize(d).unwrap();
        Self {
            entries: DVector::from_element(d, w),
        }
    }

    /// Point mass on state `k`.
    pub fn sharp(d: usize, k: usize) -> Self {
        let mut entries = DVector::zeros(d);
        entries[k] = T::one();
        Self { entries }
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn as_slice(&self) -> &[T] {
        self.entries.as_slice()
    }

    pub fn as_vector(&self) -> &DVector<T> {
        &self.entries
    }

    pub fn to_vec(&self) -> Vec<T> {
        self.entries.iter().copied().collect()
    }

    /// Entries sorted in non-increasing order.
    pub fn sorted_desc(&self) -> Vec<T> {
        let mut v = self.to_vec();
        v.sort_by(|a, b| b.partial_cmp(a).expect("finite entries"));
        v
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.entries
            .iter()
            .zip(other.entries.iter())
            .map(|(a, b)| (*a - *b).abs())
            .fold(T::zero(), |m, v| m.max(v))
    }
}

impl<T: Real> std::ops::Index<usize> for ProbVector<T> {
    type Output = T;
    fn index(&self, i: usize) -> &T {
        &self.entries[i]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clamps_tiny_negatives() {
        let p = ProbVector::new(vec![1.0 + 5e-13, -5e-13]).unwrap();
        assert_eq!(p[1], 0.0);
    }

    #[test]
    fn rejects_bad_vectors() {
        assert!(ProbVector::<f64>::new(vec![]).is_err());
        assert!(ProbVector::new(vec![0.5, 0.6]).is_err());
        assert!(ProbVector::new(vec![1.1, -0.1]).is_err());
        assert!(ProbVector::new(vec![f64::NAN, 1.0]).is_err());
    }

    #[test]
    fn sorted_descending() {
        let p = ProbVector::new(vec![0.2, 0.5, 0.3]).unwrap();
        assert_eq!(p.sorted_desc(), vec![0.5, 0.3, 0.2]);
    }
}
