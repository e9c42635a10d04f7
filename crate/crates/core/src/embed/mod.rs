//! Classical embeddability: necessary conditions, exact low-dimensional
//! criteria with generator witnesses, and unistochasticity tests.

mod circulant;
mod search;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::linalg::{propagate_classical, DEFAULT_T_TRUNC};
use crate::{Duration, GeneratorMatrix, StochasticMatrix};

pub use circulant::{
    check_circulant3, check_unistochastic_circulant3, chain_links, circulant3_eigenvalues,
};
pub use search::{check_unistochastic_search, SearchOptions, UnitarySearch, MAX_SEARCH_DIM};

/// Slack used for the determinant and diagonal-product comparisons.
pub const GOODMAN_SLACK: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum EmbedStatus {
    Embeddable,
    NotEmbeddable,
    /// Passed a necessary test that is not sufficient in this dimension.
    NecessaryOnlyPass,
    Unknown,
}

/// Which test decided the verdict, with the values it compared.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "test", rename_all = "snake_case")]
pub enum Reason {
    /// `det P ≤ ∏ P_ii` and `det P ≥ 0` both hold.
    Goodman { diag_product: f64, det: f64 },
    /// `∏ P_ii < det P`.
    DiagonalBelowDeterminant { diag_product: f64, det: f64 },
    NegativeDeterminant { det: f64 },
    /// 2×2 criterion `det P ≥ 0`.
    TwoByTwo { det: f64 },
    /// Circulant spectral test; `worst` is the eigenvalue index with the least slack.
    CirculantSpectrum {
        worst: usize,
        modulus: f64,
        phase: f64,
        bound: f64,
    },
}

/// A piecewise-constant classical control: generators applied in order.
pub type Schedule = Vec<(GeneratorMatrix, Duration)>;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EmbedVerdict {
    pub status: EmbedStatus,
    #[serde(skip)]
    pub witness: Option<Schedule>,
    pub reason: Reason,
}

impl EmbedVerdict {
    fn new(status: EmbedStatus, reason: Reason) -> Self {
        Self {
            status,
            witness: None,
            reason,
        }
    }

    /// Max-abs distance between the propagated witness and `target`, if a witness exists.
    pub fn witness_error(&self, target: &StochasticMatrix) -> Result<Option<f64>> {
        match &self.witness {
            None => Ok(None),
            Some(s) if s.is_empty() => Ok(Some(
                StochasticMatrix::identity(target.dim()).max_abs_diff(target),
            )),
            Some(s) => {
                let out = propagate_classical(s, DEFAULT_T_TRUNC)?;
                Ok(Some(out.matrix.max_abs_diff(target)))
            }
        }
    }
}

/// `∏ P_ii ≥ det P ≥ 0`, necessary for every embeddable matrix.
pub fn check_goodman(p: &StochasticMatrix) -> EmbedVerdict {
    let det = p.det();
    let diag_product = p.diagonal_product();
    if det < -GOODMAN_SLACK {
        return EmbedVerdict::new(EmbedStatus::NotEmbeddable, Reason::NegativeDeterminant { det });
    }
    if diag_product < det - GOODMAN_SLACK {
        return EmbedVerdict::new(
            EmbedStatus::NotEmbeddable,
            Reason::DiagonalBelowDeterminant { diag_product, det },
        );
    }
    EmbedVerdict::new(
        EmbedStatus::NecessaryOnlyPass,
        Reason::Goodman { diag_product, det },
    )
}

/// Exact test for `d = 2`, with a time-independent generator as witness.
pub fn check_embeddable_2x2(p: &StochasticMatrix) -> Result<EmbedVerdict> {
    if p.dim() != 2 {
        return Err(invalid(format!("expected a 2×2 matrix, got d = {}", p.dim())));
    }
    let mu = p.det();
    let reason = Reason::TwoByTwo { det: mu };
    if mu < -GOODMAN_SLACK {
        return Ok(EmbedVerdict::new(EmbedStatus::NotEmbeddable, reason));
    }
    let pm = p.as_matrix();
    let id = DMatrix::<f64>::identity(2, 2);
    let witness = if mu >= 1.0 - 1e-15 {
        vec![(GeneratorMatrix::zero(2), Duration::Finite(1.0))]
    } else if mu <= GOODMAN_SLACK {
        // Both columns equal q; L = q·1ᵀ − I relaxes every input onto q.
        let q0 = 0.5 * (pm[(0, 0)] + pm[(0, 1)]);
        let q = DMatrix::from_row_slice(2, 2, &[q0, q0, 1.0 - q0, 1.0 - q0]);
        vec![(GeneratorMatrix::new(q - id)?, Duration::Limit)]
    } else {
        let scale = mu.ln() / (mu - 1.0);
        vec![(GeneratorMatrix::new((pm - id) * scale)?, Duration::Finite(1.0))]
    };
    Ok(EmbedVerdict {
        status: EmbedStatus::Embeddable,
        witness: Some(witness),
        reason,
    })
}

/// Largest de-excitation probability `P(0|1)` a memoryless detailed-balanced
/// qubit process can reach: `e^{βE} / (1 + e^{βE})`.
pub fn detailed_balance_threshold(beta_e: f64) -> Result<f64> {
    if !beta_e.is_finite() {
        return Err(invalid("βE must be finite"));
    }
    Ok(1.0 / (1.0 + (-beta_e).exp()))
}

/// The detailed-balanced qubit matrix with `P(0|1) = x` and `P(1|0) = x e^{−βE}`.
pub fn detailed_balance_matrix(x: f64, beta_e: f64) -> Result<StochasticMatrix> {
    let down = x;
    let up = x * (-beta_e).exp();
    StochasticMatrix::from_rows(&[vec![1.0 - up, down], vec![up, 1.0 - down]])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m2(rows: [[f64; 2]; 2]) -> StochasticMatrix {
        StochasticMatrix::from_rows(&[rows[0].to_vec(), rows[1].to_vec()]).unwrap()
    }

    #[test]
    fn goodman_on_identity_and_swap() {
        let v = check_goodman(&StochasticMatrix::identity(3));
        assert_eq!(v.status, EmbedStatus::NecessaryOnlyPass);
        let swap = m2([[0.0, 1.0], [1.0, 0.0]]);
        let v = check_goodman(&swap);
        assert_eq!(v.status, EmbedStatus::NotEmbeddable);
        assert_eq!(v.reason, Reason::NegativeDeterminant { det: -1.0 });
    }

    #[test]
    fn goodman_rejects_bistochastic_example() {
        let p = m2([[1.0 / 3.0, 2.0 / 3.0], [2.0 / 3.0, 1.0 / 3.0]]);
        let v = check_goodman(&p);
        assert_eq!(v.status, EmbedStatus::NotEmbeddable);
        match v.reason {
            Reason::NegativeDeterminant { det } => assert!((det + 1.0 / 3.0).abs() < 1e-15),
            r => panic!("unexpected reason {r:?}"),
        }
    }

    #[test]
    fn goodman_catches_diagonal_violation() {
        // det = 1/4 while the diagonal vanishes.
        let p = StochasticMatrix::from_rows(&[
            vec![0.0, 0.5, 0.5],
            vec![0.5, 0.0, 0.5],
            vec![0.5, 0.5, 0.0],
        ])
        .unwrap();
        let v = check_goodman(&p);
        assert_eq!(v.status, EmbedStatus::NotEmbeddable);
        assert!(matches!(v.reason, Reason::DiagonalBelowDeterminant { .. }));
    }

    #[test]
    fn two_by_two_witness_reexponentiates() {
        let p = m2([[0.9, 0.2], [0.1, 0.8]]);
        let v = check_embeddable_2x2(&p).unwrap();
        assert_eq!(v.status, EmbedStatus::Embeddable);
        assert!(v.witness_error(&p).unwrap().unwrap() < 1e-10);
    }

    #[test]
    fn two_by_two_special_cases() {
        let id = StochasticMatrix::identity(2);
        let v = check_embeddable_2x2(&id).unwrap();
        let w = v.witness.as_ref().unwrap();
        assert_eq!(w[0].0, GeneratorMatrix::zero(2));

        let rank_one = m2([[0.3, 0.3], [0.7, 0.7]]);
        let v = check_embeddable_2x2(&rank_one).unwrap();
        assert_eq!(v.status, EmbedStatus::Embeddable);
        assert_eq!(v.witness.as_ref().unwrap()[0].1, Duration::Limit);
        assert!(v.witness_error(&rank_one).unwrap().unwrap() < 1e-12);

        let p = m2([[1.0 / 3.0, 2.0 / 3.0], [2.0 / 3.0, 1.0 / 3.0]]);
        assert_eq!(check_embeddable_2x2(&p).unwrap().status, EmbedStatus::NotEmbeddable);
        assert!(check_embeddable_2x2(&StochasticMatrix::identity(3)).is_err());
    }

    #[test]
    fn threshold_values() {
        assert!((detailed_balance_threshold(1.0).unwrap() - 0.7310585786300049).abs() < 1e-15);
        assert_eq!(detailed_balance_threshold(0.0).unwrap(), 0.5);
        assert!((detailed_balance_threshold(3.0).unwrap() - 0.9525741268224334).abs() < 1e-15);
        assert!(detailed_balance_threshold(f64::NAN).is_err());
    }

    #[test]
    fn threshold_is_the_flip_point_of_the_detailed_balanced_family() {
        for &be in &[0.0, 1.0, 3.0] {
            let t = detailed_balance_threshold(be).unwrap();
            let below = detailed_balance_matrix(t - 1e-9, be).unwrap();
            let above = detailed_balance_matrix(t + 1e-9, be).unwrap();
            assert_eq!(check_embeddable_2x2(&below).unwrap().status, EmbedStatus::Embeddable);
            assert_eq!(
                check_embeddable_2x2(&above).unwrap().status,
                EmbedStatus::NotEmbeddable
            );
        }
    }

    #[test]
    fn goodman_and_exact_test_agree_on_2x2_grid() {
        for i in 0..=100 {
            for j in 0..=100 {
                let (x, y) = (i as f64 / 100.0, j as f64 / 100.0);
                let p = m2([[1.0 - y, x], [y, 1.0 - x]]);
                let g = check_goodman(&p).status == EmbedStatus::NotEmbeddable;
                let e = check_embeddable_2x2(&p).unwrap().status == EmbedStatus::NotEmbeddable;
                assert_eq!(g, e, "x = {x}, y = {y}");
            }
        }
    }
}
