use serde::Serialize;

use crate::embed::{check_circulant3, check_unistochastic_circulant3, EmbedStatus};
use crate::error::Result;
use crate::StochasticMatrix;

/// Cheapest witness found for a point of the 3×3 circulant family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum CirculantClass {
    ClassicalEmbeddable,
    /// `Π P` is classically embeddable for a nontrivial cyclic shift `Π`.
    QuantumViaPermutedClassical,
    QuantumViaUnistochastic,
    Unknown,
}

impl CirculantClass {
    pub fn as_str(self) -> &'static str {
        match self {
            CirculantClass::ClassicalEmbeddable => "classical",
            CirculantClass::QuantumViaPermutedClassical => "permuted-classical",
            CirculantClass::QuantumViaUnistochastic => "unistochastic",
            CirculantClass::Unknown => "unknown",
        }
    }

    pub fn is_quantum_witnessed(self) -> bool {
        self != CirculantClass::Unknown
    }
}

/// Classifies the circulant with first row `(1 − a − b, a, b)`.
///
/// Tests run in order: classical, the two cyclic relabellings `Π P`, then the
/// chain-links condition. The first test that succeeds decides the class.
pub fn classify_circulant_point(a: f64, b: f64) -> Result<CirculantClass> {
    if check_circulant3(a, b)?.status == EmbedStatus::Embeddable {
        return Ok(CirculantClass::ClassicalEmbeddable);
    }
    let p = StochasticMatrix::circulant3(a.max(0.0), b.max(0.0))?;
    for shift in [[1, 2, 0], [2, 0, 1]] {
        let pp = StochasticMatrix::from_function(&shift)?.compose(&p)?;
        let (a2, b2) = (pp.get(0, 1), pp.get(0, 2));
        if check_circulant3(a2, b2)?.status == EmbedStatus::Embeddable {
            return Ok(CirculantClass::QuantumViaPermutedClassical);
        }
    }
    if check_unistochastic_circulant3(a, b)? {
        return Ok(CirculantClass::QuantumViaUnistochastic);
    }
    Ok(CirculantClass::Unknown)
}
