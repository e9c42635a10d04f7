//! Quantum-embeddable processes: explicit Markovian realizations built from
//! unitary stages, classical stages and dephasing, plus the 3×3 circulant
//! region classifier.

mod circulant;
mod constructions;

use nalgebra::Complex;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{
    classical_superoperator, dephasing_channel, expm, superoperator_to_stochastic,
    DEFAULT_T_TRUNC,
};
use crate::{Duration, GeneratorMatrix, Lindbladian, StochasticMatrix, Superoperator};

pub use circulant::{classify_circulant_point, CirculantClass};
pub use constructions::{
    cyclic_shift, decompose_2x2, permutation_hamiltonian, permutation_realization,
    permutation_stage_hamiltonian, pinching_product, unistochastic_channel, PinchFactor,
};

/// How long the dephasing stage inserted between composed realizations runs.
pub const DEPHASING_TIME: f64 = 40.0;

/// One time-independent segment of a realization.
#[derive(Clone, Debug, PartialEq)]
pub enum Stage {
    Lindblad {
        generator: Lindbladian,
        duration: Duration,
    },
    /// Classical rate matrix, realized through its quantum lift.
    Classical {
        generator: GeneratorMatrix,
        duration: Duration,
    },
}

impl Stage {
    pub fn dim(&self) -> usize {
        match self {
            Stage::Lindblad { generator, .. } => generator.dim(),
            Stage::Classical { generator, .. } => generator.dim(),
        }
    }

    pub fn duration(&self) -> Duration {
        match self {
            Stage::Lindblad { duration, .. } | Stage::Classical { duration, .. } => *duration,
        }
    }

    /// The stage as a Lindbladian, lifting classical generators.
    pub fn lindbladian(&self) -> Lindbladian {
        match self {
            Stage::Lindblad { generator, .. } => generator.clone(),
            Stage::Classical { generator, .. } => Lindbladian::from_classical(generator),
        }
    }

    /// Channel implemented by the stage.
    pub fn superoperator(&self, t_trunc: f64) -> Result<Superoperator> {
        let t = self.duration().resolve(t_trunc)?;
        let d = self.dim();
        match self {
            Stage::Classical { generator, .. } => classical_superoperator(generator, t),
            Stage::Lindblad { generator, .. } if generator.cp_part().is_empty() => {
                if t == 0.0 || generator.is_zero() {
                    return Ok(Superoperator::identity(d));
                }
                let u = expm(&(generator.hamiltonian() * Complex::new(0.0, -1.0)), t)?;
                Superoperator::new(u.conjugate().kronecker(&u))
            }
            Stage::Lindblad { generator, .. } => generator.superoperator().exp(t),
        }
    }
}

/// Explicit Markovian construction of a stochastic matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct MarkovianRealization {
    pub stages: Vec<Stage>,
    pub target: StochasticMatrix,
    /// Max-abs deviation of the extracted matrix from `target`, as measured.
    pub achieved_error: f64,
    /// Time used for stages with [`Duration::Limit`].
    pub t_trunc: f64,
}

impl MarkovianRealization {
    /// Builds and self-verifies a realization.
    pub fn new(stages: Vec<Stage>, target: StochasticMatrix, t_trunc: f64) -> Result<Self> {
        let d = target.dim();
        if let Some(s) = stages.iter().find(|s| s.dim() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: s.dim(),
            });
        }
        let mut r = Self {
            stages,
            target,
            achieved_error: 0.0,
            t_trunc,
        };
        r.achieved_error = r.extract()?.max_abs_diff(&r.target);
        Ok(r)
    }

    /// A single zero-length stage of the zero generator.
    pub fn identity(d: usize) -> Self {
        Self {
            stages: vec![Stage::Lindblad {
                generator: Lindbladian::zero(d),
                duration: Duration::Finite(0.0),
            }],
            target: StochasticMatrix::identity(d),
            achieved_error: 0.0,
            t_trunc: DEFAULT_T_TRUNC,
        }
    }

    pub fn dim(&self) -> usize {
        self.target.dim()
    }

    /// Channel of the whole schedule, first stage acting first.
    pub fn channel(&self) -> Result<Superoperator> {
        let mut acc = Superoperator::identity(self.dim());
        for s in &self.stages {
            acc = s.superoperator(self.t_trunc)?.compose(&acc)?;
        }
        Ok(acc)
    }

    /// `P(i|j) = ⟨i|E(|j⟩⟨j|)|i⟩` for the propagated channel.
    pub fn extract(&self) -> Result<StochasticMatrix> {
        superoperator_to_stochastic(&self.channel()?)
    }

    /// Stages with `Limit` durations replaced by their truncation time.
    fn resolved_stages(&self) -> Vec<Stage> {
        let t = self.t_trunc;
        self.stages
            .iter()
            .cloned()
            .map(|s| match s {
                Stage::Lindblad {
                    generator,
                    duration: Duration::Limit,
                } => Stage::Lindblad {
                    generator,
                    duration: Duration::Finite(t),
                },
                Stage::Classical {
                    generator,
                    duration: Duration::Limit,
                } => Stage::Classical {
                    generator,
                    duration: Duration::Finite(t),
                },
                other => other,
            })
            .collect()
    }
}

/// The dephasing channel as a Lindbladian `D − I`, run for [`DEPHASING_TIME`].
pub fn dephasing_stage(d: usize) -> Result<Stage> {
    Ok(Stage::Lindblad {
        generator: Lindbladian::from_channel(&dephasing_channel(d)?),
        duration: Duration::Finite(DEPHASING_TIME),
    })
}

/// Realization of `A·B`: the stages of `b`, a dephasing stage, then the stages of `a`.
pub fn compose_markovian(
    a: &MarkovianRealization,
    b: &MarkovianRealization,
) -> Result<MarkovianRealization> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    let same_trunc = a.t_trunc == b.t_trunc;
    let (sa, sb) = if same_trunc {
        (a.stages.clone(), b.stages.clone())
    } else {
        (a.resolved_stages(), b.resolved_stages())
    };
    let mut stages = sb;
    if a.dim() >= 2 {
        stages.push(dephasing_stage(a.dim())?);
    }
    stages.extend(sa);
    MarkovianRealization::new(stages, a.target.compose(&b.target)?, a.t_trunc)
}

/// Serializable summary of a realization without the matrices.
#[derive(Clone, Debug, Serialize)]
pub struct RealizationSummary {
    pub dim: usize,
    pub stages: usize,
    pub achieved_error: f64,
    pub memory_states: usize,
}

impl From<&MarkovianRealization> for RealizationSummary {
    fn from(r: &MarkovianRealization) -> Self {
        Self {
            dim: r.dim(),
            stages: r.stages.len(),
            achieved_error: r.achieved_error,
            memory_states: 0,
        }
    }
}
