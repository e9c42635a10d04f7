//! State accessibility under Markovian processes with a fixed point: the
//! memory-assisted classical region as an LP, majorisation and its explicit
//! partial-swap path, and the qubit monotones, channels and extremal paths.

mod path;
mod qubit;

use minilp::{ComparisonOp, OptimizationDirection, Problem};
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::linalg::{propagate_classical, DEFAULT_T_TRUNC};
use crate::{Duration, GeneratorMatrix, ProbVector, StochasticMatrix};

pub use path::{extremal_path_evolve, PathStep, PathTrajectory, StopReason, DEFAULT_MAX_STEPS};
pub use qubit::{
    alberti_uhlmann_channel, exotic_thermalizer, extremal_circles, qubit_accessible,
    qubit_monotones, BlochState, Circle, ExtremalCircles, Monotones,
};

/// Slack on the LP equality constraints.
pub const LP_TOL: f64 = 1e-9;

fn check_same_dim(p: &ProbVector, q: &ProbVector) -> Result<()> {
    if p.dim() != q.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            found: q.dim(),
        });
    }
    Ok(())
}

/// Whether some stochastic `P` with `P γ = γ` maps `p` to `q`.
///
/// Solved as an LP feasibility problem in the `d²` entries of `P`.
pub fn accessible_with_memory(p: &ProbVector, q: &ProbVector, gamma: &ProbVector) -> Result<bool> {
    check_same_dim(p, q)?;
    check_same_dim(p, gamma)?;
    if gamma.as_slice().iter().any(|&g| g <= 0.0) {
        return Err(invalid("fixed point must have full rank"));
    }
    let d = p.dim();
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    // vars[i][j] = P(i|j)
    let vars: Vec<Vec<_>> = (0..d)
        .map(|_| (0..d).map(|_| lp.add_var(0.0, (0.0, 1.0))).collect())
        .collect();
    for j in 0..d {
        let col: Vec<_> = (0..d).map(|i| (vars[i][j], 1.0)).collect();
        lp.add_constraint(&col[..], ComparisonOp::Eq, 1.0);
    }
    for (input, output) in [(p, q), (gamma, gamma)] {
        for i in 0..d {
            let row: Vec<_> = (0..d).map(|j| (vars[i][j], input[j])).collect();
            lp.add_constraint(&row[..], ComparisonOp::Ge, output[i] - LP_TOL);
            lp.add_constraint(&row[..], ComparisonOp::Le, output[i] + LP_TOL);
        }
    }
    match lp.solve() {
        Ok(_) => Ok(true),
        Err(minilp::Error::Infeasible) => Ok(false),
        Err(e) => Err(Error::Numerical(format!("LP solver: {e}"))),
    }
}

/// `p ≻ q`: every partial sum of `p↓` dominates that of `q↓`, with `1e-12` slack.
pub fn majorises(p: &ProbVector, q: &ProbVector) -> bool {
    if p.dim() != q.dim() {
        return false;
    }
    let (ps, qs) = (p.sorted_desc(), q.sorted_desc());
    let (mut sp, mut sq) = (0.0, 0.0);
    ps.iter().zip(&qs).all(|(a, b)| {
        sp += a;
        sq += b;
        sp >= sq - 1e-12
    })
}

/// Ground-state population of the qubit Gibbs state at `βE`.
fn ground_population(beta_e: f64) -> Result<f64> {
    if !beta_e.is_finite() {
        return Err(invalid("βE must be finite"));
    }
    Ok(1.0 / (1.0 + (-beta_e).exp()))
}

fn check_population(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(invalid(format!("population {p} is outside [0, 1]")));
    }
    Ok(())
}

/// Ground populations reachable from `p` without memory: the segment towards the Gibbs state.
pub fn qubit_memoryless_classical_interval(p: f64, beta_e: f64) -> Result<(f64, f64)> {
    check_population(p)?;
    let g = ground_population(beta_e)?;
    Ok((p.min(g), p.max(g)))
}

/// Ground populations reachable from `p` by Gibbs-preserving stochastic maps, which may need memory.
pub fn qubit_memory_classical_interval(p: f64, beta_e: f64) -> Result<(f64, f64)> {
    check_population(p)?;
    let g = ground_population(beta_e)?;
    let far = 1.0 - (-beta_e).exp() * p;
    Ok(if p <= g { (p, far) } else { (far, p) })
}

/// Two-level mixing of levels `i` and `j` by the generator [`GeneratorMatrix::partial_swap`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SwapStage {
    pub i: usize,
    pub j: usize,
    /// Time for which the generator runs; [`Duration::Limit`] mixes the two levels fully.
    #[serde(skip)]
    pub duration: Duration,
    /// Mixing weight `λ = 1 − e^{−t}`.
    pub lambda: f64,
}

/// A relabelling followed by partial swaps, all preserving the uniform distribution.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SwapSchedule {
    /// Level `j` is moved to `permutation[j]`.
    pub permutation: Vec<usize>,
    pub stages: Vec<SwapStage>,
}

impl SwapSchedule {
    pub fn dim(&self) -> usize {
        self.permutation.len()
    }

    pub fn generators(&self) -> Result<Vec<(GeneratorMatrix, Duration)>> {
        self.stages
            .iter()
            .map(|s| Ok((GeneratorMatrix::partial_swap(self.dim(), s.i, s.j)?, s.duration)))
            .collect()
    }

    /// Overall stochastic matrix, with limits truncated at `t_trunc`.
    pub fn matrix(&self, t_trunc: f64) -> Result<StochasticMatrix> {
        let perm = StochasticMatrix::from_function(&self.permutation)?;
        if self.stages.is_empty() {
            return Ok(perm);
        }
        propagate_classical(&self.generators()?, t_trunc)?.matrix.compose(&perm)
    }

    pub fn apply(&self, p: &ProbVector) -> Result<ProbVector> {
        self.matrix(DEFAULT_T_TRUNC)?.apply(p)
    }
}

fn argsort_desc(v: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[b].total_cmp(&v[a]).then(a.cmp(&b)));
    idx
}

/// Explicit uniform-preserving path from `p` to `q` when `p ≻ q`.
///
/// `p` is first relabelled to have the same ordering as `q`. Then, in that
/// order, the first level above its target gives to the next level below its
/// target until one of the two gaps closes. Each transfer closes a gap, so at
/// most `d − 1` swaps are used.
pub fn uniform_fixed_point_path(p: &ProbVector, q: &ProbVector) -> Result<SwapSchedule> {
    check_same_dim(p, q)?;
    if !majorises(p, q) {
        return Err(Error::NotAccessible(
            "the source does not majorise the target".into(),
        ));
    }
    let d = p.dim();
    let (op, oq) = (argsort_desc(p.as_slice()), argsort_desc(q.as_slice()));
    let mut permutation = vec![0; d];
    for k in 0..d {
        permutation[op[k]] = oq[k];
    }
    // Work in q's sorted order: x[k] and y[k] live on level oq[k].
    let mut x: Vec<f64> = op.iter().map(|&j| p[j]).collect();
    let y: Vec<f64> = oq.iter().map(|&j| q[j]).collect();
    let gap = 1e-14;
    let mut stages = Vec::new();
    while stages.len() < d {
        let Some(i) = (0..d).find(|&k| x[k] - y[k] > gap) else {
            break;
        };
        let Some(j) = (i + 1..d).find(|&k| y[k] - x[k] > gap) else {
            break;
        };
        let amount = (x[i] - y[i]).min(y[j] - x[j]);
        let lambda = (2.0 * amount / (x[i] - x[j])).min(1.0);
        let duration = if lambda >= 1.0 - 1e-15 {
            Duration::Limit
        } else {
            Duration::Finite(-(-lambda).ln_1p())
        };
        let moved = 0.5 * lambda * (x[i] - x[j]);
        x[i] -= moved;
        x[j] += moved;
        stages.push(SwapStage {
            i: oq[i],
            j: oq[j],
            duration,
            lambda,
        });
    }
    if stages.len() >= d {
        return Err(Error::Numerical("partial-swap path did not terminate".into()));
    }
    Ok(SwapSchedule { permutation, stages })
}
