//! Free-energy bookkeeping: Gibbs states, classical and quantum non-equilibrium
//! free energies, and the coherent share of the latter along trajectories.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::access::PathTrajectory;
use crate::embed::detailed_balance_threshold;
use crate::error::{invalid, Error, Result};
use crate::{DensityMatrix, GeneratorMatrix, ProbVector};

/// Energy levels, in the computational basis, and the inverse temperature.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnergySpec {
    pub levels: Vec<f64>,
    pub beta: f64,
}

impl EnergySpec {
    pub fn new(levels: Vec<f64>, beta: f64) -> Result<Self> {
        if levels.is_empty() || levels.iter().any(|e| !e.is_finite()) {
            return Err(invalid("energy levels must be finite and non-empty"));
        }
        if !(beta.is_finite() && beta >= 0.0) {
            return Err(invalid(format!("inverse temperature {beta} must be finite and ≥ 0")));
        }
        Ok(Self { levels, beta })
    }

    /// Qubit at `β = 1` whose Gibbs state has Bloch vector `(0, 0, ζ)`.
    pub fn qubit_for_polarisation(zeta: f64) -> Result<Self> {
        if !(zeta.abs() < 1.0) {
            return Err(Error::DegenerateFixedPoint(format!("ζ = {zeta}")));
        }
        Self::new(vec![0.0, ((1.0 + zeta) / (1.0 - zeta)).ln()], 1.0)
    }

    pub fn dim(&self) -> usize {
        self.levels.len()
    }

    fn positive_beta(&self) -> Result<f64> {
        if self.beta > 0.0 {
            Ok(self.beta)
        } else {
            Err(Error::Undefined("free energy needs β > 0".into()))
        }
    }

    fn check_dim(&self, d: usize) -> Result<()> {
        if d != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: d,
            });
        }
        Ok(())
    }

    /// `ln Z`, computed with the lowest level shifted out.
    pub fn log_partition(&self) -> f64 {
        let e0 = self.levels.iter().copied().fold(f64::INFINITY, f64::min);
        let s: f64 = self.levels.iter().map(|e| (-self.beta * (e - e0)).exp()).sum();
        s.ln() - self.beta * e0
    }
}

pub fn gibbs_state(spec: &EnergySpec) -> ProbVector {
    let e0 = spec.levels.iter().copied().fold(f64::INFINITY, f64::min);
    let w: Vec<f64> = spec.levels.iter().map(|e| (-spec.beta * (e - e0)).exp()).collect();
    let z: f64 = w.iter().sum();
    ProbVector::new(w.into_iter().map(|x| x / z).collect::<Vec<_>>()).expect("normalised weights")
}

/// `−Σ p ln p` in nats, with `0 ln 0 = 0`.
pub fn shannon_entropy(p: &[f64]) -> f64 {
    -p.iter().filter(|&&x| x > 0.0).map(|&x| x * x.ln()).sum::<f64>()
}

pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    shannon_entropy(&rho.eigenvalues())
}

/// `Σ p_i E_i − H(p)/β`.
pub fn free_energy(p: &ProbVector, spec: &EnergySpec) -> Result<f64> {
    let beta = spec.positive_beta()?;
    spec.check_dim(p.dim())?;
    let energy: f64 = p.as_slice().iter().zip(&spec.levels).map(|(a, e)| a * e).sum();
    Ok(energy - shannon_entropy(p.as_slice()) / beta)
}

/// `tr(ρH) − S(ρ)/β` with `H` diagonal in the computational basis.
pub fn quantum_free_energy(rho: &DensityMatrix, spec: &EnergySpec) -> Result<f64> {
    let beta = spec.positive_beta()?;
    spec.check_dim(rho.dim())?;
    let energy: f64 = rho.diagonal().iter().zip(&spec.levels).map(|(a, e)| a * e).sum();
    Ok(energy - von_neumann_entropy(rho) / beta)
}

/// `S(diag ρ) − S(ρ)`, so that `F_Q(ρ) = F(diag ρ) + A(ρ)/β`.
pub fn asymmetry(rho: &DensityMatrix, spec: &EnergySpec) -> Result<f64> {
    spec.positive_beta()?;
    spec.check_dim(rho.dim())?;
    Ok(shannon_entropy(&rho.diagonal()) - von_neumann_entropy(rho))
}

/// Rise of the classical free energy after its minimum that counts as backflow.
pub const BACKFLOW_RISE: f64 = 1e-6;
/// Allowed increase of the quantum free energy between samples.
pub const MONOTONE_SLACK: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FreeEnergyAudit {
    pub times: Vec<f64>,
    pub f_classical: Vec<f64>,
    pub f_quantum: Vec<f64>,
    pub asymmetry: Vec<f64>,
    /// `F_Q` never rises by more than [`MONOTONE_SLACK`].
    pub monotone_ok: bool,
    /// Classical `F` has an interior strict minimum and later rises by more than [`BACKFLOW_RISE`].
    pub backflow_detected: bool,
}

impl FreeEnergyAudit {
    /// Index of the smallest classical free energy.
    pub fn classical_minimum(&self) -> usize {
        self.f_classical
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map_or(0, |(k, _)| k)
    }
}

pub fn audit_trajectory(times: &[f64], states: &[DensityMatrix], spec: &EnergySpec) -> Result<FreeEnergyAudit> {
    if states.len() < 2 || times.len() != states.len() {
        return Err(invalid("audit needs at least two samples with matching times"));
    }
    let mut f_classical = Vec::with_capacity(states.len());
    let mut f_quantum = Vec::with_capacity(states.len());
    let mut asym = Vec::with_capacity(states.len());
    for rho in states {
        let p = ProbVector::new(rho.diagonal())?;
        f_classical.push(free_energy(&p, spec)?);
        f_quantum.push(quantum_free_energy(rho, spec)?);
        asym.push(asymmetry(rho, spec)?);
    }
    let monotone_ok = f_quantum.windows(2).all(|w| w[1] <= w[0] + MONOTONE_SLACK);
    let mut audit = FreeEnergyAudit {
        times: times.to_vec(),
        f_classical,
        f_quantum,
        asymmetry: asym,
        monotone_ok,
        backflow_detected: false,
    };
    let k = audit.classical_minimum();
    let f = &audit.f_classical;
    audit.backflow_detected = k > 0
        && k + 1 < f.len()
        && f[k] < f[k - 1]
        && f[k + 1..].iter().any(|&v| v - f[k] > BACKFLOW_RISE);
    Ok(audit)
}

/// Audit of an extremal path, with the step index as time.
pub fn audit_path(traj: &PathTrajectory, spec: &EnergySpec) -> Result<FreeEnergyAudit> {
    let states = traj
        .states()
        .iter()
        .map(|s| s.to_density())
        .collect::<Result<Vec<_>>>()?;
    let times: Vec<f64> = (0..states.len()).map(|k| k as f64).collect();
    audit_trajectory(&times, &states, spec)
}

/// `R (γ 1ᵀ − I)`: relaxation towards `γ` at rate `R`.
pub fn thermalizing_generator(gamma: &ProbVector, rate: f64) -> Result<GeneratorMatrix> {
    if !(rate.is_finite() && rate >= 0.0) {
        return Err(invalid(format!("rate {rate} must be finite and ≥ 0")));
    }
    let d = gamma.dim();
    let m = DMatrix::from_fn(d, d, |i, j| rate * (gamma[i] - if i == j { 1.0 } else { 0.0 }));
    GeneratorMatrix::new(m)
}

/// Time for which relaxation at rate `R` must run to reach `P(0|1) = p01` in the
/// detailed-balanced qubit at `βE`. Returns infinity at the threshold.
pub fn partial_thermalization_time(p01: f64, beta_e: f64, rate: f64) -> Result<f64> {
    if !(rate.is_finite() && rate > 0.0) {
        return Err(invalid(format!("rate {rate} must be positive")));
    }
    if !(p01.is_finite() && p01 >= 0.0) {
        return Err(invalid(format!("P(0|1) = {p01} must be ≥ 0")));
    }
    let threshold = detailed_balance_threshold(beta_e)?;
    if p01 > threshold + 1e-15 {
        return Err(Error::MemoryRequired { p01, threshold });
    }
    if p01 >= threshold {
        return Ok(f64::INFINITY);
    }
    Ok(-(-p01 / threshold).ln_1p() / rate)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::access::BlochState;
    use std::f64::consts::{E, LN_2};

    #[test]
    fn gibbs_examples() {
        let g = gibbs_state(&EnergySpec::new(vec![0.0, 1.0], 1.0).unwrap());
        assert!((g[0] - E / (1.0 + E)).abs() < 1e-15);
        let g = gibbs_state(&EnergySpec::new(vec![3.0, 1.0, 3.0], 0.0).unwrap());
        assert!(g.max_abs_diff(&ProbVector::uniform(3)) < 1e-15);
        let g = gibbs_state(&EnergySpec::new(vec![0.0, 2.0, 2.0], 0.7).unwrap());
        assert_eq!(g[1], g[2]);
    }

    #[test]
    fn free_energy_examples() {
        let spec = EnergySpec::new(vec![0.0, 1.0], 1.0).unwrap();
        let sharp = ProbVector::new(vec![1.0, 0.0]).unwrap();
        assert_eq!(free_energy(&sharp, &spec).unwrap(), 0.0);
        let fg = free_energy(&gibbs_state(&spec), &spec).unwrap();
        assert!((fg + spec.log_partition()).abs() < 1e-14);
        let hot = EnergySpec::new(vec![0.0, 1.0], 0.0).unwrap();
        assert!(matches!(free_energy(&sharp, &hot), Err(Error::Undefined(_))));
    }

    #[test]
    fn plus_state() {
        let spec = EnergySpec::new(vec![0.0, 1.0], 1.0).unwrap();
        let plus = BlochState::new(1.0, 0.0, 0.0).unwrap().to_density().unwrap();
        assert!((quantum_free_energy(&plus, &spec).unwrap() - 0.5).abs() < 1e-12);
        assert!((asymmetry(&plus, &spec).unwrap() - LN_2).abs() < 1e-12);
    }

    #[test]
    fn thermalization_times() {
        assert_eq!(partial_thermalization_time(0.0, 1.0, 1.0).unwrap(), 0.0);
        let t = partial_thermalization_time(0.5, 1.0, 1.0).unwrap();
        assert!((t + (1.0 - 0.5 * (1.0 + E) / E).ln()).abs() < 1e-12);
        assert!((t - 1.1519).abs() < 1e-4);
        assert!(partial_thermalization_time(E / (1.0 + E), 1.0, 1.0).unwrap().is_infinite());
        assert!(matches!(
            partial_thermalization_time(0.8, 1.0, 1.0),
            Err(Error::MemoryRequired { .. })
        ));
    }

    #[test]
    fn thermalizing_generator_reaches_the_threshold_value() {
        let spec = EnergySpec::new(vec![0.0, 1.0], 1.0).unwrap();
        let g = gibbs_state(&spec);
        let l = thermalizing_generator(&g, 2.0).unwrap();
        let t = partial_thermalization_time(0.4, 1.0, 2.0).unwrap();
        let p = crate::linalg::propagate_classical(&[(l, crate::Duration::Finite(t))], 40.0).unwrap();
        assert!((p.matrix.get(0, 1) - 0.4).abs() < 1e-12);
    }

    #[test]
    fn excited_state_cools_past_the_memoryless_bound() {
        let g = E / (1.0 + E);
        let zeta = 2.0 * g - 1.0;
        let start = BlochState::from_population(0.0).unwrap();
        let t = crate::access::extremal_path_evolve(&start, zeta, 1e-3, 100_000).unwrap();
        let (_, memory_end) = crate::access::qubit_memory_classical_interval(0.0, 1.0).unwrap();
        let reached = t.end().ground_population();
        assert!(reached > g, "{reached}");
        assert!(reached >= 0.99 * memory_end, "{reached} vs {memory_end}");
        let audit = audit_path(&t, &EnergySpec::qubit_for_polarisation(zeta).unwrap()).unwrap();
        assert!(audit.monotone_ok);
    }
}
