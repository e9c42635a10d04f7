use serde::Serialize;

use super::qubit::{alberti_uhlmann_channel, extremal_circles, qubit_accessible, qubit_monotones, BlochState, Circle};
use crate::error::{invalid, Result};
use crate::{DensityMatrix, KrausChannel, Lindbladian};

pub const DEFAULT_MAX_STEPS: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// No state on the current extremal circle lies one step further.
    MonotoneViolated,
    /// The state is the fixed point.
    TargetReached,
    MaxSteps,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PathStep {
    pub state: BlochState,
    pub density: DensityMatrix,
    /// Channel `E` whose generator `E − I` produced this step.
    pub channel: KrausChannel,
}

/// States visited by repeatedly evolving with `e^{E − I}` towards a target one step
/// along the current extremal circle.
#[derive(Clone, Debug, PartialEq)]
pub struct PathTrajectory {
    pub zeta: f64,
    pub delta: f64,
    pub start: BlochState,
    pub steps: Vec<PathStep>,
    pub stop_reason: StopReason,
}

impl PathTrajectory {
    /// Start followed by every visited state.
    pub fn states(&self) -> Vec<BlochState> {
        std::iter::once(self.start)
            .chain(self.steps.iter().map(|s| s.state))
            .collect()
    }

    pub fn end(&self) -> BlochState {
        self.steps.last().map_or(self.start, |s| s.state)
    }

    /// The extremal circle through the start that the path follows.
    pub fn reference_circle(&self) -> Result<Circle> {
        let c = extremal_circles(&self.start, self.zeta)?;
        Ok(if self.delta > 0.0 { c.upper } else { c.lower })
    }

    /// Largest `|distance to the reference circle|` over the visited states.
    pub fn max_radial_deviation(&self) -> Result<f64> {
        let circle = self.reference_circle()?;
        Ok(self
            .states()
            .iter()
            .map(|s| circle.radial_offset(s).abs())
            .fold(0.0, f64::max))
    }
}

/// Rotation that takes azimuth `phi` to zero, applied to a state.
fn rotate(s: &BlochState, phi: f64) -> BlochState {
    let (sn, cs) = phi.sin_cos();
    BlochState {
        x: s.x * cs - s.y * sn,
        y: s.x * sn + s.y * cs,
        z: s.z,
    }
}

/// Follows the extremal circle through `rho0` in steps of `|delta|` in z: the upper
/// circle (`R₊` fixed) when `delta > 0`, the lower one when `delta < 0`.
///
/// Each step builds the channel `E` reaching the point one step ahead on the current
/// state's circle and evolves with `e^{E − I}` for unit time, so the state lands
/// slightly inside the circle. The walk ends when no such point exists.
pub fn extremal_path_evolve(rho0: &BlochState, zeta: f64, delta: f64, max_steps: usize) -> Result<PathTrajectory> {
    if !(delta.is_finite() && delta != 0.0) {
        return Err(invalid("step size must be finite and non-zero"));
    }
    extremal_circles(rho0, zeta)?;
    let phi = rho0.y.atan2(rho0.x);
    let mut cur = rotate(rho0, -phi);
    cur.y = 0.0;
    let mut steps = Vec::new();
    let stop_reason = loop {
        if qubit_monotones(&cur, zeta)?.delta <= 1e-12 {
            break StopReason::TargetReached;
        }
        if steps.len() >= max_steps {
            break StopReason::MaxSteps;
        }
        let circles = extremal_circles(&cur, zeta)?;
        let circle = if delta > 0.0 { circles.upper } else { circles.lower };
        let Some(target) = circle.point_at(cur.z + delta) else {
            break StopReason::MonotoneViolated;
        };
        if !qubit_accessible(&cur, &target, zeta)? {
            break StopReason::MonotoneViolated;
        }
        let channel = alberti_uhlmann_channel(&cur, &target, zeta)?;
        let evolution = Lindbladian::from_channel(&channel).superoperator().exp(1.0)?;
        let next = evolution.apply_matrix(&cur.density());
        let mut state = BlochState::from_matrix(&next)?;
        state.y = 0.0;
        cur = state;
        let out = rotate(&state, phi);
        let kraus = rotate_channel(&channel, phi)?;
        steps.push(PathStep {
            state: out,
            density: out.to_density()?,
            channel: kraus,
        });
    };
    Ok(PathTrajectory {
        zeta,
        delta,
        start: *rho0,
        steps,
        stop_reason,
    })
}

/// Conjugates a channel by the z rotation through `phi`.
fn rotate_channel(ch: &KrausChannel, phi: f64) -> Result<KrausChannel> {
    if phi == 0.0 {
        return Ok(ch.clone());
    }
    let mut u = crate::CMatrix::zeros(2, 2);
    u[(0, 0)] = nalgebra::Complex::from_polar(1.0, -phi / 2.0);
    u[(1, 1)] = nalgebra::Complex::from_polar(1.0, phi / 2.0);
    let ops = ch.ops().iter().map(|k| &u * k * u.adjoint()).collect();
    KrausChannel::with_tolerance(ops, 1e-9)
}
