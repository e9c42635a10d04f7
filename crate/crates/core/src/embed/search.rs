//! Numerical unistochasticity oracle: Riemannian descent on the unitary group.

use nalgebra::{Complex, DMatrix};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::expm;
use crate::{CMatrix, StochasticMatrix};

/// Largest dimension the search accepts.
pub const MAX_SEARCH_DIM: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SearchOptions {
    pub restarts: usize,
    pub max_iters: usize,
    /// Success threshold on `Σ (|U_ij|² − P(i|j))²`.
    pub threshold: f64,
    pub seed: u64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            restarts: 20,
            max_iters: 3000,
            threshold: 1e-10,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct UnitarySearch {
    pub found: bool,
    /// Smallest objective value over all restarts.
    pub residual: f64,
    /// Unitary with `|U_ij|² ≈ P(i|j)`, so that `ρ -> U ρ U†` realises `P`.
    pub witness: Option<CMatrix>,
}

fn haar_unitary(d: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    let g = DMatrix::from_fn(d, d, |_, _| {
        Complex::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
    });
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..d {
        let rj = r[(j, j)];
        let ph = if rj.norm() > 0.0 { rj / rj.norm() } else { Complex::new(1.0, 0.0) };
        let mut col = q.column_mut(j);
        col *= ph;
    }
    q
}

fn objective(u: &CMatrix, b: &DMatrix<f64>) -> f64 {
    u.iter()
        .zip(b.iter())
        .map(|(z, &t)| {
            let e = z.norm_sqr() - t;
            e * e
        })
        .sum()
}

fn descend(mut u: CMatrix, b: &DMatrix<f64>, opts: &SearchOptions) -> Result<(CMatrix, f64)> {
    let mut val = objective(&u, b);
    let mut eta = 0.5;
    let mut stalled = 0;
    for _ in 0..opts.max_iters {
        if val < opts.threshold * 1e-4 {
            break;
        }
        let g = DMatrix::from_fn(u.nrows(), u.ncols(), |i, j| {
            u[(i, j)] * (2.0 * (u[(i, j)].norm_sqr() - b[(i, j)]))
        });
        let s = u.adjoint() * &g;
        let s = &s - s.adjoint();
        let (next, next_val) = loop {
            let cand = &u * expm(&s, -eta)?;
            let v = objective(&cand, b);
            if v < val || eta < 1e-12 {
                break (cand, v);
            }
            eta *= 0.5;
        };
        if next_val >= val {
            break;
        }
        stalled = if val - next_val < 1e-15 * val.max(1e-300) { stalled + 1 } else { 0 };
        u = next;
        val = next_val;
        eta *= 1.5;
        if stalled > 50 {
            break;
        }
    }
    Ok((u, val))
}

/// Searches for a unitary `U` with `|U_ij|² = P(i|j)` from several random starts.
///
/// A negative answer is best effort; the smallest residual found is reported.
pub fn check_unistochastic_search(p: &StochasticMatrix, opts: &SearchOptions) -> Result<UnitarySearch> {
    let d = p.dim();
    if d > MAX_SEARCH_DIM {
        return Err(Error::UnsupportedDimension {
            dim: d,
            reason: format!("unitary search is limited to d ≤ {MAX_SEARCH_DIM}"),
        });
    }
    let b = p.as_matrix();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut best: Option<(CMatrix, f64)> = None;
    for _ in 0..opts.restarts.max(1) {
        let start = haar_unitary(d, &mut rng);
        let (u, val) = descend(start, b, opts)?;
        if best.as_ref().is_none_or(|(_, v)| val < *v) {
            best = Some((u, val));
        }
        if val < opts.threshold {
            break;
        }
    }
    let (u, residual) = best.expect("at least one restart");
    let found = residual < opts.threshold;
    Ok(UnitarySearch {
        found,
        residual,
        witness: found.then_some(u),
    })
}
