use nalgebra::DMatrix;

use super::FunctionMap;
use crate::error::{invalid, Result};
use crate::qembed::{permutation_realization, MarkovianRealization, Stage};
use crate::{Duration, GeneratorMatrix};

/// Splits `f` as `f = f_I ∘ f_π` with `f_π` a bijection and `f_I` idempotent.
///
/// Each image point `y_k` receives one preimage of itself under `f_π`; the
/// remaining preimages are sent to distinct non-image points, which `f_I` then
/// folds back onto `y_k`. Ties are broken by sorting, so the split is deterministic.
pub fn decompose_function(f: &FunctionMap) -> (FunctionMap, FunctionMap) {
    let d = f.dim();
    let mut preimages: Vec<Vec<usize>> = vec![Vec::new(); d];
    for x in 0..d {
        preimages[f.apply(x)].push(x);
    }
    let image: Vec<usize> = (0..d).filter(|&y| !preimages[y].is_empty()).collect();
    let spare: Vec<usize> = (0..d).filter(|&y| preimages[y].is_empty()).collect();

    let mut pi = vec![usize::MAX; d];
    let mut idem: Vec<usize> = (0..d).collect();
    let mut next = spare.iter();
    for &y in &image {
        let xs = &preimages[y];
        pi[xs[0]] = y;
        for &x in &xs[1..] {
            let u = *next.next().expect("as many spare points as surplus preimages");
            pi[x] = u;
            idem[u] = y;
        }
    }
    (
        FunctionMap { table: pi },
        FunctionMap { table: idem },
    )
}

/// Rate-one decay of every point `u` with `f_I(u) ≠ u` onto `f_I(u)`.
///
/// Run for time `t` it implements `f_I` up to an entrywise error of `e^{−t}`.
pub fn reset_generator(idem: &FunctionMap) -> Result<GeneratorMatrix> {
    if !idem.is_idempotent() {
        return Err(invalid("reset generator needs an idempotent function"));
    }
    let d = idem.dim();
    let mut l = DMatrix::zeros(d, d);
    for u in 0..d {
        let v = idem.apply(u);
        if v != u {
            l[(u, u)] = -1.0;
            l[(v, u)] = 1.0;
        }
    }
    GeneratorMatrix::new(l)
}

/// Two-stage realization of `f`: a unitary permutation followed by classical resets.
///
/// Stages that would act trivially are dropped; the identity gets a single
/// zero-length stage. The reset stage is truncated at `t_trunc`.
pub fn quantum_realization_of_function(f: &FunctionMap, t_trunc: f64) -> Result<MarkovianRealization> {
    if !(t_trunc.is_finite() && t_trunc > 0.0) {
        return Err(invalid(format!("truncation time must be positive, got {t_trunc}")));
    }
    if f.is_identity() {
        return Ok(MarkovianRealization::identity(f.dim()));
    }
    let (pi, idem) = decompose_function(f);
    let mut stages = Vec::new();
    if !pi.is_identity() {
        stages.extend(permutation_realization(pi.table())?.stages);
    }
    if !idem.is_identity() {
        stages.push(Stage::Classical {
            generator: reset_generator(&idem)?,
            duration: Duration::Limit,
        });
    }
    MarkovianRealization::new(stages, f.to_stochastic(), t_trunc)
}
