use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{function_stats, FunctionMap};
use crate::error::{invalid, Result};

/// Sample means of the image size and fixed-point count of uniform random functions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TypicalityStats {
    pub d: usize,
    pub trials: usize,
    pub mean_img: f64,
    pub mean_fix: f64,
    /// Large-`d` expectation `d (1 − 1/e)`.
    pub expected_img: f64,
    /// Standard error of `mean_img` from the large-`d` variance `d (1 − 1/e) / e`.
    pub sigma_img: f64,
    pub expected_fix: f64,
    /// Standard error of `mean_fix` from the variance `1 − 1/d`.
    pub sigma_fix: f64,
}

impl TypicalityStats {
    /// Largest deviation from the expectations, in units of the standard errors.
    pub fn max_z(&self) -> f64 {
        let zi = (self.mean_img - self.expected_img).abs() / self.sigma_img;
        let zf = (self.mean_fix - self.expected_fix).abs() / self.sigma_fix;
        zi.max(zf)
    }
}

/// Draws `trials` uniform functions on `0..d`. Trial `k` uses stream `k` of a
/// ChaCha8 generator keyed by `seed`, so results do not depend on thread count.
pub fn typicality_sample(d: usize, trials: usize, seed: u64) -> Result<TypicalityStats> {
    if d < 2 || trials == 0 {
        return Err(invalid("typicality needs d ≥ 2 and at least one trial"));
    }
    let (img, fix) = (0..trials)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            let table = (0..d).map(|_| rng.gen_range(0..d)).collect();
            let s = function_stats(&FunctionMap { table });
            (s.img, s.fix)
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    let (df, n) = (d as f64, trials as f64);
    let e = std::f64::consts::E;
    Ok(TypicalityStats {
        d,
        trials,
        mean_img: img as f64 / n,
        mean_fix: fix as f64 / n,
        expected_img: df * (1.0 - 1.0 / e),
        sigma_img: (df / e * (1.0 - 1.0 / e) / n).sqrt(),
        expected_fix: 1.0,
        sigma_fix: ((1.0 - 1.0 / df) / n).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_close() {
        let a = typicality_sample(200, 400, 3).unwrap();
        let b = typicality_sample(200, 400, 3).unwrap();
        assert_eq!(a, b);
        assert!(a.max_z() < 4.0, "{a:?}");
    }

    #[test]
    fn thread_count_does_not_matter() {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let one = pool.install(|| typicality_sample(50, 100, 11).unwrap());
        assert_eq!(one, typicality_sample(50, 100, 11).unwrap());
    }
}
