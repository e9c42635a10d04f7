use std::f64::consts::PI;

use nalgebra::{Complex, DMatrix};

use super::{EmbedStatus, EmbedVerdict, Reason};
use crate::error::{invalid, Result};
use crate::{Duration, GeneratorMatrix, StochasticMatrix};

const SLACK: f64 = 1e-12;

fn check_simplex(a: f64, b: f64) -> Result<()> {
    if !(a.is_finite() && b.is_finite()) || a < -SLACK || b < -SLACK || a + b > 1.0 + SLACK {
        return Err(invalid(format!("(a, b) = ({a}, {b}) is outside the simplex")));
    }
    Ok(())
}

/// Eigenvalues `c + a ω^k + b ω^{2k}` of the circulant with first row `(c, a, b)`, `ω = e^{2πi/3}`.
pub fn circulant3_eigenvalues(a: f64, b: f64) -> [Complex<f64>; 3] {
    let c = 1.0 - a - b;
    let w = |k: f64| Complex::from_polar(1.0, 2.0 * PI * k / 3.0);
    [0.0, 1.0, 2.0].map(|k| Complex::new(c, 0.0) + w(k) * a + w(2.0 * k) * b)
}

/// Principal phase in `(−π, π]`: the `−π` end of the branch is mapped to `+π`.
fn phase(z: Complex<f64>) -> f64 {
    let t = z.im.atan2(z.re);
    if t <= -PI {
        PI
    } else {
        t
    }
}

/// Exact embeddability of the 3×3 circulant with first row `(1 − a − b, a, b)`.
///
/// Each eigenvalue `r e^{iθ}` must satisfy `r ≤ exp(−θ tan(π/3))`. The witness is the
/// circulant generator whose eigenvalue logarithms are principal.
pub fn check_circulant3(a: f64, b: f64) -> Result<EmbedVerdict> {
    check_simplex(a, b)?;
    let eig = circulant3_eigenvalues(a, b);
    let tan = 3f64.sqrt();
    let mut worst = 0;
    let mut worst_slack = f64::INFINITY;
    let mut stats = (0.0, 0.0, 0.0);
    for (k, z) in eig.iter().enumerate() {
        let (r, theta) = (z.norm(), phase(*z));
        let bound = (-theta * tan).exp();
        let slack = bound - r;
        if slack < worst_slack {
            worst_slack = slack;
            worst = k;
            stats = (r, theta, bound);
        }
    }
    let reason = Reason::CirculantSpectrum {
        worst,
        modulus: stats.0,
        phase: stats.1,
        bound: stats.2,
    };
    if worst_slack < -SLACK {
        return Ok(EmbedVerdict::new(EmbedStatus::NotEmbeddable, reason));
    }

    let (r, theta) = (eig[1].norm(), phase(eig[1]));
    let (alpha, beta, duration) = if r < 1e-14 {
        (1.0, 1.0, Duration::Limit)
    } else {
        let base = -r.ln() / 3.0;
        let twist = theta / tan;
        ((base + twist).max(0.0), (base - twist).max(0.0), Duration::Finite(1.0))
    };
    let l = DMatrix::from_row_slice(
        3,
        3,
        &[
            -alpha - beta,
            alpha,
            beta,
            beta,
            -alpha - beta,
            alpha,
            alpha,
            beta,
            -alpha - beta,
        ],
    );
    Ok(EmbedVerdict {
        status: EmbedStatus::Embeddable,
        witness: Some(vec![(GeneratorMatrix::new(l)?, duration)]),
        reason,
    })
}

/// Link lengths `ℓ_i = √(P(i|0) P(i|1))` built from the first two columns.
pub fn chain_links(p: &StochasticMatrix) -> Vec<f64> {
    (0..p.dim())
        .map(|i| (p.get(i, 0) * p.get(i, 1)).max(0.0).sqrt())
        .collect()
}

/// Chain-links test for a 3×3 circulant: the three links must close into a triangle.
pub fn check_unistochastic_circulant3(a: f64, b: f64) -> Result<bool> {
    check_simplex(a, b)?;
    let p = StochasticMatrix::circulant3(a.max(0.0), b.max(0.0))?;
    let mut l = chain_links(&p);
    l.sort_by(|x, y| x.total_cmp(y));
    Ok(l[2] <= l[0] + l[1] + SLACK)
}
