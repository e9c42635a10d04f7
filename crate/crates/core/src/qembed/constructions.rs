use std::f64::consts::PI;

use nalgebra::{Complex, DMatrix, DVector};

use super::{compose_markovian, MarkovianRealization, Stage};
use crate::embed::{check_embeddable_2x2, EmbedStatus};
use crate::error::{invalid, Error, Result};
use crate::linalg::{embed_block, expm, max_abs_diff_c, DEFAULT_T_TRUNC};
use crate::{CMatrix, Duration, Lindbladian, StochasticMatrix};

/// `H = Σ_n (2πn/d) |ψ_n⟩⟨ψ_n|` with Fourier vectors `ψ_n = d^{-1/2} Σ_k e^{−2πikn/d} |k⟩`
/// (zero-based labels), so that `e^{iHm}` is the cyclic shift `|k⟩ -> |k ⊕ m⟩`.
pub fn permutation_hamiltonian(d: usize) -> Result<CMatrix> {
    if d == 0 {
        return Err(invalid("dimension must be positive"));
    }
    let df = d as f64;
    let mut h = CMatrix::zeros(d, d);
    for n in 0..d {
        let psi = DVector::from_fn(d, |k, _| {
            Complex::from_polar(1.0 / df.sqrt(), -2.0 * PI * (k * n) as f64 / df)
        });
        h += (&psi * psi.adjoint()) * Complex::new(2.0 * PI * n as f64 / df, 0.0);
    }
    Ok((&h + h.adjoint()) * Complex::new(0.5, 0.0))
}

/// `Π_m = Σ_k |k ⊕ m⟩⟨k|`.
pub fn cyclic_shift(d: usize, m: usize) -> CMatrix {
    let mut p = CMatrix::zeros(d, d);
    for k in 0..d {
        p[((k + m) % d, k)] = Complex::new(1.0, 0.0);
    }
    p
}

fn check_permutation(table: &[usize]) -> Result<()> {
    let d = table.len();
    let mut seen = vec![false; d];
    for &t in table {
        if t >= d || seen[t] {
            return Err(invalid("table is not a permutation"));
        }
        seen[t] = true;
    }
    Ok(())
}

/// Hermitian `H` with `e^{iH} |j⟩ = |σ(j)⟩`, built cycle by cycle from the
/// Fourier Hamiltonians of [`permutation_hamiltonian`].
pub fn permutation_stage_hamiltonian(table: &[usize]) -> Result<CMatrix> {
    check_permutation(table)?;
    let d = table.len();
    let mut h = CMatrix::zeros(d, d);
    let mut done = vec![false; d];
    for start in 0..d {
        if done[start] {
            continue;
        }
        let mut cycle = vec![start];
        done[start] = true;
        let mut x = table[start];
        while x != start {
            cycle.push(x);
            done[x] = true;
            x = table[x];
        }
        if cycle.len() > 1 {
            h += embed_block(&permutation_hamiltonian(cycle.len())?, &cycle, d);
        }
    }
    Ok(h)
}

/// Single unitary stage realizing the permutation `j -> table[j]`.
pub fn permutation_realization(table: &[usize]) -> Result<MarkovianRealization> {
    let h = permutation_stage_hamiltonian(table)?;
    // The Lindblad convention evolves with e^{−iHt}; flip the sign to get e^{iH}.
    let stage = Stage::Lindblad {
        generator: Lindbladian::hamiltonian_only(-h)?,
        duration: Duration::Finite(1.0),
    };
    MarkovianRealization::new(
        vec![stage],
        StochasticMatrix::from_function(table)?,
        DEFAULT_T_TRUNC,
    )
}

/// Hermitian `H` with `e^{−iH} = U`, from the principal logarithm of the eigenphases.
fn unitary_log_hamiltonian(u: &CMatrix) -> Result<CMatrix> {
    let d = u.nrows();
    let (q, t) = nalgebra::linalg::Schur::new(u.clone()).unpack();
    let phases = DVector::from_fn(d, |k, _| {
        let z = t[(k, k)];
        Complex::new(-z.im.atan2(z.re), 0.0)
    });
    let h = &q * CMatrix::from_diagonal(&phases) * q.adjoint();
    let h = (&h + h.adjoint()) * Complex::new(0.5, 0.0);
    let back = expm(&(&h * Complex::new(0.0, -1.0)), 1.0)?;
    let err = max_abs_diff_c(&back, u);
    if err > 1e-10 {
        return Err(Error::Numerical(format!("unitary logarithm residual {err:e}")));
    }
    Ok(h)
}

/// Unitary stage realizing the unistochastic matrix `P(i|j) = |U_ij|²`.
pub fn unistochastic_channel(u: &CMatrix) -> Result<MarkovianRealization> {
    if !u.is_square() || u.nrows() == 0 {
        return Err(invalid("unitary must be square and non-empty"));
    }
    let d = u.nrows();
    let defect = max_abs_diff_c(&(u.adjoint() * u), &CMatrix::identity(d, d));
    if defect > 1e-10 {
        return Err(invalid(format!("matrix is not unitary: ‖U†U − I‖ = {defect:e}")));
    }
    let h = unitary_log_hamiltonian(u)?;
    let target = DMatrix::from_fn(d, d, |i, j| u[(i, j)].norm_sqr());
    let stage = Stage::Lindblad {
        generator: Lindbladian::hamiltonian_only(h)?,
        duration: Duration::Finite(1.0),
    };
    MarkovianRealization::new(vec![stage], StochasticMatrix::new(target)?, DEFAULT_T_TRUNC)
}

fn classical_2x2(p: &StochasticMatrix) -> Result<MarkovianRealization> {
    let v = check_embeddable_2x2(p)?;
    if v.status != EmbedStatus::Embeddable {
        return Err(invalid("matrix is not classically embeddable"));
    }
    let stages = v
        .witness
        .expect("embeddable verdicts carry a witness")
        .into_iter()
        .map(|(generator, duration)| Stage::Classical { generator, duration })
        .collect();
    MarkovianRealization::new(stages, p.clone(), DEFAULT_T_TRUNC)
}

/// Any 2×2 stochastic matrix: classical when `det P ≥ 0`, otherwise a swap
/// composed with the classical realization of `P′ = Π P`.
pub fn decompose_2x2(p: &StochasticMatrix) -> Result<MarkovianRealization> {
    if p.dim() != 2 {
        return Err(invalid(format!("expected a 2×2 matrix, got d = {}", p.dim())));
    }
    if p.max_abs_diff(&StochasticMatrix::from_function(&[1, 0])?) == 0.0 {
        return permutation_realization(&[1, 0]);
    }
    let v = check_embeddable_2x2(p)?;
    if v.status == EmbedStatus::Embeddable {
        return classical_2x2(p);
    }
    let swap = StochasticMatrix::from_function(&[1, 0])?;
    let p_prime = swap.compose(p)?;
    compose_markovian(&permutation_realization(&[1, 0])?, &classical_2x2(&p_prime)?)
}

/// One elementary factor `Π (P₂ ⊕ I) Π⁻¹`: `p2` acts on `levels`, relabelled by `perm`.
#[derive(Clone, Debug, PartialEq)]
pub struct PinchFactor {
    pub p2: StochasticMatrix,
    pub levels: (usize, usize),
    /// Permutation `j -> perm[j]`; `None` means identity.
    pub perm: Option<Vec<usize>>,
}

impl PinchFactor {
    /// Levels actually touched after relabelling.
    fn placed_levels(&self, d: usize) -> Result<[usize; 2]> {
        let (i, j) = self.levels;
        if i == j {
            return Err(invalid(format!("factor acts twice on level {i}")));
        }
        if i >= d || j >= d {
            return Err(invalid(format!("levels ({i}, {j}) outside 0..{d}")));
        }
        match &self.perm {
            None => Ok([i, j]),
            Some(p) => {
                if p.len() != d {
                    return Err(invalid("permutation length does not match dimension"));
                }
                check_permutation(p)?;
                Ok([p[i], p[j]])
            }
        }
    }

    /// The full `d × d` elementary stochastic matrix.
    pub fn matrix(&self, d: usize) -> Result<StochasticMatrix> {
        let lv = self.placed_levels(d)?;
        let mut m = DMatrix::<f64>::identity(d, d);
        for (bi, &i) in lv.iter().enumerate() {
            for (bj, &j) in lv.iter().enumerate() {
                m[(i, j)] = self.p2.get(bi, bj);
            }
        }
        StochasticMatrix::new(m)
    }
}

fn lift_stage(stage: &Stage, levels: &[usize], d: usize) -> Result<Stage> {
    Ok(match stage {
        Stage::Classical { generator, duration } => Stage::Classical {
            generator: generator.embed(levels, d)?,
            duration: *duration,
        },
        Stage::Lindblad { generator, duration } => {
            let h = embed_block(generator.hamiltonian(), levels, d);
            let ops = generator
                .cp_part()
                .iter()
                .map(|k| embed_block(k, levels, d))
                .collect();
            Stage::Lindblad {
                generator: Lindbladian::new(h, ops)?,
                duration: *duration,
            }
        }
    })
}

/// Realization of `P_{e_n} ⋯ P_{e_1}`; `factors[0]` acts first.
pub fn pinching_product(factors: &[PinchFactor], d: usize) -> Result<MarkovianRealization> {
    if d < 2 {
        return Err(invalid("pinching products need d ≥ 2"));
    }
    let mut acc = MarkovianRealization::identity(d);
    for (n, f) in factors.iter().enumerate() {
        if f.p2.dim() != 2 {
            return Err(invalid("pinching factors must be 2×2"));
        }
        let levels = f.placed_levels(d)?;
        let small = decompose_2x2(&f.p2)?;
        let stages = small
            .stages
            .iter()
            .map(|s| lift_stage(s, &levels, d))
            .collect::<Result<Vec<_>>>()?;
        let lifted = MarkovianRealization::new(stages, f.matrix(d)?, small.t_trunc)?;
        acc = if n == 0 {
            lifted
        } else {
            compose_markovian(&lifted, &acc)?
        };
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shift_hamiltonian_small_cases() {
        let h = permutation_hamiltonian(2).unwrap();
        let u = expm(&(h * Complex::i()), 1.0).unwrap();
        assert!(max_abs_diff_c(&u, &cyclic_shift(2, 1)) < 1e-10);
        let h = permutation_hamiltonian(3).unwrap();
        assert!(max_abs_diff_c(&expm(&(&h * Complex::i()), 0.0).unwrap(), &CMatrix::identity(3, 3)) == 0.0);
        let u = expm(&(h * Complex::i()), 1.0).unwrap();
        assert!(max_abs_diff_c(&u, &cyclic_shift(3, 1)) < 1e-10);
    }

    #[test]
    fn cycle_hamiltonian_realizes_general_permutation() {
        let table = [3, 0, 4, 1, 2, 5];
        let r = permutation_realization(&table).unwrap();
        assert!(r.achieved_error < 1e-10);
        assert_eq!(r.stages.len(), 1);
    }

    #[test]
    fn unistochastic_qubit_example() {
        let s = (1.0f64 / 3.0).sqrt();
        let t = (2.0f64 / 3.0).sqrt();
        let u = CMatrix::from_row_slice(
            2,
            2,
            &[Complex::new(s, 0.0), Complex::new(t, 0.0), Complex::new(t, 0.0), Complex::new(-s, 0.0)],
        );
        let r = unistochastic_channel(&u).unwrap();
        let want = StochasticMatrix::from_rows(&[vec![1.0 / 3.0, 2.0 / 3.0], vec![2.0 / 3.0, 1.0 / 3.0]]).unwrap();
        assert!(r.target.max_abs_diff(&want) < 1e-15);
        assert!(r.achieved_error < 1e-12);
    }

    #[test]
    fn unistochastic_fourier_and_identity() {
        let f = CMatrix::from_fn(3, 3, |i, j| {
            Complex::from_polar(1.0 / 3f64.sqrt(), 2.0 * PI * (i * j) as f64 / 3.0)
        });
        let r = unistochastic_channel(&f).unwrap();
        let want = StochasticMatrix::circulant3(1.0 / 3.0, 1.0 / 3.0).unwrap();
        assert!(r.target.max_abs_diff(&want) < 1e-15);
        assert!(r.achieved_error < 1e-12);
        let r = unistochastic_channel(&CMatrix::identity(3, 3)).unwrap();
        assert!(r.target.is_identity(0.0));
        let bad = CMatrix::identity(2, 2) * Complex::new(1.1, 0.0);
        assert!(unistochastic_channel(&bad).is_err());
    }

    #[test]
    fn unitary_with_minus_one_eigenvalue() {
        // The swap has eigenvalues ±1; either branch of log(−1) is acceptable.
        let r = unistochastic_channel(&cyclic_shift(2, 1)).unwrap();
        assert!(r.achieved_error < 1e-12);
    }

    #[test]
    fn decompose_negative_determinant() {
        let p = StochasticMatrix::from_rows(&[vec![1.0 / 3.0, 2.0 / 3.0], vec![2.0 / 3.0, 1.0 / 3.0]]).unwrap();
        let r = decompose_2x2(&p).unwrap();
        assert!(r.achieved_error < 1e-9);
        // swap stage, dephasing, classical stage for P′ with columns (2/3, 1/3), (1/3, 2/3)
        assert_eq!(r.stages.len(), 3);
        let swap = decompose_2x2(&StochasticMatrix::from_function(&[1, 0]).unwrap()).unwrap();
        assert_eq!(swap.stages.len(), 1);
        assert!(matches!(swap.stages[0], Stage::Lindblad { .. }));
        let id = decompose_2x2(&StochasticMatrix::identity(2)).unwrap();
        assert!(id.achieved_error == 0.0);
    }

    #[test]
    fn decompose_covers_the_square() {
        for i in 0..=20 {
            for j in 0..=20 {
                let (x, y) = (i as f64 / 20.0, j as f64 / 20.0);
                let p = StochasticMatrix::from_rows(&[vec![1.0 - y, x], vec![y, 1.0 - x]]).unwrap();
                let r = decompose_2x2(&p).unwrap();
                assert!(r.achieved_error < 1e-9, "x = {x}, y = {y}: {:e}", r.achieved_error);
            }
        }
    }

    #[test]
    fn pinching_products() {
        let id = PinchFactor {
            p2: StochasticMatrix::identity(2),
            levels: (0, 1),
            perm: None,
        };
        assert!(pinching_product(&[id], 3).unwrap().extract().unwrap().is_identity(1e-12));

        let swap = PinchFactor {
            p2: StochasticMatrix::from_function(&[1, 0]).unwrap(),
            levels: (1, 2),
            perm: None,
        };
        let r = pinching_product(&[swap], 3).unwrap();
        assert!(r.extract().unwrap().max_abs_diff(&StochasticMatrix::from_function(&[0, 2, 1]).unwrap()) < 1e-10);

        let f1 = PinchFactor {
            p2: StochasticMatrix::from_rows(&[vec![0.2, 0.9], vec![0.8, 0.1]]).unwrap(),
            levels: (0, 1),
            perm: Some(vec![2, 0, 3, 1]),
        };
        let f2 = PinchFactor {
            p2: StochasticMatrix::from_rows(&[vec![0.6, 0.3], vec![0.4, 0.7]]).unwrap(),
            levels: (1, 3),
            perm: None,
        };
        let want = f2.matrix(4).unwrap().compose(&f1.matrix(4).unwrap()).unwrap();
        let r = pinching_product(&[f1, f2], 4).unwrap();
        assert!(r.extract().unwrap().max_abs_diff(&want) < 1e-8);

        let clash = PinchFactor {
            p2: StochasticMatrix::identity(2),
            levels: (1, 1),
            perm: None,
        };
        assert!(pinching_product(&[clash], 3).is_err());
    }
}
