//! Dense matrix exponential by scaling and squaring with diagonal Padé approximants.
//!
//! Follows the degree-selection scheme of Higham (2005): the smallest Padé
//! degree in {3, 5, 7, 9, 13} whose backward-error threshold covers the
//! 1-norm is used directly; otherwise the matrix is scaled by `2^-s` so that
//! degree 13 applies and the result is squared `s` times.

use nalgebra::{ComplexField, DMatrix};
use simba::scalar::SupersetOf;

use crate::error::{invalid, Error, Result};

const THETA: [(usize, f64); 4] = [
    (3, 1.495585217958292e-2),
    (5, 2.539398330063230e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068e0),
];
const THETA_13: f64 = 5.371920351148152;

const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const B7: [f64; 8] = [
    17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0,
];
const B9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const B13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

fn norm1<N: ComplexField>(m: &DMatrix<N>) -> f64 {
    let mut best = 0.0f64;
    for col in m.column_iter() {
        let s: f64 = col
            .iter()
            .map(|x| to_f64::<N>(x.clone().modulus()))
            .sum();
        best = best.max(s);
    }
    best
}

fn to_f64<N: ComplexField>(x: N::RealField) -> f64 {
    <N::RealField as SupersetOf<f64>>::to_subset(&x).unwrap_or(f64::NAN)
}

fn scalar<N: ComplexField>(x: f64) -> N {
    N::from_subset(&x)
}

/// `exp(m * t)` for a square real or complex matrix.
pub fn expm<N: ComplexField>(m: &DMatrix<N>, t: N::RealField) -> Result<DMatrix<N>> {
    if !m.is_square() {
        return Err(invalid(format!(
            "matrix exponential needs a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if !t.clone().is_finite() {
        return Err(invalid("non-finite time"));
    }
    if m.iter().any(|x| !x.clone().is_finite()) {
        return Err(invalid("matrix has non-finite entries"));
    }
    let a = m.map(|x| x * N::from_real(t.clone()));
    expm_unscaled(&a)
}

fn expm_unscaled<N: ComplexField>(a: &DMatrix<N>) -> Result<DMatrix<N>> {
    let n = a.nrows();
    let ident = DMatrix::<N>::identity(n, n);
    if n == 0 {
        return Ok(ident);
    }
    let norm = norm1(a);
    if norm == 0.0 {
        return Ok(ident);
    }

    let a2 = a * a;
    for &(deg, theta) in THETA.iter() {
        if norm <= theta {
            let (u, v) = match deg {
                3 => pade_low(a, &a2, &B3),
                5 => pade_low(a, &a2, &B5),
                7 => pade_low(a, &a2, &B7),
                _ => pade_low(a, &a2, &B9),
            };
            return solve_pade(u, v);
        }
    }

    let s = ((norm / THETA_13).log2().ceil()).max(0.0) as i32;
    let (a, a2) = if s > 0 {
        let f: N = scalar(0.5f64.powi(s));
        let a_s = a.map(|x| x * f.clone());
        let a2_s = &a_s * &a_s;
        (a_s, a2_s)
    } else {
        (a.clone(), a2)
    };
    let (u, v) = pade13(&a, &a2);
    let mut r = solve_pade(u, v)?;
    for _ in 0..s {
        r = &r * &r;
    }
    Ok(r)
}

fn pade_low<N: ComplexField>(
    a: &DMatrix<N>,
    a2: &DMatrix<N>,
    b: &[f64],
) -> (DMatrix<N>, DMatrix<N>) {
    let n = a.nrows();
    let mut pow = DMatrix::<N>::identity(n, n);
    let mut u_inner = DMatrix::<N>::zeros(n, n);
    let mut v = DMatrix::<N>::zeros(n, n);
    for k in 0..b.len() / 2 {
        u_inner += &pow * scalar::<N>(b[2 * k + 1]);
        v += &pow * scalar::<N>(b[2 * k]);
        pow = &pow * a2;
    }
    (a * u_inner, v)
}

fn pade13<N: ComplexField>(a: &DMatrix<N>, a2: &DMatrix<N>) -> (DMatrix<N>, DMatrix<N>) {
    let n = a.nrows();
    let b = |i: usize| scalar::<N>(B13[i]);
    let ident = DMatrix::<N>::identity(n, n);
    let a4 = a2 * a2;
    let a6 = &a4 * a2;
    let u_hi = &a6 * b(13) + &a4 * b(11) + a2 * b(9);
    let u_inner = &a6 * u_hi + &a6 * b(7) + &a4 * b(5) + a2 * b(3) + &ident * b(1);
    let u = a * u_inner;
    let v_hi = &a6 * b(12) + &a4 * b(10) + a2 * b(8);
    let v = &a6 * v_hi + &a6 * b(6) + &a4 * b(4) + a2 * b(2) + &ident * b(0);
    (u, v)
}

fn solve_pade<N: ComplexField>(u: DMatrix<N>, v: DMatrix<N>) -> Result<DMatrix<N>> {
    let p = &v + &u;
    let q = v - u;
    q.lu()
        .solve(&p)
        .ok_or_else(|| Error::Numerical("singular Padé denominator".into()))
}
